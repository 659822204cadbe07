//! The polyharmonic fundamental solution and its boundary-operator derivatives.
//!
//! Boundary operators alternate between powers of the Laplacian and normal
//! derivatives of them: index `2i` is `Δ^i`, index `2i+1` is `n·∇Δ^i`.
//! Everything is built from closed-form radial recursions on terms of the form
//! `a r^p ln r + b r^p`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Default radius below which a kernel argument counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Order and dimension of the polyharmonic kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplineParams {
    m: usize,
    d: usize,
    constant: f64,
    length_scale: f64,
}

impl SplineParams {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        if d == 0 || m < 1 || 2 * m <= d {
            return Err(Error::InvalidParams(format!(
                "need 2m > d, got m = {m}, d = {d}"
            )));
        }
        Ok(Self {
            m,
            d,
            constant: fundamental_constant(m, d),
            length_scale: 1.0,
        })
    }

    /// Planar kernel of order `m`.
    pub fn planar(m: usize) -> Result<Self> {
        Self::new(m, 2)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Normalization making `Δ^m φ = δ`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Same kernel with a different normalization constant. Used to check
    /// that downstream identities are sensitive to the constant.
    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    /// Sets the domain length scale used by the singularity tolerance.
    pub fn with_length_scale(mut self, diam: f64) -> Self {
        self.length_scale = diam;
        self
    }

    /// Number of boundary conditions, `m`, and the number of boundary
    /// operators, `2m`.
    pub fn n_operators(&self) -> usize {
        2 * self.m
    }

    fn singular_radius(&self) -> f64 {
        SINGULAR_TOL * self.length_scale
    }

    /// `φ` as a function of squared distance, continuously extended by 0 at
    /// the origin. Planar fast path for bulk evaluation.
    #[inline]
    pub fn phi_from_r2(&self, r2: f64) -> f64 {
        debug_assert_eq!(self.d, 2);
        if r2 == 0.0 {
            return 0.0;
        }
        self.constant * 0.5 * r2.powi(self.m as i32 - 1) * r2.ln()
    }
}

/// Evaluation result flagged when the argument lies inside the singular radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub is_singular_point: bool,
}

/// One radial term `log_coef · r^p ln r + pow_coef · r^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialTerm {
    pub log_coef: f64,
    pub pow_coef: f64,
    pub power: i32,
}

impl RadialTerm {
    pub fn eval(&self, r: f64, ln_r: f64) -> f64 {
        r.powi(self.power) * (self.log_coef * ln_r + self.pow_coef)
    }

    pub fn laplacian(&self, d: usize) -> Self {
        let p = self.power as f64;
        let d = d as f64;
        let c = p * (p + d - 2.0);
        Self {
            log_coef: self.log_coef * c,
            pow_coef: self.log_coef * (2.0 * p + d - 2.0) + self.pow_coef * c,
            power: self.power - 2,
        }
    }

    pub fn derivative(&self) -> Self {
        let p = self.power as f64;
        Self {
            log_coef: self.log_coef * p,
            pow_coef: self.log_coef + self.pow_coef * p,
            power: self.power - 1,
        }
    }

    fn over_r(&self) -> Self {
        Self {
            power: self.power - 1,
            ..*self
        }
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            log_coef: self.log_coef * s,
            pow_coef: self.pow_coef * s,
            power: self.power,
        }
    }

    fn minus(&self, other: &Self) -> Self {
        assert_eq!(self.power, other.power);
        Self {
            log_coef: self.log_coef - other.log_coef,
            pow_coef: self.pow_coef - other.pow_coef,
            power: self.power,
        }
    }
}

/// `Δ^s φ` as a radial term.
pub fn iterated_laplacian(params: &SplineParams, s: usize) -> RadialTerm {
    let mut t = base_term(params.m, params.d).scaled(params.constant);
    for _ in 0..s {
        t = t.laplacian(params.d);
    }
    t
}

fn base_term(m: usize, d: usize) -> RadialTerm {
    let even = d % 2 == 0;
    RadialTerm {
        log_coef: if even { 1.0 } else { 0.0 },
        pow_coef: if even { 0.0 } else { 1.0 },
        power: 2 * m as i32 - d as i32,
    }
}

fn gamma_half_integer(twice: usize) -> f64 {
    // Γ(twice / 2) by downward recursion to Γ(1) or Γ(1/2).
    let mut x = twice as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.0 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 0.5).abs() < 1e-12 {
        acc * PI.sqrt()
    } else {
        acc
    }
}

/// Constant `C` such that `Δ^m (C r^{2m-d} [ln r]) = δ`.
///
/// Applies `Δ^{m-1}` to the unnormalized kernel and matches the result to the
/// fundamental solution of the Laplacian.
pub fn fundamental_constant(m: usize, d: usize) -> f64 {
    let mut t = base_term(m, d);
    for _ in 0..m - 1 {
        t = t.laplacian(d);
    }
    debug_assert_eq!(t.power, 2 - d as i32);
    if d == 2 {
        // Δ ln r = 2π δ.
        1.0 / (2.0 * PI * t.log_coef)
    } else {
        debug_assert!(t.log_coef.abs() < 1e-12);
        // Δ r^{2-d} = -(d-2) |S^{d-1}| δ.
        let sphere = 2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d);
        -1.0 / ((d as f64 - 2.0) * sphere * t.pow_coef)
    }
}

/// Direction factor multiplying a radial term. `w = x - α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Unit,
    /// `n_x · w`
    Target,
    /// `n_α · w`
    Source,
    /// `(n_x · w)(n_α · w)`
    Both,
    /// `n_x · n_α`
    Normals,
}

impl Direction {
    fn weight(self) -> i32 {
        match self {
            Direction::Unit | Direction::Normals => 0,
            Direction::Target | Direction::Source => 1,
            Direction::Both => 2,
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Kernel `Λ_{k,x} λ_{j,α} φ(x - α)` in closed form.
///
/// The normals enter only as fixed directions, so the same kernel also gives
/// directional derivatives at points off the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct PairKernel {
    k: usize,
    j: usize,
    terms: Vec<(Direction, RadialTerm)>,
    singular_radius: f64,
}

impl PairKernel {
    /// Any pair of operator indices below `2m`; no integrability restriction.
    pub fn new(params: &SplineParams, k: usize, j: usize) -> Result<Self> {
        let n_ops = params.n_operators();
        if k >= n_ops || j >= n_ops {
            return Err(Error::Domain(format!(
                "operator indices ({k}, {j}) must be below {n_ops}"
            )));
        }
        let f = iterated_laplacian(params, k / 2 + j / 2);
        let df_over_r = f.derivative().over_r();
        let terms = match (k % 2, j % 2) {
            (0, 0) => vec![(Direction::Unit, f)],
            (1, 0) => vec![(Direction::Target, df_over_r)],
            (0, 1) => vec![(Direction::Source, df_over_r.scaled(-1.0))],
            _ => {
                let second = f.derivative().derivative();
                let radial = second.minus(&df_over_r).over_r().over_r();
                vec![
                    (Direction::Normals, df_over_r.scaled(-1.0)),
                    (Direction::Both, radial.scaled(-1.0)),
                ]
            }
        };
        Ok(Self {
            k,
            j,
            terms,
            singular_radius: params.singular_radius(),
        })
    }

    pub fn indices(&self) -> (usize, usize) {
        (self.k, self.j)
    }

    fn direction_value(dir: Direction, w: &[f64], nx: &[f64], na: &[f64]) -> f64 {
        match dir {
            Direction::Unit => 1.0,
            Direction::Target => dot(nx, w),
            Direction::Source => dot(na, w),
            Direction::Both => dot(nx, w) * dot(na, w),
            Direction::Normals => dot(nx, na),
        }
    }

    /// Value at `w = x - α`. No singularity check.
    #[inline]
    pub fn eval_unchecked(&self, w: &[f64], nx: &[f64], na: &[f64]) -> f64 {
        let r2 = dot(w, w);
        let r = r2.sqrt();
        let ln_r = 0.5 * r2.ln();
        self.terms
            .iter()
            .map(|(dir, t)| Self::direction_value(*dir, w, nx, na) * t.eval(r, ln_r))
            .sum()
    }

    pub fn eval(&self, w: &[f64], nx: &[f64], na: &[f64]) -> Result<f64> {
        let r = dot(w, w).sqrt();
        if r < self.singular_radius {
            return Err(Error::Singular(r));
        }
        Ok(self.eval_unchecked(w, nx, na))
    }

    /// Splits the kernel as `log_part · ln r + regular_part`. Both parts are
    /// smooth along a smooth curve.
    pub fn split(&self, w: &[f64], nx: &[f64], na: &[f64]) -> (f64, f64) {
        let r2 = dot(w, w);
        let r = r2.sqrt();
        let mut log_part = 0.0;
        let mut regular = 0.0;
        for (dir, t) in &self.terms {
            let g = Self::direction_value(*dir, w, nx, na) * r.powi(t.power);
            log_part += g * t.log_coef;
            regular += g * t.pow_coef;
        }
        (log_part, regular)
    }

    /// Limits of the two split parts as `α → x` along a smooth curve with the
    /// common normal `n` at the collision point.
    ///
    /// Direction factors `n·w` vanish quadratically there, so only
    /// `r^0` terms without a `w` factor survive.
    pub fn split_diagonal(&self) -> Result<(f64, f64)> {
        let mut log_part = 0.0;
        let mut regular = 0.0;
        for (dir, t) in &self.terms {
            if dir.weight() > 0 {
                // n·w = O(r^2) along the curve.
                if t.power + 2 * dir.weight() <= 0 {
                    return Err(self.diag_error());
                }
                continue;
            }
            match t.power {
                p if p > 0 => {}
                0 => {
                    log_part += t.log_coef;
                    regular += t.pow_coef;
                }
                _ => return Err(self.diag_error()),
            }
        }
        Ok((log_part, regular))
    }

    fn diag_error(&self) -> Error {
        Error::Domain(format!(
            "kernel ({}, {}) is not weakly singular",
            self.k, self.j
        ))
    }
}

/// `φ(x)`.
pub fn phi(params: &SplineParams, x: &[f64]) -> Result<f64> {
    let v = phi_value(params, x);
    if v.is_singular_point {
        Err(Error::Singular(dot(x, x).sqrt()))
    } else {
        Ok(v.value)
    }
}

/// `φ(x)` with a singularity flag instead of an error.
pub fn phi_value(params: &SplineParams, x: &[f64]) -> KernelValue {
    let r = dot(x, x).sqrt();
    if r < params.singular_radius() {
        return KernelValue {
            value: f64::NAN,
            is_singular_point: true,
        };
    }
    let t = iterated_laplacian(params, 0);
    KernelValue {
        value: t.eval(r, r.ln()),
        is_singular_point: false,
    }
}

/// `λ_{j,α} φ(x - α)`: the boundary operator acts on the second argument.
pub fn lambda_phi(
    params: &SplineParams,
    j: usize,
    x: &[f64],
    alpha: &[f64],
    n_alpha: &[f64],
) -> Result<f64> {
    let kern = PairKernel::new(params, 0, j)?;
    let w: Vec<f64> = x.iter().zip(alpha).map(|(a, b)| a - b).collect();
    kern.eval(&w, n_alpha, n_alpha)
}

/// `Λ_{k,x} λ_{j,α} φ(x - α)` in the weakly singular range `k + j ≤ 2m - 2`.
pub fn lambda_lambda_phi(
    params: &SplineParams,
    k: usize,
    j: usize,
    x: &[f64],
    n_x: &[f64],
    alpha: &[f64],
    n_alpha: &[f64],
) -> Result<f64> {
    if k + j + 2 > 2 * params.m {
        return Err(Error::Domain(format!(
            "k + j = {} exceeds 2m - 2 = {}",
            k + j,
            2 * params.m - 2
        )));
    }
    let kern = PairKernel::new(params, k, j)?;
    let w: Vec<f64> = x.iter().zip(alpha).map(|(a, b)| a - b).collect();
    kern.eval(&w, n_x, n_alpha)
}
