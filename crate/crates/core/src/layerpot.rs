//! Layer potentials, their Nyström matrices and one-sided boundary limits.

use crate::error::{Error, Result};
use crate::geometry::{signed_distance, BoundaryGrid, Point};
use crate::kernel::{PairKernel, SplineParams};
use crate::quadrature::{extrapolate_to_zero, periodic_log_weights, trig_resample};
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Dense Nyström matrix of `λ_k V_j` on a boundary grid.
#[derive(Clone, Debug)]
pub struct NystromMatrix {
    pub k: usize,
    pub j: usize,
    pub matrix: DMatrix<f64>,
    pub scheme: &'static str,
}

/// Nyström matrix of `λ_k V_j` for `k + j ≤ 2m - 2`.
///
/// The kernel is split as `L ln r + G`; the logarithmic part is integrated by
/// the periodic log rule and the rest by the trapezoid rule.
pub fn assemble_vkj(
    params: &SplineParams,
    k: usize,
    j: usize,
    grid: &BoundaryGrid,
) -> Result<NystromMatrix> {
    if k + j + 2 > 2 * params.m() {
        return Err(Error::Domain(format!(
            "λ_{k} V_{j} is not weakly singular; use one-sided traces"
        )));
    }
    let kern = PairKernel::new(params, k, j)?;
    let n = grid.len();
    let log_w = periodic_log_weights(n);
    let (diag_log, diag_reg) = kern.split_diagonal()?;
    let scale = n as f64 / (2.0 * PI);
    let mut matrix = DMatrix::zeros(n, n);
    for i in 0..n {
        let x = grid.points[i];
        let nx = grid.normals[i];
        for l in 0..n {
            let offset = (i as isize - l as isize).rem_euclid(n as isize) as usize;
            let (half_log, smooth) = if i == l {
                let half_log = 0.5 * diag_log;
                (half_log, half_log * (grid.speeds[i] * grid.speeds[i]).ln() + diag_reg)
            } else {
                let a = grid.points[l];
                let w = x - a;
                let (lg, reg) = kern.split(w.as_slice(), nx.as_slice(), grid.normals[l].as_slice());
                let half_log = 0.5 * lg;
                let sin_half = (0.5 * (grid.t[i] - grid.t[l])).sin();
                let ratio = w.norm_squared() / (4.0 * sin_half * sin_half);
                (half_log, half_log * ratio.ln() + reg)
            };
            matrix[(i, l)] = grid.weights[l] * (scale * log_w[offset] * half_log + smooth);
        }
    }
    Ok(NystromMatrix {
        k,
        j,
        matrix,
        scheme: "periodic-log",
    })
}

/// Value of a layer potential with a flag for evaluation points too close to
/// the boundary for the base grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub near_boundary: bool,
}

/// Which side of the boundary a limit is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

/// Extrapolated boundary values with a per-node error estimate.
#[derive(Clone, Debug)]
pub struct OneSidedTrace {
    pub values: Vec<f64>,
    pub error_estimate: Vec<f64>,
}

impl OneSidedTrace {
    pub fn max_error(&self) -> f64 {
        self.error_estimate.iter().cloned().fold(0.0, f64::max)
    }
}

struct FineGrid {
    points: Vec<Point>,
    normals: Vec<Point>,
    /// Quadrature weight times density, per density index.
    weighted: Vec<Vec<f64>>,
}

const MAX_REFINE_LEVEL: usize = 9;
/// Evaluation points must be at least this many fine node spacings away.
const SPACINGS_PER_DISTANCE: f64 = 5.0;
/// Extrapolation disagreement below this is roundoff, whatever the density scale.
const EXTRAPOLATION_FLOOR: f64 = 1e-9;

/// Evaluates `Λ_k Σ_j V_j g_j` anywhere off the boundary.
///
/// Near the boundary the densities are interpolated to a finer grid so that the
/// trapezoid rule keeps its exponential accuracy.
pub struct LayerEvaluator {
    params: SplineParams,
    grid: BoundaryGrid,
    densities: Vec<Vec<f64>>,
    kernels: Vec<Vec<PairKernel>>,
    fine: Vec<OnceLock<FineGrid>>,
}

impl LayerEvaluator {
    /// `densities[j]` is `g_j` at the grid nodes for `j < 2m`; missing trailing
    /// densities are zero.
    pub fn new(params: SplineParams, grid: BoundaryGrid, densities: Vec<Vec<f64>>) -> Result<Self> {
        let m = params.m();
        if densities.len() > 2 * m {
            return Err(Error::Domain(format!(
                "{} densities given, at most {} allowed",
                densities.len(),
                2 * m
            )));
        }
        for g in &densities {
            if g.len() != grid.len() {
                return Err(Error::InvalidParams("density length differs from grid size".into()));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams("density has non-finite values".into()));
            }
        }
        let kernels = (0..2 * m)
            .map(|k| {
                (0..densities.len())
                    .map(|j| PairKernel::new(&params, k, j))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            grid,
            densities,
            kernels,
            fine: (0..=MAX_REFINE_LEVEL).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn grid(&self) -> &BoundaryGrid {
        &self.grid
    }

    pub fn params(&self) -> &SplineParams {
        &self.params
    }

    pub fn densities(&self) -> &[Vec<f64>] {
        &self.densities
    }

    fn fine_grid(&self, level: usize) -> &FineGrid {
        self.fine[level].get_or_init(|| {
            let n = self.grid.len() << level;
            let curve = self.grid.curve;
            let t: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
            let weights: Vec<f64> = t.iter().map(|&s| 2.0 * PI * curve.speed(s) / n as f64).collect();
            let weighted = self
                .densities
                .iter()
                .map(|g| {
                    let fine = if level == 0 { g.clone() } else { trig_resample(g, n) };
                    fine.iter().zip(&weights).map(|(a, b)| a * b).collect()
                })
                .collect();
            FineGrid {
                points: t.iter().map(|&s| curve.gamma(s)).collect(),
                normals: t.iter().map(|&s| curve.normal(s)).collect(),
                weighted,
            }
        })
    }

    /// Distance to the boundary, exact near it and bounded below elsewhere.
    fn boundary_distance(&self, x: &Point) -> f64 {
        let node = self.grid.nearest_node_distance(x);
        if node > SPACINGS_PER_DISTANCE * self.grid.max_spacing() {
            return node;
        }
        match signed_distance(&self.grid.curve, x) {
            Ok(p) => p.rho.abs(),
            Err(_) => 0.0,
        }
    }

    fn level_for(&self, dist: f64) -> usize {
        let h = self.grid.max_spacing();
        let mut level = 0;
        while level < MAX_REFINE_LEVEL && SPACINGS_PER_DISTANCE * h / (1u64 << level) as f64 > dist {
            level += 1;
        }
        level
    }

    fn sum_on(&self, level: usize, k: usize, x: &Point, direction: &Point) -> f64 {
        let fine = self.fine_grid(level);
        let mut total = 0.0;
        for (j, kern) in self.kernels[k].iter().enumerate() {
            let wg = &fine.weighted[j];
            let mut s = 0.0;
            for l in 0..fine.points.len() {
                if wg[l] == 0.0 {
                    continue;
                }
                let w = x - fine.points[l];
                s += wg[l] * kern.eval_unchecked(w.as_slice(), direction.as_slice(), fine.normals[l].as_slice());
            }
            total += s;
        }
        total
    }

    /// `Λ_k Σ_j V_j g_j (x)`; odd `k` differentiates along `direction`.
    pub fn eval(&self, k: usize, x: &Point, direction: &Point) -> Result<PotentialValue> {
        if k >= 2 * self.params.m() {
            return Err(Error::Domain(format!("operator index {k} out of range")));
        }
        let dist = self.boundary_distance(x);
        let level = self.level_for(dist);
        Ok(PotentialValue {
            value: self.sum_on(level, k, x, direction),
            near_boundary: dist < 2.0 * self.grid.max_spacing(),
        })
    }

    /// `Σ_j V_j g_j (x)`.
    pub fn value(&self, x: &Point) -> f64 {
        let dist = self.boundary_distance(x);
        self.sum_on(self.level_for(dist), 0, x, x)
    }

    /// Limit of `Λ_k Σ_j V_j g_j` at every node from one side, by polynomial
    /// extrapolation along the normal over offsets `5 s 2^{-r}`, `r = 0..4`.
    pub fn one_sided_trace(&self, k: usize, side: Side) -> Result<OneSidedTrace> {
        let n = self.grid.len();
        let rungs = 5;
        let delta0 = 5.0 * self.grid.max_spacing();
        let deltas: Vec<f64> = (0..rungs).map(|r| delta0 / (1u64 << r) as f64).collect();
        let sign = match side {
            Side::Inside => -1.0,
            Side::Outside => 1.0,
        };
        let mut values = Vec::with_capacity(n);
        let mut errors = Vec::with_capacity(n);
        for i in 0..n {
            let x = self.grid.points[i];
            let nrm = self.grid.normals[i];
            let samples: Vec<f64> = deltas
                .iter()
                .map(|d| {
                    let y = x + nrm * (sign * d);
                    self.sum_on(self.level_for(*d), k, &y, &nrm)
                })
                .collect();
            let full = extrapolate_to_zero(&deltas, &samples);
            let reduced = extrapolate_to_zero(&deltas[1..], &samples[1..]);
            values.push(full);
            errors.push((full - reduced).abs());
        }
        let scale = values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
            .max(self.densities.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max));
        let worst = errors.iter().cloned().fold(0.0, f64::max);
        if !worst.is_finite() || worst > (1e-2 * scale).max(EXTRAPOLATION_FLOOR) {
            return Err(Error::ExtrapolationDivergence(worst));
        }
        Ok(OneSidedTrace {
            values,
            error_estimate: errors,
        })
    }
}

/// `V_j g (x)` for a single density.
#[allow(non_snake_case)]
pub fn eval_V(
    params: &SplineParams,
    j: usize,
    density: &[f64],
    grid: &BoundaryGrid,
    x: &Point,
) -> Result<PotentialValue> {
    let ev = LayerEvaluator::new(*params, grid.clone(), single(params, j, density)?)?;
    ev.eval(0, x, x)
}

fn single(params: &SplineParams, j: usize, density: &[f64]) -> Result<Vec<Vec<f64>>> {
    if j >= params.n_operators() {
        return Err(Error::Domain(format!("density index {j} must be below 2m")));
    }
    let mut d = vec![vec![0.0; density.len()]; j + 1];
    d[j] = density.to_vec();
    Ok(d)
}

pub fn one_sided_trace(
    params: &SplineParams,
    k: usize,
    densities: &[Vec<f64>],
    side: Side,
    grid: &BoundaryGrid,
) -> Result<OneSidedTrace> {
    LayerEvaluator::new(*params, grid.clone(), densities.to_vec())?.one_sided_trace(k, side)
}

/// Inside minus outside limit of `Λ_{2m-j-1} V_j g` at the nodes.
pub fn jump(params: &SplineParams, j: usize, density: &[f64], grid: &BoundaryGrid) -> Result<Vec<f64>> {
    let k = 2 * params.m() - j - 1;
    let ev = LayerEvaluator::new(*params, grid.clone(), single(params, j, density)?)?;
    let inside = ev.one_sided_trace(k, Side::Inside)?;
    let outside = ev.one_sided_trace(k, Side::Outside)?;
    Ok(inside
        .values
        .iter()
        .zip(&outside.values)
        .map(|(a, b)| a - b)
        .collect())
}

/// Largest nodal deviation of the jump from its exact value `(-1)^{j+1} g`,
/// relative to `max |g|`.
pub fn jump_check(params: &SplineParams, j: usize, density: &[f64], grid: &BoundaryGrid) -> Result<f64> {
    jump_deviation(params, j, density, grid, if j % 2 == 0 { -1.0 } else { 1.0 })
}

/// Largest nodal deviation of the jump from `sign · g`, relative to `max |g|`.
pub fn jump_deviation(
    params: &SplineParams,
    j: usize,
    density: &[f64],
    grid: &BoundaryGrid,
    sign: f64,
) -> Result<f64> {
    let jmp = jump(params, j, density, grid)?;
    let gmax = density.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let dev = jmp
        .iter()
        .zip(density)
        .map(|(d, g)| (d - sign * g).abs())
        .fold(0.0, f64::max);
    Ok(if gmax > 0.0 { dev / gmax } else { dev })
}
