//! Representation identities, the quasi-interpolation operator and the
//! extension evaluator.

use crate::dirichlet::{compute_nj, TraceOperators};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, DomainCurve, Point};
use crate::kernel::SplineParams;
use crate::layerpot::{LayerEvaluator, PotentialValue};
use crate::polyspace::{Poly2, PolyBasis};
use crate::target::TargetFunction;
use crate::volume::volume_potential;

pub use crate::volume::{graded_quadrature, interior_quadrature, InteriorQuadrature};

/// Tolerance of the adaptive angular integration in volume potentials.
const VOLUME_TOL: f64 = 1e-12;

fn volume_part(params: &SplineParams, curve: &DomainCurve, f: &dyn TargetFunction, x: &Point, level: usize) -> f64 {
    let m = params.m();
    volume_potential(params, curve, |a| f.laplacian_power(m, a), x, level, VOLUME_TOL)
}

/// Reconstruction of `f` from `Δ^m f` and all `2m` boundary traces:
/// `∫_Ω Δ^m f φ(x-·) + Σ_j (-1)^j ∫_∂Ω λ_j f λ_{2m-j-1} φ(x-·)`, which is `f`
/// inside and zero outside.
pub struct GreensRepresentation<'a> {
    params: SplineParams,
    f: &'a dyn TargetFunction,
    layers: LayerEvaluator,
    level: usize,
}

impl<'a> GreensRepresentation<'a> {
    pub fn new(params: &SplineParams, f: &'a dyn TargetFunction, grid: &BoundaryGrid, level: usize) -> Result<Self> {
        let m = params.m();
        // The density of V_k is (-1)^j λ_j f with j = 2m-k-1.
        let densities = (0..2 * m)
            .map(|k| {
                let j = 2 * m - k - 1;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                (0..grid.len())
                    .map(|i| sign * f.trace(j, &grid.points[i], &grid.normals[i]))
                    .collect()
            })
            .collect();
        Ok(Self {
            params: *params,
            f,
            layers: LayerEvaluator::new(*params, grid.clone(), densities)?,
            level,
        })
    }

    pub fn eval(&self, x: &Point) -> Result<PotentialValue> {
        let layer = self.layers.eval(0, x, x)?;
        let vol = volume_part(&self.params, &self.layers.grid().curve, self.f, x, self.level);
        Ok(PotentialValue {
            value: vol + layer.value,
            near_boundary: layer.near_boundary,
        })
    }
}

/// The extension `ν_f * φ + p` of `f` to the plane, where `ν_f` combines
/// `Δ^m f` on `Ω` with the trace operators `N_j f` on the boundary.
pub struct Extension<'a> {
    params: SplineParams,
    f: &'a dyn TargetFunction,
    traces: TraceOperators,
    layers: LayerEvaluator,
    polynomial: Poly2,
    level: usize,
}

impl<'a> Extension<'a> {
    pub fn new(params: &SplineParams, f: &'a dyn TargetFunction, grid: &BoundaryGrid, level: usize) -> Result<Self> {
        let traces = compute_nj(params, f, grid)?;
        let layers = LayerEvaluator::new(*params, grid.clone(), traces.values.clone())?;
        let polynomial = traces.solution.polynomial();
        Ok(Self {
            params: *params,
            f,
            traces,
            layers,
            polynomial,
            level,
        })
    }

    pub fn traces(&self) -> &TraceOperators {
        &self.traces
    }

    pub fn polynomial(&self) -> &Poly2 {
        &self.polynomial
    }

    /// `(ν_f * φ)(x)`, the extension without its polynomial part.
    pub fn convolution_part(&self, x: &Point) -> Result<PotentialValue> {
        let layer = self.layers.eval(0, x, x)?;
        let vol = volume_part(&self.params, &self.layers.grid().curve, self.f, x, self.level);
        Ok(PotentialValue {
            value: vol + layer.value,
            near_boundary: layer.near_boundary,
        })
    }

    pub fn eval(&self, x: &Point) -> Result<PotentialValue> {
        let mut v = self.convolution_part(x)?;
        v.value += self.polynomial.eval(x);
        Ok(v)
    }

    /// `max_q |⟨ν_f, q⟩|` over the monomials of `Π_{m-1}`, with
    /// `⟨ν_f, q⟩ = ∫_Ω Δ^m f q + Σ_j ∫_∂Ω N_j f λ_j q`.
    pub fn annihilation_residual(&self, quad: &InteriorQuadrature) -> f64 {
        let m = self.params.m();
        let grid = self.layers.grid();
        let basis = PolyBasis::new(m as u32 - 1);
        let mut worst: f64 = 0.0;
        for &(a, b) in basis.exponents() {
            let q = Poly2::monomial(a, b);
            let vol = quad.integrate(|x| self.f.laplacian_power(m, x) * q.eval(x));
            let mut bdry = 0.0;
            for (j, nj) in self.traces.values.iter().enumerate() {
                for i in 0..grid.len() {
                    bdry += grid.weights[i] * nj[i] * q.boundary_operator(j, &grid.points[i], &grid.normals[i]);
                }
            }
            worst = worst.max((vol + bdry).abs());
        }
        worst
    }
}

pub fn eval_extension(ext: &Extension, x: &Point) -> Result<PotentialValue> {
    ext.eval(x)
}

pub fn annihilation_check(
    params: &SplineParams,
    f: &dyn TargetFunction,
    grid: &BoundaryGrid,
    level: usize,
) -> Result<f64> {
    let ext = Extension::new(params, f, grid, level)?;
    let quad = interior_quadrature(&grid.curve, level)?;
    Ok(ext.annihilation_residual(&quad))
}

/// Discretization parameters of the operator assembly.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeGrids {
    /// Nodes of the Dirichlet solve that produces the trace operators.
    pub dirichlet_nodes: usize,
    /// Minimum number of boundary quadrature nodes.
    pub boundary_nodes: usize,
    /// Boundary quadrature nodes per local center spacing.
    pub boundary_nodes_per_spacing: f64,
    /// Node spacing of the interior quadrature.
    pub interior_spacing: f64,
    /// Polynomial order of the local reproductions; `2m` if unset.
    pub order: Option<u32>,
    pub gamma: f64,
}

impl Default for SchemeGrids {
    fn default() -> Self {
        Self {
            dirichlet_nodes: 256,
            boundary_nodes: 2048,
            boundary_nodes_per_spacing: 2.0,
            interior_spacing: 0.02,
            order: None,
            gamma: crate::lpr::DEFAULT_GAMMA,
        }
    }
}

/// `s(x) = Σ_ξ A_ξ φ(x-ξ) + p(x)`.
#[derive(Clone, Debug)]
pub struct Approximant {
    pub params: SplineParams,
    pub centers: Vec<Point>,
    pub coefficients: Vec<f64>,
    pub polynomial: Poly2,
}

impl Approximant {
    pub fn eval(&self, x: &Point) -> f64 {
        let mut s = self.polynomial.eval(x);
        for (c, a) in self.centers.iter().zip(&self.coefficients) {
            s += a * self.params.phi_from_r2((x - c).norm_squared());
        }
        s
    }

    /// Rows `x,y,coefficient`, then the polynomial as `# poly a,b,coefficient`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,coefficient")?;
        for (c, a) in self.centers.iter().zip(&self.coefficients) {
            writeln!(w, "{},{},{}", c.x, c.y, a)?;
        }
        for ((a, b), c) in self.polynomial.terms() {
            writeln!(w, "# poly {a},{b},{c}")?;
        }
        Ok(())
    }
}

pub fn eval_approximant(s: &Approximant, x: &Point) -> f64 {
    s.eval(x)
}

/// Diagnostics of one assembly.
#[derive(Clone, Debug, Default)]
pub struct AssemblyStats {
    pub interior_nodes: usize,
    pub boundary_nodes: usize,
    pub max_interior_stability: f64,
    pub max_boundary_stability: Vec<f64>,
}

/// Assembles `T_Ξ f`: coefficients
/// `A_ξ = Σ_q w_q a(α_q, ξ) Δ^m f(α_q) + Σ_j Σ_i w_i a_j(x_i, ξ) N_j f(x_i)`
/// and the polynomial part of the Dirichlet solve.
///
/// With `oversample = Some(ν)` the boundary kernels use the local spacing
/// `h^ν`, where `h` is the fill distance recorded on `centers`.
pub fn assemble_txi(
    params: &SplineParams,
    f: &dyn TargetFunction,
    curve: &DomainCurve,
    centers: &crate::geometry::CenterSet,
    grids: &SchemeGrids,
    oversample: Option<f64>,
) -> Result<(Approximant, AssemblyStats)> {
    use crate::lpr::Reproducer;
    use crate::quadrature::trig_resample;

    let m = params.m();
    let h = centers.fill_distance;
    let h_local = match oversample {
        Some(nu) => h.powf(nu),
        None => h,
    };
    let order = grids.order.unwrap_or(2 * m as u32);
    let rep = Reproducer::new(centers.points.clone(), Some(*curve))?.with_gamma(grids.gamma);
    let mut coeffs = vec![0.0; centers.len()];
    let mut stats = AssemblyStats::default();

    let quad = graded_quadrature(curve, grids.interior_spacing)?;
    stats.interior_nodes = quad.len();
    for (alpha, w) in quad.nodes.iter().zip(&quad.weights) {
        let v = w * f.laplacian_power(m, alpha);
        let lpr = rep.interior(alpha, h, order)?;
        stats.max_interior_stability = stats.max_interior_stability.max(lpr.stability);
        for (&i, c) in lpr.support.iter().zip(&lpr.coefficients) {
            coeffs[i] += c * v;
        }
    }

    let traces = compute_nj(params, f, &BoundaryGrid::new(*curve, grids.dirichlet_nodes))?;
    let wanted = (grids.boundary_nodes_per_spacing * curve.arclength() / h_local).ceil() as usize;
    let nb = grids.boundary_nodes.max(wanted).next_multiple_of(2);
    let bgrid = BoundaryGrid::new(*curve, nb);
    stats.boundary_nodes = nb;
    for (j, nj) in traces.values.iter().enumerate() {
        let fine = trig_resample(nj, nb);
        let mut worst: f64 = 0.0;
        for i in 0..nb {
            let lpr = rep.boundary(j, &bgrid.points[i], &bgrid.normals[i], h_local, order)?;
            worst = worst.max(lpr.stability);
            let v = bgrid.weights[i] * fine[i];
            for (&k, c) in lpr.support.iter().zip(&lpr.coefficients) {
                coeffs[k] += c * v;
            }
        }
        stats.max_boundary_stability.push(worst);
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Quadrature("non-finite coefficient".into()));
    }
    Ok((
        Approximant {
            params: *params,
            centers: centers.points.clone(),
            coefficients: coeffs,
            polynomial: traces.solution.polynomial(),
        },
        stats,
    ))
}
