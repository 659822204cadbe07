//! Local polynomial reproduction: coefficients `a(α, ξ)` supported near an
//! anchor that reproduce point values or boundary operators of polynomials.

use crate::error::{Error, Result};
use crate::geometry::{build_tree, signed_distance, DomainCurve, Point};
use crate::polyspace::{eval_poly_lambda, PolyBasis};
use kiddo::{KdTree, SquaredEuclidean};
use nalgebra::{DMatrix, DVector};

/// Default multiple of `M² h` used as the initial support radius.
pub const DEFAULT_GAMMA: f64 = 0.1;
/// Radius growth factor when the local system is deficient.
pub const RADIUS_GROWTH: f64 = 1.25;
/// Default ceiling on `Σ|a| h^j` before the radius is grown.
pub const DEFAULT_STABILITY_BUDGET: f64 = 25.0;
/// Required exactness of the reproduction in scaled coordinates.
pub const EXACTNESS_TOL: f64 = 1e-10;

/// Coefficients of one local reproduction.
#[derive(Clone, Debug)]
pub struct LocalReproduction {
    pub anchor: Point,
    /// Indices into the center set.
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub order: u32,
    /// Support radius about `ball_center`.
    pub radius: f64,
    pub ball_center: Point,
    /// `Σ|a|`.
    pub stability: f64,
    /// Worst constraint violation in coordinates scaled by the radius.
    pub exactness: f64,
}

/// Builds reproductions on a fixed center set.
pub struct Reproducer {
    points: Vec<Point>,
    tree: KdTree<f64, 2>,
    curve: Option<DomainCurve>,
    pub gamma: f64,
    pub stability_budget: f64,
    max_radius: f64,
}

impl Reproducer {
    /// Without a curve, interior balls are centred at the anchor.
    pub fn new(points: Vec<Point>, curve: Option<DomainCurve>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCenters);
        }
        let max_radius = match &curve {
            Some(c) => c.diameter(),
            None => {
                let (lo, hi) = points.iter().fold(
                    (Point::repeat(f64::INFINITY), Point::repeat(f64::NEG_INFINITY)),
                    |(lo, hi), p| (lo.inf(p), hi.sup(p)),
                );
                (hi - lo).norm()
            }
        };
        Ok(Self {
            tree: build_tree(&points),
            points,
            curve,
            gamma: DEFAULT_GAMMA,
            stability_budget: DEFAULT_STABILITY_BUDGET,
            max_radius,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_stability_budget(mut self, budget: f64) -> Self {
        self.stability_budget = budget;
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Reproduces `p(α)` for `p ∈ Π_order`. With a curve attached, balls that
    /// would cross the boundary are shifted inward while still containing `α`.
    pub fn interior(&self, alpha: &Point, h: f64, order: u32) -> Result<LocalReproduction> {
        let inward = match &self.curve {
            Some(c) => {
                let proj = signed_distance(c, alpha)?;
                Some((proj.rho, proj.normal))
            }
            None => None,
        };
        let basis = PolyBasis::new(order);
        let mut target = vec![0.0; basis.dim()];
        target[0] = 1.0;
        self.build(alpha, h, 0, order, &target, |r| match inward {
            Some((rho, n)) if rho > -r => alpha - n * (r + rho).min(r),
            _ => *alpha,
        })
    }

    /// Reproduces `λ_j p(α)` at a boundary point with outward normal `n`,
    /// using a ball inside the domain that touches `α`.
    pub fn boundary(&self, j: usize, alpha: &Point, normal: &Point, h: f64, order: u32) -> Result<LocalReproduction> {
        let basis = PolyBasis::new(order);
        let origin = Point::zeros();
        let target: Vec<f64> = basis
            .exponents()
            .iter()
            .map(|&e| eval_poly_lambda(j, e, &origin, normal))
            .collect();
        self.build(alpha, h, j, order, &target, |r| alpha - normal * r)
    }

    /// `target` holds the functional applied to the monomials of the scaled
    /// variable `(x - α)/R`; its derivative order `j` sets the `R^{-j}` scaling.
    fn build(
        &self,
        alpha: &Point,
        h: f64,
        j: usize,
        order: u32,
        target: &[f64],
        ball_center: impl Fn(f64) -> Point,
    ) -> Result<LocalReproduction> {
        if !(h > 0.0) {
            return Err(Error::InvalidParams("fill distance must be positive".into()));
        }
        let basis = PolyBasis::new(order);
        let dim = basis.dim();
        let mut radius = self.gamma * (order.max(1) * order.max(1)) as f64 * h;
        if order == 0 {
            radius = 0.0;
        }
        let mut best: Option<LocalReproduction> = None;
        loop {
            let center = ball_center(radius);
            let mut support: Vec<usize> = self
                .tree
                .within_unsorted::<SquaredEuclidean>(&[center.x, center.y], radius * radius * (1.0 + 1e-12))
                .into_iter()
                .map(|nb| nb.item as usize)
                .collect();
            support.sort_unstable();
            if support.len() >= dim {
                if let Some(rep) = self.solve(alpha, &support, radius, center, j, order, &basis, target) {
                    let scaled = rep.stability * h.powi(j as i32);
                    if scaled <= self.stability_budget {
                        return Ok(rep);
                    }
                    if best.as_ref().map_or(true, |b| rep.stability < b.stability) {
                        best = Some(rep);
                    }
                }
            }
            let next = if radius == 0.0 { self.gamma.max(0.05) * h } else { radius * RADIUS_GROWTH };
            if next > self.max_radius {
                // Accept the most stable exact reproduction if one was found.
                return best.ok_or(Error::NormingFailure(next, self.max_radius));
            }
            radius = next;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        alpha: &Point,
        support: &[usize],
        radius: f64,
        center: Point,
        j: usize,
        order: u32,
        basis: &PolyBasis,
        target: &[f64],
    ) -> Option<LocalReproduction> {
        let scale = if radius > 0.0 { radius } else { 1.0 };
        let k = support.len();
        let dim = basis.dim();
        let mut v = DMatrix::zeros(k, dim);
        for (row, &idx) in support.iter().enumerate() {
            let u = (self.points[idx] - alpha) / scale;
            for (col, val) in basis.eval_all(&u).into_iter().enumerate() {
                v[(row, col)] = val;
            }
        }
        // Minimum-norm solution of V^T a = b through V = QR.
        let qr = v.clone().qr();
        let r = qr.r();
        let diag: Vec<f64> = r.diagonal().iter().map(|x| x.abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        if diag.iter().any(|d| *d <= 1e-9 * dmax) {
            return None;
        }
        let b = DVector::from_column_slice(target);
        let y = r.transpose().solve_lower_triangular(&b)?;
        let a = qr.q() * y;
        let exactness = (v.transpose() * &a - &b).amax();
        if !(exactness <= EXACTNESS_TOL * (1.0 + b.amax())) {
            return None;
        }
        let coefficients: Vec<f64> = a.iter().map(|c| c / scale.powi(j as i32)).collect();
        Some(LocalReproduction {
            anchor: *alpha,
            support: support.to_vec(),
            stability: coefficients.iter().map(|c| c.abs()).sum(),
            coefficients,
            order,
            radius,
            ball_center: center,
            exactness,
        })
    }
}

pub fn build_interior_lpr(alpha: &Point, centers: &[Point], h: f64, order: u32) -> Result<LocalReproduction> {
    Reproducer::new(centers.to_vec(), None)?.interior(alpha, h, order)
}

pub fn build_boundary_lpr(
    j: usize,
    alpha: &Point,
    normal: &Point,
    centers: &[Point],
    h_local: f64,
    order: u32,
) -> Result<LocalReproduction> {
    Reproducer::new(centers.to_vec(), None)?.boundary(j, alpha, normal, h_local, order)
}
