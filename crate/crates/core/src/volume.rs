//! Quadrature over the domain and volume potentials `∫_Ω F(α) φ(x-α) dα`.

use crate::error::{Error, Result};
use crate::geometry::{DomainCurve, Point};
use crate::kernel::SplineParams;
use crate::quadrature::{gauss_legendre, gauss_legendre_on, integrate_adaptive};
use std::f64::consts::PI;

/// Nodes and weights of a rule for `∫_Ω`.
#[derive(Clone, Debug)]
pub struct InteriorQuadrature {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub level: usize,
}

impl InteriorQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn check_star_shaped(curve: &DomainCurve, c: &Point) -> Result<()> {
    let samples = 1024;
    for i in 0..samples {
        let t = 2.0 * PI * i as f64 / samples as f64;
        if cross(&(curve.gamma(t) - c), &curve.gamma_prime(t)) <= 0.0 {
            return Err(Error::NotStarShaped);
        }
    }
    Ok(())
}

/// Polar rule about the centroid: `level` Gauss nodes along each ray times
/// `4 level` equispaced angles, following the boundary.
pub fn interior_quadrature(curve: &DomainCurve, level: usize) -> Result<InteriorQuadrature> {
    if level == 0 {
        return Err(Error::InvalidParams("quadrature level must be positive".into()));
    }
    let c = curve.centroid();
    check_star_shaped(curve, &c)?;
    let (s_nodes, s_weights) = gauss_legendre_on(level, 0.0, 1.0);
    let n_t = 4 * level;
    let mut nodes = Vec::with_capacity(level * n_t);
    let mut weights = Vec::with_capacity(level * n_t);
    for i in 0..n_t {
        let t = 2.0 * PI * i as f64 / n_t as f64;
        let g = curve.gamma(t) - c;
        let jac = cross(&g, &curve.gamma_prime(t)) * 2.0 * PI / n_t as f64;
        for (s, w) in s_nodes.iter().zip(&s_weights) {
            nodes.push(c + g * *s);
            weights.push(w * s * jac);
        }
    }
    Ok(InteriorQuadrature { nodes, weights, level })
}

/// Polar rule about the centroid with roughly uniform node spacing `spacing`:
/// composite Gauss panels along rays, and on each ring an angle count
/// proportional to its circumference.
pub fn graded_quadrature(curve: &DomainCurve, spacing: f64) -> Result<InteriorQuadrature> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidParams("quadrature spacing must be positive".into()));
    }
    let c = curve.centroid();
    check_star_shaped(curve, &c)?;
    let per_panel = 6;
    let reach = (0..256)
        .map(|i| (curve.gamma(2.0 * PI * i as f64 / 256.0) - c).norm())
        .fold(0.0, f64::max);
    let panels = ((reach / (spacing * per_panel as f64)).ceil() as usize).max(1);
    let (g_nodes, g_weights) = gauss_legendre(per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (u, wu) in g_nodes.iter().zip(&g_weights) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * u;
            let ws = 0.5 * (b - a) * wu;
            let n_t = ((2.0 * PI * s * reach / spacing).ceil() as usize).max(64);
            for i in 0..n_t {
                let t = 2.0 * PI * i as f64 / n_t as f64;
                let g = curve.gamma(t) - c;
                nodes.push(c + g * s);
                weights.push(ws * s * cross(&g, &curve.gamma_prime(t)) * 2.0 * PI / n_t as f64);
            }
        }
    }
    Ok(InteriorQuadrature {
        nodes,
        weights,
        level: panels * per_panel,
    })
}

/// `∫_Ω F(α) φ(x-α) dα` for `x` off the boundary.
///
/// Inside, the domain is swept by segments from `x` to the boundary, which
/// absorbs the kernel singularity into the radial Jacobian; `level` Gauss nodes
/// are used along each segment. The sweep has signed multiplicity one on `Ω`
/// for any interior `x`, so `F` must be smooth on segments that leave a
/// non-convex domain. Outside, a doubly adaptive polar rule about the
/// centroid is used.
pub fn volume_potential<F: Fn(&Point) -> f64>(
    params: &SplineParams,
    curve: &DomainCurve,
    density: F,
    x: &Point,
    level: usize,
    tol: f64,
) -> f64 {
    if curve.contains(x) {
        let (s_nodes, s_weights) = gauss_legendre_on(level, 0.0, 1.0);
        let ray = |t: f64| {
            let g = curve.gamma(t) - x;
            let r2 = g.norm_squared();
            let inner: f64 = s_nodes
                .iter()
                .zip(&s_weights)
                .map(|(s, w)| w * s * density(&(x + g * *s)) * params.phi_from_r2(s * s * r2))
                .sum();
            inner * cross(&g, &curve.gamma_prime(t))
        };
        integrate_adaptive(ray, 0.0, 2.0 * PI, tol, 14)
    } else {
        let c = curve.centroid();
        let ray = |t: f64| {
            let g = curve.gamma(t) - c;
            let inner = integrate_adaptive(
                |s| {
                    let a = c + g * s;
                    s * density(&a) * params.phi_from_r2((x - a).norm_squared())
                },
                0.0,
                1.0,
                tol,
                12,
            );
            inner * cross(&g, &curve.gamma_prime(t))
        };
        integrate_adaptive(ray, 0.0, 2.0 * PI, tol, 14)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let disk = interior_quadrature(&DomainCurve::unit_circle(), 8).unwrap();
        assert!((disk.integrate(|_| 1.0) - PI).abs() < 1e-12);
        assert!((disk.integrate(|x| x.x * x.x) - PI / 4.0).abs() < 1e-12);
        let e = DomainCurve::Ellipse { a: 2.0, b: 1.0 };
        let ell = interior_quadrature(&e, 8).unwrap();
        assert!((ell.integrate(|_| 1.0) - 2.0 * PI).abs() < 1e-12);
        // ∫ x^a y^b over the ellipse = a^{i+1} b^{j+1} ∫ over the disk.
        let disk_moment = |i: i32, j: i32| disk.integrate(|x| x.x.powi(i) * x.y.powi(j));
        for i in 0..=6 {
            for j in 0..=(6 - i) {
                let expect = 2f64.powi(i + 1) * disk_moment(i, j);
                let got = ell.integrate(|x| x.x.powi(i) * x.y.powi(j));
                assert!((got - expect).abs() < 1e-8 * expect.abs().max(1.0), "{i},{j}");
            }
        }
        // Classical disk moments ∫ x^4 = π/8, ∫ x^2 y^2 = π/24.
        assert!((disk_moment(4, 0) - PI / 8.0).abs() < 1e-13);
        assert!((disk_moment(2, 2) - PI / 24.0).abs() < 1e-13);
    }

    #[test]
    fn graded_rule_moments() {
        for curve in [DomainCurve::unit_circle(), DomainCurve::Star { radius: 1.0, eps: 0.05, lobes: 5 }] {
            let q = graded_quadrature(&curve, 0.05).unwrap();
            assert!((q.integrate(|_| 1.0) - curve.area()).abs() < 1e-10);
            let fine = interior_quadrature(&curve, 64).unwrap();
            let f = |x: &Point| (x.x + 0.3 * x.y).exp() * x.y * x.y;
            let (a, b) = (q.integrate(f), fine.integrate(f));
            assert!((a - b).abs() < 1e-10, "{curve}: {a} vs {b}");
        }
    }

    #[test]
    fn volume_potential_of_constant_on_disk() {
        // For F = 1 on the unit disk, radial symmetry gives a 1-D oracle:
        // u(x) = ∫_0^1 ρ ∫_0^{2π} φ(|x - ρ e^{iθ}|) dθ dρ.
        let params = SplineParams::planar(2).unwrap();
        let curve = DomainCurve::unit_circle();
        for x in [Point::new(0.3, 0.0), Point::new(0.0, 0.97), Point::new(1.4, 0.2)] {
            let oracle = integrate_adaptive(
                |rho| {
                    rho * integrate_adaptive(
                        |th| params.phi_from_r2((x - Point::new(rho * th.cos(), rho * th.sin())).norm_squared()),
                        0.0,
                        2.0 * PI,
                        1e-13,
                        14,
                    )
                },
                0.0,
                1.0,
                1e-13,
                14,
            );
            let got = volume_potential(&params, &curve, |_| 1.0, &x, 24, 1e-12);
            assert!((got - oracle).abs() < 1e-10, "{x:?}: {got} vs {oracle}");
        }
    }
}
