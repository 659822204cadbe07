//! The augmented boundary system, its solution and the trace operators `N_j`.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, Point};
use crate::kernel::SplineParams;
use crate::layerpot::{assemble_vkj, LayerEvaluator, PotentialValue, Side};
use crate::polyspace::{assemble_p, Poly2, PolyBasis};
use crate::quadrature::spectral_tail;
use crate::target::TargetFunction;
use nalgebra::{DMatrix, DVector};

/// Block system `[[0, P^T W], [P, L]] (A, g) = (0, h)`.
#[derive(Clone, Debug)]
pub struct AugmentedSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub n_poly: usize,
    pub m: usize,
    pub n_nodes: usize,
}

pub fn assemble_augmented(
    params: &SplineParams,
    grid: &BoundaryGrid,
    data: &[Vec<f64>],
) -> Result<AugmentedSystem> {
    let m = params.m();
    if params.d() != 2 {
        return Err(Error::InvalidParams("boundary solves are planar only".into()));
    }
    if data.len() != m || data.iter().any(|h| h.len() != grid.len()) {
        return Err(Error::InvalidParams(format!(
            "expected {m} boundary data vectors of length {}",
            grid.len()
        )));
    }
    let n = grid.len();
    let basis = PolyBasis::new(m as u32 - 1);
    let np = basis.dim();
    let p = assemble_p(&basis, grid, m);
    let size = np + m * n;
    let mut matrix = DMatrix::zeros(size, size);
    for row in 0..m * n {
        for c in 0..np {
            let v = p.matrix[(row, c)];
            matrix[(np + row, c)] = v;
            matrix[(c, np + row)] = grid.weights[row % n] * v;
        }
    }
    for k in 0..m {
        for j in 0..m {
            let block = assemble_vkj(params, k, j, grid)?;
            matrix
                .view_mut((np + k * n, np + j * n), (n, n))
                .copy_from(&block.matrix);
        }
    }
    let mut rhs = DVector::zeros(size);
    for (k, h) in data.iter().enumerate() {
        for (i, v) in h.iter().enumerate() {
            rhs[np + k * n + i] = *v;
        }
    }
    Ok(AugmentedSystem {
        matrix,
        rhs,
        n_poly: np,
        m,
        n_nodes: n,
    })
}

/// Hager's estimate of `‖A^{-1}‖_1` from solves with `A` and `A^T`.
fn inverse_norm_estimate(
    solve: impl Fn(&DVector<f64>) -> DVector<f64>,
    solve_t: impl Fn(&DVector<f64>) -> DVector<f64>,
    n: usize,
) -> f64 {
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let y = solve(&x);
        let new_est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve_t(&xi);
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if new_est <= est || zmax <= z.dot(&x) {
            est = est.max(new_est);
            break;
        }
        est = new_est;
        x = DVector::zeros(n);
        x[jmax] = 1.0;
    }
    est
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Densities and polynomial coefficients of the layer-potential solution.
pub struct DensitySolution {
    pub basis: PolyBasis,
    pub poly_coeffs: Vec<f64>,
    /// `g_0, ..., g_{m-1}` at the grid nodes.
    pub densities: Vec<Vec<f64>>,
    /// 1-norm condition estimate of the augmented matrix.
    pub condition: f64,
    /// Normwise backward error of the solve.
    pub residual: f64,
    /// Relative size of the trailing Fourier modes of the data.
    pub data_tail: f64,
    evaluator: LayerEvaluator,
}

impl DensitySolution {
    pub fn params(&self) -> &SplineParams {
        self.evaluator.params()
    }

    pub fn grid(&self) -> &BoundaryGrid {
        self.evaluator.grid()
    }

    pub fn evaluator(&self) -> &LayerEvaluator {
        &self.evaluator
    }

    pub fn polynomial(&self) -> Poly2 {
        self.basis.combine(&self.poly_coeffs)
    }

    /// `Σ_j V_j g_j (x) + p(x)`.
    pub fn eval(&self, x: &Point) -> Result<PotentialValue> {
        let v = self.evaluator.eval(0, x, x)?;
        Ok(PotentialValue {
            value: v.value + self.polynomial().eval(x),
            near_boundary: v.near_boundary,
        })
    }

    /// `|P^T W g|_∞` for the computed densities.
    pub fn moment_residual(&self) -> f64 {
        let grid = self.grid();
        let p = assemble_p(&self.basis, grid, self.params().m());
        let flat: Vec<f64> = self.densities.iter().flatten().cloned().collect();
        p.weighted_transpose_apply(&grid.weights, &flat)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    /// Limit from inside of `Λ_k` applied to the solution, at every node.
    pub fn interior_trace(&self, k: usize) -> Result<Vec<f64>> {
        let trace = self.evaluator.one_sided_trace(k, Side::Inside)?;
        let grid = self.grid();
        let p = self.polynomial();
        Ok(trace
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v + p.boundary_operator(k, &grid.points[i], &grid.normals[i]))
            .collect())
    }
}

/// Solves for the densities whose layer potentials plus a polynomial in
/// `Π_{m-1}` have boundary values `λ_k u = h_k`, `k < m`.
pub fn solve_dirichlet(
    params: &SplineParams,
    grid: &BoundaryGrid,
    data: &[Vec<f64>],
) -> Result<DensitySolution> {
    let sys = assemble_augmented(params, grid, data)?;
    let size = sys.matrix.nrows();
    let lu = sys.matrix.clone().lu();
    let lu_t = sys.matrix.transpose().lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|v| v.abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > 1e-15 * dmax) {
        return Err(Error::SingularSystem);
    }
    let solve = |b: &DVector<f64>| lu.solve(b).expect("factorization is nonsingular");
    let solve_t = |b: &DVector<f64>| lu_t.solve(b).expect("factorization is nonsingular");
    let mut x = solve(&sys.rhs);
    let r = &sys.rhs - &sys.matrix * &x;
    x += solve(&r);
    let r = &sys.rhs - &sys.matrix * &x;
    let a_norm = sys.matrix.abs().row_sum().max();
    let residual = r.amax() / (a_norm * x.amax() + sys.rhs.amax()).max(f64::MIN_POSITIVE);
    if !residual.is_finite() || residual > 1e-10 {
        return Err(Error::ResidualTooLarge(residual));
    }
    let condition = one_norm(&sys.matrix) * inverse_norm_estimate(solve, solve_t, size);
    let np = sys.n_poly;
    let n = sys.n_nodes;
    let densities: Vec<Vec<f64>> = (0..sys.m)
        .map(|j| x.rows(np + j * n, n).iter().cloned().collect())
        .collect();
    let data_tail = data.iter().map(|h| spectral_tail(h)).fold(0.0, f64::max);
    if data_tail > 1e-10 {
        log::warn!("boundary data not resolved by {n} nodes (tail {data_tail:.1e})");
    }
    let evaluator = LayerEvaluator::new(*params, grid.clone(), densities.clone())?;
    Ok(DensitySolution {
        basis: PolyBasis::new(sys.m as u32 - 1),
        poly_coeffs: x.rows(0, np).iter().cloned().collect(),
        densities,
        condition,
        residual,
        data_tail,
        evaluator,
    })
}

pub fn eval_solution(sol: &DensitySolution, x: &Point) -> Result<PotentialValue> {
    sol.eval(x)
}

/// `λ_k f` at the grid nodes for `k = 0..count-1`.
pub fn boundary_data(f: &dyn TargetFunction, grid: &BoundaryGrid, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            (0..grid.len())
                .map(|i| f.trace(k, &grid.points[i], &grid.normals[i]))
                .collect()
        })
        .collect()
}

/// Trace operators `N_0 f, ..., N_{m-1} f` and the polyharmonic part of `f`.
pub struct TraceOperators {
    pub values: Vec<Vec<f64>>,
    pub solution: DensitySolution,
}

/// `N_j f = g_j + (-1)^{j+1} (λ_{2m-j-1} f - λ_{2m-j-1} f_1)` where `f_1` is the
/// polyharmonic function sharing the first `m` boundary traces with `f`.
pub fn compute_nj(params: &SplineParams, f: &dyn TargetFunction, grid: &BoundaryGrid) -> Result<TraceOperators> {
    let m = params.m();
    let data = boundary_data(f, grid, m);
    let solution = solve_dirichlet(params, grid, &data)?;
    let mut values = Vec::with_capacity(m);
    for j in 0..m {
        let k = 2 * m - j - 1;
        let inner = solution.interior_trace(k)?;
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        let nj: Vec<f64> = (0..grid.len())
            .map(|i| {
                let exact = f.trace(k, &grid.points[i], &grid.normals[i]);
                solution.densities[j][i] + sign * (exact - inner[i])
            })
            .collect();
        values.push(nj);
    }
    Ok(TraceOperators { values, solution })
}

fn central_binomial(j: usize) -> f64 {
    (1..=j).fold(1.0, |acc, i| acc * (j + i) as f64 / i as f64)
}

/// Principal-symbol constants of the boundary system and their determinant.
pub fn symbol_matrix(m: usize) -> (DMatrix<f64>, f64) {
    let mut s = DMatrix::zeros(m, m);
    for j in 0..m {
        for k in 0..m {
            if (j + k) % 2 == 1 {
                continue;
            }
            let idx = m - (j + k) / 2 - 1;
            let c = if j % 2 == 0 {
                central_binomial(idx)
            } else {
                4.0 * central_binomial(idx) - central_binomial(idx + 1)
            };
            s[(j, k)] = 2f64.powi(1 + j as i32 + k as i32 - 2 * m as i32) * c;
        }
    }
    let det = s.determinant();
    (s, det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainCurve;
    use crate::target::target_by_name;
    use rand::{Rng, SeedableRng};

    fn interior_points(curve: &DomainCurve, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        while out.len() < count {
            let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if curve.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn reproduces_linear_data() {
        let p = SplineParams::planar(2).unwrap();
        let c = DomainCurve::unit_circle();
        let g = BoundaryGrid::new(c, 64);
        let f = target_by_name("linear").unwrap();
        let sol = solve_dirichlet(&p, &g, &boundary_data(f.as_ref(), &g, 2)).unwrap();
        for x in interior_points(&c, 100, 1) {
            let v = sol.eval(&x).unwrap().value;
            assert!((v - x.x).abs() < 1e-8, "{x:?}: {v}");
        }
        assert!(sol.moment_residual() < 1e-8);
    }

    #[test]
    fn reproduces_polyharmonic_data() {
        let p = SplineParams::planar(2).unwrap();
        let c = DomainCurve::unit_circle();
        let g = BoundaryGrid::new(c, 256);
        for name in ["harmonic3", "biharmonic"] {
            let f = target_by_name(name).unwrap();
            let sol = solve_dirichlet(&p, &g, &boundary_data(f.as_ref(), &g, 2)).unwrap();
            for x in interior_points(&c, 100, 2) {
                let v = sol.eval(&x).unwrap().value;
                assert!((v - f.value(&x)).abs() < 1e-6, "{name} {x:?}");
            }
            let flat: f64 = sol.densities.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            assert!(sol.moment_residual() < 1e-8 * flat.max(1.0));
        }
        let f = target_by_name("harmonic3").unwrap();
        let sol = solve_dirichlet(&p, &g, &boundary_data(f.as_ref(), &g, 2)).unwrap();
        let v = sol.eval(&Point::new(0.3, 0.2)).unwrap().value;
        assert!((v + 0.009).abs() < 1e-8);
    }

    #[test]
    fn homogeneous_data_gives_zero() {
        let p = SplineParams::planar(2).unwrap();
        let c = DomainCurve::Ellipse { a: 2.0, b: 1.0 };
        let g = BoundaryGrid::new(c, 128);
        let sol = solve_dirichlet(&p, &g, &[vec![0.0; 128], vec![0.0; 128]]).unwrap();
        for x in interior_points(&c, 20, 3) {
            assert!(sol.eval(&x).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn symbol_constants() {
        let (s, det) = symbol_matrix(2);
        assert_eq!(s[(0, 0)], 0.25);
        assert_eq!(s[(1, 1)], 1.0);
        assert_eq!(s[(0, 1)], 0.0);
        assert_eq!(s[(1, 0)], 0.0);
        assert_eq!(det, 0.25);
        for m in 1..=6 {
            assert!(symbol_matrix(m).1.abs() > 1e-12);
        }
    }

    #[test]
    fn nj_vanishes_on_low_degree_polynomials() {
        let p = SplineParams::planar(2).unwrap();
        let g = BoundaryGrid::new(DomainCurve::unit_circle(), 64);
        let f = target_by_name("linear").unwrap();
        let t = compute_nj(&p, f.as_ref(), &g).unwrap();
        for v in t.values.iter().flatten() {
            assert!(v.abs() < 1e-8, "{v}");
        }
    }
}
