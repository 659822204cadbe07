//! Bivariate polynomials, their boundary traces and the side-condition matrix.

use crate::geometry::{BoundaryGrid, Point};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Sparse bivariate polynomial with exact differentiation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(a: u32, b: u32) -> Self {
        Self::from_terms(&[((a, b), 1.0)])
    }

    pub fn from_terms(terms: &[((u32, u32), f64)]) -> Self {
        let mut p = Self::zero();
        for &(e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: (u32, u32), c: f64) {
        if c == 0.0 {
            return;
        }
        let v = self.terms.entry(e).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c * x.x.powi(a as i32) * x.y.powi(b as i32))
            .sum()
    }

    pub fn dx(&self) -> Self {
        let mut p = Self::zero();
        for (&(a, b), &c) in &self.terms {
            if a > 0 {
                p.add_term((a - 1, b), c * a as f64);
            }
        }
        p
    }

    pub fn dy(&self) -> Self {
        let mut p = Self::zero();
        for (&(a, b), &c) in &self.terms {
            if b > 0 {
                p.add_term((a, b - 1), c * b as f64);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Self {
        let mut p = self.dx().dx();
        for (e, c) in self.dy().dy().terms() {
            p.add_term(e, c);
        }
        p
    }

    pub fn laplacian_power(&self, i: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..i {
            p = p.laplacian();
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in other.terms() {
            p.add_term(e, c);
        }
        p
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero();
        for (e, c) in self.terms() {
            p.add_term(e, c * s);
        }
        p
    }

    /// `λ_k p(α)` with outward normal `n`.
    pub fn boundary_operator(&self, k: usize, alpha: &Point, n: &Point) -> f64 {
        let q = self.laplacian_power(k / 2);
        if k % 2 == 0 {
            q.eval(alpha)
        } else {
            n.x * q.dx().eval(alpha) + n.y * q.dy().eval(alpha)
        }
    }
}

/// `λ_k` applied to the monomial `x^a y^b` at `α`.
pub fn eval_poly_lambda(k: usize, monomial: (u32, u32), alpha: &Point, n_alpha: &Point) -> f64 {
    Poly2::monomial(monomial.0, monomial.1).boundary_operator(k, alpha, n_alpha)
}

/// Monomial basis of the bivariate polynomials of total degree at most `degree`,
/// ordered by degree and then by decreasing power of `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyBasis {
    degree: u32,
    exponents: Vec<(u32, u32)>,
}

impl PolyBasis {
    pub fn new(degree: u32) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree {
            for b in 0..=total {
                exponents.push((total - b, b));
            }
        }
        Self { degree, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exponents
    }

    /// All basis monomials at `x`.
    pub fn eval_all(&self, x: &Point) -> Vec<f64> {
        let d = self.degree as usize;
        let mut px = vec![1.0; d + 1];
        let mut py = vec![1.0; d + 1];
        for i in 1..=d {
            px[i] = px[i - 1] * x.x;
            py[i] = py[i - 1] * x.y;
        }
        self.exponents
            .iter()
            .map(|&(a, b)| px[a as usize] * py[b as usize])
            .collect()
    }

    /// `λ_k` of every basis monomial at `α`.
    pub fn lambda_all(&self, k: usize, alpha: &Point, n: &Point) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|&e| eval_poly_lambda(k, e, alpha, n))
            .collect()
    }

    /// Polynomial with the given coefficients in this basis.
    pub fn combine(&self, coeffs: &[f64]) -> Poly2 {
        let terms: Vec<_> = self.exponents.iter().cloned().zip(coeffs.iter().cloned()).collect();
        Poly2::from_terms(&terms)
    }
}

/// Traces `λ_k p_j` of the basis at the grid nodes, stacked in blocks
/// `k = 0..m-1` of `n_nodes` rows each.
#[derive(Clone, Debug)]
pub struct SideConditionMatrix {
    pub m: usize,
    pub n_nodes: usize,
    pub matrix: DMatrix<f64>,
}

impl SideConditionMatrix {
    /// Weighted pairing `(P^T W g)_j = Σ_k Σ_i w_i g_k(t_i) λ_k p_j(x_i)`.
    pub fn weighted_transpose_apply(&self, weights: &[f64], g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.m * self.n_nodes);
        let mut out = vec![0.0; self.matrix.ncols()];
        for (col, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for row in 0..g.len() {
                s += weights[row % self.n_nodes] * g[row] * self.matrix[(row, col)];
            }
            *o = s;
        }
        out
    }
}

pub fn assemble_p(basis: &PolyBasis, grid: &BoundaryGrid, m: usize) -> SideConditionMatrix {
    let n = grid.len();
    let mut matrix = DMatrix::zeros(m * n, basis.dim());
    for k in 0..m {
        for i in 0..n {
            let row = basis.lambda_all(k, &grid.points[i], &grid.normals[i]);
            for (j, v) in row.into_iter().enumerate() {
                matrix[(k * n + i, j)] = v;
            }
        }
    }
    SideConditionMatrix { m, n_nodes: n, matrix }
}
