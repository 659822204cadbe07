//! Target functions with the derivative data the scheme needs.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::polyspace::Poly2;

/// A smooth function on the plane together with its iterated Laplacians and
/// their gradients.
pub trait TargetFunction: Send + Sync {
    fn name(&self) -> String;

    fn value(&self, x: &Point) -> f64;

    /// `Δ^i f (x)`.
    fn laplacian_power(&self, i: usize, x: &Point) -> f64;

    /// `∇Δ^i f (x)`.
    fn grad_laplacian_power(&self, i: usize, x: &Point) -> Point;

    /// `λ_k f` at a boundary point with outward normal `n`.
    fn trace(&self, k: usize, x: &Point, n: &Point) -> f64 {
        if k % 2 == 0 {
            self.laplacian_power(k / 2, x)
        } else {
            self.grad_laplacian_power(k / 2, x).dot(n)
        }
    }

    /// Whether derivatives are exact rather than finite-difference estimates.
    fn is_analytic(&self) -> bool {
        true
    }
}

/// Polynomial target with exact derivatives.
#[derive(Clone, Debug)]
pub struct PolyTarget {
    pub name: String,
    pub poly: Poly2,
}

impl PolyTarget {
    pub fn new(name: &str, poly: Poly2) -> Self {
        Self {
            name: name.to_string(),
            poly,
        }
    }
}

impl TargetFunction for PolyTarget {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, x: &Point) -> f64 {
        self.poly.eval(x)
    }

    fn laplacian_power(&self, i: usize, x: &Point) -> f64 {
        self.poly.laplacian_power(i).eval(x)
    }

    fn grad_laplacian_power(&self, i: usize, x: &Point) -> Point {
        let q = self.poly.laplacian_power(i);
        Point::new(q.dx().eval(x), q.dy().eval(x))
    }
}

/// `exp(a · x)`.
#[derive(Clone, Debug)]
pub struct ExpLinear {
    pub a: Point,
}

impl TargetFunction for ExpLinear {
    fn name(&self) -> String {
        format!("exp({}*x1+{}*x2)", self.a.x, self.a.y)
    }

    fn value(&self, x: &Point) -> f64 {
        self.a.dot(x).exp()
    }

    fn laplacian_power(&self, i: usize, x: &Point) -> f64 {
        self.a.norm_squared().powi(i as i32) * self.value(x)
    }

    fn grad_laplacian_power(&self, i: usize, x: &Point) -> Point {
        self.a * self.laplacian_power(i, x)
    }
}

/// `sin(a x1) cos(b x2)`.
#[derive(Clone, Debug)]
pub struct SinCos {
    pub a: f64,
    pub b: f64,
}

impl TargetFunction for SinCos {
    fn name(&self) -> String {
        format!("sin({}*x1)cos({}*x2)", self.a, self.b)
    }

    fn value(&self, x: &Point) -> f64 {
        (self.a * x.x).sin() * (self.b * x.y).cos()
    }

    fn laplacian_power(&self, i: usize, x: &Point) -> f64 {
        (-(self.a * self.a + self.b * self.b)).powi(i as i32) * self.value(x)
    }

    fn grad_laplacian_power(&self, i: usize, x: &Point) -> Point {
        let s = (-(self.a * self.a + self.b * self.b)).powi(i as i32);
        let g = Point::new(
            self.a * (self.a * x.x).cos() * (self.b * x.y).cos(),
            -self.b * (self.a * x.x).sin() * (self.b * x.y).sin(),
        );
        g * s
    }
}

/// Arbitrary callable with derivatives from fourth-order central differences.
pub struct FiniteDifferenceTarget<F> {
    pub name: String,
    pub f: F,
    pub step: f64,
}

impl<F: Fn(&Point) -> f64 + Send + Sync> FiniteDifferenceTarget<F> {
    pub fn new(name: &str, f: F) -> Self {
        Self {
            name: name.to_string(),
            f,
            step: 1e-2,
        }
    }

    fn lap_power(&self, i: usize, x: &Point) -> f64 {
        if i == 0 {
            return (self.f)(x);
        }
        let h = self.step;
        let c = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        let mut s = 0.0;
        for (o, w) in (-2i32..=2).zip(c) {
            let d = o as f64 * h;
            s += w * (self.lap_power(i - 1, &Point::new(x.x + d, x.y))
                + self.lap_power(i - 1, &Point::new(x.x, x.y + d)));
        }
        s / (h * h)
    }
}

impl<F: Fn(&Point) -> f64 + Send + Sync> TargetFunction for FiniteDifferenceTarget<F> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, x: &Point) -> f64 {
        (self.f)(x)
    }

    fn laplacian_power(&self, i: usize, x: &Point) -> f64 {
        self.lap_power(i, x)
    }

    fn grad_laplacian_power(&self, i: usize, x: &Point) -> Point {
        let h = self.step;
        let c = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let mut g = Point::zeros();
        for (o, w) in (-2i32..=2).zip(c) {
            if w == 0.0 {
                continue;
            }
            let d = o as f64 * h;
            g.x += w * self.lap_power(i, &Point::new(x.x + d, x.y));
            g.y += w * self.lap_power(i, &Point::new(x.x, x.y + d));
        }
        g / h
    }

    fn is_analytic(&self) -> bool {
        false
    }
}

/// Names accepted by [`target_by_name`].
pub const TARGET_NAMES: &[&str] = &[
    "linear",
    "harmonic3",
    "biharmonic",
    "x1sq_x2",
    "r2",
    "quartic",
    "exp_x1",
    "exp_mixed",
    "sin_cos",
];

/// Named target functions used by the experiment driver.
pub fn target_by_name(name: &str) -> Result<Box<dyn TargetFunction>> {
    let poly = |terms: &[((u32, u32), f64)]| -> Box<dyn TargetFunction> {
        Box::new(PolyTarget::new(name, Poly2::from_terms(terms)))
    };
    Ok(match name {
        "linear" => poly(&[((1, 0), 1.0)]),
        // Re((x1 + i x2)^3)
        "harmonic3" => poly(&[((3, 0), 1.0), ((1, 2), -3.0)]),
        // |x|^2 x1
        "biharmonic" => poly(&[((3, 0), 1.0), ((1, 2), 1.0)]),
        "x1sq_x2" => poly(&[((2, 1), 1.0)]),
        "r2" => poly(&[((2, 0), 1.0), ((0, 2), 1.0)]),
        "quartic" => poly(&[((4, 0), 1.0), ((1, 3), -0.5), ((0, 2), 1.0)]),
        "exp_x1" => Box::new(ExpLinear { a: Point::new(1.0, 0.0) }),
        "exp_mixed" => Box::new(ExpLinear { a: Point::new(0.6, -0.8) }),
        "sin_cos" => Box::new(SinCos { a: 2.0, b: 1.0 }),
        _ => return Err(Error::UnknownTarget(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_oracle_matches_analytic_traces() {
        let analytic = [
            target_by_name("exp_x1").unwrap(),
            target_by_name("sin_cos").unwrap(),
            target_by_name("quartic").unwrap(),
        ];
        let n = Point::new(0.6, 0.8);
        for t in analytic.iter() {
            let fd = FiniteDifferenceTarget::new("fd", |x: &Point| t.value(x));
            for x in [Point::new(0.3, -0.2), Point::new(-0.7, 0.5)] {
                for k in 0..4 {
                    let a = t.trace(k, &x, &n);
                    let b = fd.trace(k, &x, &n);
                    assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{} k={k}: {a} vs {b}", t.name());
                }
            }
        }
    }

    #[test]
    fn registry() {
        for name in TARGET_NAMES {
            let t = target_by_name(name).unwrap();
            assert!(t.value(&Point::new(0.1, 0.2)).is_finite());
        }
        assert!(target_by_name("nope").is_err());
        let b = target_by_name("biharmonic").unwrap();
        assert_eq!(b.laplacian_power(2, &Point::new(0.3, 0.4)), 0.0);
        let h = target_by_name("harmonic3").unwrap();
        assert!((h.value(&Point::new(0.3, 0.2)) - (-0.009)).abs() < 1e-15);
    }
}
