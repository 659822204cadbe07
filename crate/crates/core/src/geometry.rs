//! Boundary curves, boundary grids, signed distance and center sets.

use crate::error::{Error, Result};
use kiddo::{KdTree, SquaredEuclidean};
use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub type Point = Vector2<f64>;

/// Smooth closed counterclockwise curve centred at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainCurve {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r(t) = radius (1 + eps cos(lobes t))` in polar form.
    Star { radius: f64, eps: f64, lobes: u32 },
}

impl DomainCurve {
    pub fn unit_circle() -> Self {
        DomainCurve::Circle { radius: 1.0 }
    }

    pub fn gamma(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        match *self {
            DomainCurve::Circle { radius } => Point::new(radius * c, radius * s),
            DomainCurve::Ellipse { a, b } => Point::new(a * c, b * s),
            DomainCurve::Star { .. } => {
                let (r, _, _) = self.polar(t);
                Point::new(r * c, r * s)
            }
        }
    }

    pub fn gamma_prime(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        match *self {
            DomainCurve::Circle { radius } => Point::new(-radius * s, radius * c),
            DomainCurve::Ellipse { a, b } => Point::new(-a * s, b * c),
            DomainCurve::Star { .. } => {
                let (r, dr, _) = self.polar(t);
                Point::new(dr * c - r * s, dr * s + r * c)
            }
        }
    }

    pub fn gamma_second(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        match *self {
            DomainCurve::Circle { radius } => Point::new(-radius * c, -radius * s),
            DomainCurve::Ellipse { a, b } => Point::new(-a * c, -b * s),
            DomainCurve::Star { .. } => {
                let (r, dr, ddr) = self.polar(t);
                Point::new(
                    ddr * c - 2.0 * dr * s - r * c,
                    ddr * s + 2.0 * dr * c - r * s,
                )
            }
        }
    }

    fn polar(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            DomainCurve::Star { radius, eps, lobes } => {
                let k = lobes as f64;
                let (s, c) = (k * t).sin_cos();
                (
                    radius * (1.0 + eps * c),
                    -radius * eps * k * s,
                    -radius * eps * k * k * c,
                )
            }
            _ => unreachable!(),
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.gamma_prime(t).norm()
    }

    /// Outward unit normal.
    pub fn normal(&self, t: f64) -> Point {
        let d = self.gamma_prime(t);
        Point::new(d.y, -d.x) / d.norm()
    }

    /// Signed curvature, positive for convex arcs.
    pub fn curvature(&self, t: f64) -> f64 {
        let d1 = self.gamma_prime(t);
        let d2 = self.gamma_second(t);
        (d1.x * d2.y - d1.y * d2.x) / d1.norm().powi(3)
    }

    /// Distance from the origin to the curve along direction `theta`.
    pub fn radial_extent(&self, theta: f64) -> f64 {
        match *self {
            DomainCurve::Circle { radius } => radius,
            DomainCurve::Ellipse { a, b } => {
                let (s, c) = theta.sin_cos();
                1.0 / ((c / a).powi(2) + (s / b).powi(2)).sqrt()
            }
            DomainCurve::Star { .. } => self.polar(theta).0,
        }
    }

    /// Exact membership test in the open domain.
    pub fn contains(&self, x: &Point) -> bool {
        x.norm() < self.radial_extent(x.y.atan2(x.x))
    }

    pub fn arclength(&self) -> f64 {
        let n = 1024;
        (0..n)
            .map(|i| self.speed(2.0 * PI * i as f64 / n as f64))
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64
    }

    pub fn area(&self) -> f64 {
        let n = 1024;
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                let g = self.gamma(t);
                let d = self.gamma_prime(t);
                0.5 * (g.x * d.y - g.y * d.x)
            })
            .sum::<f64>()
            * 2.0
            * PI
            / n as f64
    }

    pub fn centroid(&self) -> Point {
        let n = 1024;
        let mut c = Point::zeros();
        for i in 0..n {
            let t = 2.0 * PI * i as f64 / n as f64;
            let g = self.gamma(t);
            let d = self.gamma_prime(t);
            c += Point::new(0.5 * g.x * g.x * d.y, -0.5 * g.y * g.y * d.x);
        }
        c * (2.0 * PI / n as f64) / self.area()
    }

    pub fn diameter(&self) -> f64 {
        let n = 512;
        let pts: Vec<Point> = (0..n)
            .map(|i| self.gamma(2.0 * PI * i as f64 / n as f64))
            .collect();
        let mut d: f64 = 0.0;
        for p in &pts {
            for q in &pts {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// Lower bound on the reach from the maximal curvature.
    pub fn reach(&self) -> f64 {
        let n = 2048;
        let kmax = (0..n)
            .map(|i| self.curvature(2.0 * PI * i as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        1.0 / kmax
    }

    /// Parameters of `count` points equally spaced in arclength, starting at t = 0.
    pub fn arclength_parameters(&self, count: usize) -> Vec<f64> {
        let fine = 16 * count.max(256);
        let dt = 2.0 * PI / fine as f64;
        let mut cumulative = Vec::with_capacity(fine + 1);
        cumulative.push(0.0);
        let mut s = 0.0;
        for i in 0..fine {
            let t0 = i as f64 * dt;
            // Simpson on each cell.
            s += dt / 6.0 * (self.speed(t0) + 4.0 * self.speed(t0 + 0.5 * dt) + self.speed(t0 + dt));
            cumulative.push(s);
        }
        let total = s;
        let mut out = Vec::with_capacity(count);
        let mut cell = 0;
        for k in 0..count {
            let target = total * k as f64 / count as f64;
            while cumulative[cell + 1] < target {
                cell += 1;
            }
            let frac = (target - cumulative[cell]) / (cumulative[cell + 1] - cumulative[cell]);
            let mut t = (cell as f64 + frac) * dt;
            // One Newton correction on the local arclength.
            let t0 = cell as f64 * dt;
            let local = crate::quadrature::integrate_adaptive(|u| self.speed(u), t0, t, 1e-13, 20);
            t -= (cumulative[cell] + local - target) / self.speed(t);
            out.push(t);
        }
        out
    }
}

impl fmt::Display for DomainCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainCurve::Circle { radius } => write!(f, "circle:{radius}"),
            DomainCurve::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            DomainCurve::Star { radius, eps, lobes } => write!(f, "star:{radius},{eps},{lobes}"),
        }
    }
}

impl FromStr for DomainCurve {
    type Err = Error;

    /// Parses `circle[:r]`, `ellipse:a,b` or `star[:r,eps,lobes]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::CurveSpec(s.to_string());
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), a),
            None => (s.trim(), ""),
        };
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        let curve = match (name, nums.as_slice()) {
            ("circle" | "disk", []) => DomainCurve::unit_circle(),
            ("circle" | "disk", [r]) => DomainCurve::Circle { radius: *r },
            ("ellipse", [a, b]) => DomainCurve::Ellipse { a: *a, b: *b },
            ("star", []) => DomainCurve::Star {
                radius: 1.0,
                eps: 0.05,
                lobes: 5,
            },
            ("star", [r, e, k]) if k.fract() == 0.0 && *k >= 1.0 => DomainCurve::Star {
                radius: *r,
                eps: *e,
                lobes: *k as u32,
            },
            _ => return Err(bad()),
        };
        let ok = match curve {
            DomainCurve::Circle { radius } => radius > 0.0,
            DomainCurve::Ellipse { a, b } => a > 0.0 && b > 0.0,
            DomainCurve::Star { radius, eps, .. } => radius > 0.0 && eps.abs() < 1.0,
        };
        if ok {
            Ok(curve)
        } else {
            Err(bad())
        }
    }
}

/// Equispaced periodic discretization of a curve with trapezoid weights.
#[derive(Clone, Debug)]
pub struct BoundaryGrid {
    pub curve: DomainCurve,
    pub t: Vec<f64>,
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub speeds: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BoundaryGrid {
    pub fn new(curve: DomainCurve, n: usize) -> Self {
        let t: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let points = t.iter().map(|&s| curve.gamma(s)).collect();
        let normals = t.iter().map(|&s| curve.normal(s)).collect();
        let speeds: Vec<f64> = t.iter().map(|&s| curve.speed(s)).collect();
        let weights = speeds.iter().map(|v| 2.0 * PI * v / n as f64).collect();
        Self {
            curve,
            t,
            points,
            normals,
            speeds,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Largest arclength gap between neighbouring nodes.
    pub fn max_spacing(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// Distance from `x` to the nearest node.
    pub fn nearest_node_distance(&self, x: &Point) -> f64 {
        self.points
            .iter()
            .map(|p| (p - x).norm_squared())
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

/// Closest-point projection onto the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    /// Signed distance, negative inside.
    pub rho: f64,
    pub foot: Point,
    pub normal: Point,
    pub t: f64,
}

const COARSE_SAMPLES: usize = 256;

/// Signed distance to the curve with its foot point and outward normal.
pub fn signed_distance(curve: &DomainCurve, x: &Point) -> Result<Projection> {
    let dt = 2.0 * PI / COARSE_SAMPLES as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..COARSE_SAMPLES {
        let t = i as f64 * dt;
        let d = (curve.gamma(t) - x).norm_squared();
        if d < best.0 {
            best = (d, t);
        }
    }
    // Stationarity of |γ(t) - x|^2 on a bracket around the coarse minimum,
    // by safeguarded Newton.
    let f = |t: f64| (curve.gamma(t) - x).dot(&curve.gamma_prime(t));
    let df = |t: f64| {
        let d1 = curve.gamma_prime(t);
        d1.norm_squared() + (curve.gamma(t) - x).dot(&curve.gamma_second(t))
    };
    let (mut lo, mut hi) = (best.1 - dt, best.1 + dt);
    let (flo, fhi) = (f(lo), f(hi));
    let mut t = best.1;
    let scale = curve.speed(t).max(1.0) * (x.norm() + 1.0);
    if flo < 0.0 && fhi > 0.0 {
        let mut converged = false;
        for _ in 0..50 {
            let fv = f(t);
            if fv.abs() <= 1e-15 * scale {
                converged = true;
                break;
            }
            if fv < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let d = df(t);
            let newton = t - fv / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() < 1e-15 * (1.0 + t.abs()) || hi - lo < 1e-15 {
                t = next;
                converged = true;
                break;
            }
            t = next;
        }
        if !converged {
            return Err(Error::ProjectionFailure(x.x, x.y));
        }
    } else if (curve.gamma(lo) - x).norm_squared() < best.0 || (curve.gamma(hi) - x).norm_squared() < best.0 {
        return Err(Error::ProjectionFailure(x.x, x.y));
    }
    let foot = curve.gamma(t);
    let normal = curve.normal(t);
    let dist = (x - foot).norm();
    let rho = if curve.contains(x) { -dist } else { dist };
    Ok(Projection {
        rho,
        foot,
        normal,
        t: t.rem_euclid(2.0 * PI),
    })
}

/// Scattered centers inside the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterSet {
    pub points: Vec<Point>,
    /// Measured fill distance (an upper bound for supersets).
    pub fill_distance: f64,
    /// Half the minimal pairwise distance.
    pub separation: f64,
}

impl CenterSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tree(&self) -> KdTree<f64, 2> {
        build_tree(&self.points)
    }

    /// Writes `x,y` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.x, p.y)?;
        }
        Ok(())
    }
}

pub fn build_tree(points: &[Point]) -> KdTree<f64, 2> {
    let mut tree: KdTree<f64, 2> = KdTree::with_capacity(points.len().max(1));
    for (i, p) in points.iter().enumerate() {
        tree.add(&[p.x, p.y], i as u64);
    }
    tree
}

/// Half the smallest distance between two distinct entries.
pub fn separation_distance(points: &[Point]) -> f64 {
    if points.len() < 2 {
        return f64::INFINITY;
    }
    let tree = build_tree(points);
    let mut q = f64::INFINITY;
    for p in points {
        let nn = tree.nearest_n::<SquaredEuclidean>(&[p.x, p.y], 2);
        if let Some(second) = nn.get(1) {
            q = q.min(second.distance);
        }
    }
    0.5 * q.sqrt()
}

fn sup_distance<I: Iterator<Item = Point>>(tree: &KdTree<f64, 2>, samples: I) -> f64 {
    samples
        .map(|x| tree.nearest_one::<SquaredEuclidean>(&[x.x, x.y]).distance)
        .fold(0.0, f64::max)
        .sqrt()
}

fn fill_distance_at(tree: &KdTree<f64, 2>, curve: &DomainCurve, spacing: f64) -> f64 {
    let (mut xmax, mut ymax): (f64, f64) = (0.0, 0.0);
    let n_b = ((curve.arclength() / spacing).ceil() as usize).max(64);
    let boundary: Vec<Point> = (0..n_b)
        .map(|i| curve.gamma(2.0 * PI * i as f64 / n_b as f64))
        .collect();
    for p in &boundary {
        xmax = xmax.max(p.x.abs());
        ymax = ymax.max(p.y.abs());
    }
    let nx = (xmax / spacing).ceil() as i64;
    let ny = (ymax / spacing).ceil() as i64;
    let interior = (-nx..=nx).flat_map(move |i| {
        (-ny..=ny).map(move |j| Point::new(i as f64 * spacing, j as f64 * spacing))
    });
    let interior = interior.filter(|p| curve.contains(p));
    sup_distance(tree, interior.chain(boundary))
}

/// Fill distance of `centers` in the domain bounded by `curve`.
///
/// Starts from a background grid of the given spacing and halves it until it
/// is below a quarter of the estimate; the result underestimates the true
/// supremum by at most the final spacing.
pub fn fill_distance(centers: &[Point], curve: &DomainCurve, resolution: f64) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let tree = build_tree(centers);
    let mut spacing = resolution;
    loop {
        let h = fill_distance_at(&tree, curve, spacing);
        if spacing <= 0.25 * h {
            return Ok(h);
        }
        spacing *= 0.5;
    }
}

/// Fill distance restricted to the boundary tube of the given depth, sampled in
/// normal coordinates with the given spacing.
pub fn boundary_zone_fill_distance(
    centers: &[Point],
    curve: &DomainCurve,
    depth: f64,
    spacing: f64,
) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let tree = build_tree(centers);
    let n_t = (curve.arclength() / spacing).ceil() as usize;
    let n_s = (depth / spacing).ceil() as usize;
    let ts = curve.arclength_parameters(n_t);
    let samples = ts.into_iter().flat_map(|t| {
        let g = curve.gamma(t);
        let n = curve.normal(t);
        (0..=n_s).map(move |k| g - n * (depth * k as f64 / n_s as f64))
    });
    Ok(sup_distance(&tree, samples))
}

fn hex_lattice(curve: &DomainCurve, spacing: f64, jitter: f64, inset: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let rmax = (0..360)
        .map(|i| curve.radial_extent(i as f64 * PI / 180.0))
        .fold(0.0, f64::max);
    let row = spacing * 3f64.sqrt() / 2.0;
    let ny = (rmax / row).ceil() as i64 + 1;
    let nx = (rmax / spacing).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in -ny..=ny {
        let shift = if j.rem_euclid(2) == 1 { 0.5 * spacing } else { 0.0 };
        for i in -nx..=nx {
            let base = Point::new(i as f64 * spacing + shift, j as f64 * row);
            let r = jitter * spacing * rng.gen::<f64>().sqrt();
            let a = 2.0 * PI * rng.gen::<f64>();
            let p = base + Point::new(r * a.cos(), r * a.sin());
            if !curve.contains(&p) {
                continue;
            }
            let inside_far = p.norm() < curve.radial_extent(p.y.atan2(p.x)) - 2.0 * inset - 4.0 * spacing;
            if inside_far {
                out.push(p);
                continue;
            }
            if let Ok(proj) = signed_distance(curve, &p) {
                if proj.rho < -inset {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Jittered hexagonal centers with measured fill distance in
/// `[target_h, 2 target_h]`. Deterministic for a given seed.
pub fn generate_centers(curve: &DomainCurve, target_h: f64, seed: u64) -> Result<CenterSet> {
    let inradius = (0..720)
        .map(|i| {
            let t = i as f64 * PI / 360.0;
            curve.radial_extent(t)
        })
        .fold(f64::INFINITY, f64::min);
    if !(target_h > 0.0) || target_h >= inradius {
        return Err(Error::DensityUnreachable(format!(
            "target fill distance {target_h} must be below the inradius {inradius:.3}"
        )));
    }
    let mut scale = 0.65;
    for _ in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spacing = 3f64.sqrt() * target_h * scale;
        let points = hex_lattice(curve, spacing, 0.1, 0.25 * target_h, &mut rng);
        if points.is_empty() {
            return Err(Error::DensityUnreachable("clipping removed every center".into()));
        }
        let h = fill_distance(&points, curve, 0.25 * target_h)?;
        if h < target_h || h > 2.0 * target_h {
            // Fill distance scales linearly with the lattice spacing.
            scale *= 1.3 * target_h / h;
        } else {
            let separation = separation_distance(&points);
            return Ok(CenterSet {
                points,
                fill_distance: h,
                separation,
            });
        }
    }
    Err(Error::DensityUnreachable(format!(
        "could not place centers with fill distance near {target_h}"
    )))
}

/// Depths of the boundary layers for spacing `s`: `s/2, s, 2s, ..., 2m s`.
pub fn layer_depths(spacing: f64, m: usize) -> Vec<f64> {
    std::iter::once(0.5 * spacing)
        .chain((1..=2 * m).map(|j| j as f64 * spacing))
        .collect()
}

/// Appends `2m + 1` inward layers of spacing `h^nu` along the boundary.
pub fn oversample_boundary(
    curve: &DomainCurve,
    centers: &CenterSet,
    h: f64,
    nu: f64,
    m: usize,
) -> Result<CenterSet> {
    if nu < 1.0 {
        return Err(Error::InvalidParams(format!("oversampling exponent {nu} < 1")));
    }
    let spacing = h.powf(nu);
    let depth = 2.0 * m as f64 * spacing;
    let reach = curve.reach();
    if depth >= reach {
        return Err(Error::ReachViolation { depth, reach });
    }
    let count = (curve.arclength() / spacing).ceil() as usize;
    let ts = curve.arclength_parameters(count);
    let mut points = centers.points.clone();
    for depth in layer_depths(spacing, m) {
        for &t in &ts {
            points.push(curve.gamma(t) - curve.normal(t) * depth);
        }
    }
    let separation = separation_distance(&points);
    Ok(CenterSet {
        points,
        fill_distance: centers.fill_distance,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ellipse() -> DomainCurve {
        DomainCurve::Ellipse { a: 2.0, b: 1.0 }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["circle:1", "ellipse:2,1", "star:1,0.1,5"] {
            let c: DomainCurve = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!("ellipse:2".parse::<DomainCurve>().is_err());
        assert!("square".parse::<DomainCurve>().is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-5;
        for c in [ellipse(), DomainCurve::Star { radius: 1.0, eps: 0.2, lobes: 3 }] {
            for t in [0.0, 0.7, 2.0, 5.5] {
                let fd1 = (c.gamma(t + h) - c.gamma(t - h)) / (2.0 * h);
                let fd2 = (c.gamma_prime(t + h) - c.gamma_prime(t - h)) / (2.0 * h);
                assert!((fd1 - c.gamma_prime(t)).norm() < 1e-9);
                assert!((fd2 - c.gamma_second(t)).norm() < 1e-9);
            }
            assert!((c.gamma(0.0) - c.gamma(2.0 * PI)).norm() < 1e-14);
        }
    }

    #[test]
    fn grid_invariants() {
        let g = BoundaryGrid::new(ellipse(), 128);
        // Perimeter of ellipse(2,1) to 15 digits.
        let perimeter = 9.688_448_220_547_675;
        let sum: f64 = g.weights.iter().sum();
        assert!((sum - perimeter).abs() / perimeter < 1e-10);
        let mx: f64 = g.points.iter().zip(&g.weights).map(|(p, w)| p.x * w).sum();
        assert!(mx.abs() < 1e-10);
        for i in 0..g.len() {
            assert!((g.normals[i].norm() - 1.0).abs() < 1e-14);
            assert!(g.normals[i].dot(&ellipse().gamma_prime(g.t[i])).abs() < 1e-14);
        }
        // Winding number about the origin.
        let mut wind = 0.0;
        for i in 0..g.len() {
            let a = g.points[i];
            let b = g.points[(i + 1) % g.len()];
            wind += (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
        }
        assert!((wind / (2.0 * PI) - 1.0).abs() < 1e-12);
        let c = g.curve;
        assert!((c.area() - 2.0 * PI).abs() < 1e-12);
        assert!(c.centroid().norm() < 1e-12);
    }

    #[test]
    fn signed_distance_examples() {
        let c = DomainCurve::unit_circle();
        let p = signed_distance(&c, &Point::new(0.5, 0.0)).unwrap();
        assert!((p.rho + 0.5).abs() < 1e-14);
        assert!((p.foot - Point::new(1.0, 0.0)).norm() < 1e-12);
        let p = signed_distance(&c, &Point::new(2.0, 0.0)).unwrap();
        assert!((p.rho - 1.0).abs() < 1e-14);
        // Centre of the circle: every foot point is valid.
        let p = signed_distance(&c, &Point::zeros()).unwrap();
        assert!((p.rho + 1.0).abs() < 1e-14);

        let e = ellipse();
        let x = Point::new(0.0, 0.25);
        let p = signed_distance(&e, &x).unwrap();
        let n = 1_000_000;
        let brute = (0..n)
            .map(|i| (e.gamma(2.0 * PI * i as f64 / n as f64) - x).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((p.rho + brute).abs() < 1e-8, "{} vs {}", p.rho, brute);
        assert!((x - (p.foot + p.normal * p.rho)).norm() < 1e-12);
    }

    #[test]
    fn fill_distance_examples() {
        let c = DomainCurve::unit_circle();
        let h = fill_distance(&[Point::zeros()], &c, 0.05).unwrap();
        assert!((h - 1.0).abs() < 0.02);
        let h2 = fill_distance(&[Point::zeros(), Point::new(0.5, 0.0)], &c, 0.05).unwrap();
        assert!(h2 <= h);
        assert!(matches!(fill_distance(&[], &c, 0.1), Err(Error::EmptyCenters)));
    }

    #[test]
    fn hex_lattice_fill_distance() {
        // Interior-dominated regime: distances measured inside radius 0.5
        // against a brute-force nearest search.
        let s = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = DomainCurve::unit_circle();
        let pts = hex_lattice(&c, s, 0.0, 0.0, &mut rng);
        let step = 0.002;
        let mut sup: f64 = 0.0;
        let n = (0.5 / step) as i64;
        for i in -n..=n {
            for j in -n..=n {
                let x = Point::new(i as f64 * step, j as f64 * step);
                if x.norm() > 0.5 {
                    continue;
                }
                let d = pts.iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min);
                sup = sup.max(d);
            }
        }
        let expect = s / 3f64.sqrt();
        assert!((sup - expect).abs() / expect < 0.03, "{sup} vs {expect}");
    }

    #[test]
    fn generated_centers() {
        let c = DomainCurve::unit_circle();
        let a = generate_centers(&c, 0.2, 7).unwrap();
        assert!(a.fill_distance >= 0.2 && a.fill_distance <= 0.4, "{}", a.fill_distance);
        let b = generate_centers(&c, 0.2, 7).unwrap();
        assert_eq!(a, b);
        for p in &a.points {
            assert!(signed_distance(&c, p).unwrap().rho < -0.05 + 1e-12);
        }
        let half = generate_centers(&c, 0.1, 7).unwrap();
        let ratio = half.len() as f64 / a.len() as f64;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        for h in [0.1, 0.05, 0.025] {
            let s = generate_centers(&ellipse(), h, 3).unwrap();
            assert!(s.fill_distance >= h && s.fill_distance <= 2.0 * h);
        }
        assert!(generate_centers(&c, 1.5, 0).is_err());
    }

    #[test]
    fn oversampling_layers() {
        let c = DomainCurve::unit_circle();
        let base = generate_centers(&c, 0.1, 1).unwrap();
        let over = oversample_boundary(&c, &base, 0.1, 1.0, 2).unwrap();
        let added = over.len() - base.len();
        let expect = 5.0 * 2.0 * PI / 0.1;
        assert!((added as f64 - expect).abs() <= 5.0, "{added} vs {expect}");

        let over = oversample_boundary(&c, &base, 0.1, 2.0, 2).unwrap();
        let depths: Vec<f64> = over.points[base.len()..]
            .iter()
            .map(|p| 1.0 - p.norm())
            .collect();
        let mut distinct: Vec<f64> = Vec::new();
        for d in depths {
            if !distinct.iter().any(|e| (e - d).abs() < 1e-12) {
                distinct.push(d);
            }
        }
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [0.005, 0.01, 0.02, 0.03, 0.04];
        assert_eq!(distinct.len(), 5);
        for (d, e) in distinct.iter().zip(expect) {
            assert!((d - e).abs() < 1e-12);
        }
        for p in &over.points {
            assert!(c.contains(p));
        }
        let zone = boundary_zone_fill_distance(&over.points, &c, 0.04, 0.001).unwrap();
        assert!(zone <= 0.01, "zone fill distance {zone}");

        let star = DomainCurve::Star { radius: 1.0, eps: 0.05, lobes: 5 };
        let base = generate_centers(&star, 0.1, 2).unwrap();
        let over = oversample_boundary(&star, &base, 0.1, 2.0, 2).unwrap();
        let zone = boundary_zone_fill_distance(&over.points, &star, 0.04, 0.001).unwrap();
        assert!(zone <= 0.01, "zone fill distance {zone}");
        assert!(matches!(
            oversample_boundary(&c, &base, 0.5, 1.0, 2),
            Err(Error::ReachViolation { .. })
        ));
    }

    #[test]
    fn arclength_parameters_are_equispaced() {
        let e = ellipse();
        let ts = e.arclength_parameters(100);
        let l = e.arclength();
        for i in 0..100 {
            let a = ts[i];
            let b = if i + 1 < 100 { ts[i + 1] } else { 2.0 * PI };
            let s = crate::quadrature::integrate_adaptive(|u| e.speed(u), a, b, 1e-13, 30);
            assert!((s - l / 100.0).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn boundary_points_have_zero_distance(t in 0.0..6.283f64) {
            for c in [DomainCurve::unit_circle(), ellipse(), DomainCurve::Star { radius: 1.0, eps: 0.1, lobes: 5 }] {
                let p = signed_distance(&c, &c.gamma(t)).unwrap();
                prop_assert!(p.rho.abs() < 1e-12);
            }
        }

        #[test]
        fn projection_reconstructs_point(x in -1.8..1.8f64, y in -0.9..0.9f64) {
            let e = ellipse();
            let q = Point::new(x, y);
            let p = signed_distance(&e, &q).unwrap();
            prop_assert!((q - (p.foot + p.normal * p.rho)).norm() < 1e-9);
            prop_assert_eq!(p.rho < 0.0, e.contains(&q));
        }
    }
}
