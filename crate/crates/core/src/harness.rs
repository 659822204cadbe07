//! Experiment driver: convergence studies, identity checks and error-kernel
//! measurements.

use crate::error::{Error, Result};
use crate::geometry::{generate_centers, oversample_boundary, BoundaryGrid, CenterSet, DomainCurve, Point};
use crate::kernel::{lambda_phi, SplineParams};
use crate::lpr::Reproducer;
use crate::scheme::{assemble_txi, graded_quadrature, interior_quadrature, Approximant, GreensRepresentation, SchemeGrids};
use crate::target::{target_by_name, TargetFunction};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Boundary oversampling: a fixed exponent, or the critical one for `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OversampleConfig {
    pub nu: Option<f64>,
    /// Norm index for the critical exponent; `"inf"` or a number.
    pub p: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_curve")]
    pub curve: String,
    #[serde(default = "default_m")]
    pub m: usize,
    pub target: String,
    /// Target fill distances, strictly decreasing.
    pub h: Vec<f64>,
    #[serde(default = "default_norms")]
    pub norms: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Points per side of the probe grid used for the sup norm.
    #[serde(default = "default_probe_grid")]
    pub probe_grid: usize,
    /// Level of the polar rule used for the 1- and 2-norms.
    #[serde(default = "default_error_level")]
    pub error_level: usize,
    pub oversampling: Option<OversampleConfig>,
    #[serde(default)]
    pub scheme: SchemeGrids,
}

fn default_curve() -> String {
    "circle".into()
}
fn default_m() -> usize {
    2
}
fn default_norms() -> Vec<String> {
    vec!["1".into(), "2".into(), "inf".into()]
}
fn default_probe_grid() -> usize {
    512
}
fn default_error_level() -> usize {
    48
}

fn parse_p(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "∞" => Ok(f64::INFINITY),
        v => v
            .parse::<f64>()
            .ok()
            .filter(|p| *p >= 1.0)
            .ok_or_else(|| Error::InvalidParams(format!("invalid norm index {v}"))),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.curve()?;
        target_by_name(&self.target)?;
        SplineParams::planar(self.m)?;
        if self.h.len() < 3 {
            return Err(Error::InvalidParams("at least three h values are needed for a rate fit".into()));
        }
        if self.h.iter().any(|h| !(*h > 0.0)) || self.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParams("h ladder must be positive and strictly decreasing".into()));
        }
        for p in &self.norms {
            parse_p(p)?;
        }
        if self.probe_grid < 2 {
            return Err(Error::InvalidParams("probe grid too small".into()));
        }
        self.oversampling_exponent()?;
        Ok(())
    }

    pub fn curve(&self) -> Result<DomainCurve> {
        self.curve.parse()
    }

    /// `ν` for this experiment, if oversampling is requested.
    pub fn oversampling_exponent(&self) -> Result<Option<f64>> {
        let Some(o) = &self.oversampling else { return Ok(None) };
        if let Some(nu) = o.nu {
            if nu < 1.0 {
                return Err(Error::InvalidParams(format!("oversampling exponent {nu} < 1")));
            }
            return Ok(Some(nu));
        }
        let p = parse_p(o.p.as_deref().unwrap_or("inf"))?;
        Ok(Some(oversampling_budget(2, self.m, p).0))
    }
}

/// Critical oversampling exponent `ν = 2mp/(mp+1)` (2 for `p = ∞`) and whether
/// the added points stay within `O(h^{-d})`, which needs `p ≤ d/((d-2)m)`.
pub fn oversampling_budget(d: usize, m: usize, p: f64) -> (f64, bool) {
    let mp = m as f64 * p;
    let nu = if p.is_infinite() { 2.0 } else { 2.0 * mp / (mp + 1.0) };
    let feasible = d <= 2 || p <= d as f64 / ((d - 2) as f64 * m as f64);
    (nu, feasible)
}

/// Grid points strictly inside the curve, `per_side` per coordinate over the
/// bounding box.
pub fn probe_grid(curve: &DomainCurve, per_side: usize) -> Vec<Point> {
    let r = (0..360)
        .map(|i| curve.radial_extent(2.0 * PI * i as f64 / 360.0))
        .fold(0.0, f64::max);
    let mut out = Vec::new();
    for i in 0..per_side {
        for j in 0..per_side {
            let u = -r + 2.0 * r * (i as f64 + 0.5) / per_side as f64;
            let v = -r + 2.0 * r * (j as f64 + 0.5) / per_side as f64;
            let p = Point::new(u, v);
            if curve.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Errors of one approximant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2: f64,
    pub l1: f64,
}

pub fn error_norms(
    s: &Approximant,
    f: &dyn TargetFunction,
    probes: &[Point],
    curve: &DomainCurve,
    level: usize,
) -> Result<ErrorNorms> {
    let linf = probes.iter().map(|x| (s.eval(x) - f.value(x)).abs()).fold(0.0, f64::max);
    let quad = interior_quadrature(curve, level)?;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for (x, w) in quad.nodes.iter().zip(&quad.weights) {
        let e = (s.eval(x) - f.value(x)).abs();
        l1 += w * e;
        l2 += w * e * e;
    }
    Ok(ErrorNorms {
        linf,
        l2: l2.sqrt(),
        l1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RungResult {
    pub h_target: f64,
    pub fill_distance: f64,
    pub n_centers: usize,
    pub n_boundary_nodes: usize,
    pub errors: ErrorNorms,
    pub runtime: f64,
    pub failure: Option<String>,
}

/// Fitted rates against the measured fill distance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Rates {
    pub linf: Option<f64>,
    pub l2: Option<f64>,
    pub l1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<RungResult>,
    pub rates: Rates,
    pub oversampling: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 3 || xs.len() != ys.len() || ys.iter().any(|y| !(*y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

impl ErrorReport {
    fn fit(rows: &[RungResult]) -> Rates {
        let ok: Vec<&RungResult> = rows.iter().filter(|r| r.failure.is_none()).collect();
        let tail = &ok[ok.len().saturating_sub(3)..];
        let hs: Vec<f64> = tail.iter().map(|r| r.fill_distance).collect();
        let rate = |sel: fn(&ErrorNorms) -> f64| fit_rate(&hs, &tail.iter().map(|r| sel(&r.errors)).collect::<Vec<_>>());
        Rates {
            linf: rate(|e| e.linf),
            l2: rate(|e| e.l2),
            l1: rate(|e| e.l1),
        }
    }

    /// Per-rung table. Runtimes are kept out so identical runs give identical files.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| Error::InvalidParams(e.to_string());
        out.write_record(["h", "fill_distance", "n_centers", "n_boundary_nodes", "err_linf", "err_l2", "err_l1", "failure"])
            .map_err(io)?;
        for r in &self.rows {
            out.write_record([
                format!("{:e}", r.h_target),
                format!("{:e}", r.fill_distance),
                r.n_centers.to_string(),
                r.n_boundary_nodes.to_string(),
                format!("{:e}", r.errors.linf),
                format!("{:e}", r.errors.l2),
                format!("{:e}", r.errors.l1),
                r.failure.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| Error::InvalidParams(e.to_string()))
    }

    pub fn write_summary<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| Error::InvalidParams(e.to_string());
        out.write_record(["norm", "rate", "oversampling"]).map_err(io)?;
        let nu = self.oversampling.map(|v| v.to_string()).unwrap_or_default();
        for (name, rate) in [("inf", self.rates.linf), ("2", self.rates.l2), ("1", self.rates.l1)] {
            out.write_record([name.to_string(), rate.map(|r| format!("{r:.4}")).unwrap_or_default(), nu.clone()])
                .map_err(io)?;
        }
        out.flush().map_err(|e| Error::InvalidParams(e.to_string()))
    }

    pub fn write_timing<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| Error::InvalidParams(e.to_string());
        out.write_record(["h", "runtime_s"]).map_err(io)?;
        for r in &self.rows {
            out.write_record([format!("{:e}", r.h_target), format!("{:.3}", r.runtime)]).map_err(io)?;
        }
        out.flush().map_err(|e| Error::InvalidParams(e.to_string()))
    }

    /// Writes `<output>`, `<stem>_rates.csv` and `<stem>_timing.csv`.
    pub fn write_files(&self, output: &Path) -> Result<()> {
        let create = |p: &Path| std::fs::File::create(p).map_err(|e| Error::InvalidParams(format!("{}: {e}", p.display())));
        if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::InvalidParams(format!("{}: {e}", dir.display())))?;
        }
        let stem = output.with_extension("");
        let sibling = |suffix: &str| PathBuf::from(format!("{}_{suffix}.csv", stem.display()));
        self.write_csv(create(output)?)?;
        self.write_summary(create(&sibling("rates"))?)?;
        self.write_timing(create(&sibling("timing"))?)
    }
}

/// Centers for one rung, with the boundary layers when oversampling.
pub fn rung_centers(curve: &DomainCurve, h: f64, seed: u64, m: usize, nu: Option<f64>) -> Result<CenterSet> {
    let base = generate_centers(curve, h, seed)?;
    match nu {
        Some(nu) => oversample_boundary(curve, &base, base.fill_distance, nu, m),
        None => Ok(base),
    }
}

/// Runs the convergence study described by `config`.
pub fn converge(config: &ExperimentConfig) -> Result<ErrorReport> {
    config.validate()?;
    let curve = config.curve()?;
    let params = SplineParams::planar(config.m)?.with_length_scale(curve.diameter());
    let f = target_by_name(&config.target)?;
    let nu = config.oversampling_exponent()?;
    let probes = probe_grid(&curve, config.probe_grid);
    let mut rows = Vec::new();
    for (rung, &h) in config.h.iter().enumerate() {
        let start = Instant::now();
        let attempt = || -> Result<(CenterSet, usize, ErrorNorms)> {
            let centers = rung_centers(&curve, h, config.seed.wrapping_add(rung as u64), config.m, nu)?;
            let (s, stats) = assemble_txi(&params, f.as_ref(), &curve, &centers, &config.scheme, nu)?;
            let errors = error_norms(&s, f.as_ref(), &probes, &curve, config.error_level)?;
            Ok((centers, stats.boundary_nodes, errors))
        };
        let row = match attempt() {
            Ok((centers, nb, errors)) => RungResult {
                h_target: h,
                fill_distance: centers.fill_distance,
                n_centers: centers.len(),
                n_boundary_nodes: nb,
                errors,
                runtime: start.elapsed().as_secs_f64(),
                failure: None,
            },
            Err(e) => {
                log::warn!("rung h={h} failed: {e}");
                RungResult {
                    h_target: h,
                    fill_distance: f64::NAN,
                    n_centers: 0,
                    n_boundary_nodes: 0,
                    errors: ErrorNorms::default(),
                    runtime: start.elapsed().as_secs_f64(),
                    failure: Some(e.to_string()),
                }
            }
        };
        log::info!(
            "h={h}: fill {:.4}, {} centers, sup error {:.3e}",
            row.fill_distance,
            row.n_centers,
            row.errors.linf
        );
        rows.push(row);
    }
    for w in rows.windows(2) {
        if w[0].failure.is_none() && w[1].failure.is_none() && w[1].errors.linf > w[0].errors.linf {
            log::warn!("sup error increased from h={} to h={}", w[0].h_target, w[1].h_target);
        }
    }
    let report = ErrorReport {
        rates: ErrorReport::fit(&rows),
        rows,
        oversampling: nu,
    };
    if let Some(out) = &config.output {
        report.write_files(out)?;
    }
    Ok(report)
}

/// Outcome of reconstructing `f` from the Green's representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreensCheck {
    pub max_error: f64,
    /// Whether the error is small enough to confirm the kernel constant.
    pub constant_confirmed: bool,
}

pub fn greens_identity_check(
    params: &SplineParams,
    curve: &DomainCurve,
    f: &dyn TargetFunction,
    n: usize,
    level: usize,
    probes: &[Point],
) -> Result<GreensCheck> {
    let grid = BoundaryGrid::new(*curve, n);
    let rep = GreensRepresentation::new(params, f, &grid, level)?;
    let mut worst: f64 = 0.0;
    for x in probes {
        worst = worst.max((rep.eval(x)?.value - f.value(x)).abs());
    }
    Ok(GreensCheck {
        max_error: worst,
        constant_confirmed: worst < 1e-6,
    })
}

/// Measured operator norms of the local-reproduction error kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorKernelNorms {
    /// `sup_x ∫_Ω |φ(x-α) - Σ a(α,ξ) φ(x-ξ)| dα`.
    pub interior: f64,
    /// `sup_x ∫_∂Ω |λ_{j,α} φ(x-α) - Σ a_j(α,ξ) φ(x-ξ)| dσ(α)` for `j < m`.
    pub boundary: Vec<f64>,
}

/// Evaluates the error-kernel norms with the sup taken over `targets`.
pub fn error_kernel_norms(
    params: &SplineParams,
    curve: &DomainCurve,
    centers: &CenterSet,
    h_local: f64,
    gamma: f64,
    targets: &[Point],
) -> Result<ErrorKernelNorms> {
    let m = params.m();
    let h = centers.fill_distance;
    let order = 2 * m as u32;
    let rep = Reproducer::new(centers.points.clone(), Some(*curve))?.with_gamma(gamma);
    let phi = |x: &Point, y: &Point| params.phi_from_r2((x - y).norm_squared());

    let quad = graded_quadrature(curve, (h / 4.0).min(0.02))?;
    let mut interior = vec![0.0; targets.len()];
    for (alpha, w) in quad.nodes.iter().zip(&quad.weights) {
        let lpr = rep.interior(alpha, h, order)?;
        for (k, x) in targets.iter().enumerate() {
            let approx: f64 = lpr.support.iter().zip(&lpr.coefficients).map(|(&i, c)| c * phi(x, &centers.points[i])).sum();
            interior[k] += w * (phi(x, alpha) - approx).abs();
        }
    }

    let nb = ((4.0 * curve.arclength() / h_local).ceil() as usize).max(1024).next_multiple_of(2);
    let grid = BoundaryGrid::new(*curve, nb);
    let mut boundary = Vec::with_capacity(m);
    for j in 0..m {
        let mut acc = vec![0.0; targets.len()];
        for i in 0..nb {
            let (a, n) = (grid.points[i], grid.normals[i]);
            let lpr = rep.boundary(j, &a, &n, h_local, order)?;
            for (k, x) in targets.iter().enumerate() {
                // λ_j φ extends continuously by zero to x = α for j < 2m-2.
                let exact = match lambda_phi(params, j, x.as_slice(), a.as_slice(), n.as_slice()) {
                    Err(Error::Singular(_)) if j + 2 < 2 * m => 0.0,
                    other => other?,
                };
                let approx: f64 = lpr.support.iter().zip(&lpr.coefficients).map(|(&i, c)| c * phi(x, &centers.points[i])).sum();
                acc[k] += grid.weights[i] * (exact - approx).abs();
            }
        }
        boundary.push(acc.into_iter().fold(0.0, f64::max));
    }
    Ok(ErrorKernelNorms {
        interior: interior.into_iter().fold(0.0, f64::max),
        boundary,
    })
}
