use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use layerspline::dirichlet::{boundary_data, solve_dirichlet, symbol_matrix};
use layerspline::geometry::{BoundaryGrid, DomainCurve, Point};
use layerspline::harness::{converge, error_norms, probe_grid, rung_centers, ExperimentConfig};
use layerspline::kernel::SplineParams;
use layerspline::scheme::{assemble_txi, Extension, SchemeGrids};
use layerspline::target::{target_by_name, TARGET_NAMES};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "layerspline", version, about = "Polyharmonic spline approximation with boundary layer potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study from a TOML config.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the polyharmonic Dirichlet problem with data from a named target.
    SolveDirichlet {
        #[arg(long, default_value = "circle")]
        curve: DomainCurve,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 32)]
        probe_grid: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the quasi-interpolant of a target on scattered centers.
    Approximate {
        #[arg(long, default_value = "circle")]
        curve: DomainCurve,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        target: String,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Boundary oversampling exponent.
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long, default_value_t = 128)]
        probe_grid: usize,
        /// Where to write centers and coefficients.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the extension of a target at points anywhere off the boundary.
    Extend {
        #[arg(long, default_value = "circle")]
        curve: DomainCurve,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        level: usize,
        /// Evaluation point `x,y`; repeatable.
        #[arg(long = "point", required = true, value_parser = parse_point)]
        points: Vec<Point>,
    },
    /// Print the principal-symbol matrix and its determinant.
    CheckSymbols {
        #[arg(long)]
        m: usize,
    },
    /// List the named targets.
    Targets,
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y] => Ok(Point::new(*x, *y)),
        _ => Err(format!("expected x,y, got {s}")),
    }
}

fn output_or_stdout(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| p.display().to_string())?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Converge { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = converge(&cfg)?;
            if cfg.output.is_none() {
                report.write_csv(std::io::stdout().lock())?;
            }
            let show = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{v:.3}"));
            eprintln!(
                "fitted rates: inf {}  2 {}  1 {}",
                show(report.rates.linf),
                show(report.rates.l2),
                show(report.rates.l1)
            );
        }
        Command::SolveDirichlet { curve, m, n, data, probe_grid: per_side, output } => {
            let params = SplineParams::planar(m)?.with_length_scale(curve.diameter());
            let f = target_by_name(&data)?;
            let grid = BoundaryGrid::new(curve, n);
            let sol = solve_dirichlet(&params, &grid, &boundary_data(f.as_ref(), &grid, m))?;
            let mut out = output_or_stdout(&output)?;
            writeln!(out, "x,y,value,exact,error")?;
            let mut worst: f64 = 0.0;
            for x in probe_grid(&curve, per_side) {
                let v = sol.eval(&x)?.value;
                let e = f.value(&x);
                worst = worst.max((v - e).abs());
                writeln!(out, "{},{},{},{},{:e}", x.x, x.y, v, e, (v - e).abs())?;
            }
            eprintln!(
                "max error {worst:.3e}, condition {:.3e}, residual {:.1e}",
                sol.condition, sol.residual
            );
        }
        Command::Approximate { curve, m, target, h, seed, nu, probe_grid: per_side, output } => {
            let params = SplineParams::planar(m)?.with_length_scale(curve.diameter());
            let f = target_by_name(&target)?;
            let centers = rung_centers(&curve, h, seed, m, nu)?;
            let (s, stats) = assemble_txi(&params, f.as_ref(), &curve, &centers, &SchemeGrids::default(), nu)?;
            let e = error_norms(&s, f.as_ref(), &probe_grid(&curve, per_side), &curve, 48)?;
            if let Some(p) = &output {
                s.write_csv(BufWriter::new(File::create(p)?))?;
            }
            eprintln!(
                "{} centers (fill {:.4}), {} quadrature nodes; errors inf {:.3e} 2 {:.3e} 1 {:.3e}",
                centers.len(),
                centers.fill_distance,
                stats.interior_nodes,
                e.linf,
                e.l2,
                e.l1
            );
        }
        Command::Extend { curve, m, target, n, level, points } => {
            let params = SplineParams::planar(m)?.with_length_scale(curve.diameter());
            let f = target_by_name(&target)?;
            let ext = Extension::new(&params, f.as_ref(), &BoundaryGrid::new(curve, n), level)?;
            println!("x,y,inside,value,target");
            for x in points {
                let v = ext.eval(&x)?;
                println!("{},{},{},{},{}", x.x, x.y, curve.contains(&x), v.value, f.value(&x));
            }
        }
        Command::CheckSymbols { m } => {
            if m == 0 {
                bail!("m must be positive");
            }
            let (s, det) = symbol_matrix(m);
            for row in s.row_iter() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:>10.6}")).collect();
                println!("{}", cells.join(" "));
            }
            println!("determinant {det:e}");
        }
        Command::Targets => {
            for t in TARGET_NAMES {
                println!("{t}");
            }
        }
    }
    Ok(())
}
