//! One-dimensional quadrature rules and periodic resampling.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS7_WEIGHTS[3];
    for i in 0..7 {
        let x = h * KRONROD_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over [a, b].
///
/// Intervals are bisected until the local error estimate falls below its
/// share of `abs_tol`, or `max_depth` bisections have happened.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: usize,
) -> f64 {
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0usize)];
    let width = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&mut f, lo, hi);
        let share = abs_tol * (hi - lo) / width;
        if err <= share.max(1e-15 * val.abs()) || depth >= max_depth {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// Weights of the periodic log-quadrature rule on `n_nodes` equispaced nodes.
///
/// Entry `k` is the weight coupling nodes whose indices differ by `k`, such
/// that `sum_j w[|i-j|] f(t_j)` approximates
/// `int_0^{2pi} ln(4 sin^2((t_i - s)/2)) f(s) ds` for trigonometric `f`.
pub fn periodic_log_weights(n_nodes: usize) -> Vec<f64> {
    assert!(n_nodes >= 2 && n_nodes % 2 == 0, "node count must be even");
    let n = n_nodes / 2;
    let nf = n as f64;
    (0..n_nodes)
        .map(|k| {
            let dt = PI * k as f64 / nf;
            let mut s = 0.0;
            for m in 1..n {
                s += (m as f64 * dt).cos() / m as f64;
            }
            -2.0 * PI / nf * s - PI / (nf * nf) * (nf * dt).cos()
        })
        .collect()
}

/// Trigonometric interpolation of equispaced periodic samples onto
/// `new_len` equispaced points starting at the same parameter.
pub fn trig_resample(values: &[f64], new_len: usize) -> Vec<f64> {
    let n = values.len();
    if new_len == n {
        return values.to_vec();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    // Sample the trigonometric interpolant: every mode lands on its alias.
    let mut out = vec![Complex64::new(0.0, 0.0); new_len];
    let scale = 1.0 / n as f64;
    let wrap = |f: i64| f.rem_euclid(new_len as i64) as usize;
    for (k, c) in spec.iter().enumerate() {
        let c = c * scale;
        if n % 2 == 0 && k == n / 2 {
            let f = (n / 2) as i64;
            out[wrap(f)] += c * 0.5;
            out[wrap(-f)] += c * 0.5;
        } else {
            let f = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
            out[wrap(f)] += c;
        }
    }
    planner.plan_fft_inverse(new_len).process(&mut out);
    out.iter().map(|c| c.re).collect()
}

/// Trailing-spectrum size of periodic samples: largest Fourier amplitude in
/// the top eighth of resolved frequencies relative to the largest overall.
pub fn spectral_tail(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 8 {
        return 0.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let amp: Vec<f64> = spec.iter().map(|c| c.norm()).collect();
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let half = n / 2;
    let start = half - half / 4;
    let tail = (start..=half)
        .map(|k| amp[k].max(amp[(n - k) % n]))
        .fold(0.0, f64::max);
    tail / peak
}

/// Polynomial extrapolation to zero of samples `(x_i, y_i)` by Neville's scheme.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mut p = ys.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}
