//! Quadrature rules: Gauss-Legendre on a finite interval, the same rule mapped
//! onto the half line, and adaptive Gauss-Kronrod (7/15) bisection.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{CasimirError, Result};

/// Gauss-Legendre nodes and weights on (-1, 1), ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(Self::compute(n));
        cache.lock().unwrap().insert(n, rule.clone());
        rule
    }

    fn compute(n: usize) -> GaussLegendre {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess for the i-th largest root.
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over `(a, b)`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Nodes `k_j` and weights `w_j` with `sum w_j f(k_j) ~ int_0^inf f(k) dk`,
/// from the map `k = s t/(1-t)` applied to Gauss-Legendre on `t in (0,1)`.
pub fn semi_infinite_rule(n: usize, scale: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(n);
    gl.nodes
        .iter()
        .zip(&gl.weights)
        .map(|(&x, &w)| {
            let t = 0.5 * (x + 1.0);
            let k = scale * t / (1.0 - t);
            let jac = scale / ((1.0 - t) * (1.0 - t));
            (k, 0.5 * w * jac)
        })
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod value, error estimate (scaled as in QUADPACK) and the
/// roundoff floor `50 eps int |f|` of one interval.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut fv = [(0.0, 0.0); 7];
    let mut rk = WGK[7] * fc;
    let mut rg = WG[3] * fc;
    let mut rabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        fv[j] = (f1, f2);
        rk += WGK[j] * (f1 + f2);
        rabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut rasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        rasc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let h = h.abs();
    let (rasc, rabs) = (rasc * h, rabs * h);
    let mut err = ((rk - rg) * h).abs();
    if rasc != 0.0 && err != 0.0 {
        err = rasc * (200.0 * err / rasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * rabs;
    (rk * h, err.max(floor), floor)
}

/// Adaptive Gauss-Kronrod integral of `f` over `(a, b)` to
/// `|error| <= max(abs_tol, rel_tol |I|)`, bisecting the worst interval.
pub fn adaptive_gk(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e, r) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e, r)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        // Intervals already at their rounding floor cannot be improved.
        let refinable = parts.iter().filter(|p| p.3 > p.4).map(|p| p.3).sum::<f64>();
        if err <= abs_tol.max(rel_tol * total.abs()) || refinable == 0.0 {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(CasimirError::Convergence {
                what: "adaptive Gauss-Kronrod quadrature".into(),
                previous: total - err,
                current: total,
            });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.3 > p.4)
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1, r1) = gk15(&f, lo, mid);
        let (v2, e2, r2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1, r1));
        parts.push((mid, hi, v2, e2, r2));
    }
}
