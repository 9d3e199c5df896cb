//! Post-processing of computed curves: finite differences, the force from
//! an energy ratio, and the short-distance fit ansaetze.
//!
//! Fits are linear least squares in a fixed basis. When every sample carries
//! a positive standard error the fit is weighted by `1/stderr`; parameter
//! errors are `sqrt(s^2 (A^T W A)^{-1})` with `s^2` the reduced residual
//! sum of squares, so they shrink like `1/sqrt(n)` for replicated data.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, CasimirError, Result};
use crate::linalg::least_squares;

/// One point of a curve; `x` is `a/(R-r)`, `d/r` or `r/R` by context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

impl CurveSample {
    pub fn new(x: f64, value: f64) -> Self {
        CurveSample { x, value, stderr: 0.0 }
    }
}

fn check_increasing(series: &[CurveSample]) -> Result<()> {
    if series.windows(2).any(|w| !(w[1].x > w[0].x)) {
        return domain("abscissae must be strictly increasing");
    }
    if series.iter().any(|s| !s.x.is_finite() || !s.value.is_finite() || !(s.stderr >= 0.0)) {
        return domain("samples must be finite with non-negative stderr");
    }
    Ok(())
}

/// Derivative of a uniformly spaced series: centred differences inside,
/// second-order one-sided differences at both ends.
pub fn central_difference(series: &[CurveSample]) -> Result<Vec<CurveSample>> {
    let n = series.len();
    if n < 3 {
        return domain(format!("central differences need at least 3 points, got {n}"));
    }
    check_increasing(series)?;
    let h = (series[n - 1].x - series[0].x) / (n - 1) as f64;
    for (k, s) in series.iter().enumerate() {
        let expect = series[0].x + k as f64 * h;
        if (s.x - expect).abs() > 1e-9 * h.max(expect.abs()) {
            return domain(format!("non-uniform spacing at x = {}", s.x));
        }
    }
    let y = |k: usize| series[k].value;
    let e = |k: usize| series[k].stderr;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (value, var) = if k == 0 {
            let v = (-3.0 * y(0) + 4.0 * y(1) - y(2)) / (2.0 * h);
            (v, (9.0 * e(0).powi(2) + 16.0 * e(1).powi(2) + e(2).powi(2)) / (4.0 * h * h))
        } else if k == n - 1 {
            let v = (3.0 * y(k) - 4.0 * y(k - 1) + y(k - 2)) / (2.0 * h);
            (v, (9.0 * e(k).powi(2) + 16.0 * e(k - 1).powi(2) + e(k - 2).powi(2)) / (4.0 * h * h))
        } else {
            ((y(k + 1) - y(k - 1)) / (2.0 * h), (e(k + 1).powi(2) + e(k - 1).powi(2)) / (4.0 * h * h))
        };
        out.push(CurveSample { x: series[k].x, value, stderr: var.sqrt() });
    }
    Ok(out)
}

/// `F/F_fPFA = R + (E_fPFA/F_fPFA) R'(x) / (R - r)` for `R(x) = E/E_fPFA`
/// sampled at `x = a/(R-r)`; `F = -dE/dd = dE/da`.
pub fn force_from_ratio(
    ratio: &[CurveSample],
    e_fpfa: &[f64],
    f_fpfa: &[f64],
    radius_difference: f64,
) -> Result<Vec<CurveSample>> {
    if e_fpfa.len() != ratio.len() || f_fpfa.len() != ratio.len() {
        return domain("ratio and full-PFA series differ in length");
    }
    if !(radius_difference > 0.0) {
        return domain("R - r must be positive");
    }
    let slope = central_difference(ratio)?;
    Ok(ratio
        .iter()
        .zip(&slope)
        .zip(e_fpfa.iter().zip(f_fpfa))
        .map(|((r, d), (&e, &f))| {
            let lever = e / f / radius_difference;
            CurveSample {
                x: r.x,
                value: r.value + lever * d.value,
                stderr: (r.stderr.powi(2) + (lever * d.stderr).powi(2)).sqrt(),
            }
        })
        .collect())
}

/// One fitted parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    /// `None` when the fit has no residual degrees of freedom.
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub mode: String,
    pub parameters: Vec<FitParameter>,
    /// Row-major parameter covariance (scaled by the residual variance).
    pub covariance: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub n_points: usize,
    pub weighted: bool,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn stderr(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).and_then(|p| p.stderr)
    }
}

/// `target ~ sum_j c_j basis_j(x)` over the samples.
fn linear_fit(
    mode: &str,
    names: &[&str],
    samples: &[CurveSample],
    basis: impl Fn(f64) -> Vec<f64>,
    target: impl Fn(&CurveSample) -> f64,
) -> Result<FitResult> {
    let p = names.len();
    if samples.len() < p.max(3) {
        return Err(CasimirError::RankDeficient(format!(
            "{mode} fit needs at least {} points, got {}",
            p.max(3),
            samples.len()
        )));
    }
    let weighted = samples.iter().all(|s| s.stderr > 0.0);
    let w = |s: &CurveSample| if weighted { 1.0 / s.stderr } else { 1.0 };
    let n = samples.len();
    let mut a = DMatrix::zeros(n, p);
    let mut b = DVector::zeros(n);
    for (i, s) in samples.iter().enumerate() {
        let row = basis(s.x);
        for j in 0..p {
            a[(i, j)] = w(s) * row[j];
        }
        b[i] = w(s) * target(s);
    }
    let (coef, inv) = least_squares(&a, &b)?;
    let fitted = &a * &coef;
    let residuals: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| (b[i] - fitted[i]) / w(s))
        .collect();
    let dof = n - p;
    let s2 = if dof > 0 { (&b - &fitted).norm_squared() / dof as f64 } else { f64::NAN };
    let cov = &inv * s2;
    let parameters = names
        .iter()
        .enumerate()
        .map(|(j, name)| FitParameter {
            name: name.to_string(),
            value: coef[j],
            stderr: (dof > 0).then(|| cov[(j, j)].max(0.0).sqrt()),
        })
        .collect();
    let covariance = if dof > 0 {
        (0..p).map(|i| (0..p).map(|j| cov[(i, j)]).collect()).collect()
    } else {
        Vec::new()
    };
    Ok(FitResult { mode: mode.to_string(), parameters, covariance, residuals, n_points: n, weighted })
}

/// Energy ratio `E/E_fPFA = 1 + t1 h + t2 h^2 ln h` with `h = d/r < 1/4`.
pub fn fit_energy_ansatz(points: &[CurveSample]) -> Result<FitResult> {
    check_short_distance(points)?;
    linear_fit("energy", &["theta1_bar", "theta2_bar"], points, |h| vec![h, h * h * h.ln()], |s| s.value - 1.0)
}

/// Force ratio `F/F_fPFA = 1 + t1 h/2 - t2 h^2/2 - T (t1 + T) h^2/4`, with
/// `T = theta1_fpfa`. The cross term is linear in `t1`, so the model is
/// linear in `(t1, t2)`.
pub fn fit_force_ansatz(points: &[CurveSample], theta1_fpfa: f64) -> Result<FitResult> {
    check_short_distance(points)?;
    let t = theta1_fpfa;
    linear_fit(
        "force",
        &["theta1_bar", "theta2_bar"],
        points,
        |h| vec![0.5 * h - 0.25 * t * h * h, -0.5 * h * h],
        |s| s.value - 1.0 + 0.25 * t * t * s.x * s.x,
    )
}

/// `theta1(y) = -(k1 y + k2 y/(1+y) + k3)` over `y = r/R`.
pub fn fit_theta1_curve(points: &[CurveSample]) -> Result<FitResult> {
    if points.iter().any(|s| !(s.x > -1.0 && s.x <= 1.0)) {
        return domain("y = r/R must lie in (-1, 1]");
    }
    if points.len() < 4 {
        return Err(CasimirError::RankDeficient(format!(
            "theta1 curve fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    linear_fit("theta1", &["k1", "k2", "k3"], points, |y| vec![-y, -y / (1.0 + y), -1.0], |s| s.value)
}

fn check_short_distance(points: &[CurveSample]) -> Result<()> {
    if points.iter().any(|s| !(s.x > 0.0 && s.x < 0.25)) {
        return domain("short-distance fits need 0 < d/r < 0.25");
    }
    Ok(())
}

/// Extra input a fit mode may need.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitContext {
    /// First-order coefficient of the reference full PFA.
    pub theta1_fpfa: Option<f64>,
}

/// A named fit ansatz.
pub trait FitMode: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn fit(&self, points: &[CurveSample], ctx: &FitContext) -> Result<FitResult>;
}

struct EnergyFit;
struct ForceFit;
struct Theta1Fit;

impl FitMode for EnergyFit {
    fn name(&self) -> &'static str {
        "energy"
    }
    fn description(&self) -> &'static str {
        "E/E_fPFA = 1 + t1 h + t2 h^2 ln h over h = d/r"
    }
    fn fit(&self, points: &[CurveSample], _: &FitContext) -> Result<FitResult> {
        fit_energy_ansatz(points)
    }
}

impl FitMode for ForceFit {
    fn name(&self) -> &'static str {
        "force"
    }
    fn description(&self) -> &'static str {
        "F/F_fPFA over h = d/r; needs theta1 of the full PFA"
    }
    fn fit(&self, points: &[CurveSample], ctx: &FitContext) -> Result<FitResult> {
        let t = ctx
            .theta1_fpfa
            .ok_or_else(|| CasimirError::Domain("force fit needs theta1_fpfa".into()))?;
        fit_force_ansatz(points, t)
    }
}

impl FitMode for Theta1Fit {
    fn name(&self) -> &'static str {
        "theta1"
    }
    fn description(&self) -> &'static str {
        "theta1(y) = -(k1 y + k2 y/(1+y) + k3) over y = r/R"
    }
    fn fit(&self, points: &[CurveSample], _: &FitContext) -> Result<FitResult> {
        fit_theta1_curve(points)
    }
}

/// Name-keyed fit modes.
pub struct FitRegistry {
    entries: BTreeMap<&'static str, Arc<dyn FitMode>>,
}

impl FitRegistry {
    pub fn empty() -> Self {
        FitRegistry { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(EnergyFit));
        reg.register(Arc::new(ForceFit));
        reg.register(Arc::new(Theta1Fit));
        reg
    }

    pub fn register(&mut self, mode: Arc<dyn FitMode>) {
        self.entries.insert(mode.name(), mode);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn FitMode>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            CasimirError::Domain(format!(
                "unknown fit mode '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

/// Built-in modes `energy`, `force` and `theta1`.
pub fn fit_registry() -> &'static FitRegistry {
    static REG: OnceLock<FitRegistry> = OnceLock::new();
    REG.get_or_init(FitRegistry::with_builtins)
}
