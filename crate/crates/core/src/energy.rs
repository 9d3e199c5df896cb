//! Exact Casimir energy of a sphere inside a spherical cavity.
//!
//! `E = (1/2pi) int_0^inf dkappa sum_m [ln det(1 - N_m) - sum_ch ln(1 - T_e T_i)]`
//! with the round trip `N = T_e V_ei T_i V_ie` and the concentric
//! configuration subtracted channel by channel. The integrand is negative,
//! so the energy is negative.
//!
//! Each block is evaluated after the diagonal similarity `S_e^-1 N S_e` with
//! `S = sqrt|T|`, which gives `sigma_e Y sigma_i X` for `X = S_i V_ie S_e`,
//! `Y = sigma3 X^dagger sigma3`. Every entry of `X` is assembled in log form,
//! so no individual amplitude has to be representable. A further similarity
//! by `diag(1_E, i_M)` makes the block real.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, CasimirError, Result};
use crate::linalg::{complex_log_det, real_log_det};
use crate::quadrature::semi_infinite_rule;
use crate::scattering::{Dielectric, Material, PerfectConductor, Polarization, Side, SphereScatterer};
use crate::specfun::scaled_bessel;
use crate::translation::{ln_i_vec, BlockMatrix, ChannelIndex, TranslationTable};

/// Largest truncation order the solver accepts.
pub const L_MAX_CAP: usize = 80;

/// Beyond `2 kappa d > ROUND_TRIP_CUTOFF` every round-trip entry is below
/// `exp(-800)` times polynomial factors and the integrand is zero in `f64`.
const ROUND_TRIP_CUTOFF: f64 = 800.0;

/// Inner sphere of radius `r` displaced by `a` from the centre of a spherical
/// cavity of radius `big_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub r: f64,
    pub big_r: f64,
    pub a: f64,
}

impl Geometry {
    pub fn new(r: f64, big_r: f64, a: f64) -> Result<Self> {
        if !(r > 0.0 && big_r > r && r.is_finite() && big_r.is_finite()) {
            return domain(format!("need 0 < r < R, got r = {r}, R = {big_r}"));
        }
        if !(a >= 0.0 && a < big_r - r) {
            return domain(format!("offset a = {a} must lie in [0, R - r) = [0, {})", big_r - r));
        }
        Ok(Geometry { r, big_r, a })
    }

    /// Unit cavity, inner radius `r_over_big_r`, offset `a = (R - r) x`.
    pub fn from_fraction(r_over_big_r: f64, x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return domain(format!("offset fraction must lie in [0, 1), got {x}"));
        }
        Geometry::new(r_over_big_r, 1.0, (1.0 - r_over_big_r) * x)
    }

    pub fn gap(&self) -> f64 {
        self.big_r - self.r - self.a
    }
}

/// Gauss-Legendre rule on `t in (0,1)` mapped by `kappa R = s t/(1-t)`,
/// doubled until successive estimates agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes: usize,
    /// Map scale `s`; defaults to `R/(2d)`.
    pub scale: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: 16, scale: None, rel_tol: 1e-8, abs_tol: 1e-14, max_nodes: 512 }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return domain(format!("at least 8 quadrature nodes required, got {}", self.nodes));
        }
        if self.max_nodes < self.nodes {
            return domain("max_nodes below the starting node count");
        }
        if let Some(s) = self.scale {
            if !(s > 0.0 && s.is_finite()) {
                return domain(format!("quadrature scale must be positive, got {s}"));
            }
        }
        Ok(())
    }
}

/// Bodies and the medium between them.
#[derive(Debug, Clone)]
pub struct Bodies {
    pub inner: Arc<dyn Material>,
    pub cavity: Arc<dyn Material>,
    pub medium: Arc<dyn Material>,
}

impl Default for Bodies {
    fn default() -> Self {
        Bodies {
            inner: Arc::new(PerfectConductor),
            cavity: Arc::new(PerfectConductor),
            medium: Arc::new(Dielectric::VACUUM),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    /// Energy in units of hbar c per unit length.
    pub energy: f64,
    pub nodes: usize,
    /// Estimate from the previous (half-size) rule.
    pub previous: f64,
}

/// Log-determinant of one azimuthal block together with its concentric
/// reference `sum ln(1 - T_e T_i)` accumulated in the same order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockLogDet {
    pub log_det: f64,
    pub concentric: f64,
}

/// Everything needed at one wavenumber.
struct Wavenumber {
    kappa: f64,
    arg: f64,
    ln_i: Vec<f64>,
    /// Signed-log amplitudes indexed `[pol][l]`.
    inner: [Vec<(f64, f64)>; 2],
    cavity: [Vec<(f64, f64)>; 2],
}

fn pol_idx(p: Polarization) -> usize {
    match p {
        Polarization::E => 0,
        Polarization::M => 1,
    }
}

/// Solver for one geometry and truncation order.
#[derive(Debug, Clone)]
pub struct EnergySolver {
    pub geometry: Geometry,
    pub l_max: usize,
    pub bodies: Bodies,
    table: Arc<TranslationTable>,
}

impl EnergySolver {
    pub fn new(geometry: Geometry, l_max: usize) -> Result<Self> {
        Self::with_bodies(geometry, l_max, Bodies::default())
    }

    pub fn with_bodies(geometry: Geometry, l_max: usize, bodies: Bodies) -> Result<Self> {
        if l_max == 0 || l_max > L_MAX_CAP {
            return domain(format!("l_max must lie in 1..={L_MAX_CAP}, got {l_max}"));
        }
        Geometry::new(geometry.r, geometry.big_r, geometry.a)?;
        let table = TranslationTable::shared(l_max)?;
        Ok(EnergySolver { geometry, l_max, bodies, table })
    }

    fn refractive_index(&self, kappa: f64) -> f64 {
        (self.bodies.medium.epsilon(kappa) * self.bodies.medium.mu(kappa)).sqrt()
    }

    fn prepare(&self, kappa: f64) -> Result<Wavenumber> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return domain(format!("wavenumber must be positive, got {kappa}"));
        }
        let g = &self.geometry;
        let l = self.l_max;
        let n_med = self.refractive_index(kappa);
        let si = SphereScatterer::new(Side::Inner, g.r, kappa, l, &*self.bodies.inner, &*self.bodies.medium)?;
        let se = SphereScatterer::new(Side::Cavity, g.big_r, kappa, l, &*self.bodies.cavity, &*self.bodies.medium)?;
        let collect = |s: &SphereScatterer, p: Polarization| {
            let mut v = vec![(0.0, 0.0); l + 1];
            for (ll, slot) in v.iter_mut().enumerate().skip(1) {
                let t = s.amplitude(ll, p);
                *slot = (t.ln_abs, t.sign);
            }
            v
        };
        let arg = n_med * kappa * g.a;
        let ln_i = if arg > 0.0 { ln_i_vec(&scaled_bessel(2 * l, arg)?) } else { Vec::new() };
        Ok(Wavenumber {
            kappa,
            arg,
            ln_i,
            inner: [collect(&si, Polarization::E), collect(&si, Polarization::M)],
            cavity: [collect(&se, Polarization::E), collect(&se, Polarization::M)],
        })
    }

    fn scaled_translation(&self, w: &Wavenumber, m: i64) -> Result<DMatrix<f64>> {
        let w_row = |p: Polarization, l: usize| 0.5 * w.inner[pol_idx(p)][l].0;
        let w_col = |p: Polarization, l: usize| 0.5 * w.cavity[pol_idx(p)][l].0;
        self.table.weighted_real_block(m, self.l_max, w.arg, &w.ln_i, &w_row, &w_col)
    }

    fn block(&self, w: &Wavenumber, m: i64) -> Result<BlockLogDet> {
        let ch = ChannelIndex::new(m, self.l_max)?;
        let x = self.scaled_translation(w, m)?;
        let n = ch.len();
        // Row signs: sigma_e sigma3 on the left, sigma3 sigma_i on the right.
        let mut sig_e = vec![0.0; n];
        let mut sig_i = vec![0.0; n];
        for k in 0..n {
            let (p, l) = ch.channel(k);
            let s3 = if p == Polarization::E { 1.0 } else { -1.0 };
            sig_e[k] = w.cavity[pol_idx(p)][l].1 * s3;
            sig_i[k] = w.inner[pol_idx(p)][l].1 * s3;
        }
        let mut sx = x.clone();
        for (k, mut row) in sx.row_iter_mut().enumerate() {
            row *= sig_i[k];
        }
        // I - sigma_e sigma3 X^T sigma3 sigma_i X
        let mut mat = x.tr_mul(&sx);
        let mut concentric = 0.0;
        for k in 0..n {
            let mut row = mat.row_mut(k);
            row *= -sig_e[k];
            mat[(k, k)] += 1.0;
            // Same arithmetic as the zero-offset diagonal of X, so that the
            // concentric configuration cancels exactly.
            let (p, l) = ch.channel(k);
            let xk = (0.5 * w.inner[pol_idx(p)][l].0 + 0.5 * w.cavity[pol_idx(p)][l].0).exp();
            let d = sig_e[k] * xk * (sig_i[k] * xk);
            concentric += (1.0 - d).abs().ln();
        }
        let (log_abs, sign) = real_log_det(&mut mat).ok_or_else(|| CasimirError::NumericalRange {
            kappa: w.kappa * self.geometry.big_r,
            m,
            detail: "round-trip matrix 1 - N is singular".into(),
        })?;
        if sign < 0.0 {
            return Err(CasimirError::NumericalRange {
                kappa: w.kappa * self.geometry.big_r,
                m,
                detail: "det(1 - N) is negative".into(),
            });
        }
        Ok(BlockLogDet { log_det: log_abs, concentric })
    }

    /// `ln det(1 - N_m)` and the concentric reference at wavenumber `kappa`.
    pub fn block_logdet(&self, m: i64, kappa: f64) -> Result<BlockLogDet> {
        let w = self.prepare(kappa)?;
        self.block(&w, m)
    }

    /// Same determinant through the complex route: complex translation block,
    /// explicit reverse translation and complex LU.
    pub fn block_logdet_complex(&self, m: i64, kappa: f64) -> Result<Complex64> {
        let n = self.round_trip_block(m, kappa)?;
        let mut a = -n.data;
        for k in 0..a.nrows() {
            a[(k, k)] += Complex64::new(1.0, 0.0);
        }
        let ld = complex_log_det(&a).ok_or_else(|| CasimirError::NumericalRange {
            kappa: kappa * self.geometry.big_r,
            m,
            detail: "round-trip matrix 1 - N is singular".into(),
        })?;
        if ld.im.abs() > 1e-10 * ld.re.abs() + 1e-14 {
            return Err(CasimirError::NumericalRange {
                kappa: kappa * self.geometry.big_r,
                m,
                detail: format!("log-determinant has imaginary part {:e}", ld.im),
            });
        }
        Ok(ld)
    }

    /// Round-trip block `N_m = T_e V_ei T_i V_ie` up to the diagonal
    /// similarity `S_e^-1 N S_e`, `S_e = sqrt|T_e|`. Diagonal entries,
    /// products `N_ij N_ji`, traces and determinants are those of `N_m`.
    pub fn round_trip_block(&self, m: i64, kappa: f64) -> Result<BlockMatrix> {
        let w = self.prepare(kappa)?;
        let ch = ChannelIndex::new(m, self.l_max)?;
        let v = self.table.v_block(m, w.arg).or_else(|_| {
            TranslationTable::new(self.l_max).and_then(|t| t.v_block(m, w.arg))
        })?;
        let v = if v.channels.l_max != self.l_max { restrict(&v, ch) } else { v };
        let n = ch.len();
        let mut x = v.data.clone();
        for i in 0..n {
            let (pi, li) = ch.channel(i);
            for j in 0..n {
                let (pj, lj) = ch.channel(j);
                let s = 0.5 * (w.inner[pol_idx(pi)][li].0 + w.cavity[pol_idx(pj)][lj].0);
                x[(i, j)] *= s.exp();
            }
        }
        let xb = BlockMatrix { channels: ch, data: x };
        let y = crate::translation::v_ei_from_v_ie(&xb);
        let mut left = y.data;
        let mut right = xb.data;
        for k in 0..n {
            let (p, l) = ch.channel(k);
            left.row_mut(k).scale_mut(w.cavity[pol_idx(p)][l].1);
            right.row_mut(k).scale_mut(w.inner[pol_idx(p)][l].1);
        }
        Ok(BlockMatrix { channels: ch, data: left * right })
    }

    /// `sum_m [ln det(1 - N_m) - concentric]` at wavenumber `kappa`, using
    /// the equality of the `+m` and `-m` blocks.
    pub fn integrand(&self, kappa: f64) -> Result<f64> {
        if 2.0 * kappa * self.refractive_index(kappa) * self.geometry.gap() > ROUND_TRIP_CUTOFF {
            return Ok(0.0);
        }
        let w = self.prepare(kappa)?;
        let mut total = 0.0;
        for m in 0..=self.l_max as i64 {
            let b = self.block(&w, m)?;
            let weight = if m == 0 { 1.0 } else { 2.0 };
            total += weight * (b.log_det - b.concentric);
        }
        Ok(total)
    }

    fn rule_estimate(&self, n: usize, scale: f64) -> Result<f64> {
        let rule = semi_infinite_rule(n, scale);
        let values: Vec<f64> = rule
            .par_iter()
            .map(|&(k, w)| self.integrand(k / self.geometry.big_r).map(|v| w * v))
            .collect::<Result<Vec<_>>>()?;
        // Integration runs over kappa R; the measure dkappa = d(kappa R)/R.
        Ok(values.iter().sum::<f64>() / (2.0 * std::f64::consts::PI * self.geometry.big_r))
    }

    pub fn energy(&self, quad: &QuadratureSpec) -> Result<EnergyEstimate> {
        quad.validate()?;
        if self.geometry.a == 0.0 {
            // Concentric spheres: the subtraction is exact channel by channel.
            let e = self.rule_estimate(quad.nodes, self.default_scale(quad))?;
            return Ok(EnergyEstimate { energy: e, nodes: quad.nodes, previous: e });
        }
        let scale = self.default_scale(quad);
        let mut n = quad.nodes;
        let mut prev = self.rule_estimate(n, scale)?;
        loop {
            let next_n = 2 * n;
            if next_n > quad.max_nodes {
                return Err(CasimirError::Convergence {
                    what: format!("energy quadrature (up to {n} nodes)"),
                    previous: prev,
                    current: prev,
                });
            }
            let cur = self.rule_estimate(next_n, scale)?;
            if (cur - prev).abs() <= quad.rel_tol * cur.abs() + quad.abs_tol {
                return Ok(EnergyEstimate { energy: cur, nodes: next_n, previous: prev });
            }
            prev = cur;
            n = next_n;
        }
    }

    fn default_scale(&self, quad: &QuadratureSpec) -> f64 {
        quad.scale.unwrap_or(self.geometry.big_r / (2.0 * self.geometry.gap()))
    }
}

fn restrict(v: &BlockMatrix, ch: ChannelIndex) -> BlockMatrix {
    let n = ch.len();
    let mut data = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let (pi, li) = ch.channel(i);
        for j in 0..n {
            let (pj, lj) = ch.channel(j);
            data[(i, j)] = v.data[(v.channels.index(pi, li), v.channels.index(pj, lj))];
        }
    }
    BlockMatrix { channels: ch, data }
}

/// Round-trip block for perfect conductors in vacuum.
pub fn round_trip_block(geom: &Geometry, m: i64, l_max: usize, kappa: f64) -> Result<BlockMatrix> {
    EnergySolver::new(*geom, l_max)?.round_trip_block(m, kappa)
}

/// Integrand `sum_m ln det(1 - N_m) - concentric` for perfect conductors.
pub fn logdet_integrand(geom: &Geometry, l_max: usize, kappa: f64) -> Result<f64> {
    EnergySolver::new(*geom, l_max)?.integrand(kappa)
}

/// Casimir energy for perfect conductors in vacuum at fixed truncation.
pub fn casimir_energy(geom: &Geometry, l_max: usize, quad: &QuadratureSpec) -> Result<EnergyEstimate> {
    EnergySolver::new(*geom, l_max)?.energy(quad)
}

/// Fit of `E(L) = E_inf - alpha exp(-beta L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub e_inf: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Standard errors of `(E_inf, alpha, beta)`; NaN without spare samples.
    pub stderr: [f64; 3],
    pub residuals: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Exponential extrapolation of energies computed at increasing truncation.
/// `beta` is found by variable projection (the model is linear in `E_inf`,
/// `alpha` for fixed `beta`) and then polished by Gauss-Newton.
pub fn extrapolate_lmax(samples: &[(usize, f64)]) -> Result<Extrapolation> {
    if samples.len() < 3 {
        return domain(format!("need at least 3 samples, got {}", samples.len()));
    }
    let mut pts: Vec<(f64, f64)> = samples.iter().map(|&(l, e)| (l as f64, e)).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in pts.windows(2) {
        if w[0].0 == w[1].0 {
            return domain("duplicate truncation orders");
        }
    }
    let mut warnings = Vec::new();
    let diffs: Vec<f64> = pts.windows(2).map(|w| w[1].1 - w[0].1).collect();
    if diffs.iter().any(|d| d.signum() != diffs[0].signum()) {
        warnings.push("energies are not monotone in l_max".into());
    }
    let l0 = pts[0].0;

    // Linear sub-problem for fixed beta, with L shifted to keep exp() tame.
    let linear = |beta: f64| -> (f64, f64, f64) {
        let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(l, e) in &pts {
            let g = -(-beta * (l - l0)).exp();
            s11 += 1.0;
            s12 += g;
            s22 += g * g;
            b1 += e;
            b2 += g * e;
        }
        let det = s11 * s22 - s12 * s12;
        let c0 = (s22 * b1 - s12 * b2) / det;
        let c1 = (s11 * b2 - s12 * b1) / det;
        let rss: f64 = pts
            .iter()
            .map(|&(l, e)| {
                let r = e - c0 + c1 * (-beta * (l - l0)).exp();
                r * r
            })
            .sum();
        (c0, c1, rss)
    };

    let span = pts.last().unwrap().0 - l0;
    let (lo, hi) = (1e-4 / span.max(1.0), 50.0 / span.max(1.0));
    let grid = 400;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=grid {
        let beta = lo * (hi / lo).powf(k as f64 / grid as f64);
        let (_, _, rss) = linear(beta);
        if rss.is_finite() && rss < best.0 {
            best = (rss, beta);
        }
    }
    // Golden-section refinement in log beta.
    let step = (hi / lo).ln() / grid as f64;
    let (mut a, mut b) = (best.1.ln() - step, best.1.ln() + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if linear(c.exp()).2 < linear(d.exp()).2 {
            b = d;
        } else {
            a = c;
        }
    }
    let mut beta = (0.5 * (a + b)).exp();
    if (best.1 - lo).abs() < 1e-12 * lo || (best.1 - hi).abs() < 1e-12 * hi {
        warnings.push("decay rate at the edge of the search range".into());
    }
    let (mut e_inf, mut alpha_shift, _) = linear(beta);

    // Gauss-Newton polish on all three parameters.
    let model = |p: &[f64; 3], l: f64| p[0] - p[1] * (-p[2] * (l - l0)).exp();
    let mut p = [e_inf, alpha_shift, beta];
    for _ in 0..50 {
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        let mut jtr = nalgebra::Vector3::<f64>::zeros();
        for &(l, e) in &pts {
            let ex = (-p[2] * (l - l0)).exp();
            let j = nalgebra::Vector3::new(1.0, -ex, p[1] * (l - l0) * ex);
            let r = e - model(&p, l);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let Some(delta) = jtj.lu().solve(&jtr) else { break };
        let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
        let rss = |q: &[f64; 3]| pts.iter().map(|&(l, e)| (e - model(q, l)).powi(2)).sum::<f64>();
        if rss(&trial) <= rss(&p) && trial.iter().all(|v| v.is_finite()) {
            let done = delta.norm() <= 1e-15 * (p[0].abs() + p[1].abs() + p[2].abs());
            p = trial;
            if done {
                break;
            }
        } else {
            break;
        }
    }
    e_inf = p[0];
    alpha_shift = p[1];
    beta = p[2];

    let residuals: Vec<f64> = pts.iter().map(|&(l, e)| e - model(&p, l)).collect();
    let n = pts.len();
    let mut stderr = [f64::NAN; 3];
    if n > 3 {
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (n - 3) as f64;
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        for &(l, _) in &pts {
            let ex = (-beta * (l - l0)).exp();
            let j = nalgebra::Vector3::new(1.0, -ex, alpha_shift * (l - l0) * ex);
            jtj += j * j.transpose();
        }
        if let Some(inv) = jtj.try_inverse() {
            for k in 0..3 {
                stderr[k] = (s2 * inv[(k, k)]).max(0.0).sqrt();
            }
        }
        // stderr of alpha refers to the shifted amplitude; rescale below.
        stderr[1] *= (beta * l0).exp();
    }
    let mut sign_changes = 0;
    for w in residuals.windows(2) {
        if w[0] * w[1] < 0.0 {
            sign_changes += 1;
        }
    }
    if n >= 5 && sign_changes == 0 {
        warnings.push("residuals share one sign; the exponential model may be inadequate".into());
    }
    if !(beta > 0.0) {
        warnings.push(format!("non-positive decay rate {beta}"));
    }
    Ok(Extrapolation {
        e_inf,
        alpha: alpha_shift * (beta * l0).exp(),
        beta,
        stderr,
        residuals,
        warnings,
    })
}

/// How the truncation order is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LmaxPolicy {
    Fixed(usize),
    /// Ladder `start, start + step, ...` up to `cap`, stopped once the
    /// energy (or its exponential extrapolation) changes by less than
    /// `rel_tol`.
    Auto { start: usize, step: usize, cap: usize, rel_tol: f64 },
}

impl LmaxPolicy {
    pub fn auto() -> Self {
        LmaxPolicy::Auto { start: 8, step: 4, cap: L_MAX_CAP, rel_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergedEnergy {
    pub energy: f64,
    pub lmax_used: usize,
    pub quad_nodes: usize,
    /// Standard error of the extrapolated value; zero when no extrapolation
    /// was needed.
    pub stderr: f64,
    pub samples: Vec<(usize, f64)>,
    pub extrapolation: Option<Extrapolation>,
}

/// Energy for perfect conductors with the truncation order chosen by `policy`.
pub fn converged_energy(geom: &Geometry, policy: LmaxPolicy, quad: &QuadratureSpec) -> Result<ConvergedEnergy> {
    match policy {
        LmaxPolicy::Fixed(l) => {
            let e = casimir_energy(geom, l, quad)?;
            Ok(ConvergedEnergy {
                energy: e.energy,
                lmax_used: l,
                quad_nodes: e.nodes,
                stderr: 0.0,
                samples: vec![(l, e.energy)],
                extrapolation: None,
            })
        }
        LmaxPolicy::Auto { start, step, cap, rel_tol } => {
            if start == 0 || step == 0 || cap > L_MAX_CAP || start > cap {
                return domain(format!("invalid l_max ladder {start}+{step}k up to {cap}"));
            }
            let mut samples = Vec::new();
            let mut nodes = 0;
            let mut last_extrap: Option<Extrapolation> = None;
            let mut l = start;
            while l <= cap {
                let e = casimir_energy(geom, l, quad)?;
                nodes = nodes.max(e.nodes);
                samples.push((l, e.energy));
                let k = samples.len();
                if e.energy == 0.0 {
                    return Ok(ConvergedEnergy {
                        energy: 0.0,
                        lmax_used: l,
                        quad_nodes: nodes,
                        stderr: 0.0,
                        samples,
                        extrapolation: None,
                    });
                }
                if k >= 2 {
                    let prev = samples[k - 2].1;
                    if (e.energy - prev).abs() <= rel_tol * e.energy.abs() {
                        return Ok(ConvergedEnergy {
                            energy: e.energy,
                            lmax_used: l,
                            quad_nodes: nodes,
                            stderr: (e.energy - prev).abs(),
                            samples,
                            extrapolation: None,
                        });
                    }
                }
                if k >= 4 {
                    let ex = extrapolate_lmax(&samples[k - 4..])?;
                    if let Some(prev) = &last_extrap {
                        if (ex.e_inf - prev.e_inf).abs() <= rel_tol * ex.e_inf.abs() {
                            return Ok(ConvergedEnergy {
                                energy: ex.e_inf,
                                lmax_used: l,
                                quad_nodes: nodes,
                                stderr: if ex.stderr[0].is_finite() {
                                    ex.stderr[0].max((ex.e_inf - prev.e_inf).abs())
                                } else {
                                    (ex.e_inf - prev.e_inf).abs()
                                },
                                samples,
                                extrapolation: Some(ex),
                            });
                        }
                    }
                    last_extrap = Some(ex);
                }
                l += step;
            }
            let k = samples.len();
            Err(CasimirError::Convergence {
                what: format!("l_max ladder up to {cap}"),
                previous: if k >= 2 { samples[k - 2].1 } else { f64::NAN },
                current: samples.last().map(|s| s.1).unwrap_or(f64::NAN),
            })
        }
    }
}
