//! Casimir-Polder limit for a small polarizable object at offset `a` from
//! the centre of a perfectly conducting spherical cavity of radius `R`.
//!
//! With `xi = a/R`, the energy through fifth order in the object size is
//! `(1/2 pi R) [h1^M alpha_1^M / R^3 + h2^M alpha_2^M / R^5 + (M <-> E)]`,
//! and an anisotropic dipole enters through `f(xi) - f(0)` and `g(xi)`.
//! All coefficient functions are integrals over imaginary frequency
//! `x = kappa R` of sums over `l` weighted by the cavity ratios
//! `zeta^M = k_l/i_l` and `zeta^E = (x k_l)'/(x i_l)'`. `zeta^E` is negative.
//!
//! Every product `zeta_l(x) i_j(x xi)^2` is formed as the square of
//! `sqrt|zeta_l| i_j` in log space, so no intermediate overflows even where
//! `zeta_l ~ x^(-2l-1)` and `i_j(x xi) ~ (x xi)^j` separately do.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::energy::QuadratureSpec;
use crate::error::{domain, CasimirError, Result};
use crate::quadrature::semi_infinite_rule;
use crate::scattering::{Polarizabilities, Polarization};
use crate::specfun::{scaled_bessel, ScaledBesselTable, MAX_ORDER};

/// Largest admissible `l` cut: the sums reach `i_{l+2}`.
pub const MAX_L_CUT: usize = MAX_ORDER - 2;
/// Default `l` cut.
pub const DEFAULT_L_CUT: usize = MAX_L_CUT;

const TERM_TOL: f64 = 1e-13;
const TAIL_TOL: f64 = 1e-10;

/// `ln|zeta_l^P(x)|`; the sign is `+` for M and `-` for E.
fn ln_zeta(b: &ScaledBesselTable, l: usize, pol: Polarization) -> f64 {
    match pol {
        Polarization::M => b.ln_k(l) - b.ln_i(l),
        Polarization::E => b.ln_neg_dx_xk(l) - b.ln_dx_xi(l),
    }
}

fn zeta_sign(pol: Polarization) -> f64 {
    match pol {
        Polarization::M => 1.0,
        Polarization::E => -1.0,
    }
}

fn other(pol: Polarization) -> Polarization {
    match pol {
        Polarization::M => Polarization::E,
        Polarization::E => Polarization::M,
    }
}

/// Cavity ratio `zeta_l^P(x)`.
pub fn zeta(l: usize, pol: Polarization, x: f64) -> Result<f64> {
    if l == 0 {
        return domain("zeta is defined for l >= 1");
    }
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("zeta needs x > 0, got {x}"));
    }
    let b = scaled_bessel(l, x)?;
    if matches!(pol, Polarization::E) && !b.ln_dx_xi(l).is_finite() {
        return Err(CasimirError::NumericalRange {
            kappa: x,
            m: l as i64,
            detail: "(x i_l)' is not positive".into(),
        });
    }
    Ok(zeta_sign(pol) * ln_zeta(&b, l, pol).exp())
}

/// Coefficient functions at one offset `xi`, indexed by polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpCoefficients {
    pub xi: f64,
    pub f_e: f64,
    pub f_m: f64,
    /// `f^P(0)`, needed by the tensor energy.
    pub f0_e: f64,
    pub f0_m: f64,
    pub g_e: f64,
    pub g_m: f64,
    pub h1_e: f64,
    pub h1_m: f64,
    pub h2_e: f64,
    pub h2_m: f64,
    /// Largest `l` reached by any node.
    pub l_used: usize,
    pub nodes: usize,
    /// Bound on the truncated `l` tail, integrated over `x`.
    pub tail_error: f64,
}

const N_COEF: usize = 10;

impl CpCoefficients {
    fn from_array(xi: f64, v: &[f64; N_COEF], l_used: usize, nodes: usize, tail_error: f64) -> Self {
        CpCoefficients {
            xi,
            f_e: v[0],
            f_m: v[1],
            f0_e: v[2],
            f0_m: v[3],
            g_e: v[4],
            g_m: v[5],
            h1_e: v[6],
            h1_m: v[7],
            h2_e: v[8],
            h2_m: v[9],
            l_used,
            nodes,
            tail_error,
        }
    }

    pub fn f(&self, pol: Polarization) -> f64 {
        pick(pol, self.f_e, self.f_m)
    }
    pub fn f0(&self, pol: Polarization) -> f64 {
        pick(pol, self.f0_e, self.f0_m)
    }
    pub fn g(&self, pol: Polarization) -> f64 {
        pick(pol, self.g_e, self.g_m)
    }
    pub fn h1(&self, pol: Polarization) -> f64 {
        pick(pol, self.h1_e, self.h1_m)
    }
    pub fn h2(&self, pol: Polarization) -> f64 {
        pick(pol, self.h2_e, self.h2_m)
    }

    /// Tensor energy in hbar c per unit length.
    pub fn tensor_energy(&self, t: &DipoleTensors, big_r: f64) -> f64 {
        let mut acc = 0.0;
        for (pol, a) in [(Polarization::E, &t.alpha_e), (Polarization::M, &t.alpha_m)] {
            let aniso = 2.0 * a[(2, 2)] - a[(0, 0)] - a[(1, 1)];
            acc += (self.f(pol) - self.f0(pol)) * a.trace() + self.g(pol) * aniso;
        }
        acc / (3.0 * std::f64::consts::PI * big_r.powi(4))
    }

    /// Multipole energy in hbar c per unit length, keeping `l <= order`
    /// (`1` for the `R^-3` term, `2` to add the `R^-5` term).
    pub fn spherical_energy(&self, pols: &Polarizabilities, big_r: f64, order: CpOrder) -> f64 {
        let mut acc = 0.0;
        for pol in Polarization::BOTH {
            acc += self.h1(pol) * pols.get(1, pol) / big_r.powi(3);
            if order == CpOrder::Fifth {
                acc += self.h2(pol) * pols.get(2, pol) / big_r.powi(5);
            }
        }
        acc / (2.0 * std::f64::consts::PI * big_r)
    }
}

fn pick(pol: Polarization, e: f64, m: f64) -> f64 {
    match pol {
        Polarization::E => e,
        Polarization::M => m,
    }
}

/// Truncation order of the multipole energy in `1/R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CpOrder {
    /// Dipole term only, `O(R^-3)`.
    Third,
    /// Dipole and quadrupole, `O(R^-5)`.
    Fifth,
}

impl CpOrder {
    pub fn from_power(p: u32) -> Result<Self> {
        match p {
            3 => Ok(CpOrder::Third),
            5 => Ok(CpOrder::Fifth),
            _ => domain(format!("order must be 3 or 5, got {p}")),
        }
    }

    pub fn power(self) -> u32 {
        match self {
            CpOrder::Third => 3,
            CpOrder::Fifth => 5,
        }
    }
}

/// Static dipole polarizability tensors in a Cartesian basis with `z`
/// along the displacement, in units of length cubed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleTensors {
    pub alpha_e: Matrix3<f64>,
    pub alpha_m: Matrix3<f64>,
}

impl DipoleTensors {
    pub fn new(alpha_e: Matrix3<f64>, alpha_m: Matrix3<f64>) -> Result<Self> {
        for (name, a) in [("electric", &alpha_e), ("magnetic", &alpha_m)] {
            let scale = a.amax().max(f64::MIN_POSITIVE);
            if (a - a.transpose()).amax() > 1e-12 * scale || a.iter().any(|v| !v.is_finite()) {
                return domain(format!("{name} polarizability tensor must be finite and symmetric"));
            }
        }
        Ok(DipoleTensors { alpha_e, alpha_m })
    }

    pub fn isotropic(alpha_e: f64, alpha_m: f64) -> Self {
        DipoleTensors {
            alpha_e: Matrix3::from_diagonal_element(alpha_e),
            alpha_m: Matrix3::from_diagonal_element(alpha_m),
        }
    }
}

/// Bessel data at one frequency node.
struct Node {
    /// Table at `x`.
    outer: ScaledBesselTable,
    /// `ln i_j(x xi)`, with `i_j(0) = delta_j0`.
    ln_i_inner: Vec<f64>,
    x: f64,
    xi: f64,
}

impl Node {
    fn new(x: f64, xi: f64, top: usize) -> Result<Self> {
        let outer = scaled_bessel(top, x)?;
        let ln_i_inner = if xi == 0.0 {
            (0..=top).map(|j| if j == 0 { 0.0 } else { f64::NEG_INFINITY }).collect()
        } else {
            let inner = scaled_bessel(top, x * xi)?;
            (0..=top).map(|j| inner.ln_i(j)).collect()
        };
        Ok(Node { outer, ln_i_inner, x, xi })
    }

    /// `sqrt|zeta_l^P(x)| i_j(x xi)`, zero for `j < 0`.
    fn weighted(&self, half_ln_zeta: f64, j: i64) -> f64 {
        if j < 0 {
            0.0
        } else {
            (half_ln_zeta + self.ln_i_inner[j as usize]).exp()
        }
    }

    /// Order-`l` contributions, before the `x^3`/`x^5` measure and the
    /// subtractions, in the layout of [`CpCoefficients::from_array`].
    fn terms(&self, l: usize) -> [f64; N_COEF] {
        let mut out = [0.0; N_COEF];
        let lf = l as f64;
        let li = l as i64;
        let xx = (self.x * self.xi).powi(2);
        let d = 4.0 * lf * (lf + 1.0) - 3.0;
        for (slot, pol) in [(0usize, Polarization::E), (1usize, Polarization::M)] {
            let q = other(pol);
            let (sp, sq) = (zeta_sign(pol), zeta_sign(q));
            let hp = 0.5 * ln_zeta(&self.outer, l, pol);
            let hq = 0.5 * ln_zeta(&self.outer, l, q);
            let u = |j: i64| self.weighted(hp, j);
            let v = |j: i64| self.weighted(hq, j);
            let (um, up) = (u(li - 1), u(li + 1));
            let dv = v(li - 1) - v(li + 1);
            let lead = (lf + 1.0) * um * um + lf * up * up;
            let cross = xx / (2.0 * lf + 1.0) * dv * dv;

            out[slot] = 0.5 * (sp * lead - sq * cross);
            out[4 + slot] = sp / (2.0 * (2.0 * lf + 1.0))
                * (0.5 * (lf * lf - 1.0) * um * um + 0.5 * lf * (lf + 2.0) * up * up
                    - 3.0 * lf * (lf + 1.0) * um * up)
                + 0.25 * sq * cross;
            out[6 + slot] = sp * lead - sq * cross;

            let (um2, u0, up2) = (u(li - 2), u(li), u(li + 2));
            let (vm2, v0, vp2) = (v(li - 2), v(li), v(li + 2));
            let quad_lead = ((lf - 1.0) * (lf + 1.0) * (2.0 * lf + 3.0) * um2 * um2
                + lf * (lf + 2.0) * (2.0 * lf - 1.0) * up2 * up2
                + (3.0 * lf + 1.5) * u0 * u0)
                / (6.0 * d);
            let c1 = (1.0 - lf) / (2.0 * lf - 1.0) * vm2 - (2.0 * lf - 1.0) / d * v0
                + (lf + 2.0) / (2.0 * lf + 3.0) * vp2;
            let c2 = vm2 / (2.0 * (2.0 * lf - 1.0)) - (2.0 * lf + 1.0) / d * v0
                + vp2 / (2.0 * (2.0 * lf + 3.0));
            let quad_cross = xx / (3.0 * (2.0 * lf + 1.0))
                * (0.25 * c1 * c1 + (lf - 1.0) * (lf + 2.0) * c2 * c2);
            out[8 + slot] = sp * quad_lead - sq * quad_cross;
        }
        out
    }

    /// Integrands at this node and the size of the first omitted order.
    fn integrand(&self, l_cut: usize) -> ([f64; N_COEF], usize, f64) {
        let mut sum = [0.0; N_COEF];
        let mut quiet = 0;
        let mut l_last = 0;
        let mut tail = 0.0;
        for l in 1..=l_cut {
            let t = self.terms(l);
            let mut small = true;
            for k in 0..N_COEF {
                sum[k] += t[k];
                if t[k].abs() > TERM_TOL * sum[k].abs().max(f64::MIN_POSITIVE) {
                    small = false;
                }
            }
            l_last = l;
            tail = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // Low orders can vanish accidentally (xi = 0); require a run.
            quiet = if small { quiet + 1 } else { 0 };
            if quiet >= 3 && l >= 3 {
                tail = 0.0;
                break;
            }
        }
        let x = self.x;
        let (x3, x5) = (x.powi(3), x.powi(5));
        let z1 = |p| zeta_sign(p) * ln_zeta(&self.outer, 1, p).exp();
        let z2 = |p| zeta_sign(p) * ln_zeta(&self.outer, 2, p).exp();
        let mut out = [0.0; N_COEF];
        for (slot, pol) in [(0usize, Polarization::E), (1usize, Polarization::M)] {
            out[slot] = x3 * sum[slot];
            // f(0): only l = 1 survives, with i_0(0) = 1.
            out[2 + slot] = x3 * z1(pol);
            out[4 + slot] = x3 * sum[4 + slot];
            out[6 + slot] = x3 * (sum[6 + slot] - 2.0 * z1(pol));
            out[8 + slot] = x5 * (sum[8 + slot] - z2(pol) / 6.0);
        }
        (out, l_last, tail * x5.max(x3))
    }
}

/// Coefficient functions at `xi = a/R`, summing `l <= l_cut` and doubling
/// the frequency rule until every coefficient is stable.
pub fn cp_coefficients(xi: f64, l_cut: usize, quad: &QuadratureSpec) -> Result<CpCoefficients> {
    if !(0.0..1.0).contains(&xi) {
        return domain(format!("xi = a/R must lie in [0, 1), got {xi}"));
    }
    if !(2..=MAX_L_CUT).contains(&l_cut) {
        return domain(format!("l_cut must lie in [2, {MAX_L_CUT}], got {l_cut}"));
    }
    // Integrands decay like exp(-2 x (1 - xi)) and peak near x ~ 1/(1 - xi).
    let scale = quad.scale.unwrap_or(1.0 / (1.0 - xi));
    let top = l_cut + 2;
    let evaluate = |n: usize| -> Result<([f64; N_COEF], usize, f64)> {
        let mut acc = [0.0; N_COEF];
        let mut l_used = 0;
        let mut tail = 0.0;
        for (x, w) in semi_infinite_rule(n, scale) {
            let (v, l, t) = Node::new(x, xi, top)?.integrand(l_cut);
            for k in 0..N_COEF {
                acc[k] += w * v[k];
            }
            l_used = l_used.max(l);
            tail += w * t;
        }
        Ok((acc, l_used, tail))
    };
    let mut n = quad.nodes.max(16);
    let mut prev = evaluate(n)?;
    loop {
        let next_n = 2 * n;
        if next_n > quad.max_nodes.max(n) {
            let worst = prev.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Err(CasimirError::Convergence {
                what: format!("Casimir-Polder frequency integral at xi = {xi}"),
                previous: worst,
                current: worst,
            });
        }
        let cur = evaluate(next_n)?;
        let scale_v = cur.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let converged = cur
            .0
            .iter()
            .zip(&prev.0)
            .all(|(a, b)| (a - b).abs() <= quad.abs_tol.max(quad.rel_tol * scale_v));
        n = next_n;
        if converged {
            let (vals, l_used, tail) = cur;
            if tail > TAIL_TOL * scale_v.max(f64::MIN_POSITIVE) {
                return Err(CasimirError::Convergence {
                    what: format!("l-sum truncated at l_cut = {l_cut} (xi = {xi}); increase l_cut"),
                    previous: scale_v,
                    current: tail,
                });
            }
            return Ok(CpCoefficients::from_array(xi, &vals, l_used, n, tail));
        }
        prev = cur;
    }
}

/// Frequency rule used by the `*_default` entry points.
pub fn default_quad() -> QuadratureSpec {
    QuadratureSpec { nodes: 32, scale: None, rel_tol: 1e-10, abs_tol: 1e-14, max_nodes: 2048 }
}

/// Coefficients with the default cut and frequency rule.
pub fn cp_coefficients_default(xi: f64) -> Result<CpCoefficients> {
    cp_coefficients(xi, DEFAULT_L_CUT, &default_quad())
}

/// Dipole energy of an anisotropic object, in hbar c per unit length.
pub fn cp_energy_tensor(tensors: &DipoleTensors, xi: f64, big_r: f64) -> Result<f64> {
    check_radius(big_r)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(cp_coefficients_default(xi)?.tensor_energy(tensors, big_r))
}

/// Multipole energy through `O(R^-5)`, in hbar c per unit length.
pub fn cp_energy_spherical(pols: &Polarizabilities, xi: f64, big_r: f64) -> Result<f64> {
    cp_energy_spherical_order(pols, xi, big_r, CpOrder::Fifth)
}

pub fn cp_energy_spherical_order(pols: &Polarizabilities, xi: f64, big_r: f64, order: CpOrder) -> Result<f64> {
    check_radius(big_r)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(cp_coefficients_default(xi)?.spherical_energy(pols, big_r, order))
}

fn check_radius(big_r: f64) -> Result<()> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return domain(format!("cavity radius must be positive, got {big_r}"));
    }
    Ok(())
}
