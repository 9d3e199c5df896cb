//! Diagonal transition matrices of a sphere seen from outside and of a
//! spherical cavity seen from inside.
//!
//! Amplitudes are returned as signed logarithms: for a perfect conductor the
//! inner-sphere amplitude of order `l` scales like `(kappa r)^(2l+1)` and the
//! cavity amplitude like its inverse, so plain `f64` values overflow long
//! before the multipole orders used by the energy solver.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::{scaled_bessel, ScaledBesselTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    /// Electric (transverse magnetic) multipoles.
    E,
    /// Magnetic (transverse electric) multipoles.
    M,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::E, Polarization::M];
}

/// Electromagnetic response of a body or of the medium between bodies,
/// as a function of imaginary wavenumber.
pub trait Material: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn epsilon(&self, kappa: f64) -> f64;
    fn mu(&self, kappa: f64) -> f64;
    fn is_perfect_conductor(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectConductor;

impl Material for PerfectConductor {
    fn name(&self) -> &str {
        "pec"
    }
    fn epsilon(&self, _kappa: f64) -> f64 {
        f64::INFINITY
    }
    fn mu(&self, _kappa: f64) -> f64 {
        1.0
    }
    fn is_perfect_conductor(&self) -> bool {
        true
    }
}

/// Frequency-independent permittivity and permeability.
#[derive(Debug, Clone, Copy)]
pub struct Dielectric {
    pub epsilon: f64,
    pub mu: f64,
}

impl Dielectric {
    pub const VACUUM: Dielectric = Dielectric { epsilon: 1.0, mu: 1.0 };
}

impl Material for Dielectric {
    fn name(&self) -> &str {
        "dielectric"
    }
    fn epsilon(&self, _kappa: f64) -> f64 {
        self.epsilon
    }
    fn mu(&self, _kappa: f64) -> f64 {
        self.mu
    }
}

/// Parameters a registered material constructor may consume.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct MaterialParams {
    pub epsilon: Option<f64>,
    pub mu: Option<f64>,
}

type MaterialCtor = fn(&MaterialParams) -> Result<Arc<dyn Material>>;

/// Name-keyed constructors for material responses.
pub struct MaterialRegistry {
    entries: BTreeMap<&'static str, MaterialCtor>,
}

impl MaterialRegistry {
    pub fn empty() -> Self {
        MaterialRegistry { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("pec", |_| Ok(Arc::new(PerfectConductor)));
        reg.register("dielectric", |p| {
            let epsilon = p.epsilon.unwrap_or(1.0);
            let mu = p.mu.unwrap_or(1.0);
            if !(epsilon > 0.0 && mu > 0.0) || !epsilon.is_finite() || !mu.is_finite() {
                return domain(format!("dielectric needs positive finite epsilon, mu; got {epsilon}, {mu}"));
            }
            Ok(Arc::new(Dielectric { epsilon, mu }))
        });
        reg
    }

    pub fn register(&mut self, name: &'static str, ctor: MaterialCtor) {
        self.entries.insert(name, ctor);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn build(&self, name: &str, params: &MaterialParams) -> Result<Arc<dyn Material>> {
        match self.entries.get(name) {
            Some(ctor) => ctor(params),
            None => domain(format!(
                "unknown material '{name}' (known: {})",
                self.entries.keys().copied().collect::<Vec<_>>().join(", ")
            )),
        }
    }
}

/// `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub ln_abs: f64,
    pub sign: f64,
}

impl SignedLog {
    pub fn value(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Scattering off the outer surface of a sphere.
    Inner,
    /// Scattering inside a spherical cavity.
    Cavity,
}

/// Bessel tables for one sphere at one imaginary wavenumber.
#[derive(Debug, Clone)]
pub struct SphereScatterer {
    side: Side,
    medium_table: ScaledBesselTable,
    body_table: Option<ScaledBesselTable>,
    eps_medium: f64,
    mu_medium: f64,
    eps_body: f64,
    mu_body: f64,
}

impl SphereScatterer {
    /// `kappa` is the vacuum imaginary wavenumber; arguments inside the
    /// medium and the body are scaled by their refractive indices.
    pub fn new(
        side: Side,
        radius: f64,
        kappa: f64,
        l_max: usize,
        body: &dyn Material,
        medium: &dyn Material,
    ) -> Result<Self> {
        if medium.is_perfect_conductor() {
            return domain("the medium between the bodies cannot be a perfect conductor");
        }
        let eps_medium = medium.epsilon(kappa);
        let mu_medium = medium.mu(kappa);
        let n_medium = (eps_medium * mu_medium).sqrt();
        let medium_table = scaled_bessel(l_max + 1, n_medium * kappa * radius)?;
        let (body_table, eps_body, mu_body) = if body.is_perfect_conductor() {
            (None, f64::INFINITY, 1.0)
        } else {
            let e = body.epsilon(kappa);
            let m = body.mu(kappa);
            (Some(scaled_bessel(l_max + 1, (e * m).sqrt() * kappa * radius)?), e, m)
        };
        Ok(SphereScatterer {
            side,
            medium_table,
            body_table,
            eps_medium,
            mu_medium,
            eps_body,
            mu_body,
        })
    }

    pub fn amplitude(&self, l: usize, pol: Polarization) -> SignedLog {
        let t = &self.medium_table;
        // Regular (i) and outgoing (k) waves swap roles between the two sides.
        let (ln_num, ln_den, ln_dnum, ln_dden) = match self.side {
            Side::Inner => (t.ln_i(l), t.ln_k(l), t.ln_dx_xi(l), t.ln_neg_dx_xk(l)),
            Side::Cavity => (t.ln_k(l), t.ln_i(l), t.ln_neg_dx_xk(l), t.ln_dx_xi(l)),
        };
        match &self.body_table {
            None => match pol {
                Polarization::M => SignedLog { ln_abs: ln_num - ln_den, sign: -1.0 },
                Polarization::E => SignedLog { ln_abs: ln_dnum - ln_dden, sign: 1.0 },
            },
            Some(b) => {
                // -(f_num/f_den) * (c_M g_b - c_b g_num) / (c_M g_b - c_b g_den)
                // with g_f(z) = 1 + z f'/f = d/dz[z f] / f.
                let (c_med, c_body) = match pol {
                    Polarization::M => (self.mu_medium, self.mu_body),
                    Polarization::E => (self.eps_medium, self.eps_body),
                };
                let g_i = |tab: &ScaledBesselTable| 1.0 + tab.argument * tab.dlog_i(l);
                let g_k = |tab: &ScaledBesselTable| 1.0 + tab.argument * tab.dlog_k(l);
                let (g_body, g_num, g_den) = match self.side {
                    Side::Inner => (g_i(b), g_i(t), g_k(t)),
                    Side::Cavity => (g_k(b), g_k(t), g_i(t)),
                };
                let ratio = (c_med * g_body - c_body * g_num) / (c_med * g_body - c_body * g_den);
                let (ln_f_num, ln_f_den) = match self.side {
                    Side::Inner => (t.ln_i(l), t.ln_k(l)),
                    Side::Cavity => (t.ln_k(l), t.ln_i(l)),
                };
                SignedLog {
                    ln_abs: ln_f_num - ln_f_den + ratio.abs().ln(),
                    sign: -ratio.signum(),
                }
            }
        }
    }
}

/// Transition amplitude of a sphere in vacuum at `kappa r`.
pub fn t_inner(l: usize, kappa_r: f64, pol: Polarization, material: &dyn Material) -> Result<f64> {
    check_order(l)?;
    let s = SphereScatterer::new(Side::Inner, 1.0, kappa_r, l, material, &Dielectric::VACUUM)?;
    Ok(s.amplitude(l, pol).value())
}

/// Transition amplitude of a vacuum-filled spherical cavity at `kappa R`.
pub fn t_cavity(l: usize, kappa_r: f64, pol: Polarization, material: &dyn Material) -> Result<f64> {
    check_order(l)?;
    let s = SphereScatterer::new(Side::Cavity, 1.0, kappa_r, l, material, &Dielectric::VACUUM)?;
    Ok(s.amplitude(l, pol).value())
}

fn check_order(l: usize) -> Result<()> {
    if l == 0 {
        return domain("electromagnetic multipoles start at l = 1");
    }
    Ok(())
}

/// Static multipole polarizabilities indexed by `l` (entry 0 unused).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polarizabilities {
    pub electric: Vec<f64>,
    pub magnetic: Vec<f64>,
}

impl Polarizabilities {
    pub fn get(&self, l: usize, pol: Polarization) -> f64 {
        let v = match pol {
            Polarization::E => &self.electric,
            Polarization::M => &self.magnetic,
        };
        v.get(l).copied().unwrap_or(0.0)
    }
}

/// `alpha_l^E = r^(2l+1)`, `alpha_l^M = -l r^(2l+1) / (l+1)`.
pub fn pec_polarizabilities(l_max: usize, radius: f64) -> Polarizabilities {
    let mut electric = vec![0.0; l_max + 1];
    let mut magnetic = vec![0.0; l_max + 1];
    for l in 1..=l_max {
        let v = radius.powi(2 * l as i32 + 1);
        electric[l] = v;
        magnetic[l] = -(l as f64) * v / (l as f64 + 1.0);
    }
    Polarizabilities { electric, magnetic }
}

/// Leading low-frequency amplitude
/// `kappa^(2l+1) (-1)^(l-1) (l+1) alpha_l / (l (2l+1)!! (2l-1)!!)`.
pub fn t_multipole(l: usize, kappa: f64, alpha: f64) -> f64 {
    assert!(l >= 1);
    let mut dd = 1.0;
    for j in 1..=l {
        dd *= ((2 * j + 1) * (2 * j - 1)) as f64;
    }
    let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
    kappa.powi(2 * l as i32 + 1) * sign * (l as f64 + 1.0) * alpha / (l as f64 * dd)
}
