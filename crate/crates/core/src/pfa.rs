//! Proximity force approximation for two spheres.
//!
//! The signed radius ratio `y = r/R` is negative for a sphere inside a
//! cavity and positive for separated spheres; `r <= |R|`. The leading
//! short-distance force is `-(pi^3/360) rR/(R+r) / d^3`.
//!
//! The "full" PFA sums parallel-plate energies `-pi^2/(720 l^3)` over
//! surface elements of one sphere, `l` being the distance to the other
//! surface along the local normal. Which sphere carries the surface
//! elements is a strategy: `"r"` uses the smaller sphere, `"R"` the larger.
//! For the interior problem the concentric configuration is subtracted.
//!
//! Each strategy reduces to `J = int G(u) du` with a rational kernel
//! `G(u) = (sigma u^2 + c0) / (2 alpha u^2 q(u)^3)`, where `u` is a
//! distance from the centre of the sphere being integrated over, `alpha` the
//! centre separation and `q` the local gap (all in units of `|R|`). The
//! integral runs in `w = ln q`, which resolves the `1/d^2` peak uniformly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::adaptive_gk;

const PLATE: f64 = PI * PI * PI / 360.0;
const REL_TOL: f64 = 1e-13;

/// Leading force `-(pi^3/360) rR/(R+r) / d^3`, `R` signed
/// (negative inside, infinite for a plane).
pub fn pfa_force_limit(d: f64, r: f64, big_r: f64) -> Result<f64> {
    Ok(-PLATE * effective_radius(d, r, big_r)? / (d * d * d))
}

/// Leading energy `-(pi^3/720) rR/(R+r) / d^2`.
pub fn pfa_energy_limit(d: f64, r: f64, big_r: f64) -> Result<f64> {
    Ok(-0.5 * PLATE * effective_radius(d, r, big_r)? / (d * d))
}

fn effective_radius(d: f64, r: f64, big_r: f64) -> Result<f64> {
    if !(d > 0.0 && r > 0.0) {
        return domain(format!("need d > 0 and r > 0, got d = {d}, r = {r}"));
    }
    if big_r == 0.0 || big_r.is_nan() {
        return domain("R must be non-zero");
    }
    if big_r + r == 0.0 {
        return domain("R + r = 0: equal radii in the interior problem");
    }
    Ok(r / (1.0 + r / big_r))
}

/// Variable `u` to local gap `q`.
#[derive(Debug, Clone, Copy)]
enum GapMap {
    /// `q = u - c`
    Shift(f64),
    /// `q = 1 - u`
    Reflect,
}

impl GapMap {
    fn u_of(&self, q: f64) -> f64 {
        match *self {
            GapMap::Shift(c) => c + q,
            GapMap::Reflect => 1.0 - q,
        }
    }
    fn q_of(&self, u: f64) -> f64 {
        match *self {
            GapMap::Shift(c) => u - c,
            GapMap::Reflect => 1.0 - u,
        }
    }
}

/// One rational piece `G(u) = (sigma u^2 + c0) / (2 alpha u^2 q(u)^3)`.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    sigma: f64,
    c0: f64,
    dc0_dalpha: f64,
    lo: f64,
    hi: f64,
    /// `du/dalpha` of each endpoint where the kernel does not vanish.
    lo_rate: f64,
    hi_rate: f64,
    gap: GapMap,
}

impl Segment {
    fn g(&self, alpha: f64, u: f64) -> f64 {
        let q = self.gap.q_of(u);
        (self.sigma * u * u + self.c0) / (2.0 * alpha * u * u * q * q * q)
    }

    fn dg_dalpha(&self, alpha: f64, u: f64) -> f64 {
        let q = self.gap.q_of(u);
        self.dc0_dalpha / (2.0 * alpha * u * u * q * q * q) - self.g(alpha, u) / alpha
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let (qa, qb) = (self.gap.q_of(self.lo), self.gap.q_of(self.hi));
        let (wa, wb) = (qa.min(qb).ln(), qa.max(qb).ln());
        if !(wb > wa) {
            return Ok(0.0);
        }
        adaptive_gk(
            |w| {
                let q = w.exp();
                f(self.gap.u_of(q)) * q
            },
            wa,
            wb,
            REL_TOL,
            0.0,
        )
    }
}

/// Integrand of one strategy in units of the larger radius: a sum of
/// segments sharing the centre separation `alpha`.
#[derive(Debug, Clone)]
pub struct Kernel {
    alpha: f64,
    dalpha_ddelta: f64,
    segments: Vec<Segment>,
    /// Surface weight: squared radius of the integrated sphere.
    weight: f64,
    /// Value of `J` for the concentric configuration (interior only).
    concentric: f64,
}

impl Kernel {
    fn j(&self) -> Result<f64> {
        let a = self.alpha;
        self.segments.iter().map(|s| s.integrate(|u| s.g(a, u))).sum()
    }

    fn dj_ddelta(&self) -> Result<f64> {
        let a = self.alpha;
        let mut total = 0.0;
        for s in &self.segments {
            total += s.integrate(|u| s.dg_dalpha(a, u))?;
            if s.hi_rate != 0.0 {
                total += s.g(a, s.hi) * s.hi_rate;
            }
            if s.lo_rate != 0.0 {
                total -= s.g(a, s.lo) * s.lo_rate;
            }
        }
        Ok(self.dalpha_ddelta * total)
    }
}

/// Choice of the sphere whose surface elements are summed.
pub trait PfaBasis: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Kernel for small radius `rho = |y|` and gap `delta`, both in units of
    /// the larger radius; `alpha` is the centre separation.
    fn kernel(&self, rho: f64, delta: f64, interior: bool) -> Kernel;
    /// Closed-form first-order coefficient of `E/E_PFA = 1 + theta1 d/r`.
    fn theta1(&self, y: f64) -> f64;
}

/// Surface elements on the smaller sphere.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmallSphereBasis;

/// Surface elements on the larger sphere.
#[derive(Debug, Clone, Copy, Default)]
pub struct LargeSphereBasis;

impl PfaBasis for SmallSphereBasis {
    fn name(&self) -> &'static str {
        "r"
    }

    fn description(&self) -> &'static str {
        "normals of the smaller sphere"
    }

    fn kernel(&self, rho: f64, delta: f64, interior: bool) -> Kernel {
        if interior {
            // u = |point on the outer surface hit from the small sphere| seen
            // from the small sphere's centre minus alpha x; u in [1-a, 1+a].
            let alpha = 1.0 - rho - delta;
            let near = Segment {
                sigma: 1.0,
                c0: 1.0 - alpha * alpha,
                dc0_dalpha: -2.0 * alpha,
                lo: 1.0 - alpha,
                hi: 1.0 + alpha,
                lo_rate: -1.0,
                hi_rate: 1.0,
                gap: GapMap::Shift(rho),
            };
            Kernel {
                alpha,
                dalpha_ddelta: -1.0,
                segments: vec![near],
                weight: rho * rho,
                concentric: 2.0 / (1.0 - rho).powi(3),
            }
        } else {
            let alpha = 1.0 + rho + delta;
            let near = Segment {
                sigma: -1.0,
                c0: alpha * alpha - 1.0,
                dc0_dalpha: 2.0 * alpha,
                lo: alpha - 1.0,
                hi: (alpha * alpha - 1.0).sqrt(),
                lo_rate: 1.0,
                hi_rate: 0.0,
                gap: GapMap::Shift(rho),
            };
            Kernel { alpha, dalpha_ddelta: 1.0, segments: vec![near], weight: rho * rho, concentric: 0.0 }
        }
    }

    fn theta1(&self, y: f64) -> f64 {
        -y - y / (1.0 + y) - 3.0
    }
}

impl PfaBasis for LargeSphereBasis {
    fn name(&self) -> &'static str {
        "R"
    }

    fn description(&self) -> &'static str {
        "normals of the larger sphere"
    }

    fn kernel(&self, rho: f64, delta: f64, interior: bool) -> Kernel {
        if interior {
            let alpha = 1.0 - rho - delta;
            // u is the distance of the hit point from the cavity centre.
            let (lo, lo_rate) = if alpha <= rho {
                (rho - alpha, -1.0)
            } else {
                ((alpha * alpha - rho * rho).sqrt(), 0.0)
            };
            let near = Segment {
                sigma: 1.0,
                c0: rho * rho - alpha * alpha,
                dc0_dalpha: -2.0 * alpha,
                lo,
                hi: alpha + rho,
                lo_rate,
                hi_rate: 1.0,
                gap: GapMap::Reflect,
            };
            let mut segments = vec![near];
            if alpha > rho {
                // Normals from the far side cross the centre before hitting.
                segments.push(Segment {
                    sigma: -1.0,
                    c0: alpha * alpha - rho * rho,
                    dc0_dalpha: 2.0 * alpha,
                    lo: alpha - rho,
                    hi: (alpha * alpha - rho * rho).sqrt(),
                    lo_rate: 1.0,
                    hi_rate: 0.0,
                    gap: GapMap::Shift(-1.0),
                });
            }
            Kernel {
                alpha,
                dalpha_ddelta: -1.0,
                segments,
                weight: 1.0,
                concentric: 2.0 / (1.0 - rho).powi(3),
            }
        } else {
            let alpha = 1.0 + rho + delta;
            let near = Segment {
                sigma: -1.0,
                c0: alpha * alpha - rho * rho,
                dc0_dalpha: 2.0 * alpha,
                lo: alpha - rho,
                hi: (alpha * alpha - rho * rho).sqrt(),
                lo_rate: 1.0,
                hi_rate: 0.0,
                gap: GapMap::Shift(1.0),
            };
            Kernel { alpha, dalpha_ddelta: 1.0, segments: vec![near], weight: 1.0, concentric: 0.0 }
        }
    }

    fn theta1(&self, y: f64) -> f64 {
        -(3.0 * y + y / (1.0 + y) + 1.0)
    }
}

/// Name-keyed PFA strategies.
pub struct PfaRegistry {
    entries: BTreeMap<&'static str, Arc<dyn PfaBasis>>,
}

impl PfaRegistry {
    pub fn empty() -> Self {
        PfaRegistry { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(SmallSphereBasis));
        reg.register(Arc::new(LargeSphereBasis));
        reg
    }

    pub fn register(&mut self, basis: Arc<dyn PfaBasis>) {
        self.entries.insert(basis.name(), basis);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn PfaBasis>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            crate::CasimirError::Domain(format!(
                "unknown PFA basis '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

/// Built-in strategies `"r"` and `"R"`.
pub fn pfa_registry() -> &'static PfaRegistry {
    static REG: OnceLock<PfaRegistry> = OnceLock::new();
    REG.get_or_init(PfaRegistry::with_builtins)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaConfig {
    /// Signed radius ratio `r/R`, `0 < |y| <= 1`.
    pub y: f64,
    pub d_over_r: f64,
    /// Registered strategy name.
    pub basis: String,
}

impl PfaConfig {
    pub fn new(y: f64, d_over_r: f64, basis: &str) -> Self {
        PfaConfig { y, d_over_r, basis: basis.to_string() }
    }

    fn kernel(&self) -> Result<Kernel> {
        let y = self.y;
        if !(y.abs() <= 1.0) || y == 0.0 {
            return domain(format!(
                "signed radius ratio must satisfy 0 < |y| <= 1, got {y} (the plate limit has no finite R scale)"
            ));
        }
        if y == -1.0 {
            return domain("y = -1: equal radii in the interior problem");
        }
        if !(self.d_over_r > 0.0 && self.d_over_r.is_finite()) {
            return domain(format!("d/r must be positive, got {}", self.d_over_r));
        }
        let rho = y.abs();
        let delta = self.d_over_r * rho;
        let interior = y < 0.0;
        if interior && delta > 1.0 - rho {
            return domain(format!("gap {delta} exceeds R - r = {} in the interior problem", 1.0 - rho));
        }
        Ok(pfa_registry().get(&self.basis)?.kernel(rho, delta, interior))
    }
}

/// Full PFA energy in units of hbar c per unit length, for larger radius
/// `r_scale = |R|`.
pub fn full_pfa_energy(cfg: &PfaConfig, r_scale: f64) -> Result<f64> {
    check_scale(r_scale)?;
    let k = cfg.kernel()?;
    if k.alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(-PLATE * k.weight * (k.j()? - k.concentric) / r_scale)
}

/// Full PFA force `-dE/dd` from differentiating under the integral sign.
pub fn full_pfa_force(cfg: &PfaConfig, r_scale: f64) -> Result<f64> {
    check_scale(r_scale)?;
    let k = cfg.kernel()?;
    if k.alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(PLATE * k.weight * k.dj_ddelta()? / (r_scale * r_scale))
}

fn check_scale(r_scale: f64) -> Result<()> {
    if !(r_scale > 0.0 && r_scale.is_finite()) {
        return domain(format!("length scale must be positive, got {r_scale}"));
    }
    Ok(())
}

/// Closed-form first-order coefficient of the full PFA of `basis`.
pub fn theta1_fpfa(y: f64, basis: &str) -> Result<f64> {
    if !(y.abs() <= 1.0) {
        return domain(format!("signed radius ratio must satisfy |y| <= 1, got {y}"));
    }
    if y == -1.0 {
        return domain("y = -1: equal radii in the interior problem");
    }
    Ok(pfa_registry().get(basis)?.theta1(y))
}
