pub mod cp;
pub mod energy;
pub mod fit;
pub mod force;
pub mod pfa;

use casimir_core::energy::{
    casimir_energy, converged_energy, extrapolate_lmax, Geometry, LmaxPolicy, QuadratureSpec, L_MAX_CAP,
};
use casimir_core::CasimirError;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliResult};

pub const UNITS: &str = "lengths in R, energies in hbar c/R, forces in hbar c/R^2";

/// How a run ended; `Partial` rows carry a failure message.
pub enum Outcome {
    Ok,
    Partial(String),
}

/// Truncation and frequency-quadrature flags shared by the exact solver.
#[derive(Args, Serialize, Default, Debug, Clone)]
pub struct SolverFlags {
    /// `auto`, a fixed order `N`, or `ladder:start:stop:step` with
    /// exponential extrapolation over the ladder.
    #[arg(long)]
    pub lmax: Option<String>,
    /// First order of the auto ladder.
    #[arg(long)]
    pub lmax_start: Option<usize>,
    #[arg(long)]
    pub lmax_step: Option<usize>,
    #[arg(long)]
    pub lmax_cap: Option<usize>,
    /// Relative change that stops the auto ladder.
    #[arg(long)]
    pub lmax_tol: Option<f64>,
    /// Starting Gauss-Legendre nodes of the frequency rule.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    /// Agreement required between successive node doublings.
    #[arg(long)]
    pub quad_rel_tol: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SolverParams {
    #[serde(default = "default_lmax")]
    pub lmax: String,
    #[serde(default = "default_lmax_start")]
    pub lmax_start: usize,
    #[serde(default = "default_lmax_step")]
    pub lmax_step: usize,
    #[serde(default = "default_lmax_cap")]
    pub lmax_cap: usize,
    #[serde(default = "default_lmax_tol")]
    pub lmax_tol: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_max_nodes")]
    pub max_nodes: usize,
    #[serde(default = "default_quad_rel_tol")]
    pub quad_rel_tol: f64,
}

fn default_lmax() -> String {
    "auto".into()
}
fn default_lmax_start() -> usize {
    8
}
fn default_lmax_step() -> usize {
    4
}
fn default_lmax_cap() -> usize {
    60
}
fn default_lmax_tol() -> f64 {
    1e-4
}
fn default_nodes() -> usize {
    QuadratureSpec::default().nodes
}
fn default_max_nodes() -> usize {
    QuadratureSpec::default().max_nodes
}
fn default_quad_rel_tol() -> f64 {
    QuadratureSpec::default().rel_tol
}

pub enum Truncation {
    Policy(LmaxPolicy),
    Ladder(Vec<usize>),
}

/// A resolved exact solver.
pub struct Solver {
    pub truncation: Truncation,
    pub quad: QuadratureSpec,
}

/// Converged energy of one geometry.
pub struct EnergyPoint {
    pub energy: f64,
    pub lmax_used: usize,
    pub quad_nodes: usize,
    pub stderr: f64,
}

impl SolverParams {
    pub fn solver(&self) -> CliResult<Solver> {
        let spec = self.lmax.trim();
        let truncation = if spec == "auto" {
            if self.lmax_start == 0 || self.lmax_step == 0 || self.lmax_start > self.lmax_cap || self.lmax_cap > L_MAX_CAP {
                return usage(format!("auto ladder needs 0 < lmax_start <= lmax_cap <= {L_MAX_CAP} and lmax_step > 0"));
            }
            Truncation::Policy(LmaxPolicy::Auto {
                start: self.lmax_start,
                step: self.lmax_step,
                cap: self.lmax_cap,
                rel_tol: self.lmax_tol,
            })
        } else if let Some(rest) = spec.strip_prefix("ladder:") {
            let v: Vec<usize> = rest.split(':').filter_map(|s| s.trim().parse().ok()).collect();
            match v.as_slice() {
                &[a, b, h] if a >= 1 && h >= 1 && b <= L_MAX_CAP && a + 2 * h <= b => {
                    Truncation::Ladder((a..=b).step_by(h).collect())
                }
                _ => return usage(format!("--lmax {spec}: need ladder:start:stop:step with at least 3 orders up to {L_MAX_CAP}")),
            }
        } else {
            match spec.parse::<usize>() {
                Ok(l) if (1..=L_MAX_CAP).contains(&l) => Truncation::Policy(LmaxPolicy::Fixed(l)),
                _ => return usage(format!("--lmax must be auto, 1..={L_MAX_CAP} or ladder:a:b:h, got '{spec}'")),
            }
        };
        if self.nodes < 8 || self.max_nodes < self.nodes || !(self.quad_rel_tol > 0.0) {
            return usage("quadrature needs nodes >= 8, max_nodes >= nodes and quad_rel_tol > 0");
        }
        let quad = QuadratureSpec {
            nodes: self.nodes,
            max_nodes: self.max_nodes,
            rel_tol: self.quad_rel_tol,
            ..QuadratureSpec::default()
        };
        Ok(Solver { truncation, quad })
    }
}

impl Solver {
    pub fn energy(&self, g: &Geometry) -> Result<EnergyPoint, CasimirError> {
        match &self.truncation {
            Truncation::Policy(p) => {
                let c = converged_energy(g, *p, &self.quad)?;
                Ok(EnergyPoint { energy: c.energy, lmax_used: c.lmax_used, quad_nodes: c.quad_nodes, stderr: c.stderr })
            }
            Truncation::Ladder(ls) => {
                let mut samples = Vec::with_capacity(ls.len());
                let mut nodes = 0;
                for &l in ls {
                    let e = casimir_energy(g, l, &self.quad)?;
                    nodes = nodes.max(e.nodes);
                    samples.push((l, e.energy));
                }
                let top = *ls.last().expect("ladder is non-empty");
                if samples.iter().all(|s| s.1 == 0.0) {
                    return Ok(EnergyPoint { energy: 0.0, lmax_used: top, quad_nodes: nodes, stderr: 0.0 });
                }
                let ex = extrapolate_lmax(&samples)?;
                Ok(EnergyPoint { energy: ex.e_inf, lmax_used: top, quad_nodes: nodes, stderr: ex.stderr[0] })
            }
        }
    }
}
