//! `pfa`: full proximity-force energy and force along a gap sweep, with the
//! first-order coefficient read off against the leading term.

use casimir_core::pfa::{full_pfa_energy, full_pfa_force, pfa_energy_limit, PfaConfig};
use clap::Args;
use serde::{Deserialize, Serialize};

use super::energy::default_basis;
use super::Outcome;
use crate::error::{usage, CliResult};
use crate::grid::parse_grid;
use crate::output::{num, Table};

#[derive(Args, Serialize, Default, Debug)]
pub struct PfaFlags {
    /// Signed radius ratio y = r/R (negative: sphere inside sphere).
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Gaps d/r as start:stop:step or a single value.
    #[arg(long)]
    pub d_over_r: Option<String>,
    /// r or R.
    #[arg(long)]
    pub basis: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct PfaParams {
    pub y: f64,
    pub d_over_r: String,
    #[serde(default = "default_basis")]
    pub basis: String,
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_out() -> String {
    "pfa.csv".into()
}

pub fn run(p: &PfaParams) -> CliResult<(Vec<u8>, Outcome)> {
    let hs = parse_grid(&p.d_over_r)?;
    if hs.iter().any(|&h| !(h > 0.0)) {
        return usage("d/r must be positive");
    }
    let mut t = Table::new(&["d/r", "E", "F", "theta1_estimate"]);
    t.meta("command", "pfa");
    t.meta("y", num(p.y));
    t.meta("basis", &p.basis);
    t.meta("units", "lengths in |R|, energies in hbar c/|R|, forces in hbar c/|R|^2");
    for h in hs {
        let cfg = PfaConfig::new(p.y, h, &p.basis);
        let e = full_pfa_energy(&cfg, 1.0)?;
        let f = full_pfa_force(&cfg, 1.0)?;
        let lead = pfa_energy_limit(h * p.y.abs(), p.y.abs(), 1.0f64.copysign(p.y))?;
        t.rows.push(vec![num(h), num(e), num(f), num((e / lead - 1.0) / h)]);
    }
    Ok((t.to_bytes()?, Outcome::Ok))
}
