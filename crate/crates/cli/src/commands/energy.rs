//! `energy`: exact energy along a sweep of the offset fraction
//! `x = a/(R - r)`, normalized by the full PFA.

use casimir_core::energy::Geometry;
use casimir_core::pfa::{full_pfa_energy, PfaConfig};
use casimir_core::CasimirError;
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EnergyPoint, Outcome, Solver, SolverFlags, SolverParams, UNITS};
use crate::error::{CliError, CliResult};
use crate::grid::parse_grid;
use crate::output::{num, Table};

#[derive(Args, Serialize, Default, Debug)]
pub struct EnergyFlags {
    /// Radius ratio r/R of the inner sphere.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Offset fractions x = a/(R-r) as start:stop:step or a single value.
    #[arg(long)]
    pub x_grid: Option<String>,
    /// Full-PFA normalization: r or R.
    #[arg(long)]
    pub basis: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverFlags,
    /// Output CSV; the manifest goes to <out>.manifest.json.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct EnergyParams {
    pub ratio: f64,
    pub x_grid: String,
    #[serde(default = "default_basis")]
    pub basis: String,
    #[serde(flatten)]
    pub solver: SolverParams,
    #[serde(default = "default_out")]
    pub out: String,
}

pub fn default_basis() -> String {
    "r".into()
}

fn default_out() -> String {
    "energy.csv".into()
}

/// One sweep point; `result` holds the solver failure, if any.
pub struct EnergyRow {
    pub x: f64,
    pub e_fpfa: f64,
    pub result: Result<EnergyPoint, CasimirError>,
}

/// Gap over inner radius at offset fraction `x`.
pub fn d_over_r(ratio: f64, x: f64) -> f64 {
    (1.0 - ratio) * (1.0 - x) / ratio
}

/// Solves every point of the sweep, rows in input order. Invalid geometry
/// is a usage error; solver failures stay attached to their rows.
pub fn sweep(ratio: f64, xs: &[f64], basis: &str, solver: &Solver) -> CliResult<Vec<EnergyRow>> {
    let mut prepared = Vec::with_capacity(xs.len());
    for &x in xs {
        let g = Geometry::from_fraction(ratio, x)?;
        let e_fpfa = full_pfa_energy(&PfaConfig::new(-ratio, d_over_r(ratio, x), basis), 1.0)?;
        prepared.push((x, g, e_fpfa));
    }
    let rows: Vec<EnergyRow> = prepared
        .par_iter()
        .map(|(x, g, e_fpfa)| EnergyRow { x: *x, e_fpfa: *e_fpfa, result: solver.energy(g) })
        .collect();
    if let Some(Err(e @ CasimirError::Domain(_))) = rows.iter().map(|r| &r.result).find(|r| r.is_err()) {
        return Err(CliError::Usage(e.to_string()));
    }
    Ok(rows)
}

/// Failure summary of a sweep, if any row failed.
pub fn failures(messages: impl Iterator<Item = Option<String>>) -> Outcome {
    let failed: Vec<String> = messages.flatten().collect();
    match failed.first() {
        None => Outcome::Ok,
        Some(first) => Outcome::Partial(format!("{} point(s) failed; first: {first}", failed.len())),
    }
}

pub fn run(p: &EnergyParams) -> CliResult<(Vec<u8>, Outcome)> {
    let solver = p.solver.solver()?;
    let xs = parse_grid(&p.x_grid)?;
    let rows = sweep(p.ratio, &xs, &p.basis, &solver)?;
    let outcome = failures(rows.iter().map(|r| r.result.as_ref().err().map(|e| e.to_string())));
    let mut t = Table::new(&["x", "E", "E_fPFA", "R(x)", "lmax_used", "quad_nodes", "extrapolation_stderr"]);
    if matches!(outcome, Outcome::Partial(_)) {
        t.columns.push("failure".into());
    }
    t.meta("command", "energy");
    t.meta("ratio", num(p.ratio));
    t.meta("basis", &p.basis);
    t.meta("units", UNITS);
    for row in &rows {
        let mut cells = vec![num(row.x)];
        match &row.result {
            Ok(pt) => cells.extend([
                num(pt.energy),
                num(row.e_fpfa),
                num(pt.energy / row.e_fpfa),
                pt.lmax_used.to_string(),
                pt.quad_nodes.to_string(),
                num(pt.stderr),
            ]),
            Err(_) => cells.extend([String::new(), num(row.e_fpfa), String::new(), String::new(), String::new(), String::new()]),
        }
        if t.columns.len() > 7 {
            cells.push(row.result.as_ref().err().map(|e| e.to_string()).unwrap_or_default());
        }
        t.rows.push(cells);
    }
    Ok((t.to_bytes()?, outcome))
}
