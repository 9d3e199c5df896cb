//! `cp`: multipole (Casimir-Polder) energy of a small perfectly conducting
//! sphere in the cavity, optionally against the exact solver.

use casimir_core::cp::{cp_coefficients, default_quad, CpOrder, DEFAULT_L_CUT, MAX_L_CUT};
use casimir_core::energy::Geometry;
use casimir_core::scattering::pec_polarizabilities;
use casimir_core::CasimirError;
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::failures;
use super::{Outcome, SolverFlags, SolverParams, UNITS};
use crate::error::{usage, CliError, CliResult};
use crate::grid::parse_grid;
use crate::output::{num, opt_num, Table};

#[derive(Args, Serialize, Default, Debug)]
pub struct CpFlags {
    /// Radius ratio r/R of the inner sphere.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Offsets a/R as start:stop:step or a single value.
    #[arg(long = "a-over-R", alias = "a-over-r")]
    pub a_over_r: Option<String>,
    /// 3 keeps the dipole term, 5 adds the quadrupole.
    #[arg(long)]
    pub order: Option<u32>,
    /// Also run the exact solver and report the fractional error.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub compare_exact: Option<bool>,
    /// Cap on the multipole sum inside the coefficient integrals.
    #[arg(long)]
    pub l_cut: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct CpParams {
    pub ratio: f64,
    pub a_over_r: String,
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default)]
    pub compare_exact: bool,
    #[serde(default = "default_l_cut")]
    pub l_cut: usize,
    #[serde(flatten)]
    pub solver: SolverParams,
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_order() -> u32 {
    5
}

fn default_l_cut() -> usize {
    DEFAULT_L_CUT
}

fn default_out() -> String {
    "cp.csv".into()
}

struct CpRow {
    xi: f64,
    result: Result<(f64, Option<f64>), CasimirError>,
}

pub fn run(p: &CpParams) -> CliResult<(Vec<u8>, Outcome)> {
    let order = CpOrder::from_power(p.order)?;
    if !(2..=MAX_L_CUT).contains(&p.l_cut) {
        return usage(format!("--l-cut must lie in 2..={MAX_L_CUT}"));
    }
    let solver = p.solver.solver()?;
    let pols = pec_polarizabilities(2, p.ratio);
    let xis = parse_grid(&p.a_over_r)?;
    let mut geoms = Vec::with_capacity(xis.len());
    for &xi in &xis {
        geoms.push(Geometry::new(p.ratio, 1.0, xi)?);
    }
    let quad = default_quad();
    let rows: Vec<CpRow> = xis
        .par_iter()
        .zip(&geoms)
        .map(|(&xi, g)| {
            let result = (|| {
                let e_cp = if xi == 0.0 { 0.0 } else { cp_coefficients(xi, p.l_cut, &quad)?.spherical_energy(&pols, 1.0, order) };
                let exact = if p.compare_exact { Some(solver.energy(g)?.energy) } else { None };
                Ok((e_cp, exact))
            })();
            CpRow { xi, result }
        })
        .collect();
    if let Some(Err(e @ CasimirError::Domain(_))) = rows.iter().map(|r| &r.result).find(|r| r.is_err()) {
        return Err(CliError::Usage(e.to_string()));
    }
    let outcome = failures(rows.iter().map(|r| r.result.as_ref().err().map(|e| e.to_string())));
    let mut t = Table::new(&["a/R", "E_CP", "E_exact", "fractional_error_pct", "order"]);
    let partial = matches!(outcome, Outcome::Partial(_));
    if partial {
        t.columns.push("failure".into());
    }
    t.meta("command", "cp");
    t.meta("ratio", num(p.ratio));
    t.meta("units", UNITS);
    for r in &rows {
        let mut cells = match &r.result {
            Ok((e_cp, exact)) => vec![
                num(r.xi),
                num(*e_cp),
                opt_num(*exact),
                opt_num(exact.map(|e| 100.0 * (e - e_cp) / e)),
                p.order.to_string(),
            ],
            Err(_) => vec![num(r.xi), String::new(), String::new(), String::new(), p.order.to_string()],
        };
        if partial {
            cells.push(r.result.as_ref().err().map(|e| e.to_string()).unwrap_or_default());
        }
        t.rows.push(cells);
    }
    Ok((t.to_bytes()?, outcome))
}
