//! `force`: force over the full PFA from the energy ratio `R(x)` and its
//! central-difference derivative, read from an energy CSV or computed inline.

use casimir_core::analysis::{force_from_ratio, CurveSample};
use casimir_core::pfa::{full_pfa_force, PfaConfig};
use clap::Args;
use serde::{Deserialize, Serialize};

use super::energy::{d_over_r, default_basis, sweep};
use super::{Outcome, SolverFlags, SolverParams, UNITS};
use crate::error::{usage, CliResult};
use crate::grid::parse_grid;
use crate::output::{num, ReadTable, Table};

#[derive(Args, Serialize, Default, Debug)]
pub struct ForceFlags {
    /// Energy CSV written by the `energy` command.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<String>,
    /// Inline sweep: radius ratio r/R.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Inline sweep: uniform offset grid start:stop:step.
    #[arg(long)]
    pub x_grid: Option<String>,
    /// Full-PFA normalization: r or R (default: the input's, else r).
    #[arg(long)]
    pub basis: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct ForceParams {
    #[serde(rename = "in", default)]
    pub input: Option<String>,
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub x_grid: Option<String>,
    #[serde(default)]
    pub basis: Option<String>,
    #[serde(flatten)]
    pub solver: SolverParams,
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_out() -> String {
    "force.csv".into()
}

/// Energy ratio series with its normalization.
struct RatioSeries {
    ratio: f64,
    basis: String,
    samples: Vec<CurveSample>,
    e_fpfa: Vec<f64>,
}

fn from_csv(path: &str, basis: Option<&str>) -> CliResult<RatioSeries> {
    let t = ReadTable::read(path)?;
    if t.column("failure").is_some() {
        return usage(format!("{path} contains failed rows; rerun the energy sweep first"));
    }
    let ratio = t.meta_number("ratio")?;
    let basis = basis.map(str::to_string).or_else(|| t.meta.get("basis").cloned()).unwrap_or_else(default_basis);
    let xs = t.numbers("x")?;
    let rs = t.numbers("R(x)")?;
    let ef = t.numbers("E_fPFA")?;
    let se = t.numbers("extrapolation_stderr")?;
    let samples = (0..xs.len())
        .map(|k| CurveSample { x: xs[k], value: rs[k], stderr: (se[k] / ef[k]).abs() })
        .map(|s| if s.stderr.is_finite() { s } else { CurveSample { stderr: 0.0, ..s } })
        .collect();
    Ok(RatioSeries { ratio, basis, samples, e_fpfa: ef })
}

pub fn run(p: &ForceParams) -> CliResult<(Vec<u8>, Outcome)> {
    let series = match (&p.input, p.ratio, &p.x_grid) {
        (Some(path), None, None) => from_csv(path, p.basis.as_deref())?,
        (None, Some(ratio), Some(grid)) => {
            let basis = p.basis.clone().unwrap_or_else(default_basis);
            let rows = sweep(ratio, &parse_grid(grid)?, &basis, &p.solver.solver()?)?;
            if let Outcome::Partial(msg) =
                super::energy::failures(rows.iter().map(|r| r.result.as_ref().err().map(|e| e.to_string())))
            {
                return Ok((failure_table(ratio, &basis, &rows)?, Outcome::Partial(msg)));
            }
            let samples = rows
                .iter()
                .map(|r| {
                    let pt = r.result.as_ref().expect("failures handled above");
                    CurveSample { x: r.x, value: pt.energy / r.e_fpfa, stderr: (pt.stderr / r.e_fpfa).abs() }
                })
                .map(|s| if s.stderr.is_finite() { s } else { CurveSample { stderr: 0.0, ..s } })
                .collect();
            RatioSeries { ratio, basis, samples, e_fpfa: rows.iter().map(|r| r.e_fpfa).collect() }
        }
        _ => return usage("force needs either --in <energy.csv> or both --ratio and --x-grid"),
    };
    if series.samples.iter().any(|s| !s.value.is_finite()) {
        return usage("R(x) is undefined at some point (x = 0 has no full-PFA normalization)");
    }
    let f_fpfa = series
        .samples
        .iter()
        .map(|s| full_pfa_force(&PfaConfig::new(-series.ratio, d_over_r(series.ratio, s.x), &series.basis), 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let force = force_from_ratio(&series.samples, &series.e_fpfa, &f_fpfa, 1.0 - series.ratio)?;
    let mut t = header(series.ratio, &series.basis);
    let n = force.len();
    for (k, (s, f)) in force.iter().zip(&f_fpfa).enumerate() {
        let one_sided = k == 0 || k == n - 1;
        t.rows.push(vec![num(s.x), num(s.value), num(s.value * f), one_sided.to_string()]);
    }
    Ok((t.to_bytes()?, Outcome::Ok))
}

fn header(ratio: f64, basis: &str) -> Table {
    let mut t = Table::new(&["x", "F/F_fPFA", "F", "one_sided"]);
    t.meta("command", "force");
    t.meta("ratio", num(ratio));
    t.meta("basis", basis);
    t.meta("units", UNITS);
    t
}

/// Derivatives need every point, so a failed sweep reports per-row status only.
fn failure_table(ratio: f64, basis: &str, rows: &[super::energy::EnergyRow]) -> CliResult<Vec<u8>> {
    let mut t = header(ratio, basis);
    t.columns.push("failure".into());
    for r in rows {
        let fail = r.result.as_ref().err().map(|e| e.to_string()).unwrap_or_default();
        t.rows.push(vec![num(r.x), String::new(), String::new(), String::new(), fail]);
    }
    t.to_bytes()
}
