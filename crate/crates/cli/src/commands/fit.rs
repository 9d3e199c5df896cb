//! `fit`: registered fit modes over a CSV. Accepted inputs are the CSVs of
//! the `energy` (mode energy) and `force` (mode force) commands, or generic
//! tables `h,value[,stderr]` (energy, force) and `y,theta1[,stderr]`
//! (theta1). The window selects rows by the file's first column.

use casimir_core::analysis::{fit_registry, CurveSample, FitContext};
use casimir_core::pfa::theta1_fpfa;
use clap::Args;
use serde::{Deserialize, Serialize};

use super::energy::{d_over_r, default_basis};
use super::Outcome;
use crate::error::{usage, CliResult};
use crate::grid::parse_window;
use crate::output::ReadTable;

#[derive(Args, Serialize, Default, Debug)]
pub struct FitFlags {
    /// energy, force or theta1.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<String>,
    /// Closed range a:b of the input's first column.
    #[arg(long)]
    pub window: Option<String>,
    /// First-order full-PFA coefficient for the force ansatz (default: from
    /// the input's ratio and basis).
    #[arg(long, allow_hyphen_values = true)]
    pub theta1_fpfa: Option<f64>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct FitParams {
    pub mode: String,
    #[serde(rename = "in")]
    pub input: String,
    #[serde(default)]
    pub window: Option<String>,
    #[serde(default)]
    pub theta1_fpfa: Option<f64>,
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_out() -> String {
    "fit.json".into()
}

/// `(abscissa in file, fit sample)` pairs.
fn read_points(t: &ReadTable, mode: &str) -> CliResult<Vec<(f64, CurveSample)>> {
    let stderr = |name: &str, n: usize| -> CliResult<Vec<f64>> {
        Ok(match t.column(name) {
            Some(_) => t.numbers(name)?.into_iter().map(|s| if s.is_finite() { s.abs() } else { 0.0 }).collect(),
            None => vec![0.0; n],
        })
    };
    let command = t.meta.get("command").map(String::as_str);
    let pts: Vec<(f64, CurveSample)> = match (mode, command) {
        ("energy", Some("energy")) => {
            let ratio = t.meta_number("ratio")?;
            let xs = t.numbers("x")?;
            let rs = t.numbers("R(x)")?;
            let ef = t.numbers("E_fPFA")?;
            let se = stderr("extrapolation_stderr", xs.len())?;
            (0..xs.len())
                .map(|k| (xs[k], CurveSample { x: d_over_r(ratio, xs[k]), value: rs[k], stderr: (se[k] / ef[k]).abs() }))
                .collect()
        }
        ("force", Some("force")) => {
            let ratio = t.meta_number("ratio")?;
            let xs = t.numbers("x")?;
            let fs = t.numbers("F/F_fPFA")?;
            xs.iter().zip(&fs).map(|(&x, &f)| (x, CurveSample { x: d_over_r(ratio, x), value: f, stderr: 0.0 })).collect()
        }
        ("energy" | "force", _) => {
            let hs = t.numbers("h")?;
            let vs = t.numbers("value")?;
            let se = stderr("stderr", hs.len())?;
            (0..hs.len()).map(|k| (hs[k], CurveSample { x: hs[k], value: vs[k], stderr: se[k] })).collect()
        }
        ("theta1", _) => {
            let ys = t.numbers("y")?;
            let vs = if t.column("theta1").is_some() { t.numbers("theta1")? } else { t.numbers("value")? };
            let se = stderr("stderr", ys.len())?;
            (0..ys.len()).map(|k| (ys[k], CurveSample { x: ys[k], value: vs[k], stderr: se[k] })).collect()
        }
        _ => return usage(format!("no CSV reader for fit mode '{mode}'")),
    };
    Ok(pts)
}

pub fn run(p: &FitParams) -> CliResult<(Vec<u8>, Outcome)> {
    let mode = fit_registry().get(&p.mode)?;
    let t = ReadTable::read(&p.input)?;
    if t.column("failure").is_some() {
        return usage(format!("{} contains failed rows", p.input));
    }
    let mut pts = read_points(&t, &p.mode)?;
    if let Some(w) = &p.window {
        let (a, b) = parse_window(w)?;
        pts.retain(|(x, _)| *x >= a && *x <= b);
    }
    let mut samples: Vec<CurveSample> = pts.into_iter().map(|(_, s)| s).collect();
    samples.sort_by(|a, b| a.x.total_cmp(&b.x));
    if samples.iter().any(|s| !s.value.is_finite()) {
        return usage("non-finite values inside the fit window");
    }
    let theta1 = match p.theta1_fpfa {
        Some(v) => Some(v),
        None if p.mode == "force" => match t.meta_number("ratio") {
            Ok(ratio) => {
                let basis = t.meta.get("basis").cloned().unwrap_or_else(default_basis);
                Some(theta1_fpfa(-ratio, &basis)?)
            }
            Err(_) => return usage("force fit needs --theta1-fpfa or an input with '# ratio=' metadata"),
        },
        None => None,
    };
    let result = mode.fit(&samples, &FitContext { theta1_fpfa: theta1 })?;
    let text = serde_json::to_string_pretty(&result).expect("fit result serializes") + "\n";
    Ok((text.into_bytes(), Outcome::Ok))
}
