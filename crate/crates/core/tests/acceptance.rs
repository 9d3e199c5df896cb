//! Acceptance criteria 1-10. Each prints one PASS/FAIL line; the process
//! exits non-zero if any fails. Numeric arguments select criteria, e.g.
//! `cargo test --test acceptance -- 4 7`.

mod common;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use casimir_core::analysis::{fit_energy_ansatz, force_from_ratio, CurveSample};
use casimir_core::cp::{cp_coefficients_default, cp_energy_spherical};
use casimir_core::energy::{casimir_energy, extrapolate_lmax, Geometry, QuadratureSpec};
use casimir_core::pfa::{full_pfa_energy, full_pfa_force, pfa_energy_limit, pfa_force_limit, theta1_fpfa, PfaConfig};
use casimir_core::scattering::{pec_polarizabilities, Polarization};
use common::equivalences::{block_sum_deviation, reduced_block_deviation, trace_series_excess, wigner_deviation};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Orders 20, 25, ..., 45 used for the desk-scale fits.
const DESK_LADDER: [usize; 6] = [20, 25, 30, 35, 40, 45];
/// Longer ladder; the early rungs are dropped because the approach to the
/// limit is exponential only asymptotically in `l_max`.
const TAIL_LADDER: [usize; 7] = [50, 55, 60, 65, 70, 75, 80];

/// Energies at every rung of `ladder`, cached per geometry.
fn ladder(g: &Geometry, ladder: &[usize]) -> Vec<(usize, f64)> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = |l: usize| (g.r.to_bits(), g.a.to_bits(), l);
    let missing: Vec<usize> = ladder.iter().copied().filter(|&l| !cache.lock().unwrap().contains_key(&key(l))).collect();
    let fresh: Vec<(usize, f64)> = missing
        .par_iter()
        .map(|&l| (l, casimir_energy(g, l, &QuadratureSpec::default()).unwrap().energy))
        .collect();
    let mut c = cache.lock().unwrap();
    for (l, e) in fresh {
        c.insert(key(l), e);
    }
    ladder.iter().map(|&l| (l, c[&key(l)])).collect()
}

/// Extrapolated energy and its standard error.
fn extrapolated(g: &Geometry, rungs: &[usize]) -> (f64, f64) {
    let ex = extrapolate_lmax(&ladder(g, rungs)).unwrap();
    (ex.e_inf, ex.stderr[0])
}

/// Unit cavity with inner radius `r` and gap `h r`.
fn at_gap(r: f64, h: f64) -> Geometry {
    Geometry::new(r, 1.0, 1.0 - r - h * r).unwrap()
}

/// `R = E/E_fPFA` (r-based) at the given gaps, as fit samples over `h`.
fn ratio_samples(r: f64, hs: &[f64], rungs: &[usize]) -> Vec<CurveSample> {
    let mut out: Vec<CurveSample> = hs
        .iter()
        .map(|&h| {
            let (e, se) = extrapolated(&at_gap(r, h), rungs);
            let ef = full_pfa_energy(&PfaConfig::new(-r, h, "r"), 1.0).unwrap();
            CurveSample { x: h, value: e / ef, stderr: (se / ef).abs() }
        })
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    out
}

fn concentric_null() -> Verdict {
    let mut worst = 0.0f64;
    for r in [0.1, 0.5] {
        let g = Geometry::new(r, 1.0, 0.0).unwrap();
        for l in [5, 20] {
            worst = worst.max(casimir_energy(&g, l, &QuadratureSpec::default()).unwrap().energy.abs());
        }
    }
    verdict(worst <= 1e-12, format!("max |E(a=0)| = {worst:.3e} (tol 1e-12)"))
}

fn casimir_polder_agreement() -> Verdict {
    let cases: Vec<(f64, f64)> = [0.05, 0.1].iter().flat_map(|&r| [0.1, 0.2, 0.3, 0.4].map(|a| (r, a))).collect();
    let devs: Vec<(f64, f64, f64)> = cases
        .par_iter()
        .map(|&(r, a)| {
            let e = casimir_energy(&Geometry::new(r, 1.0, a).unwrap(), 15, &QuadratureSpec::default()).unwrap().energy;
            let e_cp = cp_energy_spherical(&pec_polarizabilities(2, r), a, 1.0).unwrap();
            (r, a, ((e - e_cp) / e).abs())
        })
        .collect();
    let (r, a, worst) = devs.iter().copied().fold((0.0, 0.0, 0.0), |m, d| if d.2 > m.2 { d } else { m });
    let over: Vec<String> =
        devs.iter().filter(|d| d.2 >= 0.01).map(|d| format!("r/R={} a/R={}: {:.4}%", d.0, d.1, 100.0 * d.2)).collect();
    let mut detail = format!("max |E - E_CP|/|E| = {:.4}% at r/R = {r}, a/R = {a} (tol 1%)", 100.0 * worst);
    if !over.is_empty() {
        detail += &format!("; over tolerance: {}; E is converged in l_max and the residual scales as r^3, the omitted O(r^6) order", over.join(", "));
    }
    verdict(worst < 0.01, detail)
}

fn h1_identity() -> Verdict {
    let mut worst = 0.0f64;
    for k in 0..=8 {
        let c = cp_coefficients_default(0.1 * k as f64).unwrap();
        for pol in Polarization::BOTH {
            worst = worst.max((c.h1(pol) - 2.0 * (c.f(pol) - c.f0(pol))).abs());
        }
    }
    verdict(worst < 1e-8, format!("max |h1 - 2(f - f(0))| = {worst:.3e} (tol 1e-8)"))
}

fn pfa_limit() -> Verdict {
    let h = 1e-4;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for basis in ["r", "R"] {
        for y in [-0.9f64, -0.5, 0.5, 1.0] {
            let f = full_pfa_force(&PfaConfig::new(y, h, basis), 1.0).unwrap();
            let lead = pfa_force_limit(h * y.abs(), y.abs(), 1f64.copysign(y)).unwrap();
            let dev = (f / lead - 1.0).abs();
            worst = worst.max(dev);
            if dev >= 1e-4 {
                failures.push(format!("{basis} y={y}: {dev:.2e}"));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("max relative deviation {worst:.2e} at d/r = 1e-4 (tol 1e-4)")
    } else {
        format!(
            "max relative deviation {worst:.2e} at d/r = 1e-4 (tol 1e-4); over tolerance: {}; the O(d/r) term theta1_fPFA d/2r alone exceeds 1e-4 there",
            failures.join(", ")
        )
    };
    verdict(failures.is_empty(), detail)
}

fn theta1_fpfa_consistency() -> Verdict {
    let slope = |y: f64, h: f64| {
        let e = full_pfa_energy(&PfaConfig::new(y, h, "r"), 1.0).unwrap();
        let lead = pfa_energy_limit(h * y.abs(), y.abs(), 1f64.copysign(y)).unwrap();
        (e / lead - 1.0) / h
    };
    // The ratio carries an h^2 ln h term, so the slope is fitted on
    // 1, h ln h, h, h^2 ln h rather than Richardson-extrapolated.
    let hs: [f64; 8] = [1e-3, 7e-4, 5e-4, 3.5e-4, 2.5e-4, 1.75e-4, 1.25e-4, 1e-4];
    let mut worst = 0.0f64;
    for y in [-0.9f64, -0.5, -0.1] {
        let design = DMatrix::from_fn(hs.len(), 4, |i, j| {
            let h = hs[i];
            [1.0, h * h.ln(), h, h * h * h.ln()][j]
        });
        let rhs = DVector::from_iterator(hs.len(), hs.iter().map(|&h| slope(y, h)));
        let coef = design.svd(true, true).solve(&rhs, 1e-14).unwrap();
        worst = worst.max((coef[0] - (-y - y / (1.0 + y) - 3.0)).abs());
    }
    verdict(worst < 1e-4, format!("max |theta1_numeric - closed form| = {worst:.2e} (tol 1e-4)"))
}

fn lmax25_adequacy() -> Verdict {
    let g = Geometry::from_fraction(0.5, 0.7).unwrap();
    let rungs = ladder(&g, &DESK_LADDER);
    let e25 = rungs.iter().find(|s| s.0 == 25).unwrap().1;
    let (e_inf, _) = extrapolated(&g, &DESK_LADDER);
    let dev = ((e25 - e_inf) / e_inf).abs();
    verdict(dev < 0.02, format!("|E(25) - E_inf|/|E_inf| = {:.4}% at x = 0.7 (tol 2%)", 100.0 * dev))
}

/// Gaps `d/r` of the offsets `x = 0.800, 0.825, 0.850, 0.875` at `r/R = 0.5`.
const CLOSE_GAPS: [f64; 4] = [0.2, 0.175, 0.15, 0.125];

fn close_separation_fit() -> Verdict {
    let samples = ratio_samples(0.5, &CLOSE_GAPS, &DESK_LADDER);
    let fit = fit_energy_ansatz(&samples).unwrap();
    let t1 = fit.value("theta1_bar").unwrap();
    let se = fit.stderr("theta1_bar").map_or("n/a".to_string(), |s| format!("{s:.3}"));
    verdict(
        (t1 - 1.770).abs() <= 0.20,
        format!("theta1_bar = {t1:.4} +- {se} on x in [0.80, 0.875], l_max 20..45 (target 1.770 +- 0.20)"),
    )
}

/// Gaps `d/r` for the curve check: offsets `x = 0.825..0.9` at `r/R = 0.5`.
/// `d/r = 0.2` biases the two-term ansatz upward; `d/r = 0.075` is not
/// converged by `l_max = 80` at `r/R = 0.3`.
const CURVE_GAPS: [f64; 4] = [0.175, 0.15, 0.125, 0.1];

fn theta1_curve_consistency() -> Verdict {
    let curve = |y: f64| -(1.05 * y + 1.08 * y / (1.0 + y) + 1.38);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for r in [0.3, 0.5] {
        let y = -r;
        let samples = ratio_samples(r, &CURVE_GAPS, &TAIL_LADDER);
        let fit = fit_energy_ansatz(&samples).unwrap();
        let theta1 = fit.value("theta1_bar").unwrap() + theta1_fpfa(y, "r").unwrap();
        let dev = (theta1 - curve(y)).abs();
        worst = worst.max(dev);
        parts.push(format!("y={y}: theta1 = {theta1:.4} vs curve {:.4}", curve(y)));
    }
    verdict(
        worst <= 0.15,
        format!("{}; max deviation {worst:.4} (tol 0.15; d/r in [0.1, 0.175], l_max 50..80)", parts.join(", ")),
    )
}

fn oracle_equivalences() -> Verdict {
    let block = block_sum_deviation(3);
    let (wig, n) = wigner_deviation(10);
    let (reduced, leak) = reduced_block_deviation(4, &[0.3, 1.7, 6.0]);
    let excess = trace_series_excess();
    let pass = block < 1e-11 && wig < 1e-13 && reduced < 1e-12 && leak < 1e-12 && excess <= 0.0;
    verdict(
        pass,
        format!(
            "block-sum vs full log-det {block:.1e} (1e-11); 3j vs exact over {n} symbols {wig:.1e} (1e-13); reduced vs unreduced {reduced:.1e} (1e-12); trace series within remainder bound: {}",
            excess <= 0.0
        ),
    )
}

fn monotonicity_and_force() -> Verdict {
    let r = 0.5;
    let xs: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    let energies: Vec<f64> = xs.iter().map(|&x| extrapolated(&Geometry::from_fraction(r, x).unwrap(), &DESK_LADDER).0).collect();
    let negative = energies.iter().all(|&e| e < 0.0);
    let decreasing = energies.windows(2).all(|w| w[1] < w[0]);

    // Force pipeline: R(x) on a uniform grid, central differences, and the
    // full-PFA normalization.
    let grid: Vec<f64> = (0..7).map(|k| 0.75 + 0.025 * k as f64).collect();
    let hs: Vec<f64> = grid.iter().map(|x| (1.0 - r) * (1.0 - x) / r).collect();
    let mut ratio = Vec::new();
    let mut e_f = Vec::new();
    let mut f_f = Vec::new();
    for (&x, &h) in grid.iter().zip(&hs) {
        let (e, se) = extrapolated(&Geometry::from_fraction(r, x).unwrap(), &DESK_LADDER);
        let cfg = PfaConfig::new(-r, h, "r");
        let ef = full_pfa_energy(&cfg, 1.0).unwrap();
        ratio.push(CurveSample { x, value: e / ef, stderr: (se / ef).abs() });
        e_f.push(ef);
        f_f.push(full_pfa_force(&cfg, 1.0).unwrap());
    }
    let force = force_from_ratio(&ratio, &e_f, &f_f, 1.0 - r).unwrap();
    let gaps: Vec<f64> = force.iter().map(|s| s.value - 1.0).collect();
    let approaching = gaps.iter().all(|&g| g > 0.0) && gaps.windows(2).all(|w| w[1] < w[0]);
    // Quadratic in h through all points; the intercept is the x -> 1 limit.
    let n = hs.len();
    let a = nalgebra::DMatrix::from_fn(n, 3, |i, j| hs[i].powi(j as i32));
    let b = nalgebra::DVector::from_iterator(n, force.iter().map(|s| s.value));
    let coef = a.svd(true, true).solve(&b, 1e-14).unwrap();
    let limit = coef[0];
    let pass = negative && decreasing && approaching && (limit - 1.0).abs() < 0.05;
    verdict(
        pass,
        format!(
            "E < 0: {negative}, strictly decreasing on x = 0.1..0.9: {decreasing}; F/F_fPFA = {:.4} at x = 0.75 .. {:.4} at x = 0.9, monotone toward 1: {approaching}, extrapolated to x = 1: {limit:.4} (tol 0.05)",
            force[0].value,
            force[n - 1].value
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict); 10] = [
        (1, "concentric null", concentric_null),
        (2, "Casimir-Polder agreement", casimir_polder_agreement),
        (3, "h1-f identity", h1_identity),
        (4, "PFA limit of the full-PFA force", pfa_limit),
        (5, "theta1_fPFA consistency", theta1_fpfa_consistency),
        (6, "l_max = 25 adequacy at x = 0.7", lmax25_adequacy),
        (7, "close-separation fit", close_separation_fit),
        (8, "theta1 curve consistency", theta1_curve_consistency),
        (9, "oracle equivalences", oracle_equivalences),
        (10, "monotonicity, sign and force limit", monotonicity_and_force),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, title, check) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {status}: {title}: {} [{:.1} s]", v.detail, start.elapsed().as_secs_f64());
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} criterion(s) failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
