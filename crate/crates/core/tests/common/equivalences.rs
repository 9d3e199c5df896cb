//! Oracle comparisons returning their worst deviation, shared by the oracle
//! tests and the acceptance suite.

use casimir_core::energy::{EnergySolver, Geometry};
use casimir_core::linalg::complex_log_det;
use casimir_core::scattering::{t_cavity, t_inner, PerfectConductor, Polarization};
use casimir_core::specfun::wigner_3j;
use casimir_core::translation::v_block;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{full_channels, racah, reverse, v_full, Displacement};

/// Largest `|recursive - exact|` over all 3j symbols with `j <= j_max`, and
/// the number of symbols compared.
pub fn wigner_deviation(j_max: i64) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut count = 0;
    for j2 in 0..=j_max {
        for j3 in 0..=j_max {
            for j1 in (j2 - j3).abs()..=(j2 + j3).min(j_max) {
                for m2 in -j2..=j2 {
                    for m3 in -j3..=j3 {
                        let m1 = -m2 - m3;
                        if m1.abs() > j1 {
                            continue;
                        }
                        worst = worst.max((wigner_3j(j1, j2, j3, m1, m2, m3) - racah(j1, j2, j3, m1, m2, m3)).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    (worst, count)
}

/// Reduced z-axis blocks against the unreduced matrix along z: worst
/// relative entry deviation, and worst coupling between different `m`.
pub fn reduced_block_deviation(l_max: i64, args: &[f64]) -> (f64, f64) {
    let mut worst = 0.0f64;
    let mut leak = 0.0f64;
    for &arg in args {
        let full = v_full(l_max, &Displacement { arg, theta: 0.0, phi: 0.0 });
        let ch = full_channels(l_max);
        let pos = |p: usize, l: i64, m: i64| ch.iter().position(|&c| c == (p, l, m)).unwrap();
        for m in -l_max..=l_max {
            let block = v_block(m, l_max as usize, arg).unwrap();
            let bc = block.channels;
            for i in 0..bc.len() {
                let (pi, li) = bc.channel(i);
                for j in 0..bc.len() {
                    let (pj, lj) = bc.channel(j);
                    let b = full[(pos(pi as usize, li as i64, m), pos(pj as usize, lj as i64, m))];
                    worst = worst.max((block.data[(i, j)] - b).norm() / b.norm().max(1.0));
                }
            }
        }
        for i in 0..ch.len() {
            for j in 0..ch.len() {
                if ch[i].2 != ch[j].2 {
                    leak = leak.max(full[(i, j)].norm());
                }
            }
        }
    }
    (worst, leak)
}

fn t_diag(l_max: i64, kappa_radius: f64, cavity: bool) -> Vec<f64> {
    full_channels(l_max)
        .iter()
        .map(|&(p, l, _)| {
            let pol = if p == 0 { Polarization::E } else { Polarization::M };
            if cavity {
                t_cavity(l as usize, kappa_radius, pol, &PerfectConductor).unwrap()
            } else {
                t_inner(l as usize, kappa_radius, pol, &PerfectConductor).unwrap()
            }
        })
        .collect()
}

/// Sum of per-`m` block log-determinants against the log-determinant of the
/// full round trip built along a tilted direction (the determinant is
/// rotation invariant): worst relative deviation, imaginary parts included.
pub fn block_sum_deviation(l_max: i64) -> f64 {
    let (r, big_r, a) = (0.5, 1.0, 0.25);
    let solver = EnergySolver::new(Geometry::new(r, big_r, a).unwrap(), l_max as usize).unwrap();
    let mut worst = 0.0f64;
    for &kappa in &[0.4, 1.0, 3.0] {
        let te = t_diag(l_max, kappa * big_r, true);
        let ti = t_diag(l_max, kappa * r, false);
        let v = v_full(l_max, &Displacement { arg: kappa * a, theta: 0.7, phi: -1.1 });
        let vr = reverse(&v, l_max);
        let n = te.len();
        let diag = |t: &[f64]| DMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { t[i] } else { 0.0 }, 0.0));
        let round = diag(&te) * &vr * diag(&ti) * &v;
        let full = complex_log_det(&(DMatrix::identity(n, n) - round)).unwrap();
        let blocks: f64 = (-l_max..=l_max).map(|m| solver.block_logdet(m, kappa).unwrap().log_det).sum();
        let scale = full.re.abs().max(1.0);
        worst = worst.max((full.re - blocks).abs() / scale).max(full.im.abs() / scale);
    }
    worst
}

/// Truncated trace series `-sum tr(N^k)/k` against `ln det(1 - N)` for round
/// trips rescaled to spectral norm 0.1: worst excess of the error over the
/// geometric remainder bound (non-positive when the bound holds).
pub fn trace_series_excess() -> f64 {
    let solver = EnergySolver::new(Geometry::new(0.5, 1.0, 0.3).unwrap(), 6).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for m in [0i64, 2, 5] {
        let n = solver.round_trip_block(m, 1.3).unwrap().data;
        let norm = n.clone().svd(false, false).singular_values.max();
        let scaled = n * Complex64::new(0.1 / norm, 0.0);
        let dim = scaled.nrows();
        let exact = complex_log_det(&(DMatrix::identity(dim, dim) - &scaled)).unwrap();
        let terms = 14;
        let mut power = scaled.clone();
        let mut series = Complex64::new(0.0, 0.0);
        for k in 1..=terms {
            series -= power.trace() / k as f64;
            power = &power * &scaled;
        }
        let q: f64 = 0.1;
        let bound = dim as f64 * q.powi(terms + 1) / ((terms + 1) as f64 * (1.0 - q));
        worst = worst.max((series - exact).norm() - bound - 1e-15);
    }
    worst
}
