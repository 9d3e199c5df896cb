//! Independent oracles shared by integration tests: exact-rational 3j
//! symbols, spherical harmonics and the unreduced translation matrix for an
//! arbitrary displacement direction.
#![allow(dead_code)]

pub mod equivalences;

use casimir_core::specfun::scaled_bessel;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::f64::consts::PI;

fn fact(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Racah's closed sum, evaluated exactly and rounded once.
pub fn racah(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    let delta = BigRational::new(
        fact(j1 + j2 - j3) * fact(j1 - j2 + j3) * fact(-j1 + j2 + j3),
        fact(j1 + j2 + j3 + 1),
    );
    let f = fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2) * fact(j3 + m3) * fact(j3 - m3);
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = fact(k)
            * fact(j3 - j2 + k + m1)
            * fact(j3 - j1 + k - m2)
            * fact(j1 + j2 - j3 - k)
            * fact(j1 - k - m1)
            * fact(j2 - k + m2);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sq = delta * BigRational::from_integer(f) * sum.clone() * sum.clone();
    let mag = (sq.numer().to_f64().unwrap() / sq.denom().to_f64().unwrap()).sqrt();
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let s = if sum.is_negative() { -1.0 } else { 1.0 };
    phase * s * mag
}

/// `Y_lm(theta, phi)` with the Condon-Shortley phase.
pub fn ylm(l: i64, m: i64, theta: f64, phi: f64) -> Complex64 {
    if m.abs() > l {
        return Complex64::new(0.0, 0.0);
    }
    if m < 0 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        return sign * ylm(l, -m, theta, phi).conj();
    }
    let x = theta.cos();
    let s = theta.sin();
    // P_m^m, then upward in l.
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    let p = if l == m {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = x * (2 * m + 1) as f64 * pmm;
        for ll in m + 2..=l {
            let p2 = ((2 * ll - 1) as f64 * x * p1 - (ll + m - 1) as f64 * p0) / (ll - m) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| k as f64).product();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) / ratio).sqrt();
    norm * p * Complex64::from_polar(1.0, m as f64 * phi)
}

fn sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Displacement `kappa X` in spherical coordinates.
#[derive(Clone, Copy)]
pub struct Displacement {
    pub arg: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Displacement {
    fn i_l(&self, l: i64) -> f64 {
        scaled_bessel(l as usize, self.arg).unwrap().ln_i(l as usize).exp()
    }

    fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.arg * st * cp, self.arg * st * sp, self.arg * ct]
    }
}

/// Scalar translation coefficient `B_{l'm', lm}`.
pub fn b_unreduced(lp: i64, mp: i64, l: i64, m: i64, x: &Displacement) -> Complex64 {
    if m.abs() > l || mp.abs() > lp {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for lpp in (l - lp).abs()..=l + lp {
        let w = racah(l, lp, lpp, 0, 0, 0) * racah(l, lp, lpp, m, -mp, mp - m);
        if w == 0.0 {
            continue;
        }
        let pref = (4.0 * PI * ((2 * l + 1) * (2 * lp + 1) * (2 * lpp + 1)) as f64).sqrt();
        acc += pref * w * x.i_l(lpp) * sign(lpp) * ylm(lpp, m - mp, x.theta, x.phi);
    }
    sign(m) * acc
}

/// Same-polarization coefficient.
pub fn v_same(lp: i64, mp: i64, l: i64, m: i64, x: &Displacement) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for lpp in (l - lp).abs()..=l + lp {
        let w = racah(l, lp, lpp, 0, 0, 0) * racah(l, lp, lpp, m, -mp, mp - m);
        if w == 0.0 {
            continue;
        }
        let ll = (l * (l + 1)) as f64;
        let llp = (lp * (lp + 1)) as f64;
        let pref = (PI * ((2 * l + 1) * (2 * lp + 1) * (2 * lpp + 1)) as f64 / (ll * llp)).sqrt();
        let bracket = ll + llp - (lpp * (lpp + 1)) as f64;
        acc += bracket * pref * w * x.i_l(lpp) * sign(lpp) * ylm(lpp, m - mp, x.theta, x.phi);
    }
    sign(m) * acc
}

fn lambda(l: i64, m: i64, upper: bool) -> f64 {
    let (l, m) = (l as f64, m as f64);
    if upper {
        ((l - m) * (l + m + 1.0)).max(0.0).sqrt()
    } else {
        ((l + m) * (l - m + 1.0)).max(0.0).sqrt()
    }
}

/// Coefficient of an E row `(l', m')` and M column `(l, m)`.
pub fn v_cross(lp: i64, mp: i64, l: i64, m: i64, x: &Displacement) -> Complex64 {
    let [xx, xy, xz] = x.cartesian();
    let bp = lambda(l, m, true) * b_unreduced(lp, mp, l, m + 1, x);
    let bm = lambda(l, m, false) * b_unreduced(lp, mp, l, m - 1, x);
    let i = Complex64::new(0.0, 1.0);
    let dot = xx * 0.5 * (bp + bm) + xy * (bp - bm) / (2.0 * i) + xz * m as f64 * b_unreduced(lp, mp, l, m, x);
    -i / (((l * (l + 1) * lp * (lp + 1)) as f64).sqrt()) * dot
}

/// Channels `(pol, l, m)` for `1 <= l <= l_max`, E first.
pub fn full_channels(l_max: i64) -> Vec<(usize, i64, i64)> {
    let mut ch = Vec::new();
    for p in 0..2 {
        for l in 1..=l_max {
            for m in -l..=l {
                ch.push((p, l, m));
            }
        }
    }
    ch
}

/// Unreduced translation matrix over [`full_channels`].
pub fn v_full(l_max: i64, x: &Displacement) -> DMatrix<Complex64> {
    let ch = full_channels(l_max);
    let n = ch.len();
    DMatrix::from_fn(n, n, |i, j| {
        let (pi, lp, mp) = ch[i];
        let (pj, l, m) = ch[j];
        match (pi, pj) {
            (0, 0) | (1, 1) => v_same(lp, mp, l, m, x),
            (0, 1) => v_cross(lp, mp, l, m, x),
            _ => -v_cross(lp, mp, l, m, x),
        }
    })
}

/// `sigma3 V^dagger sigma3` over [`full_channels`].
pub fn reverse(v: &DMatrix<Complex64>, l_max: i64) -> DMatrix<Complex64> {
    let ch = full_channels(l_max);
    let mut out = v.adjoint();
    for i in 0..ch.len() {
        for j in 0..ch.len() {
            if ch[i].0 != ch[j].0 {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    out
}
