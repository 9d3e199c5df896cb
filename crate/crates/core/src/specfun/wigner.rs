//! Wigner 3j symbols by three-term recursion over the first angular momentum.
//!
//! For fixed `(j2, j3, m2, m3)` the symbols `(j1 j2 j3; m1 m2 m3)` with
//! `m1 = -m2 - m3` satisfy
//! `j A(j+1) f(j+1) + B(j) f(j) + (j+1) A(j) f(j-1) = 0` in `j = j1`.
//! The recursion is run forward from `jmin` and backward from `jmax`, the two
//! solutions are joined in the oscillatory region, and the family is
//! normalised by `sum (2j+1) f^2 = 1` with `sign f(jmax) = (-1)^(j2-j3-m1)`.

/// A family of 3j symbols over `j1 = jmin..=jmax`.
#[derive(Debug, Clone)]
pub struct ThreeJFamily {
    pub jmin: i64,
    pub values: Vec<f64>,
}

impl ThreeJFamily {
    pub fn get(&self, j1: i64) -> f64 {
        let idx = j1 - self.jmin;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    pub fn jmax(&self) -> i64 {
        self.jmin + self.values.len() as i64 - 1
    }
}

/// Key for the symbol `(l l' l''; m, -m', m' - m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ThreeJKey {
    pub l: i64,
    pub lp: i64,
    pub lpp: i64,
    pub m: i64,
    pub mp: i64,
}

pub fn three_j_family(j2: i64, j3: i64, m2: i64, m3: i64) -> ThreeJFamily {
    let m1 = -m2 - m3;
    let empty = ThreeJFamily { jmin: 0, values: Vec::new() };
    if j2 < 0 || j3 < 0 || m2.abs() > j2 || m3.abs() > j3 {
        return empty;
    }
    let jmin = (j2 - j3).abs().max(m1.abs());
    let jmax = j2 + j3;
    if jmin > jmax {
        return empty;
    }
    let n = (jmax - jmin + 1) as usize;

    let (j2f, j3f, m1f, m2f, m3f) = (j2 as f64, j3 as f64, m1 as f64, m2 as f64, m3 as f64);
    let a = |j: f64| {
        let d = j2f - j3f;
        let s = j2f + j3f + 1.0;
        ((j * j - d * d) * (s * s - j * j) * (j * j - m1f * m1f)).max(0.0).sqrt()
    };
    let b = |j: f64| {
        -(2.0 * j + 1.0)
            * (j2f * (j2f + 1.0) * m1f - j3f * (j3f + 1.0) * m1f - j * (j + 1.0) * (m3f - m2f))
    };

    let mut f = vec![0.0; n];
    if n == 1 {
        f[0] = 1.0;
    } else if m2 == m3 && (m2 == 0 || j2 == j3) {
        // B vanishes identically: odd j1 - jmin are zero by symmetry and the
        // even ones follow from a stable first-order product.
        f[0] = 1.0;
        let mut idx = 2;
        while idx < n {
            let j = (jmin + idx as i64 - 1) as f64;
            f[idx] = -(j + 1.0) * a(j) * f[idx - 2] / (j * a(j + 1.0));
            idx += 2;
        }
    } else {
        let fwd = forward(jmin, n, &a, &b, m2f, j2f);
        let bwd = backward(jmax, n, &a, &b);
        let k = match_index(&fwd, &bwd);
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(n - 1);
        let (mut num, mut den) = (0.0, 0.0);
        for i in lo..=hi {
            num += fwd[i] * bwd[i];
            den += fwd[i] * fwd[i];
        }
        let scale = num / den;
        for i in 0..n {
            f[i] = if i <= k { fwd[i] * scale } else { bwd[i] };
        }
    }

    let norm: f64 = f
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * (jmin + i as i64) as f64 + 1.0) * v * v)
        .sum::<f64>()
        .sqrt();
    let want_positive = (j2 - j3 - m1).rem_euclid(2) == 0;
    let top = f[n - 1];
    let sign = if (top >= 0.0) == want_positive { 1.0 } else { -1.0 };
    for v in f.iter_mut() {
        *v *= sign / norm;
    }
    ThreeJFamily { jmin, values: f }
}

fn forward(
    jmin: i64,
    n: usize,
    a: &impl Fn(f64) -> f64,
    b: &impl Fn(f64) -> f64,
    m2: f64,
    j2: f64,
) -> Vec<f64> {
    let mut f = vec![0.0; n];
    f[0] = 1.0;
    let j0 = jmin as f64;
    f[1] = if jmin == 0 {
        // (1 j j; 0 m -m) / (0 j j; 0 m -m)
        m2 / (j2 * (j2 + 1.0)).sqrt()
    } else {
        -b(j0) / (j0 * a(j0 + 1.0))
    };
    for i in 1..n - 1 {
        let j = j0 + i as f64;
        f[i + 1] = -(b(j) * f[i] + (j + 1.0) * a(j) * f[i - 1]) / (j * a(j + 1.0));
        if f[i + 1].abs() > 1e150 {
            rescale(&mut f[..=i + 1]);
        }
    }
    f
}

fn backward(jmax: i64, n: usize, a: &impl Fn(f64) -> f64, b: &impl Fn(f64) -> f64) -> Vec<f64> {
    let mut g = vec![0.0; n];
    g[n - 1] = 1.0;
    let jt = jmax as f64;
    g[n - 2] = -b(jt) / ((jt + 1.0) * a(jt));
    for i in (1..n - 1).rev() {
        let j = jt - (n - 1 - i) as f64;
        g[i - 1] = -(b(j) * g[i] + j * a(j + 1.0) * g[i + 1]) / ((j + 1.0) * a(j));
        if g[i - 1].abs() > 1e150 {
            rescale(&mut g[i - 1..]);
        }
    }
    g
}

fn rescale(v: &mut [f64]) {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for x in v.iter_mut() {
        *x /= big;
    }
}

/// First local maximum of |f| from the bottom, first from the top for |g|;
/// any index between them lies in the region where both recursions are
/// stable.
fn match_index(f: &[f64], g: &[f64]) -> usize {
    let n = f.len();
    let mut kb = 0;
    while kb + 1 < n && f[kb + 1].abs() >= f[kb].abs() {
        kb += 1;
    }
    let mut kt = n - 1;
    while kt > 0 && g[kt - 1].abs() >= g[kt].abs() {
        kt -= 1;
    }
    if kb <= kt {
        (kb + kt) / 2
    } else {
        kt
    }
}

/// Single symbol `(j1 j2 j3; m1 m2 m3)`; zero when selection rules fail.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || m1.abs() > j1 {
        return 0.0;
    }
    three_j_family(j2, j3, m2, m3).get(j1)
}

/// `(l l' l''; m, -m', m' - m)`, evaluated via the cyclic permutation
/// `(l'' l l'; m' - m, m, -m')`.
pub fn three_j(key: ThreeJKey) -> f64 {
    wigner_3j(key.lpp, key.l, key.lp, key.mp - key.m, key.m, -key.mp)
}

/// `sqrt((l -+ m)(l +- m + 1))`; zero outside `|m| <= l`.
pub fn lambda_pm(l: i64, m: i64, upper: bool) -> f64 {
    if m.abs() > l {
        return 0.0;
    }
    let (l, m) = (l as f64, m as f64);
    if upper {
        ((l - m) * (l + m + 1.0)).max(0.0).sqrt()
    } else {
        ((l + m) * (l - m + 1.0)).max(0.0).sqrt()
    }
}
