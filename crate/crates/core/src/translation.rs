//! Translation of regular vector spherical waves along the z axis.
//!
//! For a displacement `X = kappa a z` the translation matrix is block diagonal
//! in the azimuthal index `m`. Within a block the scalar coefficient is
//!
//! `B_{l'l} = sum_{l''} (-1)^(m+l'') (2l''+1) sqrt((2l+1)(2l'+1))
//!            (l l' l''; 0 0 0) (l l' l''; m -m 0) i_{l''}(X)`,
//!
//! symmetric in `l <-> l'`. The same-polarization entry `A` weights each term
//! by `[l(l+1) + l'(l'+1) - l''(l''+1)] / (2 sqrt(l(l+1) l'(l'+1)))` and the
//! cross-polarization entry is `C = X m B / sqrt(l(l+1) l'(l'+1))`. With
//! channels ordered E block first, the block is `[[A, -iC], [iC, A]]`.

use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::scattering::Polarization;
use crate::specfun::{scaled_bessel, three_j_family, ScaledBesselTable, MAX_ORDER};

/// Channels `(pol, l)` of one azimuthal block, polarization major, `l` minor,
/// `l` from `max(1, |m|)` to `l_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelIndex {
    pub m: i64,
    pub l_min: usize,
    pub l_max: usize,
}

impl ChannelIndex {
    pub fn new(m: i64, l_max: usize) -> Result<Self> {
        let l_min = (m.unsigned_abs() as usize).max(1);
        if l_min > l_max {
            return domain(format!("|m| = {} exceeds l_max = {l_max}", m.abs()));
        }
        Ok(ChannelIndex { m, l_min, l_max })
    }

    pub fn orders(&self) -> usize {
        self.l_max - self.l_min + 1
    }

    pub fn len(&self) -> usize {
        2 * self.orders()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, pol: Polarization, l: usize) -> usize {
        debug_assert!(l >= self.l_min && l <= self.l_max);
        let base = match pol {
            Polarization::E => 0,
            Polarization::M => self.orders(),
        };
        base + l - self.l_min
    }

    pub fn channel(&self, idx: usize) -> (Polarization, usize) {
        let n = self.orders();
        if idx < n {
            (Polarization::E, self.l_min + idx)
        } else {
            (Polarization::M, self.l_min + idx - n)
        }
    }
}

/// Complex dense matrix over the channels of one azimuthal block.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    pub channels: ChannelIndex,
    pub data: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    lpp: u32,
    b: f64,
    a: f64,
}

#[derive(Debug, Clone)]
struct AzimuthalCoefs {
    l_min: usize,
    n: usize,
    /// For `l' <= l` (indices relative to `l_min`), `spans[i*n + j]` is the
    /// range of `terms` belonging to the pair.
    spans: Vec<(u32, u32)>,
    terms: Vec<Term>,
}

impl AzimuthalCoefs {
    fn pair(&self, lp: usize, l: usize) -> &[Term] {
        let (i, j) = if lp <= l { (lp, l) } else { (l, lp) };
        let (s, e) = self.spans[(i - self.l_min) * self.n + (j - self.l_min)];
        &self.terms[s as usize..e as usize]
    }
}

/// Geometry-independent translation coefficients for `m = 0..=l_max`,
/// reusable across wavenumbers and displacements.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    l_max: usize,
    blocks: Vec<AzimuthalCoefs>,
}

impl TranslationTable {
    pub fn new(l_max: usize) -> Result<Self> {
        if l_max == 0 || 2 * l_max > MAX_ORDER {
            return domain(format!("l_max must lie in 1..={}, got {l_max}", MAX_ORDER / 2));
        }
        let n_all = l_max;
        // (l l' l''; 0 0 0) families do not depend on m.
        let mut zero_fams = vec![None; n_all * n_all];
        for lp in 1..=l_max {
            for l in lp..=l_max {
                zero_fams[(lp - 1) * n_all + (l - 1)] = Some(three_j_family(l as i64, lp as i64, 0, 0));
            }
        }
        let mut blocks = Vec::with_capacity(l_max + 1);
        for m in 0..=l_max {
            let l_min = m.max(1);
            let n = l_max - l_min + 1;
            let mut spans = vec![(0u32, 0u32); n * n];
            let mut terms = Vec::new();
            let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
            for lp in l_min..=l_max {
                for l in lp..=l_max {
                    let start = terms.len() as u32;
                    let f0 = zero_fams[(lp - 1) * n_all + (l - 1)].as_ref().unwrap();
                    let fm = three_j_family(l as i64, lp as i64, m as i64, -(m as i64));
                    let norm = ((2 * l + 1) as f64 * (2 * lp + 1) as f64).sqrt();
                    let ll = (l * (l + 1)) as f64;
                    let llp = (lp * (lp + 1)) as f64;
                    let root = (ll * llp).sqrt();
                    let mut lpp = l - lp;
                    while lpp <= l + lp {
                        let sign_lpp = if lpp % 2 == 0 { 1.0 } else { -1.0 };
                        let b = sign_m * sign_lpp * (2 * lpp + 1) as f64 * norm
                            * f0.get(lpp as i64)
                            * fm.get(lpp as i64);
                        let a = b * (ll + llp - (lpp * (lpp + 1)) as f64) / (2.0 * root);
                        if b != 0.0 {
                            terms.push(Term { lpp: lpp as u32, b, a });
                        }
                        lpp += 2;
                    }
                    spans[(lp - l_min) * n + (l - l_min)] = (start, terms.len() as u32);
                }
            }
            blocks.push(AzimuthalCoefs { l_min, n, spans, terms });
        }
        Ok(TranslationTable { l_max, blocks })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Scalar coefficients `(A, B)` for the pair `(l', l)` of block `m`,
    /// given `ln i_{l''}(X)`, with `exp(shift)` folded into every term.
    fn sums(&self, m: i64, lp: usize, l: usize, ln_i: &[f64], shift: f64) -> (f64, f64) {
        let block = &self.blocks[m.unsigned_abs() as usize];
        let mut sa = 0.0;
        let mut sb = 0.0;
        for t in block.pair(lp, l) {
            let e = (ln_i[t.lpp as usize] + shift).exp();
            sa += t.a * e;
            sb += t.b * e;
        }
        (sa, sb)
    }

    fn check_m(&self, m: i64, l_max: usize) -> Result<ChannelIndex> {
        if l_max > self.l_max {
            return domain(format!("table covers l_max = {}, requested {l_max}", self.l_max));
        }
        ChannelIndex::new(m, l_max)
    }

    /// Process-wide table covering at least `l_max`; coefficients do not
    /// depend on the truncation, so one table serves every smaller order.
    pub fn shared(l_max: usize) -> Result<Arc<TranslationTable>> {
        static CACHE: OnceLock<Mutex<Option<Arc<TranslationTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(None));
        let mut guard = cache.lock().unwrap();
        if let Some(t) = guard.as_ref() {
            if t.l_max >= l_max {
                return Ok(t.clone());
            }
        }
        let t = Arc::new(TranslationTable::new(l_max)?);
        *guard = Some(t.clone());
        Ok(t)
    }

    /// Translation block at dimensionless displacement `arg = kappa a`.
    pub fn v_block(&self, m: i64, arg: f64) -> Result<BlockMatrix> {
        let ch = self.check_m(m, self.l_max)?;
        if arg < 0.0 || !arg.is_finite() {
            return domain(format!("translation argument must be non-negative, got {arg}"));
        }
        let n = ch.len();
        let mut data = DMatrix::<Complex64>::zeros(n, n);
        if arg == 0.0 {
            for k in 0..n {
                data[(k, k)] = Complex64::new(1.0, 0.0);
            }
            return Ok(BlockMatrix { channels: ch, data });
        }
        let table = scaled_bessel(2 * self.l_max, arg)?;
        let ln_i = ln_i_vec(&table);
        let mf = m as f64;
        for lp in ch.l_min..=ch.l_max {
            for l in ch.l_min..=ch.l_max {
                let (a, b) = self.sums(m, lp, l, &ln_i, 0.0);
                let c = arg * mf * b / ((l * (l + 1) * lp * (lp + 1)) as f64).sqrt();
                let (re, rm) = (ch.index(Polarization::E, lp), ch.index(Polarization::M, lp));
                let (ce, cm) = (ch.index(Polarization::E, l), ch.index(Polarization::M, l));
                data[(re, ce)] = Complex64::new(a, 0.0);
                data[(rm, cm)] = Complex64::new(a, 0.0);
                data[(re, cm)] = Complex64::new(0.0, -c);
                data[(rm, ce)] = Complex64::new(0.0, c);
            }
        }
        Ok(BlockMatrix { channels: ch, data })
    }

    /// Real form `D V D^-1`, `D = diag(1_E, i_M)`, of the translation block with
    /// row channel `(P, l')` weighted by `exp(w_row(P, l'))` and column channel
    /// `(P', l)` by `exp(w_col(P', l))`:
    /// `[[A, -C], [-C, A]]` before weighting.
    pub fn weighted_real_block(
        &self,
        m: i64,
        l_max: usize,
        arg: f64,
        ln_i: &[f64],
        w_row: &dyn Fn(Polarization, usize) -> f64,
        w_col: &dyn Fn(Polarization, usize) -> f64,
    ) -> Result<DMatrix<f64>> {
        let ch = self.check_m(m, l_max)?;
        let n = ch.len();
        let mut out = DMatrix::<f64>::zeros(n, n);
        let mf = m as f64;
        let (e, mm) = (Polarization::E, Polarization::M);
        if arg == 0.0 {
            for l in ch.l_min..=ch.l_max {
                for p in Polarization::BOTH {
                    let k = ch.index(p, l);
                    out[(k, k)] = (w_row(p, l) + w_col(p, l)).exp();
                }
            }
            return Ok(out);
        }
        for lp in ch.l_min..=ch.l_max {
            let re_row = w_row(e, lp);
            let dm_row = (w_row(mm, lp) - re_row).exp();
            for l in ch.l_min..=ch.l_max {
                let re_col = w_col(e, l);
                let dm_col = (w_col(mm, l) - re_col).exp();
                let (a, b) = self.sums(m, lp, l, ln_i, re_row + re_col);
                let c = arg * mf * b / ((l * (l + 1) * lp * (lp + 1)) as f64).sqrt();
                let (ri, rj) = (ch.index(e, lp), ch.index(mm, lp));
                let (ci, cj) = (ch.index(e, l), ch.index(mm, l));
                out[(ri, ci)] = a;
                out[(rj, cj)] = a * dm_row * dm_col;
                out[(ri, cj)] = -c * dm_col;
                out[(rj, ci)] = -c * dm_row;
            }
        }
        Ok(out)
    }
}

pub(crate) fn ln_i_vec(table: &ScaledBesselTable) -> Vec<f64> {
    (0..=table.max_order).map(|l| table.ln_i(l)).collect()
}

/// Single scalar coefficient `B_{l'l}` of block `m` at `arg = kappa a`.
pub fn b_coefficient(lp: usize, l: usize, m: i64, arg: f64) -> Result<f64> {
    let mu = m.unsigned_abs() as usize;
    if l == 0 || lp == 0 || mu > l || mu > lp {
        return domain(format!("invalid channel pair l' = {lp}, l = {l}, m = {m}"));
    }
    if arg < 0.0 || !arg.is_finite() {
        return domain(format!("translation argument must be non-negative, got {arg}"));
    }
    if arg == 0.0 {
        return Ok(if l == lp { 1.0 } else { 0.0 });
    }
    let table = scaled_bessel(l + lp, arg)?;
    let f0 = three_j_family(l as i64, lp as i64, 0, 0);
    let fm = three_j_family(l as i64, lp as i64, m, -m);
    let norm = ((2 * l + 1) as f64 * (2 * lp + 1) as f64).sqrt();
    let mut sum = 0.0;
    for lpp in (l.abs_diff(lp)..=l + lp).step_by(2) {
        let sign = if (mu + lpp) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (2 * lpp + 1) as f64 * norm * f0.get(lpp as i64) * fm.get(lpp as i64) * table.ln_i(lpp).exp();
    }
    Ok(sum)
}

/// Translation block for one `m`, built from scratch.
pub fn v_block(m: i64, l_max: usize, arg: f64) -> Result<BlockMatrix> {
    TranslationTable::new(l_max)?.v_block(m, arg)
}

/// Reverse translation `V_ei = sigma3 V_ie^dagger sigma3`, `sigma3 = diag(1_E, -1_M)`.
pub fn v_ei_from_v_ie(v: &BlockMatrix) -> BlockMatrix {
    let ch = v.channels;
    let half = ch.orders();
    let mut data = v.data.adjoint();
    for i in 0..ch.len() {
        for j in 0..ch.len() {
            if (i < half) != (j < half) {
                data[(i, j)] = -data[(i, j)];
            }
        }
    }
    BlockMatrix { channels: ch, data }
}
