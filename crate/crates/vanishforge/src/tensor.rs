//! W_{p1}^0 (x) W_{p2}^0 in the alpha (x) alpha basis, the bivariate
//! realization omega (x) eta -> eta(z) omega(z tau), orders, and the residue
//! and coefficient-selection maps.

use std::collections::BTreeSet;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::num::{cabs, cx_from_strings, cx_to_strings, fmt_sci};
use crate::weak::{alpha_basis, taylor_coeffs, Order, WeakFunction};

/// Coefficient matrix a_{c,d} over alpha_c^(p1) (x) alpha_d^(p2).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorElement {
    p1: usize,
    p2: usize,
    coeffs: Vec<Vec<Complex>>,
    weight_parity: Option<u32>,
}

impl TensorElement {
    pub fn new(p1: usize, p2: usize, coeffs: Vec<Vec<Complex>>) -> Result<Self> {
        if p1 < 3 || p2 < 3 {
            return Err(Error::arg("tensor levels must be at least 3"));
        }
        if coeffs.len() != p1 - 2 || coeffs.iter().any(|r| r.len() != p2 - 2) {
            return Err(Error::arg(format!("tensor over levels ({p1}, {p2}) needs a {}x{} matrix", p1 - 2, p2 - 2)));
        }
        Ok(TensorElement { p1, p2, coeffs, weight_parity: None })
    }

    pub fn zero(p1: usize, p2: usize, prec: u32) -> Result<Self> {
        Self::new(p1, p2, vec![vec![Complex::new(prec); p2.saturating_sub(2)]; p1.saturating_sub(2)])
    }

    /// alpha_c (x) alpha_d
    pub fn elementary(p1: usize, p2: usize, c: usize, d: usize, prec: u32) -> Result<Self> {
        let mut t = Self::zero(p1, p2, prec)?;
        if c > p1 - 3 || d > p2 - 3 {
            return Err(Error::arg(format!("basis index ({c}, {d}) out of range for levels ({p1}, {p2})")));
        }
        t.coeffs[c][d] = Complex::with_val(prec, 1);
        Ok(t)
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.p1, self.p2)
    }

    pub fn coeffs(&self) -> &[Vec<Complex>] {
        &self.coeffs
    }

    pub fn coeff(&self, c: usize, d: usize) -> &Complex {
        &self.coeffs[c][d]
    }

    pub fn weight_parity(&self) -> Option<u32> {
        self.weight_parity
    }

    /// Marks membership in (W (x) W)_k after checking a_{c,d} = 0 whenever
    /// c + d has the wrong parity.
    pub fn with_weight(mut self, k: u32) -> Result<Self> {
        for (c, row) in self.coeffs.iter().enumerate() {
            for (d, a) in row.iter().enumerate() {
                if (c + d) % 2 != k as usize % 2 && !a.is_zero() {
                    return Err(Error::ParityMismatch(format!("coefficient ({c}, {d}) is nonzero for weight {k}")));
                }
            }
        }
        self.weight_parity = Some(k % 2);
        Ok(self)
    }

    pub fn add(&self, other: &TensorElement) -> Result<Self> {
        if self.levels() != other.levels() {
            return Err(Error::arg("cannot add tensors over different levels"));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| Complex::with_val(x.prec().0, x + y)).collect())
            .collect();
        let parity = if self.weight_parity == other.weight_parity { self.weight_parity } else { None };
        Ok(TensorElement { p1: self.p1, p2: self.p2, coeffs, weight_parity: parity })
    }

    pub fn scale(&self, s: &Complex) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|r| r.iter().map(|x| Complex::with_val(x.prec().0, x * s)).collect())
            .collect();
        TensorElement { p1: self.p1, p2: self.p2, coeffs, weight_parity: self.weight_parity }
    }

    pub fn to_record(&self) -> TensorRecord {
        let mut entries = Vec::new();
        for (c, row) in self.coeffs.iter().enumerate() {
            for (d, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    let [re, im] = cx_to_strings(a);
                    entries.push(TensorEntry { c, d, re, im });
                }
            }
        }
        TensorRecord { p1: self.p1, p2: self.p2, entries }
    }

    pub fn from_record(r: &TensorRecord, prec: u32) -> Result<Self> {
        let mut t = Self::zero(r.p1, r.p2, prec)?;
        for e in &r.entries {
            if e.c > r.p1.saturating_sub(3) || e.d > r.p2.saturating_sub(3) {
                return Err(Error::Format(format!("tensor entry ({}, {}) out of range", e.c, e.d)));
            }
            t.coeffs[e.c][e.d] = cx_from_strings(&[e.re.clone(), e.im.clone()], prec)?;
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub c: usize,
    pub d: usize,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub p1: usize,
    pub p2: usize,
    pub entries: Vec<TensorEntry>,
}

/// Sum_j P_j(tau) z^j with deg P_j <= j. `polys[j][l]` is the tau^l coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries {
    polys: Vec<Vec<Complex>>,
    /// For each coefficient, sum of absolute values of the contributions;
    /// the natural scale for deciding whether it is zero.
    magnitudes: Vec<Vec<Float>>,
}

impl BivariateSeries {
    pub fn truncation(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn poly(&self, j: usize) -> &[Complex] {
        &self.polys[j]
    }

    pub fn polys(&self) -> &[Vec<Complex>] {
        &self.polys
    }

    /// Cauchy product in z, truncated at the smaller truncation.
    pub fn mul(&self, other: &BivariateSeries) -> BivariateSeries {
        let t = self.truncation().min(other.truncation());
        let prec = self.polys[0][0].prec().0;
        let mut polys = Vec::with_capacity(t + 1);
        let mut mags = Vec::with_capacity(t + 1);
        for j in 0..=t {
            let mut p = vec![Complex::new(prec); j + 1];
            let mut m = vec![Float::new(prec); j + 1];
            for n in 0..=j {
                let (pa, ma) = (&self.polys[n], &self.magnitudes[n]);
                let (pb, mb) = (&other.polys[j - n], &other.magnitudes[j - n]);
                for a in 0..pa.len() {
                    for b in 0..pb.len() {
                        p[a + b] += Complex::with_val(prec, &pa[a] * &pb[b]);
                        m[a + b] += Float::with_val(prec, &ma[a] * &mb[b]);
                    }
                }
            }
            polys.push(p);
            mags.push(m);
        }
        BivariateSeries { polys, magnitudes: mags }
    }
}

/// The alpha bases of both levels with Taylor tables long enough for
/// truncations up to `max_truncation`.
#[derive(Clone, Debug)]
pub struct TensorSpace {
    p1: usize,
    p2: usize,
    alpha1: Vec<WeakFunction>,
    alpha2: Vec<WeakFunction>,
    taylor1: Vec<Vec<Complex>>,
    taylor2: Vec<Vec<Complex>>,
}

impl TensorSpace {
    pub fn new(p1: usize, p2: usize, max_truncation: usize, ctx: &PrecisionContext) -> Result<Self> {
        let alpha1 = alpha_basis(p1, ctx)?;
        let alpha2 = if p1 == p2 { alpha1.clone() } else { alpha_basis(p2, ctx)? };
        Self::from_bases(alpha1, alpha2, max_truncation, ctx)
    }

    pub fn from_bases(
        alpha1: Vec<WeakFunction>,
        alpha2: Vec<WeakFunction>,
        max_truncation: usize,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        let p1 = alpha1.first().map(|a| a.level()).ok_or_else(|| Error::arg("empty alpha basis"))?;
        let p2 = alpha2.first().map(|a| a.level()).ok_or_else(|| Error::arg("empty alpha basis"))?;
        let taylor1 = alpha_taylor(&alpha1, max_truncation, ctx)?;
        let taylor2 = alpha_taylor(&alpha2, max_truncation, ctx)?;
        Ok(TensorSpace { p1, p2, alpha1, alpha2, taylor1, taylor2 })
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.p1, self.p2)
    }

    pub fn max_truncation(&self) -> usize {
        self.taylor1[0].len() - 1
    }

    pub fn alpha1(&self) -> &[WeakFunction] {
        &self.alpha1
    }

    pub fn alpha2(&self) -> &[WeakFunction] {
        &self.alpha2
    }
}

/// Taylor rows of alpha_c. Entries below z^c and those of the wrong parity
/// vanish identically, so they are set to exact zeros instead of noise.
fn alpha_taylor(alpha: &[WeakFunction], max_truncation: usize, ctx: &PrecisionContext) -> Result<Vec<Vec<Complex>>> {
    alpha
        .iter()
        .enumerate()
        .map(|(c, a)| {
            let mut row = taylor_coeffs(a, max_truncation + 1, ctx)?;
            for (nu, x) in row.iter_mut().enumerate() {
                if nu < c || (nu - c) % 2 == 1 {
                    *x = Complex::new(x.prec().0);
                }
            }
            Ok(row)
        })
        .collect()
}

/// tau^l z^j coefficient of eta(z) omega(z tau) from the Taylor vectors.
pub fn product_poly(omega_taylor: &[Complex], eta_taylor: &[Complex], t: usize) -> Result<Vec<Complex>> {
    if omega_taylor.len() <= t || eta_taylor.len() <= t {
        return Err(Error::arg(format!("Taylor vectors too short for z^{t}")));
    }
    Ok((0..=t).map(|l| Complex::with_val(omega_taylor[l].prec().0, &omega_taylor[l] * &eta_taylor[t - l])).collect())
}

/// Xi(t) = sum a_{c,d} alpha_d(z) alpha_c(z tau), truncated at z^T.
pub fn xi_map(t: &TensorElement, truncation: usize, space: &TensorSpace) -> Result<BivariateSeries> {
    if t.levels() != space.levels() {
        return Err(Error::arg("tensor and tensor space levels differ"));
    }
    if truncation > t.p1 + t.p2 {
        return Err(Error::arg(format!(
            "truncation {truncation} exceeds p1 + p2 = {}; alpha tails are not controlled there",
            t.p1 + t.p2
        )));
    }
    if truncation > space.max_truncation() {
        return Err(Error::arg(format!("tensor space only holds Taylor data to z^{}", space.max_truncation())));
    }
    let prec = space.taylor1[0][0].prec().0;
    // B_c[m] = sum_d a_{c,d} A2[d][m], and its absolute counterpart
    let mut b = Vec::with_capacity(t.coeffs.len());
    let mut babs = Vec::with_capacity(t.coeffs.len());
    for row in &t.coeffs {
        let mut v = vec![Complex::new(prec); truncation + 1];
        let mut va = vec![Float::new(prec); truncation + 1];
        for (a, tay) in row.iter().zip(&space.taylor2) {
            if a.is_zero() {
                continue;
            }
            let aa = cabs(a);
            for m in 0..=truncation {
                v[m] += Complex::with_val(prec, a * &tay[m]);
                va[m] += Float::with_val(prec, &aa * cabs(&tay[m]));
            }
        }
        b.push(v);
        babs.push(va);
    }
    let mut polys = Vec::with_capacity(truncation + 1);
    let mut mags = Vec::with_capacity(truncation + 1);
    for j in 0..=truncation {
        let mut p = vec![Complex::new(prec); j + 1];
        let mut m = vec![Float::new(prec); j + 1];
        for l in 0..=j {
            for (c, tay1) in space.taylor1.iter().enumerate() {
                let x = &tay1[l];
                p[l] += Complex::with_val(prec, x * &b[c][j - l]);
                m[l] += Float::with_val(prec, cabs(x) * &babs[c][j - l]);
            }
        }
        polys.push(p);
        mags.push(m);
    }
    Ok(BivariateSeries { polys, magnitudes: mags })
}

/// Coefficient of z^T in Xi(t): the polynomial res_{z=0} z^{-(T+1)} Xi(t).
pub fn res_t(t: &TensorElement, truncation: usize, space: &TensorSpace) -> Result<Vec<Complex>> {
    Ok(xi_map(t, truncation, space)?.polys.pop().expect("nonempty"))
}

/// (coefficient of tau^l in P)_{l in S}, ascending in l.
pub fn coeff_select(p: &[Complex], set: &BTreeSet<usize>, truncation: usize) -> Result<Vec<Complex>> {
    if let Some(&bad) = set.iter().find(|&&l| l > truncation) {
        return Err(Error::arg(format!("index {bad} outside 0..={truncation}")));
    }
    if p.len() > truncation + 1 {
        return Err(Error::arg("polynomial degree exceeds the truncation"));
    }
    let prec = p.first().map(|z| z.prec().0).unwrap_or(64);
    Ok(set.iter().map(|&l| p.get(l).cloned().unwrap_or_else(|| Complex::new(prec))).collect())
}

enum Band {
    Zero,
    Nonzero,
}

fn classify(value: &Complex, scale: &Float, ctx: &PrecisionContext, what: &str) -> Result<Band> {
    if scale.is_zero() || value.is_zero() {
        return Ok(Band::Zero);
    }
    let ratio = cabs(value) / scale;
    if ratio < ctx.vanish() {
        Ok(Band::Zero)
    } else if ratio < ctx.vanish_upper() {
        Err(Error::Ambiguous(format!("{what} has relative size {} inside the threshold band", fmt_sci(&ratio, 6))))
    } else {
        Ok(Band::Nonzero)
    }
}

/// (min c with a_{c,.} != 0, min d with a_{.,d} != 0); infinite for zero.
pub fn bi_order(t: &TensorElement, ctx: &PrecisionContext) -> Result<(Order, Order)> {
    let scale = t.coeffs.iter().flatten().map(cabs).fold(Float::new(ctx.prec()), |a, b| if b > a { b } else { a });
    let (mut cmin, mut dmin) = (usize::MAX, usize::MAX);
    for (c, row) in t.coeffs.iter().enumerate() {
        for (d, a) in row.iter().enumerate() {
            if let Band::Nonzero = classify(a, &scale, ctx, &format!("tensor entry ({c}, {d})"))? {
                cmin = cmin.min(c);
                dmin = dmin.min(d);
            }
        }
    }
    let wrap = |x: usize| if x == usize::MAX { Order::Infinite } else { Order::Finite(x) };
    Ok((wrap(cmin), wrap(dmin)))
}

/// (min_j j - deg(tau^j P_j(1/tau)), min_j j - deg P_j) over the truncation.
/// Matches `bi_order` once the truncation reaches (p1 - 3) + (p2 - 3).
pub fn analytic_order(s: &BivariateSeries, ctx: &PrecisionContext) -> Result<(Order, Order)> {
    let (mut first, mut second) = (usize::MAX, usize::MAX);
    // rounding noise relative to the largest contribution anywhere
    let global = s.magnitudes.iter().flatten().fold(Float::new(ctx.prec()), |a, b| if *b > a { b.clone() } else { a });
    let floor = global * ctx.working_eps();
    for (j, (p, m)) in s.polys.iter().zip(&s.magnitudes).enumerate() {
        let mut low = None;
        let mut high = None;
        for (l, (x, mx)) in p.iter().zip(m).enumerate() {
            let scale = if *mx > floor { mx.clone() } else { floor.clone() };
            if let Band::Nonzero = classify(x, &scale, ctx, &format!("coefficient tau^{l} z^{j}"))? {
                low.get_or_insert(l);
                high = Some(l);
            }
        }
        if let (Some(lo), Some(hi)) = (low, high) {
            first = first.min(lo);
            second = second.min(j - hi);
        }
    }
    let wrap = |x: usize| if x == usize::MAX { Order::Infinite } else { Order::Finite(x) };
    Ok((wrap(first), wrap(second)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelIndexSet {
    pub pairs: Vec<(usize, usize)>,
    /// True when the pairs index the whole kernel; false when they only span
    /// a guaranteed subspace of it.
    pub exact: bool,
}

/// Index pairs (m, n) of the kernel basis xi(alpha_m (x) alpha_n) for the
/// coefficient-selection map at T = k - 2.
pub fn kernel_index_set(p1: usize, p2: usize, k: usize, set: &BTreeSet<usize>) -> Result<KernelIndexSet> {
    if p1 < 3 || p2 < 3 || k < 2 {
        return Err(Error::arg("kernel_index_set needs levels >= 3 and k >= 2"));
    }
    let t = k - 2;
    if let Some(&bad) = set.iter().find(|&&l| l > t) {
        return Err(Error::arg(format!("vanishing index {bad} outside 0..={t}")));
    }
    let exact = t <= (p1 - 3).min(p2 - 3);
    let mut pairs = Vec::new();
    for m in 0..=p1 - 3 {
        for n in 0..=p2 - 3 {
            if (m + n) % 2 != k % 2 {
                continue;
            }
            let partner = t as i64 - n as i64;
            let partner_in = partner >= 0 && set.contains(&(partner as usize));
            let keep = if exact {
                !set.contains(&m) || m as i64 != partner
            } else {
                (!set.contains(&m) && !partner_in) || (set.contains(&m) && partner_in && m as i64 != partner)
            };
            if keep {
                pairs.push((m, n));
            }
        }
    }
    Ok(KernelIndexSet { pairs, exact })
}
