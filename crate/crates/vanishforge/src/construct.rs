//! Constructions of Eisenstein combinations with prescribed vanishing
//! critical L-values: dual alpha bases, the map xi, the small-weight exact
//! sequence, the large-weight order strips, dimension counts and
//! self-verifying certificates.

use std::collections::BTreeSet;

use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use serde::{Deserialize, Serialize};

use crate::characters::{enumerate_characters, DirichletCharacter};
use crate::context::PrecisionContext;
use crate::eisenstein::{eisenstein_q_expansion, CharacterTensor, CombinationRecord, EisensteinCombination};
use crate::error::{Error, Result};
use crate::lfunctions::{completed_lambda, is_trivial_point, l_value, vanishing_scale};
use crate::linalg::{condition_number, rank_kernel, CMatrix};
use crate::num::{binomial, cabs, cx_from_strings, cx_to_strings, decimal_digits, fmt_float, fmt_sci, i_pow, is_odd_prime, pi};
use crate::tensor::{bi_order, kernel_index_set, TensorElement};
use crate::weak::{alpha_basis, character_coordinates, Order, WeakFunction};

pub const CERTIFICATE_SCHEMA: &str = "vanishforge.certificate/1";
pub const VERIFY_SCHEMA: &str = "vanishforge.verify/1";
const DIGEST_TERMS: usize = 40;
const WITNESS_CONDITION_LIMIT: f64 = 1e10;

/// alpha_c = sum_chi a_chi(c) omega_chi together with the dual families
/// alpha~_c = sum chi(-1) G(chi) a_chi(c) omega_{chi bar} and
/// alpha^_d = sum G(psi) a_psi(d) omega_{psi bar}.
#[derive(Clone, Debug)]
pub struct DualBasisPair {
    p: u64,
    chars: Vec<DirichletCharacter>,
    alpha: Vec<WeakFunction>,
    a: Vec<Vec<Complex>>,
    tilde: Vec<Vec<Complex>>,
    hat: Vec<Vec<Complex>>,
}

impl DualBasisPair {
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.chars
    }

    pub fn alpha(&self) -> &[WeakFunction] {
        &self.alpha
    }

    /// a_chi(c), indexed [c][position of chi].
    pub fn change_of_basis(&self) -> &[Vec<Complex>] {
        &self.a
    }

    /// Coefficient of omega_{chi bar} in alpha~_c, indexed [c][position of chi].
    pub fn tilde(&self) -> &[Vec<Complex>] {
        &self.tilde
    }

    /// Coefficient of omega_{psi bar} in alpha^_d, indexed [d][position of psi].
    pub fn hat(&self) -> &[Vec<Complex>] {
        &self.hat
    }

    fn position(&self, chi: &DirichletCharacter) -> usize {
        chi.index() as usize - 1
    }
}

pub fn dual_bases(p: u64, ctx: &PrecisionContext) -> Result<DualBasisPair> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let chars = enumerate_characters(p)?;
    let alpha = alpha_basis(p as usize, ctx)?;
    let a: Vec<Vec<Complex>> = alpha.iter().map(|w| character_coordinates(w, &chars, ctx)).collect::<Result<_>>()?;
    let m = CMatrix::from_rows(a.clone())?;
    let rk = rank_kernel(&m, ctx, "alpha-to-character change of basis")?;
    if rk.rank != chars.len() {
        return Err(Error::Verification(format!("change of basis mod {p} has rank {} < {}", rk.rank, chars.len())));
    }
    let prec = ctx.prec();
    let gauss: Vec<Complex> = chars.iter().map(|c| c.gauss_sum(prec + 16)).collect();
    let tilde = a
        .iter()
        .map(|row| {
            row.iter()
                .zip(&chars)
                .zip(&gauss)
                .map(|((x, c), g)| Complex::with_val(prec, Complex::with_val(prec + 16, x * g) * c.parity()))
                .collect()
        })
        .collect();
    let hat = a
        .iter()
        .map(|row| row.iter().zip(&gauss).map(|(x, g)| Complex::with_val(prec, x * g)).collect())
        .collect();
    Ok(DualBasisPair { p, chars, alpha, a, tilde, hat })
}

/// xi(alpha_c (x) alpha_d) = theta_k(alpha~_c (x) alpha^_d; p2 tau) as an Eisenstein combination.
pub fn xi_modular(
    c: usize,
    d: usize,
    k: u32,
    b1: &DualBasisPair,
    b2: &DualBasisPair,
    ctx: &PrecisionContext,
) -> Result<EisensteinCombination> {
    let (p1, p2) = (b1.p, b2.p);
    if c > p1 as usize - 3 || d > p2 as usize - 3 {
        return Err(Error::arg(format!("basis index ({c}, {d}) outside 0..={} x 0..={}", p1 - 3, p2 - 3)));
    }
    if (c + d) % 2 != k as usize % 2 {
        return Err(Error::ParityMismatch(format!("c + d = {} and k = {k} differ in parity", c + d)));
    }
    let prec = ctx.prec();
    let mut coeffs = vec![vec![Complex::new(prec); p2 as usize - 2]; p1 as usize - 2];
    for (i, chi) in b1.chars.iter().enumerate() {
        let ci = b1.position(&chi.conjugate());
        for (j, psi) in b2.chars.iter().enumerate() {
            let pj = b2.position(&psi.conjugate());
            coeffs[ci][pj] = Complex::with_val(prec, &b1.tilde[c][i] * &b2.hat[d][j]);
        }
    }
    crate::eisenstein::weak_pair_to_eisenstein(&CharacterTensor::new(p1, p2, coeffs)?, k, ctx)
}

/// The scaled critical-value map: component l is
/// (-2 pi i)^k p2^{k-1} / ((k-2)! 4 pi^2) C(k-2, l) i^{1-l} Lambda(f; l+1) p1^l.
/// It sends xi(alpha_l (x) alpha_{k-2-l}) to the l-th unit vector.
pub fn scaled_l_map(f: &EisensteinCombination, ells: &[usize], ctx: &PrecisionContext) -> Result<Vec<Complex>> {
    let k = f.weight();
    let (p1, p2) = f.levels();
    let prec = ctx.prec();
    let wp = prec + 16;
    let tp = Float::with_val(wp, pi(wp) * 2u32);
    let mag = Float::with_val(wp, (&tp).pow(k)) * Float::with_val(wp, Integer::from(p2).pow(k - 1));
    let den = Float::with_val(wp, Integer::from(Integer::factorial(k - 2))) * Float::with_val(wp, pi(wp).square() * 4u32);
    let front = Complex::with_val(wp, i_pow(-(k as i64), wp) * (mag / den));
    let mut out = Vec::with_capacity(ells.len());
    for &l in ells {
        if l > k as usize - 2 {
            return Err(Error::arg(format!("index {l} outside 0..={}", k - 2)));
        }
        let lam = completed_lambda(f, &Complex::with_val(wp, l + 1), ctx)?;
        let w = Float::with_val(wp, binomial((k - 2) as u64, l as u64) * Integer::from(p1).pow(l as u32));
        let v = Complex::with_val(wp, &front * lam) * i_pow(1 - l as i64, wp) * w;
        out.push(Complex::with_val(prec, v));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DimensionQuery {
    VanishSet(BTreeSet<usize>),
    Orders(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub p1: u64,
    pub p2: u64,
    pub k: u32,
    /// number of admissible newform pairs (chi, psi)
    pub dim_e: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanish_set_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_e_s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_w1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_w2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_v: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_v_parity: Option<usize>,
}

fn admissible_pairs(p1: u64, p2: u64, k: u32) -> usize {
    let mut n = 0;
    for m in 0..=p1 as usize - 3 {
        for d in 0..=p2 as usize - 3 {
            if (m + d) % 2 == k as usize % 2 {
                n += 1;
            }
        }
    }
    n
}

fn check_primes(p1: u64, p2: u64) -> Result<()> {
    for p in [p1, p2] {
        if !is_odd_prime(p) {
            return Err(Error::Hypothesis(format!("{p} is not an odd prime")));
        }
    }
    Ok(())
}

fn check_small_weight(p1: u64, p2: u64, k: u32, s: &BTreeSet<usize>) -> Result<()> {
    check_primes(p1, p2)?;
    let top = p1.min(p2) - 2;
    if k < 3 || k as u64 > top {
        return Err(Error::Hypothesis(format!("violates 3 <= k <= min(p1 - 2, p2 - 2): k = {k}, min(p1 - 2, p2 - 2) = {top}")));
    }
    if let Some(&bad) = s.iter().find(|&&l| l > k as usize - 2) {
        return Err(Error::Hypothesis(format!("vanishing index {bad} violates S within 0..=k-2 = 0..={}", k - 2)));
    }
    Ok(())
}

fn check_large_weight(p1: u64, p2: u64, k: u32, l1: usize, l2: usize) -> Result<()> {
    check_primes(p1, p2)?;
    if k < 3 {
        return Err(Error::Hypothesis(format!("violates k >= 3: k = {k}")));
    }
    let lo1 = (p2 as i64 - k as i64 - 1).max(0) as usize;
    let lo2 = (p1 as i64 - k as i64 - 1).max(0) as usize;
    if l1 < lo1 || l1 > p1 as usize - 2 {
        return Err(Error::Hypothesis(format!("violates max(0, p2 - k - 1) <= l1 <= p1 - 2: {lo1} <= {l1} <= {}", p1 - 2)));
    }
    if l2 < lo2 || l2 > p2 as usize - 2 {
        return Err(Error::Hypothesis(format!("violates max(0, p1 - k - 1) <= l2 <= p2 - 2: {lo2} <= {l2} <= {}", p2 - 2)));
    }
    Ok(())
}

pub fn dimension_report(p1: u64, p2: u64, k: u32, q: &DimensionQuery) -> Result<DimensionReport> {
    check_primes(p1, p2)?;
    let mut r = DimensionReport {
        p1,
        p2,
        k,
        dim_e: admissible_pairs(p1, p2, k),
        vanish_set_size: None,
        dim_e_s: None,
        l1: None,
        l2: None,
        dim_w1: None,
        dim_w2: None,
        dim_v: None,
        dim_v_parity: None,
    };
    match q {
        DimensionQuery::VanishSet(s) => {
            check_small_weight(p1, p2, k, s)?;
            r.vanish_set_size = Some(s.len());
            r.dim_e_s = Some(r.dim_e - s.len());
        }
        DimensionQuery::Orders(l1, l2) => {
            let (l1, l2) = (*l1, *l2);
            if l1 > p1 as usize - 2 || l2 > p2 as usize - 2 {
                return Err(Error::Hypothesis(format!(
                    "orders must satisfy 0 <= l1 <= p1 - 2 and 0 <= l2 <= p2 - 2, got ({l1}, {l2})"
                )));
            }
            let w1 = p1 as usize - l1 - 2;
            let w2 = p2 as usize - l2 - 2;
            let mut par = 0;
            for c in l1..l1 + w1 {
                for d in l2..l2 + w2 {
                    if (c + d) % 2 == k as usize % 2 {
                        par += 1;
                    }
                }
            }
            r.l1 = Some(l1);
            r.l2 = Some(l2);
            r.dim_w1 = Some(w1);
            r.dim_w2 = Some(w2);
            r.dim_v = Some(w1 * w2);
            r.dim_v_parity = Some(par);
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SmallWeight,
    LargeWeight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    Subset,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateInputs {
    pub p1: u64,
    pub p2: u64,
    pub k: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanish_set: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LValueRecord {
    pub s: i64,
    pub value: [String; 2],
    pub scale: String,
    pub promised: bool,
    pub vanished: bool,
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QDigest {
    pub terms: usize,
    pub digits: usize,
    pub sha256: String,
    /// q^1..q^8 coefficients
    pub leading: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    pub ell: usize,
    pub value: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub label: String,
    pub c: usize,
    pub d: usize,
    /// factor applied to xi(alpha_c (x) alpha_d) to reach `form`
    pub normalization: [String; 2],
    pub form: CombinationRecord,
    pub q_digest: QDigest,
    pub l_values: Vec<LValueRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scaled_l: Vec<ScaledValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub ell: usize,
    pub c: usize,
    pub d: usize,
    pub form: CombinationRecord,
    pub raw_l: [String; 2],
    pub scaled_l: Vec<ScaledValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionCertificate {
    pub schema: String,
    pub mode: Mode,
    pub inputs: CertificateInputs,
    pub precision: PrecisionContext,
    pub exactness: Exactness,
    pub dimensions: DimensionReport,
    pub kernel_dimension: usize,
    pub basis: Vec<BasisEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessEntry>,
    pub claims: Vec<ClaimCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub passed: bool,
}

fn digest_digits(prec: u32) -> usize {
    decimal_digits(prec).saturating_sub(12).clamp(8, 40)
}

fn q_digest(f: &EisensteinCombination, ctx: &PrecisionContext) -> Result<QDigest> {
    let q = f.q_expansion(DIGEST_TERMS, ctx.prec())?;
    let digits = digest_digits(ctx.prec());
    Ok(QDigest {
        terms: DIGEST_TERMS,
        digits,
        sha256: q.digest(digits),
        leading: q.coeffs[1..=8].iter().map(cx_to_strings).collect(),
    })
}

fn l_records(f: &EisensteinCombination, promised: &BTreeSet<i64>, ctx: &PrecisionContext) -> Result<Vec<LValueRecord>> {
    let k = f.weight() as i64;
    let prec = ctx.prec();
    (1..k)
        .map(|s| {
            let v = l_value(f, &Complex::with_val(prec, s), ctx)?;
            let scale = vanishing_scale(f, s, ctx)?;
            Ok(LValueRecord {
                s,
                vanished: cabs(&v) < Float::with_val(prec, &scale * ctx.vanish()),
                value: cx_to_strings(&v),
                scale: fmt_float(&scale),
                promised: promised.contains(&s),
                trivial: is_trivial_point(f, s),
            })
        })
        .collect()
}

fn scaled_records(f: &EisensteinCombination, ells: &[usize], ctx: &PrecisionContext) -> Result<Vec<ScaledValue>> {
    Ok(scaled_l_map(f, ells, ctx)?
        .iter()
        .zip(ells)
        .map(|(v, &ell)| ScaledValue { ell, value: cx_to_strings(v) })
        .collect())
}

fn basis_entry(
    c: usize,
    d: usize,
    raw: &EisensteinCombination,
    promised: &BTreeSet<i64>,
    ells: &[usize],
    ctx: &PrecisionContext,
) -> Result<BasisEntry> {
    let (f, factor) = raw.normalized();
    Ok(BasisEntry {
        label: format!("xi(alpha_{c} (x) alpha_{d})"),
        c,
        d,
        normalization: cx_to_strings(&factor),
        form: f.to_record(),
        q_digest: q_digest(&f, ctx)?,
        l_values: l_records(&f, promised, ctx)?,
        scaled_l: if ells.is_empty() { Vec::new() } else { scaled_records(&f, ells, ctx)? },
    })
}

/// Kernel of the critical-value map on S plus surjectivity witnesses.
pub fn vanishing_space_small_weight(
    p1: u64,
    p2: u64,
    k: u32,
    s: &BTreeSet<usize>,
    ctx: &PrecisionContext,
) -> Result<ConstructionCertificate> {
    check_small_weight(p1, p2, k, s)?;
    let dims = dimension_report(p1, p2, k, &DimensionQuery::VanishSet(s.clone()))?;
    let b1 = dual_bases(p1, ctx)?;
    let b2 = if p1 == p2 { b1.clone() } else { dual_bases(p2, ctx)? };
    let kis = kernel_index_set(p1 as usize, p2 as usize, k as usize, s)?;
    let ells: Vec<usize> = s.iter().copied().collect();
    let promised: BTreeSet<i64> = s.iter().map(|&l| l as i64 + 1).collect();
    let mut basis = Vec::with_capacity(kis.pairs.len());
    for &(m, n) in &kis.pairs {
        let raw = xi_modular(m, n, k, &b1, &b2, ctx)?;
        basis.push(basis_entry(m, n, &raw, &promised, &ells, ctx)?);
    }
    let mut witnesses = Vec::with_capacity(ells.len());
    for &l in &ells {
        let (c, d) = (l, k as usize - 2 - l);
        let w = xi_modular(c, d, k, &b1, &b2, ctx)?;
        let raw_l = l_value(&w, &Complex::with_val(ctx.prec(), l + 1), ctx)?;
        witnesses.push(WitnessEntry {
            ell: l,
            c,
            d,
            form: w.to_record(),
            raw_l: cx_to_strings(&raw_l),
            scaled_l: scaled_records(&w, &ells, ctx)?,
        });
    }
    let mut notes = Vec::new();
    let trivial: Vec<usize> = ells
        .iter()
        .copied()
        .filter(|&l| basis.iter().all(|b| b.l_values.iter().any(|r| r.s == l as i64 + 1 && r.trivial)))
        .collect();
    if !trivial.is_empty() && !basis.is_empty() {
        notes.push(format!("indices {trivial:?} are trivial zeros for every kernel element; treated as ordinary conditions"));
    }
    let mut cert = ConstructionCertificate {
        schema: CERTIFICATE_SCHEMA.into(),
        mode: Mode::SmallWeight,
        inputs: CertificateInputs { p1, p2, k, vanish_set: Some(ells), l1: None, l2: None },
        precision: ctx.clone(),
        exactness: if kis.exact { Exactness::Exact } else { Exactness::Subset },
        dimensions: dims,
        kernel_dimension: basis.len(),
        basis,
        witnesses,
        claims: Vec::new(),
        notes,
        passed: false,
    };
    cert.claims = check_claims(&cert, ctx)?;
    cert.passed = cert.claims.iter().all(|c| c.passed);
    Ok(cert)
}

/// The span of xi(alpha_c (x) alpha_d) over c >= l1, d >= l2 of the right
/// parity; each element vanishes at 1..=l1 and k-l2..=k-1.
pub fn vanishing_space_large_weight(
    p1: u64,
    p2: u64,
    k: u32,
    l1: usize,
    l2: usize,
    ctx: &PrecisionContext,
) -> Result<ConstructionCertificate> {
    check_large_weight(p1, p2, k, l1, l2)?;
    let dims = dimension_report(p1, p2, k, &DimensionQuery::Orders(l1, l2))?;
    let mut notes = Vec::new();
    if l1 + l2 > k as usize - 1 {
        notes.push(format!(
            "l1 + l2 = {} exceeds k - 1 = {}; the vanishing strips overlap and every claim is checked numerically",
            l1 + l2,
            k - 1
        ));
    }
    let promised: BTreeSet<i64> = (1..=l1 as i64).chain((k as i64 - l2 as i64).max(1)..k as i64).collect();
    let mut basis = Vec::new();
    if dims.dim_v_parity == Some(0) {
        notes.push("the order strip is empty; nothing to construct".into());
    } else {
        let b1 = dual_bases(p1, ctx)?;
        let b2 = if p1 == p2 { b1.clone() } else { dual_bases(p2, ctx)? };
        for c in l1..=p1 as usize - 3 {
            for d in l2..=p2 as usize - 3 {
                if (c + d) % 2 != k as usize % 2 {
                    continue;
                }
                let raw = xi_modular(c, d, k, &b1, &b2, ctx)?;
                basis.push(basis_entry(c, d, &raw, &promised, &[], ctx)?);
            }
        }
    }
    let mut cert = ConstructionCertificate {
        schema: CERTIFICATE_SCHEMA.into(),
        mode: Mode::LargeWeight,
        inputs: CertificateInputs { p1, p2, k, vanish_set: None, l1: Some(l1), l2: Some(l2) },
        precision: ctx.clone(),
        exactness: Exactness::Subset,
        dimensions: dims,
        kernel_dimension: basis.len(),
        basis,
        witnesses: Vec::new(),
        claims: Vec::new(),
        notes,
        passed: false,
    };
    cert.claims = check_claims(&cert, ctx)?;
    cert.passed = cert.claims.iter().all(|c| c.passed);
    Ok(cert)
}

fn sci(x: &Float) -> String {
    fmt_sci(x, 6)
}

/// Non-triviality: some q-coefficient survives the cancellation between
/// terms by more than the upper threshold.
fn nontrivial_check(f: &EisensteinCombination, ctx: &PrecisionContext) -> Result<(bool, String)> {
    if f.is_zero() {
        return Ok((false, "form has no terms".into()));
    }
    let prec = ctx.prec();
    let q = f.q_expansion(DIGEST_TERMS, prec)?;
    let mut bound = vec![Float::new(prec); DIGEST_TERMS + 1];
    for t in f.terms() {
        let e = eisenstein_q_expansion(&t.chi, &t.psi, f.weight(), DIGEST_TERMS, prec)?;
        for (b, c) in bound.iter_mut().zip(&e.coeffs) {
            *b += cabs(c) * cabs(&t.coeff);
        }
    }
    let mut best: Option<(usize, Float)> = None;
    for (m, (c, b)) in q.coeffs.iter().zip(&bound).enumerate() {
        if b.is_zero() {
            continue;
        }
        let r = cabs(c) / b;
        if best.as_ref().is_none_or(|(_, x)| r > *x) {
            best = Some((m, r));
        }
    }
    match best {
        Some((m, r)) => Ok((r >= ctx.vanish_upper(), format!("q^{m} coefficient survives at relative size {}", sci(&r)))),
        None => Ok((false, "all q-coefficients vanish".into())),
    }
}

fn stored_value(s: &[String; 2], prec: u32) -> String {
    cx_from_strings(s, prec).map(|z| crate::num::fmt_complex_sci(&z, 6)).unwrap_or_else(|_| "unreadable".into())
}

/// Re-evaluates every claim a certificate makes at the given precision.
pub fn check_claims(cert: &ConstructionCertificate, ctx: &PrecisionContext) -> Result<Vec<ClaimCheck>> {
    if cert.schema != CERTIFICATE_SCHEMA {
        return Err(Error::Format(format!("unknown certificate schema '{}'", cert.schema)));
    }
    let prec = ctx.prec();
    let k = cert.inputs.k;
    let mut claims = Vec::new();
    let mut forms = Vec::with_capacity(cert.basis.len());
    for b in &cert.basis {
        let f = EisensteinCombination::from_record(&b.form, ctx)?;
        if f.weight() != k || f.levels() != (cert.inputs.p1, cert.inputs.p2) {
            return Err(Error::Format(format!("{} does not match the certificate inputs", b.label)));
        }
        for r in b.l_values.iter().filter(|r| r.promised) {
            let v = l_value(&f, &Complex::with_val(prec, r.s), ctx)?;
            let scale = vanishing_scale(&f, r.s, ctx)?;
            let ok = cabs(&v) < Float::with_val(prec, &scale * ctx.vanish());
            claims.push(ClaimCheck {
                id: format!("vanish:{}:s={}", b.label, r.s),
                passed: ok,
                detail: format!(
                    "|L| = {}, scale = {}, stored L = {}{}",
                    sci(&cabs(&v)),
                    sci(&scale),
                    stored_value(&r.value, prec),
                    if r.trivial { ", trivial zero" } else { "" }
                ),
            });
        }
        let (ok, detail) = nontrivial_check(&f, ctx)?;
        claims.push(ClaimCheck { id: format!("nontrivial:{}", b.label), passed: ok, detail });
        if cert.precision.precision_bits == prec {
            let dg = q_digest(&f, ctx)?;
            claims.push(ClaimCheck {
                id: format!("q-digest:{}", b.label),
                passed: dg.sha256 == b.q_digest.sha256,
                detail: format!("recomputed {}", dg.sha256),
            });
        }
        forms.push(f);
    }
    match cert.mode {
        Mode::SmallWeight => small_weight_claims(cert, &forms, ctx, &mut claims)?,
        Mode::LargeWeight => large_weight_claims(cert, ctx, &mut claims)?,
    }
    Ok(claims)
}

fn small_weight_claims(
    cert: &ConstructionCertificate,
    forms: &[EisensteinCombination],
    ctx: &PrecisionContext,
    claims: &mut Vec<ClaimCheck>,
) -> Result<()> {
    let prec = ctx.prec();
    let ells = cert.inputs.vanish_set.clone().unwrap_or_default();
    let dim_e = cert.dimensions.dim_e;
    claims.push(ClaimCheck {
        id: "dimension".into(),
        passed: cert.exactness == Exactness::Exact && cert.basis.len() + ells.len() == dim_e,
        detail: format!("kernel {} + |S| {} against dim E {}", cert.basis.len(), ells.len(), dim_e),
    });
    let mut witness_forms = Vec::new();
    let mut witness_rows = Vec::new();
    for w in &cert.witnesses {
        let f = EisensteinCombination::from_record(&w.form, ctx)?;
        let img = scaled_l_map(&f, &ells, ctx)?;
        let pos = ells.iter().position(|&l| l == w.ell).ok_or_else(|| Error::Format(format!("witness index {} not in S", w.ell)))?;
        let lead = cabs(&img[pos]);
        let others = img.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, z)| cabs(z)).fold(Float::new(prec), |a, b| a.max(&b));
        let raw = l_value(&f, &Complex::with_val(prec, w.ell + 1), ctx)?;
        let scale = vanishing_scale(&f, w.ell as i64 + 1, ctx)?;
        let nonzero = cabs(&raw) >= Float::with_val(prec, &scale * ctx.vanish_upper());
        let clean = lead.is_zero() || others < Float::with_val(prec, &lead * ctx.vanish());
        claims.push(ClaimCheck {
            id: format!("witness:ell={}", w.ell),
            passed: nonzero && clean && !lead.is_zero(),
            detail: format!(
                "|L(w; {})| = {} against scale {}, image component {} with off-components {}",
                w.ell + 1,
                sci(&cabs(&raw)),
                sci(&scale),
                sci(&lead),
                sci(&others)
            ),
        });
        witness_rows.push(img);
        witness_forms.push(f);
    }
    if !ells.is_empty() {
        let m = CMatrix::from_rows(witness_rows.clone())?;
        let rk = rank_kernel(&m, ctx, "witness image matrix");
        let cond = condition_number(&m, prec);
        let (passed, detail) = match (&rk, &cond) {
            (Ok(r), Some(c)) => (
                r.rank == ells.len() && *c < WITNESS_CONDITION_LIMIT,
                format!("rank {} of {}, condition number {}", r.rank, ells.len(), sci(c)),
            ),
            (Ok(r), None) => (false, format!("rank {} of {}, singular", r.rank, ells.len())),
            (Err(e), _) => (false, e.to_string()),
        };
        claims.push(ClaimCheck { id: "witness-rank".into(), passed, detail });
    }
    // critical-value map on every emitted form: rank |S|, kernel = kernel basis
    if !ells.is_empty() {
        let mut cols: Vec<Vec<Complex>> = Vec::new();
        for f in forms {
            cols.push(scaled_l_map(f, &ells, ctx)?);
        }
        cols.extend(witness_rows.iter().cloned());
        let mut rows = vec![Vec::with_capacity(cols.len()); ells.len()];
        for c in &cols {
            for (r, z) in rows.iter_mut().zip(c) {
                r.push(z.clone());
            }
        }
        let m = CMatrix::from_rows(rows)?;
        let (passed, detail) = match rank_kernel(&m, ctx, "critical-value map") {
            Ok(r) => {
                let kernel = cols.len() - r.rank;
                (
                    r.rank == ells.len() && kernel == forms.len(),
                    format!("rank {}, kernel dimension {} against {} kernel elements", r.rank, kernel, forms.len()),
                )
            }
            Err(e) => (false, e.to_string()),
        };
        claims.push(ClaimCheck { id: "l-map-rank".into(), passed, detail });
    }
    // kernel basis and witnesses together span the newform space
    let (p1, p2, k) = (cert.inputs.p1, cert.inputs.p2, cert.inputs.k);
    let want = if k % 2 == 0 { 1 } else { -1 };
    let mut pairs = Vec::new();
    for chi in enumerate_characters(p1)? {
        for psi in enumerate_characters(p2)? {
            if chi.parity() * psi.parity() == want {
                pairs.push((chi.index(), psi.index()));
            }
        }
    }
    let rows: Vec<Vec<Complex>> = forms
        .iter()
        .chain(&witness_forms)
        .map(|f| pairs.iter().map(|&(a, b)| f.coefficient(a, b).cloned().unwrap_or_else(|| Complex::new(prec))).collect())
        .collect();
    let (passed, detail) = if rows.is_empty() {
        (dim_e == 0, "no forms".to_string())
    } else {
        match rank_kernel(&CMatrix::from_rows(rows)?, ctx, "combined coefficient matrix") {
            Ok(r) => (r.rank == dim_e && pairs.len() == dim_e, format!("rank {} against dim E {}", r.rank, dim_e)),
            Err(e) => (false, e.to_string()),
        }
    };
    claims.push(ClaimCheck { id: "span".into(), passed, detail });
    Ok(())
}

fn large_weight_claims(cert: &ConstructionCertificate, ctx: &PrecisionContext, claims: &mut Vec<ClaimCheck>) -> Result<()> {
    let (p1, p2) = (cert.inputs.p1 as usize, cert.inputs.p2 as usize);
    let (l1, l2) = (cert.inputs.l1.unwrap_or(0), cert.inputs.l2.unwrap_or(0));
    for b in &cert.basis {
        let t = TensorElement::elementary(p1, p2, b.c, b.d, ctx.prec())?;
        let (o1, o2) = bi_order(&t, ctx)?;
        let at_least = |o: Order, l: usize| matches!(o, Order::Infinite) || matches!(o, Order::Finite(x) if x >= l);
        claims.push(ClaimCheck {
            id: format!("order:{}", b.label),
            passed: at_least(o1, l1) && at_least(o2, l2) && (b.c + b.d) % 2 == cert.inputs.k as usize % 2,
            detail: format!("bi-order ({o1}, {o2}) against ({l1}, {l2})"),
        });
    }
    let want = cert.dimensions.dim_v_parity.unwrap_or(0);
    claims.push(ClaimCheck {
        id: "dimension".into(),
        passed: cert.basis.len() == want,
        detail: format!("{} elements against the parity-filtered count {want}", cert.basis.len()),
    });
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraPoint {
    pub label: String,
    pub s: i64,
    pub value: [String; 2],
    pub vanished: bool,
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub precision_bits: u32,
    pub passed: bool,
    pub claims: Vec<ClaimCheck>,
    /// Claims whose outcome differs from what the certificate recorded.
    pub changed: Vec<String>,
    pub extra: Vec<ExtraPoint>,
}

/// Recomputes every claim at the current precision; extra points are
/// reported but never count as failures.
pub fn verify_certificate(cert: &ConstructionCertificate, recheck: &[i64], ctx: &PrecisionContext) -> Result<VerifyReport> {
    let claims = check_claims(cert, ctx)?;
    let mut changed = Vec::new();
    for c in &claims {
        match cert.claims.iter().find(|o| o.id == c.id) {
            Some(o) if o.passed != c.passed => changed.push(format!("{}: recorded {} now {}", c.id, o.passed, c.passed)),
            None if !c.id.starts_with("q-digest") => changed.push(format!("{}: not recorded", c.id)),
            _ => {}
        }
    }
    for o in &cert.claims {
        if !o.id.starts_with("q-digest") && !claims.iter().any(|c| c.id == o.id) {
            changed.push(format!("{}: recorded but not reproducible", o.id));
        }
    }
    let prec = ctx.prec();
    let mut extra = Vec::new();
    for b in &cert.basis {
        let f = EisensteinCombination::from_record(&b.form, ctx)?;
        for &s in recheck {
            if s == cert.inputs.k as i64 {
                continue;
            }
            let v = l_value(&f, &Complex::with_val(prec, s), ctx)?;
            let scale = vanishing_scale(&f, s, ctx)?;
            extra.push(ExtraPoint {
                label: b.label.clone(),
                s,
                vanished: cabs(&v) < Float::with_val(prec, &scale * ctx.vanish()),
                value: cx_to_strings(&v),
                trivial: is_trivial_point(&f, s),
            });
        }
    }
    let passed = claims.iter().all(|c| c.passed) && !cert.claims.is_empty();
    Ok(VerifyReport { schema: VERIFY_SCHEMA.into(), precision_bits: prec, passed, claims, changed, extra })
}
