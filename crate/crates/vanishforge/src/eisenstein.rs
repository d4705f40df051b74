//! q-expansions of Eisenstein newforms E_k(chi, psi; tau) and of theta_k(omega (x) eta),
//! the constants linking the two, and a numerical check of the theta
//! transformation law.

use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::characters::{dft, enumerate_characters, DirichletCharacter, Direction};
use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::special::pow_u;
use crate::num::{cabs, cx_from_strings, cx_to_strings, e_of, fmt_sci, i_pow, l2_norm, max_abs, pi};
use crate::weak::{Parity, WeakFunction};

/// Truncated expansion sum_{m <= M} c_m q^{m/scale}.
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub weight: u32,
    pub scale: u64,
    pub coeffs: Vec<Complex>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QExpansionRecord {
    pub schema: String,
    pub k: u32,
    pub scale: u64,
    pub provenance: String,
    pub coeffs: Vec<[String; 2]>,
}

impl QExpansion {
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Sum of two expansions with equal weight and scale, cut at the shorter one.
    pub fn add(&self, other: &QExpansion) -> Result<QExpansion> {
        if self.weight != other.weight || self.scale != other.scale {
            return Err(Error::arg("cannot add q-expansions of different weight or scale"));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| Complex::with_val(a.prec().0, a + b)).collect();
        Ok(QExpansion { weight: self.weight, scale: self.scale, coeffs, provenance: "sum".into() })
    }

    pub fn scaled(&self, c: &Complex) -> QExpansion {
        let coeffs = self.coeffs.iter().map(|a| Complex::with_val(a.prec().0, a * c)).collect();
        QExpansion { weight: self.weight, scale: self.scale, coeffs, provenance: self.provenance.clone() }
    }

    /// Value of the truncated series at tau.
    pub fn evaluate(&self, tau: &Complex) -> Complex {
        let prec = self.coeffs[0].prec().0;
        let q = e_of(&Complex::with_val(prec, tau / self.scale as u32));
        let mut acc = Complex::new(prec);
        let mut qm = Complex::with_val(prec, 1);
        for c in &self.coeffs {
            acc += Complex::with_val(prec, c * &qm);
            qm *= &q;
        }
        acc
    }

    /// Crude bound on the neglected tail at tau: ten times the size of the
    /// last few retained terms.
    pub fn tail_estimate(&self, tau: &Complex) -> Float {
        let prec = self.coeffs[0].prec().0;
        let y = Float::with_val(prec, tau.imag() / self.scale as u32);
        let r = Float::with_val(prec, -(Float::with_val(prec, &y * pi(prec)) * 2u32)).exp();
        let m = self.truncation();
        let mut best = Float::new(prec);
        for j in m.saturating_sub(4)..=m {
            let t = cabs(&self.coeffs[j]) * Float::with_val(prec, (&r).pow(j as u32));
            if t > best {
                best = t;
            }
        }
        best * 10u32
    }

    pub fn to_record(&self) -> QExpansionRecord {
        QExpansionRecord {
            schema: "vanishforge.qexpansion/1".into(),
            k: self.weight,
            scale: self.scale,
            provenance: self.provenance.clone(),
            coeffs: self.coeffs.iter().map(cx_to_strings).collect(),
        }
    }

    pub fn from_record(r: &QExpansionRecord, prec: u32) -> Result<Self> {
        if r.coeffs.is_empty() {
            return Err(Error::Format("q-expansion without coefficients".into()));
        }
        let coeffs = r.coeffs.iter().map(|c| cx_from_strings(c, prec)).collect::<Result<_>>()?;
        Ok(QExpansion { weight: r.k, scale: r.scale, coeffs, provenance: r.provenance.clone() })
    }

    /// SHA-256 over coefficients printed with `digits` significant digits, so
    /// the digest is stable across working precisions.
    pub fn digest(&self, digits: usize) -> String {
        let mut h = Sha256::new();
        h.update(format!("k={};scale={};", self.weight, self.scale));
        for c in &self.coeffs {
            let re = Float::with_val(64.max(c.prec().0), c.real());
            let im = Float::with_val(64.max(c.prec().0), c.imag());
            h.update(format!("{},{};", fmt_sci(&re, digits), fmt_sci(&im, digits)));
        }
        hex::encode(h.finalize())
    }
}

fn check_pair(chi: &DirichletCharacter, psi: &DirichletCharacter, k: u32) -> Result<()> {
    if chi.is_principal() || psi.is_principal() {
        return Err(Error::arg("Eisenstein newforms need non-principal characters"));
    }
    if k < 3 {
        return Err(Error::arg(format!("weight {k} is below 3")));
    }
    let want = if k.is_multiple_of(2) { 1 } else { -1 };
    if chi.parity() * psi.parity() != want {
        return Err(Error::ParityMismatch(format!("{chi}(-1) {psi}(-1) != (-1)^{k}")));
    }
    Ok(())
}

fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// (-2 pi i)^k
fn minus_two_pi_i_pow(k: u32, prec: u32) -> Complex {
    let tp = Float::with_val(prec, pi(prec) * 2u32);
    let mag = Float::with_val(prec, (&tp).pow(k));
    let sign = i_pow(-(k as i64), prec);
    Complex::with_val(prec, sign * mag)
}

/// 2 (-2 pi i)^k G(psi) / (p2^k (k-1)!), the common factor of all
/// coefficients of E_k(chi, psi).
pub fn eisenstein_prefactor(psi: &DirichletCharacter, k: u32, prec: u32) -> Complex {
    let wp = prec + 16;
    let den = Float::with_val(wp, Integer::from(psi.modulus()).pow(k) * factorial(k - 1));
    let v = minus_two_pi_i_pow(k, wp) * psi.gauss_sum(wp) * 2u32 / den;
    Complex::with_val(prec, v)
}

fn divisors(m: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m.is_multiple_of(d) {
            small.push(d);
            if d * d != m {
                large.push(m / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// sum_{d | m} d^{k-1} f(d) g(m/d) for m = 0..=terms (c_0 = 0).
fn divisor_series(terms: usize, k: u32, prec: u32, f: impl Fn(u64) -> Complex, g: impl Fn(u64) -> Complex) -> Vec<Complex> {
    let mut out = vec![Complex::new(prec)];
    for m in 1..=terms as u64 {
        let mut acc = Complex::new(prec);
        for d in divisors(m) {
            let fd = f(d);
            if fd.is_zero() {
                continue;
            }
            let gd = g(m / d);
            if gd.is_zero() {
                continue;
            }
            let w = Float::with_val(prec, Integer::from(d).pow(k - 1));
            acc += Complex::with_val(prec, fd * gd) * w;
        }
        out.push(acc);
    }
    out
}

/// E_k(chi, psi; tau) = sum_m c_m q^{m/p2}.
pub fn eisenstein_q_expansion(
    chi: &DirichletCharacter,
    psi: &DirichletCharacter,
    k: u32,
    terms: usize,
    prec: u32,
) -> Result<QExpansion> {
    check_pair(chi, psi, k)?;
    let wp = prec + 16;
    let chiv = chi.values(wp);
    let psibar: Vec<Complex> = psi.values(wp).into_iter().map(|z| Complex::with_val(wp, z.conj_ref())).collect();
    let (p1, p2) = (chi.modulus(), psi.modulus());
    let raw = divisor_series(
        terms,
        k,
        wp,
        |d| psibar[(d % p2) as usize].clone(),
        |e| chiv[(e % p1) as usize].clone(),
    );
    let pre = eisenstein_prefactor(psi, k, wp);
    let coeffs = raw.into_iter().map(|c| Complex::with_val(prec, c * &pre)).collect();
    Ok(QExpansion { weight: k, scale: p2, coeffs, provenance: format!("E_{k}({chi},{psi})") })
}

fn parity_sign(w: &WeakFunction, ctx: &PrecisionContext) -> Result<Option<i32>> {
    match w.parity(ctx) {
        Parity::Zero => Ok(None),
        Parity::Mixed => Err(Error::ParityMismatch(format!("level-{} weak function has mixed parity", w.level()))),
        p => Ok(p.sign()),
    }
}

/// theta_k(omega (x) eta; tau) = 2 N^{1-k} sum_m sum_{d|m} d^{k-1} beta_eta(d) (F_M beta_omega)(m/d) q^{m/N}
/// with M, N the levels of omega and eta.
pub fn theta_q_expansion(
    omega: &WeakFunction,
    eta: &WeakFunction,
    k: u32,
    terms: usize,
    ctx: &PrecisionContext,
) -> Result<QExpansion> {
    if k < 3 {
        return Err(Error::arg(format!("weight {k} is below 3")));
    }
    let prec = ctx.prec();
    let (m_lvl, n_lvl) = (omega.level() as u64, eta.level() as u64);
    let prov = format!("theta_{k}(level {m_lvl} (x) level {n_lvl})");
    let (so, se) = (parity_sign(omega, ctx)?, parity_sign(eta, ctx)?);
    let (so, se) = match (so, se) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Ok(QExpansion { weight: k, scale: n_lvl, coeffs: vec![Complex::new(prec); terms + 1], provenance: prov });
        }
    };
    let want = if k.is_multiple_of(2) { 1 } else { -1 };
    if so * se != want {
        return Err(Error::ParityMismatch(format!("sgn(omega (x) eta) = {} but (-1)^{k} = {want}", so * se)));
    }
    let wp = prec + 16;
    let mut full = Vec::with_capacity(m_lvl as usize);
    full.push(Complex::new(wp));
    full.extend(omega.beta().iter().map(|z| Complex::with_val(wp, z)));
    let f_omega = dft(&full, Direction::Forward)?;
    let eta_beta: Vec<Complex> = eta.beta().iter().map(|z| Complex::with_val(wp, z)).collect();
    let raw = divisor_series(
        terms,
        k,
        wp,
        |d| if d % n_lvl == 0 { Complex::new(wp) } else { eta_beta[(d % n_lvl) as usize - 1].clone() },
        |e| f_omega[(e % m_lvl) as usize].clone(),
    );
    let factor = Float::with_val(wp, 2u32) / Float::with_val(wp, Integer::from(n_lvl).pow(k - 1));
    let coeffs = raw.into_iter().map(|c| Complex::with_val(prec, c * &factor)).collect();
    Ok(QExpansion { weight: k, scale: n_lvl, coeffs, provenance: prov })
}

/// K with E_k(chi, psi) = K theta_k(omega_{chi bar} (x) omega_{psi bar}):
/// chi(-1) (-2 pi i)^k G(psi) / (p2 (k-1)! G(chi bar)).
pub fn eisenstein_constant(chi: &DirichletCharacter, psi: &DirichletCharacter, k: u32, prec: u32) -> Result<Complex> {
    check_pair(chi, psi, k)?;
    let wp = prec + 16;
    let num = minus_two_pi_i_pow(k, wp) * psi.gauss_sum(wp) * chi.parity();
    let den = chi.conjugate().gauss_sum(wp) * Float::with_val(wp, factorial(k - 1) * psi.modulus());
    Ok(Complex::with_val(prec, num / den))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EisensteinTerm {
    pub chi: DirichletCharacter,
    pub psi: DirichletCharacter,
    pub coeff: Complex,
}

/// sum c_{chi,psi} E_k(chi, psi; p2 tau), terms sorted by (chi, psi) index.
#[derive(Clone, Debug, PartialEq)]
pub struct EisensteinCombination {
    weight: u32,
    p1: u64,
    p2: u64,
    terms: Vec<EisensteinTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub chi: u64,
    pub psi: u64,
    pub coeff: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationRecord {
    pub k: u32,
    pub p1: u64,
    pub p2: u64,
    pub terms: Vec<TermRecord>,
}

impl EisensteinCombination {
    /// Merges repeated pairs, checks parity and drops terms below
    /// vanish_threshold times the coefficient norm.
    pub fn new(weight: u32, p1: u64, p2: u64, terms: Vec<EisensteinTerm>, ctx: &PrecisionContext) -> Result<Self> {
        let mut merged: Vec<EisensteinTerm> = Vec::new();
        for t in terms {
            if t.chi.modulus() != p1 || t.psi.modulus() != p2 {
                return Err(Error::arg(format!("term ({}, {}) does not live at levels ({p1}, {p2})", t.chi, t.psi)));
            }
            check_pair(&t.chi, &t.psi, weight)?;
            match merged.iter_mut().find(|m| m.chi == t.chi && m.psi == t.psi) {
                Some(m) => m.coeff += &t.coeff,
                None => merged.push(t),
            }
        }
        merged.sort_by_key(|t| (t.chi.index(), t.psi.index()));
        let coeffs: Vec<Complex> = merged.iter().map(|t| t.coeff.clone()).collect();
        let cut = l2_norm(&coeffs) * ctx.vanish();
        merged.retain(|t| !t.coeff.is_zero() && cabs(&t.coeff) >= cut);
        Ok(EisensteinCombination { weight, p1, p2, terms: merged })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn levels(&self) -> (u64, u64) {
        (self.p1, self.p2)
    }

    pub fn terms(&self) -> &[EisensteinTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, chi_index: u64, psi_index: u64) -> Option<&Complex> {
        self.terms.iter().find(|t| t.chi.index() == chi_index && t.psi.index() == psi_index).map(|t| &t.coeff)
    }

    pub fn add(&self, other: &EisensteinCombination, ctx: &PrecisionContext) -> Result<Self> {
        if self.weight != other.weight || self.levels() != other.levels() {
            return Err(Error::arg("cannot add combinations of different weight or level"));
        }
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Self::new(self.weight, self.p1, self.p2, terms, ctx)
    }

    pub fn scaled(&self, c: &Complex) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| EisensteinTerm { chi: t.chi.clone(), psi: t.psi.clone(), coeff: Complex::with_val(t.coeff.prec().0, &t.coeff * c) })
            .collect();
        EisensteinCombination { terms, ..self.clone() }
    }

    /// Canonical scaling: largest coefficient of modulus one, first nonzero
    /// coefficient positive real. Returns the form and the factor applied.
    pub fn normalized(&self) -> (Self, Complex) {
        let Some(first) = self.terms.first() else {
            return (self.clone(), Complex::with_val(64, 1));
        };
        let prec = first.coeff.prec().0;
        let coeffs: Vec<Complex> = self.terms.iter().map(|t| t.coeff.clone()).collect();
        let mx = max_abs(&coeffs);
        let phase = Complex::with_val(prec, first.coeff.conj_ref()) / cabs(&first.coeff);
        let factor = Complex::with_val(prec, phase / mx);
        let mut out = self.scaled(&factor);
        // the first coefficient is real up to rounding; make it exactly so
        if let Some(t) = out.terms.first_mut() {
            let re = Float::with_val(prec, t.coeff.real());
            t.coeff = Complex::with_val(prec, (re, 0));
        }
        (out, factor)
    }

    /// Expansion of sum c E_k(chi, psi; p2 tau) in integral powers of q.
    pub fn q_expansion(&self, terms: usize, prec: u32) -> Result<QExpansion> {
        let mut coeffs = vec![Complex::new(prec); terms + 1];
        for t in &self.terms {
            let e = eisenstein_q_expansion(&t.chi, &t.psi, self.weight, terms, prec + 16)?;
            for (acc, c) in coeffs.iter_mut().zip(&e.coeffs) {
                *acc += Complex::with_val(prec + 16, c * &t.coeff);
            }
        }
        Ok(QExpansion { weight: self.weight, scale: 1, coeffs, provenance: "combination at p2 tau".into() })
    }

    pub fn to_record(&self) -> CombinationRecord {
        CombinationRecord {
            k: self.weight,
            p1: self.p1,
            p2: self.p2,
            terms: self
                .terms
                .iter()
                .map(|t| TermRecord { chi: t.chi.index(), psi: t.psi.index(), coeff: cx_to_strings(&t.coeff) })
                .collect(),
        }
    }

    pub fn from_record(r: &CombinationRecord, ctx: &PrecisionContext) -> Result<Self> {
        let mut terms = Vec::with_capacity(r.terms.len());
        for t in &r.terms {
            terms.push(EisensteinTerm {
                chi: DirichletCharacter::new(r.p1, t.chi)?,
                psi: DirichletCharacter::new(r.p2, t.psi)?,
                coeff: cx_from_strings(&t.coeff, ctx.prec())?,
            });
        }
        Self::new(r.k, r.p1, r.p2, terms, ctx)
    }
}

/// Coordinates of an element of W_{p1}^0 (x) W_{p2}^0 in the basis
/// omega_chi (x) omega_psi, indexed by position in `enumerate_characters`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterTensor {
    pub p1: u64,
    pub p2: u64,
    pub coeffs: Vec<Vec<Complex>>,
}

impl CharacterTensor {
    pub fn new(p1: u64, p2: u64, coeffs: Vec<Vec<Complex>>) -> Result<Self> {
        if coeffs.len() as u64 != p1.saturating_sub(2) || coeffs.iter().any(|r| r.len() as u64 != p2.saturating_sub(2)) {
            return Err(Error::arg(format!("character tensor for ({p1}, {p2}) needs a {}x{} matrix", p1 - 2, p2 - 2)));
        }
        Ok(CharacterTensor { p1, p2, coeffs })
    }
}

/// omega_chi (x) omega_psi -> E_k(chi bar, psi bar) / K(chi bar, psi bar), summed.
pub fn weak_pair_to_eisenstein(t: &CharacterTensor, k: u32, ctx: &PrecisionContext) -> Result<EisensteinCombination> {
    let chars1 = enumerate_characters(t.p1)?;
    let chars2 = enumerate_characters(t.p2)?;
    let flat: Vec<Complex> = t.coeffs.iter().flatten().cloned().collect();
    let scale = max_abs(&flat);
    let want = if k.is_multiple_of(2) { 1 } else { -1 };
    let mut terms = Vec::new();
    for (chi, row) in chars1.iter().zip(&t.coeffs) {
        for (psi, b) in chars2.iter().zip(row) {
            if b.is_zero() {
                continue;
            }
            let (cb, pb) = (chi.conjugate(), psi.conjugate());
            if cb.parity() * pb.parity() != want {
                let rel = cabs(b) / &scale;
                if rel >= ctx.vanish_upper() {
                    return Err(Error::ParityMismatch(format!(
                        "omega_{chi} (x) omega_{psi} has coefficient of relative size {} but the wrong parity for weight {k}",
                        fmt_sci(&rel, 6)
                    )));
                }
                if rel >= ctx.vanish() {
                    return Err(Error::Ambiguous(format!(
                        "wrong-parity coefficient of relative size {} inside the threshold band",
                        fmt_sci(&rel, 6)
                    )));
                }
                continue;
            }
            let kc = eisenstein_constant(&cb, &pb, k, ctx.prec() + 16)?;
            let coeff = Complex::with_val(ctx.prec(), b / kc);
            terms.push(EisensteinTerm { chi: cb, psi: pb, coeff });
        }
    }
    EisensteinCombination::new(k, t.p1, t.p2, terms, ctx)
}

fn split_parity(w: &WeakFunction, ctx: &PrecisionContext) -> Result<(WeakFunction, WeakFunction)> {
    // even part (w + w(-z))/2 and odd part (w - w(-z))/2
    let r = w.reflect();
    let half = Complex::with_val(ctx.prec(), 0.5);
    let neg = Complex::with_val(ctx.prec(), -1);
    let even = w.axpy(&Complex::with_val(ctx.prec(), 1), &r)?.scale(&half);
    let odd = w.axpy(&neg, &r)?.scale(&half);
    Ok((even, odd))
}

/// Max relative residual of theta_k(omega (x) eta; -1/tau) = -tau^k theta_k(eta (x) omega^; tau)
/// over the samples, after projecting omega (x) eta onto weight-k parity.
/// For omega, eta in W^0 the residue term vanishes: z^{k-1} eta(z) omega^(z/tau)
/// is holomorphic at 0.
pub fn transform_check(
    omega: &WeakFunction,
    eta: &WeakFunction,
    k: u32,
    taus: &[Complex],
    terms: usize,
    ctx: &PrecisionContext,
) -> Result<Float> {
    if omega.level() != eta.level() {
        return Err(Error::arg("transform_check needs equal levels"));
    }
    if k < 3 {
        return Err(Error::arg(format!("weight {k} is below 3")));
    }
    omega.require_w0(ctx)?;
    eta.require_w0(ctx)?;
    let prec = ctx.prec();
    let mut worst = Float::new(prec);
    if omega.is_zero() || eta.is_zero() {
        return Ok(worst);
    }
    let (oe, oo) = split_parity(omega, ctx)?;
    let (ee, eo) = split_parity(eta, ctx)?;
    // sgn(omega part) * sgn(eta part) = (-1)^k
    let pairs = if k.is_multiple_of(2) { [(oe, ee), (oo, eo)] } else { [(oe, eo), (oo, ee)] };
    let mut lhs_exp: Option<QExpansion> = None;
    let mut rhs_exp: Option<QExpansion> = None;
    for (o, e) in &pairs {
        let l = theta_q_expansion(o, e, k, terms, ctx)?;
        let r = theta_q_expansion(e, &o.reflect(), k, terms, ctx)?;
        lhs_exp = Some(match lhs_exp { None => l, Some(x) => x.add(&l)? });
        rhs_exp = Some(match rhs_exp { None => r, Some(x) => x.add(&r)? });
    }
    let (lhs_exp, rhs_exp) = (lhs_exp.expect("two pairs"), rhs_exp.expect("two pairs"));
    for tau in taus {
        if tau.imag() <= &0 {
            return Err(Error::arg("tau must lie in the upper half plane"));
        }
        let inv = Complex::with_val(prec, -Complex::with_val(prec, tau.recip_ref()));
        let lhs = lhs_exp.evaluate(&inv);
        let taupow = pow_u(tau, k);
        let rhs = Complex::with_val(prec, -(taupow.clone() * rhs_exp.evaluate(tau)));
        let size = {
            let (a, b) = (cabs(&lhs), cabs(&rhs));
            if a > b { a } else { b }
        };
        let tail = lhs_exp.tail_estimate(&inv) + cabs(&taupow) * rhs_exp.tail_estimate(tau);
        if !size.is_zero() && tail > Float::with_val(prec, &size * ctx.half_eps()) {
            return Err(Error::Verification(format!(
                "{terms} q-terms leave a tail of relative size {} at this tau",
                fmt_sci(&Float::with_val(prec, &tail / &size), 6)
            )));
        }
        if size.is_zero() {
            continue;
        }
        let diff = cabs(&Complex::with_val(prec, &lhs - &rhs)) / size;
        if diff > worst {
            worst = diff;
        }
    }
    Ok(worst)
}
