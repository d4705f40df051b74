//! L-values and completed Lambda-values of Eisenstein combinations, an
//! independent Mellin-integral evaluation, period polynomials and the
//! Eichler residue identity.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use serde::{Deserialize, Serialize};

use crate::characters::{dirichlet_l, dirichlet_l_negative, DirichletCharacter};
use crate::context::PrecisionContext;
use crate::eisenstein::{eisenstein_constant, eisenstein_prefactor, theta_q_expansion, EisensteinCombination};
use crate::error::{Error, Result};
use crate::num::{binomial, cabs, i_pow, pi, two_pi};
use crate::special::{gamma, real_pow, upper_incomplete_gamma};
use crate::tensor::product_poly;
use crate::weak::{taylor_coeffs, WeakFunction};

type LKey = (u64, u64, i64, u32);

static L_CACHE: Mutex<BTreeMap<LKey, Complex>> = Mutex::new(BTreeMap::new());

fn as_integer(s: &Complex) -> Option<i64> {
    if s.imag().is_zero() && s.real().is_integer() {
        s.real().to_i32_saturating().map(i64::from)
    } else {
        None
    }
}

/// L(chi, s), memoized at integer points; exact Bernoulli values for s <= 0.
pub fn dirichlet_value(chi: &DirichletCharacter, s: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let Some(n) = as_integer(s) else {
        return dirichlet_l(chi, s, ctx);
    };
    let key = (chi.modulus(), chi.index(), n, ctx.prec());
    if let Some(v) = L_CACHE.lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = if n <= 0 {
        dirichlet_l_negative(chi, (1 - n) as u32, ctx.prec())?
    } else {
        dirichlet_l(chi, s, ctx)?
    };
    L_CACHE.lock().expect("cache lock").insert(key, v.clone());
    Ok(v)
}

fn check_s(f: &EisensteinCombination, s: &Complex) -> Result<()> {
    if as_integer(s) == Some(f.weight() as i64) {
        return Err(Error::Unsupported(format!("s = {} is the pole of Lambda; no residue is available", f.weight())));
    }
    Ok(())
}

/// c * 2(-2 pi i)^k G(psi)/(p2^k (k-1)!) * L(chi; s) L(psi bar; s - k + 1) for one term.
fn term_value(
    chi: &DirichletCharacter,
    psi: &DirichletCharacter,
    coeff: &Complex,
    k: u32,
    s: &Complex,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let wp = ctx.prec() + 16;
    let wctx = PrecisionContext { precision_bits: wp, ..ctx.clone() };
    let shifted = Complex::with_val(wp, s - (k - 1));
    let l1 = dirichlet_value(chi, s, &wctx)?;
    if l1.is_zero() {
        return Ok(Complex::new(ctx.prec()));
    }
    let l2 = dirichlet_value(&psi.conjugate(), &shifted, &wctx)?;
    let v = eisenstein_prefactor(psi, k, wp) * l1 * l2 * coeff;
    Ok(Complex::with_val(ctx.prec(), v))
}

/// L(f; s) for f = sum c E_k(chi, psi; p2 tau), from the Dirichlet product.
pub fn l_value(f: &EisensteinCombination, s: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_s(f, s)?;
    let mut acc = Complex::new(ctx.prec() + 16);
    for t in f.terms() {
        acc += term_value(&t.chi, &t.psi, &t.coeff, f.weight(), s, ctx)?;
    }
    Ok(Complex::with_val(ctx.prec(), acc))
}

fn gamma_factor(s: &Complex, prec: u32) -> Result<Complex> {
    let g = gamma(s, prec)?;
    let neg = Complex::with_val(prec, -s);
    Ok(Complex::with_val(prec, real_pow(&two_pi(prec), &neg, prec) * g))
}

/// Lambda(f; s) = (2 pi)^{-s} Gamma(s) L(f; s).
pub fn completed_lambda(f: &EisensteinCombination, s: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_s(f, s)?;
    let g = gamma_factor(s, ctx.prec() + 16)?;
    let l = l_value(f, s, ctx)?;
    Ok(Complex::with_val(ctx.prec(), g * l))
}

/// Lambda(f; s) as the Mellin integral of f(ix), split at x0 = 1/sqrt(p1 p2);
/// the piece below x0 is moved to large argument with the theta
/// transformation law. Entirely independent of Dirichlet L-values.
pub fn mellin_lambda(f: &EisensteinCombination, s: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    check_s(f, s)?;
    let k = f.weight();
    let (p1, p2) = f.levels();
    let wp = ctx.prec() + 32;
    let wctx = PrecisionContext { precision_bits: wp, ..ctx.clone() };
    let n = (p1 * p2) as f64;
    let x0 = 1.0 / n.sqrt();
    let decay = 2.0 * std::f64::consts::PI * x0;
    let growth = (k as f64 + s.real().to_f64().abs() + 4.0) * (200.0 * n).ln();
    let terms = ((wp as f64 * std::f64::consts::LN_2 + growth) / decay).ceil() as usize + 10;

    let sqrt_n = Float::with_val(wp, p1 * p2).sqrt();
    let x0f = Float::with_val(wp, sqrt_n.recip_ref());
    let tp = two_pi(wp);
    let neg_s = Complex::with_val(wp, -s);

    // large x: sum a_m (2 pi m)^{-s} Gamma(s, 2 pi m x0)
    let a = f.q_expansion(terms, wp)?;
    let mut large = Complex::new(wp);
    for (m, am) in a.coeffs.iter().enumerate().skip(1) {
        if am.is_zero() {
            continue;
        }
        let lam = Float::with_val(wp, &tp * m as u32);
        let g = upper_incomplete_gamma(s, &Float::with_val(wp, &lam * &x0f), wp)?;
        large += Complex::with_val(wp, am * real_pow(&lam, &neg_s, wp)) * g;
    }

    // small x: f(i x) = -(i y)^k sum b_m e^{-2 pi m y / p1}, y = 1/(p2 x)
    let mut b = vec![Complex::new(wp); terms + 1];
    for t in f.terms() {
        let kc = eisenstein_constant(&t.chi, &t.psi, k, wp)?;
        let omega = WeakFunction::from_character(&t.chi.conjugate(), wp);
        let eta = WeakFunction::from_character(&t.psi.conjugate(), wp);
        let th = theta_q_expansion(&eta, &omega.reflect(), k, terms, &wctx)?;
        let c = Complex::with_val(wp, &t.coeff * kc);
        for (acc, x) in b.iter_mut().zip(&th.coeffs) {
            *acc += Complex::with_val(wp, x * &c);
        }
    }
    let k_minus_s = Complex::with_val(wp, k - Complex::with_val(wp, s));
    let neg_kms = Complex::with_val(wp, -&k_minus_s);
    let mut small = Complex::new(wp);
    for (m, bm) in b.iter().enumerate().skip(1) {
        if bm.is_zero() {
            continue;
        }
        let lam = Float::with_val(wp, &tp * m as u32) / p1 as u32;
        let g = upper_incomplete_gamma(&k_minus_s, &(Float::with_val(wp, &tp * m as u32) / &sqrt_n), wp)?;
        small += Complex::with_val(wp, bm * real_pow(&lam, &neg_kms, wp)) * g;
    }
    let pre = i_pow(k as i64, wp) * real_pow(&Float::with_val(wp, p2), &neg_s, wp);
    small *= pre;
    Ok(Complex::with_val(ctx.prec(), large - small))
}

/// Coefficients of tau^0..tau^{k-2}.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodPolynomial {
    pub weight: u32,
    pub coeffs: Vec<Complex>,
}

/// P(f; tau) = (-1)^k sum_n C(k-2, n) i^{1-n} Lambda(f; n+1) tau^{k-2-n}.
pub fn period_polynomial(f: &EisensteinCombination, ctx: &PrecisionContext) -> Result<PeriodPolynomial> {
    let k = f.weight();
    let prec = ctx.prec();
    let mut coeffs = vec![Complex::new(prec); k as usize - 1];
    for n in 0..=(k - 2) {
        let lam = completed_lambda(f, &Complex::with_val(prec, n + 1), ctx)?;
        let mut c = lam * i_pow(1 - n as i64, prec) * Float::with_val(prec, binomial((k - 2) as u64, n as u64));
        if k % 2 == 1 {
            c = -c;
        }
        coeffs[(k - 2 - n) as usize] = Complex::with_val(prec, c);
    }
    Ok(PeriodPolynomial { weight: k, coeffs })
}

/// Both sides of the Eichler identity for g = E_k(chi, psi; p2 tau), per tau^l:
/// C(k-2, l) i^{1-l} Lambda(g; l+1) p1^{l+1} against
/// 4 pi^2 chi(-1)/(p2^k (k-1)) * [tau^l] res z^{1-k} omega_psi(z) omega_chi(z tau).
pub fn eichler_sides(
    chi: &DirichletCharacter,
    psi: &DirichletCharacter,
    k: u32,
    ctx: &PrecisionContext,
) -> Result<(Vec<Complex>, Vec<Complex>)> {
    let prec = ctx.prec();
    let one = Complex::with_val(prec, 1);
    let g = EisensteinCombination::new(
        k,
        chi.modulus(),
        psi.modulus(),
        vec![crate::eisenstein::EisensteinTerm { chi: chi.clone(), psi: psi.clone(), coeff: one }],
        ctx,
    )?;
    let p1 = Integer::from(chi.modulus());
    let mut lhs = Vec::with_capacity(k as usize - 1);
    for l in 0..=(k - 2) {
        let lam = completed_lambda(&g, &Complex::with_val(prec, l + 1), ctx)?;
        let w = Float::with_val(prec, binomial((k - 2) as u64, l as u64) * Integer::from((&p1).pow(l + 1)));
        lhs.push(Complex::with_val(prec, lam * i_pow(1 - l as i64, prec) * w));
    }
    let omega_chi = WeakFunction::from_character(chi, prec);
    let omega_psi = WeakFunction::from_character(psi, prec);
    let a_chi = taylor_coeffs(&omega_chi, k as usize - 1, ctx)?;
    let a_psi = taylor_coeffs(&omega_psi, k as usize - 1, ctx)?;
    let poly = product_poly(&a_chi, &a_psi, k as usize - 2)?;
    let pi2 = Float::with_val(prec, pi(prec).square());
    let den = Float::with_val(prec, Integer::from(psi.modulus()).pow(k) * (k - 1));
    let factor = Float::with_val(prec, pi2 * 4u32 * chi.parity()) / den;
    let rhs = poly.into_iter().map(|c| Complex::with_val(prec, c * &factor)).collect();
    Ok((lhs, rhs))
}

/// max_l |lhs_l - rhs_l| / max_l max(|lhs_l|, |rhs_l|). Individual
/// coefficients vanish by parity, so a per-coefficient ratio is meaningless.
pub fn eichler_identity_check(chi: &DirichletCharacter, psi: &DirichletCharacter, k: u32, ctx: &PrecisionContext) -> Result<Float> {
    let (lhs, rhs) = eichler_sides(chi, psi, k, ctx)?;
    let prec = ctx.prec();
    let mut size = Float::new(prec);
    let mut diff = Float::new(prec);
    for (a, b) in lhs.iter().zip(&rhs) {
        for v in [cabs(a), cabs(b)] {
            if v > size {
                size = v;
            }
        }
        let d = cabs(&Complex::with_val(prec, a - b));
        if d > diff {
            diff = d;
        }
    }
    if size.is_zero() {
        return Ok(size);
    }
    Ok(diff / size)
}

/// True when every term carries a Dirichlet factor at one of its trivial zeros.
pub fn is_trivial_point(f: &EisensteinCombination, s: i64) -> bool {
    let k = f.weight() as i64;
    !f.is_zero()
        && f.terms().iter().all(|t| t.chi.is_trivial_zero(s) || t.psi.conjugate().is_trivial_zero(s - k + 1))
}

/// Reference size for deciding whether L(f; s) vanishes: the largest
/// |c L(E_t; j)| over terms t and j in {1..k-1} plus s itself. Using only the
/// point s would make every trivial zero its own scale.
pub fn vanishing_scale(f: &EisensteinCombination, s: i64, ctx: &PrecisionContext) -> Result<Float> {
    let k = f.weight() as i64;
    let prec = ctx.prec();
    let mut best = Float::new(prec);
    let mut points: Vec<i64> = (1..k).collect();
    if !points.contains(&s) && s != k {
        points.push(s);
    }
    for j in points {
        let sj = Complex::with_val(prec, j);
        for t in f.terms() {
            let v = cabs(&term_value(&t.chi, &t.psi, &t.coeff, f.weight(), &sj, ctx)?);
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LValueEntry {
    pub s: i64,
    pub value: [String; 2],
    pub scale: String,
    pub vanished: bool,
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LValueReport {
    pub form: EisensteinCombination,
    pub precision: PrecisionContext,
    pub points: Vec<i64>,
    pub values: Vec<Complex>,
    pub scales: Vec<Float>,
    pub vanished: Vec<bool>,
    pub trivial: Vec<bool>,
}

impl LValueReport {
    pub fn entries(&self) -> Vec<LValueEntry> {
        (0..self.points.len())
            .map(|i| LValueEntry {
                s: self.points[i],
                value: crate::num::cx_to_strings(&self.values[i]),
                scale: crate::num::fmt_float(&self.scales[i]),
                vanished: self.vanished[i],
                trivial: self.trivial[i],
            })
            .collect()
    }
}

/// L(f; s) at integer points with vanishing and trivial-zero labels.
pub fn l_value_report(f: &EisensteinCombination, points: &[i64], ctx: &PrecisionContext) -> Result<LValueReport> {
    let prec = ctx.prec();
    let mut values = Vec::with_capacity(points.len());
    let mut scales = Vec::with_capacity(points.len());
    let mut vanished = Vec::with_capacity(points.len());
    let mut trivial = Vec::with_capacity(points.len());
    for &s in points {
        let v = l_value(f, &Complex::with_val(prec, s), ctx)?;
        let scale = vanishing_scale(f, s, ctx)?;
        vanished.push(cabs(&v) < Float::with_val(prec, &scale * ctx.vanish()));
        trivial.push(is_trivial_point(f, s));
        values.push(v);
        scales.push(scale);
    }
    Ok(LValueReport { form: f.clone(), precision: ctx.clone(), points: points.to_vec(), values, scales, vanished, trivial })
}
