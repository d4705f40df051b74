//! Weak functions of level N: omega(z) = sum_j beta(j) e(z)/(e(j/N) - e(z)).
//!
//! Covers evaluation, Taylor expansion at zero through cotangent power sums,
//! vanishing order, kernels of the cotangent Vandermonde matrix, the
//! order-graded basis alpha_j and the weak Fourier transform.

use std::sync::OnceLock;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::characters::{dft, DirichletCharacter, Direction};
use crate::context::PrecisionContext;
use crate::cotangent::{cot_power_sums, cot_values, delta_table};
use crate::error::{Error, Result};
use crate::linalg::{rank_kernel, CMatrix};
use crate::num::{cabs, ci, cx_from_strings, cx_to_strings, e_of, fmt_sci, l2_norm, pi, root_of_unity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Finite(usize),
    Infinite,
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(m) => write!(f, "{m}"),
            Order::Infinite => write!(f, "∞"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderReport {
    pub order: Order,
    /// First non-vanishing cotangent power sum (u, S_u).
    pub witness: Option<(usize, Complex)>,
}

/// Sign behaviour under z -> -z.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Zero,
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn sign(self) -> Option<i32> {
        match self {
            Parity::Even => Some(1),
            Parity::Odd => Some(-1),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct WeakFunction {
    level: usize,
    beta: Vec<Complex>,
    order_cache: OnceLock<(PrecisionContext, OrderReport)>,
}

impl Clone for WeakFunction {
    fn clone(&self) -> Self {
        WeakFunction { level: self.level, beta: self.beta.clone(), order_cache: self.order_cache.clone() }
    }
}

impl PartialEq for WeakFunction {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && self.beta == other.beta
    }
}

impl WeakFunction {
    /// `beta[j - 1]` holds beta(j) for j = 1..N-1.
    pub fn new(level: usize, beta: Vec<Complex>) -> Result<Self> {
        if level < 3 {
            return Err(Error::arg(format!("weak-function level must be at least 3, got {level}")));
        }
        if beta.len() != level - 1 {
            return Err(Error::arg(format!("level {level} needs {} coefficients, got {}", level - 1, beta.len())));
        }
        Ok(WeakFunction { level, beta, order_cache: OnceLock::new() })
    }

    pub fn zero(level: usize, prec: u32) -> Result<Self> {
        Self::new(level, vec![Complex::new(prec); level.saturating_sub(1)])
    }

    /// omega_chi with beta(j) = chi(j).
    pub fn from_character(chi: &DirichletCharacter, prec: u32) -> Self {
        let n = chi.modulus() as usize;
        let beta = (1..n as i64).map(|j| chi.value(j, prec)).collect();
        WeakFunction { level: n, beta, order_cache: OnceLock::new() }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn beta(&self) -> &[Complex] {
        &self.beta
    }

    pub fn prec(&self) -> u32 {
        self.beta[0].prec().0
    }

    /// beta(j) with j read mod N; beta(0) = 0.
    pub fn beta_at(&self, j: i64) -> Complex {
        let r = j.rem_euclid(self.level as i64) as usize;
        if r == 0 {
            Complex::new(self.prec())
        } else {
            self.beta[r - 1].clone()
        }
    }

    pub fn norm(&self) -> Float {
        l2_norm(&self.beta)
    }

    pub fn is_zero(&self) -> bool {
        self.beta.iter().all(|b| b.real().is_zero() && b.imag().is_zero())
    }

    pub fn in_w0(&self, ctx: &PrecisionContext) -> bool {
        let sum = self.beta.iter().fold(Complex::new(self.prec() + 16), |a, b| a + b);
        cabs(&sum) <= Float::with_val(ctx.prec(), self.norm() * ctx.working_eps())
    }

    pub fn require_w0(&self, ctx: &PrecisionContext) -> Result<()> {
        if self.in_w0(ctx) {
            Ok(())
        } else {
            Err(Error::arg("weak function has a pole at 0 (coefficients do not sum to zero)"))
        }
    }

    /// omega(-z), whose coefficients are -beta(N - j).
    pub fn reflect(&self) -> Self {
        let n = self.level;
        let beta = (1..n).map(|j| Complex::with_val(self.prec(), -&self.beta[n - j - 1])).collect();
        WeakFunction { level: n, beta, order_cache: OnceLock::new() }
    }

    pub fn scale(&self, c: &Complex) -> Self {
        let prec = self.prec();
        let beta = self.beta.iter().map(|b| Complex::with_val(prec, b * c)).collect();
        WeakFunction { level: self.level, beta, order_cache: OnceLock::new() }
    }

    /// self + c * other
    pub fn axpy(&self, c: &Complex, other: &WeakFunction) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::arg("cannot combine weak functions of different levels"));
        }
        let prec = self.prec();
        let beta = self
            .beta
            .iter()
            .zip(&other.beta)
            .map(|(a, b)| Complex::with_val(prec, a + Complex::with_val(prec, b * c)))
            .collect();
        Ok(WeakFunction { level: self.level, beta, order_cache: OnceLock::new() })
    }

    pub fn parity(&self, ctx: &PrecisionContext) -> Parity {
        let norm = self.norm();
        if norm.is_zero() {
            return Parity::Zero;
        }
        let tol = Float::with_val(ctx.prec(), &norm * ctx.vanish());
        let r = self.reflect();
        let diff = |sign: i32| {
            let v: Vec<Complex> =
                r.beta.iter().zip(&self.beta).map(|(a, b)| Complex::with_val(ctx.prec(), a - Complex::with_val(ctx.prec(), b * sign))).collect();
            l2_norm(&v)
        };
        if diff(1) <= tol {
            Parity::Even
        } else if diff(-1) <= tol {
            Parity::Odd
        } else {
            Parity::Mixed
        }
    }

    /// Order with a per-context cache.
    pub fn order(&self, ctx: &PrecisionContext) -> Result<OrderReport> {
        if let Some((c, r)) = self.order_cache.get() {
            if c == ctx {
                return Ok(r.clone());
            }
        }
        let r = order(self, ctx)?;
        let _ = self.order_cache.set((ctx.clone(), r.clone()));
        Ok(r)
    }

    pub fn to_record(&self) -> WeakFunctionRecord {
        WeakFunctionRecord { level: self.level, beta: self.beta.iter().map(cx_to_strings).collect() }
    }

    pub fn from_record(r: &WeakFunctionRecord, prec: u32) -> Result<Self> {
        let beta = r.beta.iter().map(|s| cx_from_strings(s, prec)).collect::<Result<Vec<_>>>()?;
        Self::new(r.level, beta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakFunctionRecord {
    pub level: usize,
    pub beta: Vec<[String; 2]>,
}

/// Direct sum of the N - 1 partial fractions, without any fallback.
pub fn evaluate_direct(w: &WeakFunction, z: &Complex, prec: u32) -> Result<Complex> {
    let wp = prec + 32;
    let n = w.level;
    let z = Complex::with_val(wp, z);
    check_poles(w, &z, wp)?;
    let ez = e_of(&z);
    let mut acc = Complex::new(wp);
    for (j, b) in (1..n).zip(&w.beta) {
        if b.real().is_zero() && b.imag().is_zero() {
            continue;
        }
        let ej = root_of_unity(j as i64, n as u64, wp);
        let denom = Complex::with_val(wp, &ej - &ez);
        acc += Complex::with_val(wp, b * &ez) / denom;
    }
    Ok(Complex::with_val(prec, acc))
}

fn reduce_mod_one(z: &Complex, wp: u32) -> Complex {
    let shift = Float::with_val(wp, z.real().round_ref());
    Complex::with_val(wp, z - shift)
}

fn check_poles(w: &WeakFunction, z: &Complex, wp: u32) -> Result<()> {
    let n = w.level as i64;
    let zr = reduce_mod_one(z, wp);
    let tol = Float::with_val(wp, 1) >> (wp - 48);
    if Float::with_val(wp, zr.imag().abs_ref()) > tol {
        return Ok(());
    }
    let scaled = Float::with_val(wp, zr.real() * n);
    let r = Float::with_val(wp, scaled.round_ref());
    if Float::with_val(wp, &scaled - &r).abs() > tol {
        return Ok(());
    }
    let j = r.to_i32_saturating().unwrap_or(0) as i64;
    let jm = j.rem_euclid(n);
    let b = w.beta_at(jm);
    if jm != 0 && !(b.real().is_zero() && b.imag().is_zero()) {
        return Err(Error::Pole(format!("{j}/{n} (mod 1)")));
    }
    if jm == 0 {
        let sum = w.beta.iter().fold(Complex::new(wp), |a, b| a + b);
        let eps = Float::with_val(wp, w.norm()) >> (w.prec().saturating_sub(8));
        if cabs(&sum) > eps {
            return Err(Error::Pole("0 (mod 1)".into()));
        }
        return Err(Error::Pole("removable point 0 needs the Taylor path".into()));
    }
    Ok(())
}

/// omega(z). Near z = 0 (|z| < 1/(2N), after reduction mod 1) the Taylor
/// series replaces the direct sum, which cancels catastrophically there.
pub fn evaluate(w: &WeakFunction, z: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.prec();
    let wp = prec + 32;
    let zr = reduce_mod_one(&Complex::with_val(wp, z), wp);
    let r = cabs(&zr);
    let n = w.level;
    let radius = Float::with_val(wp, 1) / (2 * n as u32);
    if r < radius && w.in_w0(ctx) {
        let x = Float::with_val(wp, &r * n as u32);
        let terms = if x.is_zero() {
            1
        } else {
            let bits_per_term = -x.log2().to_f64();
            ((prec + 16) as f64 / bits_per_term).ceil() as usize + 2
        };
        let coeffs = taylor_coeffs(w, terms, ctx)?;
        let mut acc = Complex::new(wp);
        for c in coeffs.iter().rev() {
            acc *= &zr;
            acc += c;
        }
        return Ok(Complex::with_val(prec, acc));
    }
    evaluate_direct(w, z, prec)
}

/// Coefficients of z^0..z^{count-1}:
/// a_nu = -(i/2) pi^nu sum_{u=0}^{nu+1} delta_{nu+1}(u) S_u.
pub fn taylor_coeffs(w: &WeakFunction, count: usize, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
    w.require_w0(ctx)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let prec = ctx.prec();
    let wp = prec + 32 + count as u32;
    let sums = cot_power_sums(&w.beta, w.level, count, wp)?;
    let table = delta_table(count);
    let pi = pi(wp);
    let minus_half_i = Complex::with_val(wp, ci(wp) * Float::with_val(wp, -0.5));
    let mut pi_pow = Float::with_val(wp, 1);
    let mut out = Vec::with_capacity(count);
    for nu in 0..count {
        let mut acc = Complex::new(wp);
        for (u, s) in sums.iter().enumerate().take(nu + 2) {
            let d = table.get(nu + 1, u);
            if d.is_zero() {
                continue;
            }
            acc += Complex::with_val(wp, s * d.to_complex(wp));
        }
        let v = Complex::with_val(wp, &acc * &minus_half_i) * &pi_pow;
        out.push(Complex::with_val(prec, v));
        pi_pow *= &pi;
    }
    Ok(out)
}

/// ||(cot^u(pi j/N))_j||_2 for u = 0..=max_u.
fn cot_row_norms(n: usize, max_u: usize, prec: u32) -> Vec<Float> {
    let wp = prec + 32;
    let cots = cot_values(n, wp);
    let sq: Vec<Float> = cots.iter().map(|c| Float::with_val(wp, c.square_ref())).collect();
    let mut pw: Vec<Float> = vec![Float::with_val(wp, 1); n - 1];
    let mut out = Vec::with_capacity(max_u + 1);
    for _ in 0..=max_u {
        let s = pw.iter().fold(Float::new(wp), |a, b| a + b);
        out.push(Float::with_val(prec, s.sqrt()));
        for (p, c) in pw.iter_mut().zip(&sq) {
            *p *= c;
        }
    }
    out
}

/// sup{m : beta in ker CotM(N, m)}, found by testing S_0, S_1, ... in turn.
pub fn order(w: &WeakFunction, ctx: &PrecisionContext) -> Result<OrderReport> {
    let norm = w.norm();
    if norm.is_zero() {
        return Ok(OrderReport { order: Order::Infinite, witness: None });
    }
    let n = w.level;
    let max_u = n - 2;
    let sums = cot_power_sums(&w.beta, n, max_u, ctx.prec())?;
    let rows = cot_row_norms(n, max_u, ctx.prec());
    let lo = ctx.vanish();
    let hi = ctx.vanish_upper();
    for (u, (s, rn)) in sums.iter().zip(&rows).enumerate() {
        let ratio = cabs(s) / Float::with_val(ctx.prec(), &norm * rn);
        if ratio < lo {
            continue;
        }
        if ratio < hi {
            return Err(Error::Ambiguous(format!(
                "cotangent power sum u={u} has relative size {} between the vanishing thresholds",
                fmt_sci(&ratio, 6)
            )));
        }
        if u == 0 {
            return Err(Error::arg("weak function has a pole at 0 (coefficients do not sum to zero)"));
        }
        return Ok(OrderReport { order: Order::Finite(u - 1), witness: Some((u, s.clone())) });
    }
    Err(Error::Ambiguous(format!(
        "nonzero coefficient vector annihilated by all cotangent powers up to u={max_u}"
    )))
}

/// The cotangent Vandermonde matrix CotM(N, m): rows cot^i(pi j/N).
#[derive(Clone, Debug)]
pub struct CotangentMatrix {
    level: usize,
    m: usize,
    entries: CMatrix,
}

impl CotangentMatrix {
    pub fn new(level: usize, m: usize, prec: u32) -> Result<Self> {
        if level < 3 {
            return Err(Error::arg(format!("level must be at least 3, got {level}")));
        }
        let cots = cot_values(level, prec);
        let mut rows = Vec::with_capacity(m + 1);
        let mut cur: Vec<Float> = vec![Float::with_val(prec, 1); level - 1];
        for _ in 0..=m {
            rows.push(cur.iter().map(|x| Complex::with_val(prec, x)).collect());
            for (c, x) in cur.iter_mut().zip(&cots) {
                *c *= x;
            }
        }
        Ok(CotangentMatrix { level, m, entries: CMatrix::from_rows(rows)? })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn rows(&self) -> usize {
        self.m + 1
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Largest |(CotM beta)_u| / (||beta|| ||row_u||).
    pub fn relative_residual(&self, beta: &[Complex]) -> Result<Float> {
        let prod = self.entries.mul_vec(beta)?;
        let prec = beta.first().map(|b| b.prec().0).unwrap_or(64);
        let norm = l2_norm(beta);
        let mut worst = Float::new(prec);
        if norm.is_zero() {
            return Ok(worst);
        }
        for (u, v) in prod.iter().enumerate() {
            let rn = l2_norm(self.entries.row(u));
            let r = cabs(v) / Float::with_val(prec, &norm * &rn);
            if r > worst {
                worst = r;
            }
        }
        Ok(worst)
    }

    /// Numerical rank, decided on the well-conditioned exponential form.
    pub fn rank(&self, ctx: &PrecisionContext) -> Result<usize> {
        Ok(rank_kernel(&exponential_form(self.level, self.m, ctx.prec()), ctx, "CotM rank")?.rank)
    }
}

/// G_{r,j} = e^{i(m-2r) pi j/N}. Since cot^u sin^m = cos^u sin^{m-u} spans the
/// same functions of theta as e^{i(m-2r)theta}, ker CotM(N,m) consists of
/// beta_j = gamma_j sin^m(pi j/N) with gamma in ker G. The raw Vandermonde
/// matrix is far too ill-conditioned to rank directly for N beyond ~20.
fn exponential_form(n: usize, m: usize, prec: u32) -> CMatrix {
    let rows = (0..=m)
        .map(|r| (1..n).map(|j| root_of_unity((m as i64 - 2 * r as i64) * j as i64, 2 * n as u64, prec)).collect())
        .collect();
    CMatrix::from_rows(rows).expect("rectangular by construction")
}

/// Basis of ker CotM(N, m), each vector scaled to unit max-norm.
pub fn cotm_kernel(n: usize, m: usize, ctx: &PrecisionContext) -> Result<Vec<WeakFunction>> {
    if n < 3 {
        return Err(Error::arg(format!("level must be at least 3, got {n}")));
    }
    let prec = ctx.prec();
    let wp = prec + 32;
    let g = exponential_form(n, m, wp);
    let rk = rank_kernel(&g, ctx, &format!("CotM({n},{m}) kernel"))?;
    let expected = n.saturating_sub(m + 2);
    if rk.kernel.len() != expected {
        return Err(Error::Ambiguous(format!(
            "CotM({n},{m}) kernel has numerical dimension {} instead of {expected}",
            rk.kernel.len()
        )));
    }
    let pi = pi(wp);
    let sines: Vec<Float> = (1..n)
        .map(|j| rug::ops::Pow::pow((Float::with_val(wp, &pi * j as u32) / n as u32).sin(), m as u32))
        .collect();
    let cotm = if expected > 0 { Some(CotangentMatrix::new(n, m, wp)?) } else { None };
    let mut out = Vec::with_capacity(expected);
    for gamma in rk.kernel {
        let beta: Vec<Complex> = gamma.iter().zip(&sines).map(|(g, s)| Complex::with_val(wp, g * s)).collect();
        let mx = crate::num::max_abs(&beta);
        let beta: Vec<Complex> = beta.into_iter().map(|b| Complex::with_val(prec, b / &mx)).collect();
        if let Some(c) = &cotm {
            let res = c.relative_residual(&beta)?;
            if res > ctx.vanish() {
                return Err(Error::Verification(format!(
                    "kernel vector of CotM({n},{m}) leaves residual {}",
                    fmt_sci(&res, 6)
                )));
            }
        }
        out.push(WeakFunction::new(n, beta)?);
    }
    Ok(out)
}

/// alpha_0, ..., alpha_{N-3}: alpha_j = z^j + O(z^{N-2}) with parity (-1)^j.
pub fn alpha_basis(n: usize, ctx: &PrecisionContext) -> Result<Vec<WeakFunction>> {
    if n < 3 {
        return Err(Error::arg(format!("level must be at least 3, got {n}")));
    }
    let dim = n - 2;
    let mut alphas: Vec<Option<WeakFunction>> = vec![None; dim];
    let mut taylors: Vec<Vec<Complex>> = vec![Vec::new(); dim];
    let lo = ctx.vanish_upper();
    for j in (0..dim).rev() {
        let kernel = cotm_kernel(n, j, ctx)?;
        let sign = if j % 2 == 0 { 1 } else { -1 };
        // pick the symmetrized kernel vector with the strongest z^j term
        let mut best: Option<(Float, WeakFunction)> = None;
        for v in kernel {
            let sym = v.axpy(&Complex::with_val(ctx.prec(), sign), &v.reflect())?;
            let norm = sym.norm();
            if norm.is_zero() {
                continue;
            }
            let s = cot_power_sums(&sym.beta, n, j + 1, ctx.prec())?.pop().expect("nonempty");
            let score = cabs(&s) / norm;
            if best.as_ref().map(|(b, _)| score > *b).unwrap_or(true) {
                best = Some((score, sym));
            }
        }
        let (score, cand) = best.ok_or_else(|| Error::Ambiguous(format!("no order-{j} vector at level {n}")))?;
        let row_norm = cot_row_norms(n, j + 1, ctx.prec()).pop().expect("nonempty");
        if score / row_norm < lo {
            return Err(Error::Ambiguous(format!("cotangent power sum u={} too small to fix alpha_{j}", j + 1)));
        }
        let coeffs = taylor_coeffs(&cand, dim, ctx)?;
        let lead = Complex::with_val(ctx.prec(), coeffs[j].recip_ref());
        let mut cur = cand.scale(&lead);
        for i in j + 1..dim {
            let c = Complex::with_val(ctx.prec(), &coeffs[i] * &lead);
            if c.real().is_zero() && c.imag().is_zero() {
                continue;
            }
            let alpha_i = alphas[i].as_ref().expect("higher alphas are built first");
            cur = cur.axpy(&Complex::with_val(ctx.prec(), -c), alpha_i)?;
        }
        taylors[j] = taylor_coeffs(&cur, dim, ctx)?;
        alphas[j] = Some(cur);
    }
    let tol = ctx.vanish();
    for (j, t) in taylors.iter().enumerate() {
        for (i, c) in t.iter().enumerate() {
            let target = Complex::with_val(ctx.prec(), if i == j { 1 } else { 0 });
            if cabs(&Complex::with_val(ctx.prec(), c - target)) > tol {
                return Err(Error::Verification(format!("alpha_{j} has Taylor coefficient {i} off by more than the tolerance")));
            }
        }
    }
    Ok(alphas.into_iter().map(|a| a.expect("filled")).collect())
}

/// Coefficient vector F_N(beta) (forward) or F_N^{-1}(beta) (inverse).
pub fn weak_fourier_transform(w: &WeakFunction, direction: Direction, ctx: &PrecisionContext) -> Result<WeakFunction> {
    w.require_w0(ctx)?;
    let mut full = Vec::with_capacity(w.level);
    full.push(Complex::new(w.prec()));
    full.extend(w.beta.iter().cloned());
    let t = dft(&full, direction)?;
    WeakFunction::new(w.level, t.into_iter().skip(1).collect())
}

/// Coordinates of omega in the basis (omega_chi) over non-principal chi mod p,
/// via the inverse of the full character table (its conjugate transpose over p-1).
pub fn character_coordinates(
    w: &WeakFunction,
    chars: &[DirichletCharacter],
    ctx: &PrecisionContext,
) -> Result<Vec<Complex>> {
    let p = w.level as u64;
    if chars.iter().any(|c| c.modulus() != p) || chars.len() as u64 != p - 2 {
        return Err(Error::arg("character list does not match the weak-function level"));
    }
    w.require_w0(ctx)?;
    let wp = ctx.prec() + 16;
    let coords: Vec<Complex> = chars
        .iter()
        .map(|chi| {
            let mut acc = Complex::new(wp);
            for j in 1..p as i64 {
                let cv = chi.value(j, wp);
                acc += Complex::with_val(wp, cv.conj_ref()) * &w.beta[j as usize - 1];
            }
            Complex::with_val(ctx.prec(), acc / (p - 1) as u32)
        })
        .collect();
    Ok(coords)
}
