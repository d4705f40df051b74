//! Exact Bernoulli numbers and the analytic special functions the L-value
//! code needs: Hurwitz zeta, complex Gamma, upper incomplete Gamma.

use std::sync::RwLock;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::num::{binomial, cabs};

static BERNOULLI: RwLock<Vec<Rational>> = RwLock::new(Vec::new());

/// B_n with the convention B_1 = -1/2.
pub fn bernoulli(n: usize) -> Rational {
    {
        let table = BERNOULLI.read().expect("bernoulli cache poisoned");
        if n < table.len() {
            return table[n].clone();
        }
    }
    let mut table = BERNOULLI.write().expect("bernoulli cache poisoned");
    while table.len() <= n {
        let m = table.len();
        let b = if m == 0 {
            Rational::from(1)
        } else if m > 1 && m % 2 == 1 {
            Rational::new()
        } else {
            let mut acc = Rational::new();
            for (k, bk) in table.iter().enumerate() {
                if bk.cmp0().is_ne() {
                    acc += Rational::from(binomial(m as u64 + 1, k as u64)) * bk;
                }
            }
            -acc / Rational::from(m as u64 + 1)
        };
        table.push(b);
    }
    table[n].clone()
}

/// B_n(x) = sum_k C(n,k) B_k x^{n-k}, exactly.
pub fn bernoulli_poly(n: usize, x: &Rational) -> Rational {
    let mut acc = Rational::new();
    let mut xp = Rational::from(1);
    // accumulate from k = n down to 0 so that xp = x^{n-k}
    for k in (0..=n).rev() {
        let bk = bernoulli(k);
        if bk.cmp0().is_ne() {
            acc += Rational::from(binomial(n as u64, k as u64)) * bk * &xp;
        }
        xp *= x;
    }
    acc
}

/// Hurwitz zeta split as `regular + x^{1-s}/(s-1)` with `x = M + a`.
/// The pole term is kept separate so that character sums can cancel it
/// analytically at s = 1.
pub struct HurwitzParts {
    pub regular: Complex,
    pub x: Float,
}

fn shift_for(s: &Complex, prec: u32) -> u64 {
    let abs_s = cabs(s).to_f64();
    (prec / 2) as u64 + abs_s.ceil() as u64 + 4
}

/// Guard bits for Euler-Maclaurin: large negative real parts produce big
/// intermediate powers.
fn guard_for(s: &Complex, m: u64) -> u32 {
    let re = s.real().to_f64();
    let growth = if re < 0.0 { (-re) * ((m + 2) as f64).log2() } else { 0.0 };
    32 + growth.ceil() as u32
}

pub fn hurwitz_parts(s: &Complex, a: &Float, prec: u32) -> HurwitzParts {
    let m = shift_for(s, prec);
    let wp = prec + guard_for(s, m);
    let s = Complex::with_val(wp, s);
    let a = Float::with_val(wp, a);
    let neg_s = Complex::with_val(wp, -&s);

    let mut sum = Complex::new(wp);
    for n in 0..m {
        let base = Float::with_val(wp, &a + n);
        let t = Complex::with_val(wp, &neg_s * base.ln()).exp();
        sum += t;
    }

    let x = Float::with_val(wp, &a + m);
    let ln_x = Float::with_val(wp, x.ln_ref());
    let x_neg_s = Complex::with_val(wp, &neg_s * &ln_x).exp();
    sum += Complex::with_val(wp, &x_neg_s / 2u32);

    // Euler-Maclaurin corrections B_{2j}/(2j)! (s)_{2j-1} x^{-s-2j+1}
    let eps = Float::with_val(wp, 1) >> wp;
    let x2 = Float::with_val(wp, &x * &x);
    let mut poch = s.clone();
    let mut xpow = Complex::with_val(wp, &x_neg_s / &x);
    let mut fact = Integer::from(2);
    let max_j = 4 * m as usize + 16;
    for j in 1..=max_j {
        let b = bernoulli(2 * j);
        let coef = Float::with_val(wp, &b / Rational::from(&fact));
        let term = Complex::with_val(wp, &poch * &xpow) * &coef;
        let small = cabs(&term) <= Float::with_val(wp, cabs(&sum) * &eps);
        sum += &term;
        if poch.real().is_zero() && poch.imag().is_zero() {
            break;
        }
        if small && j > 1 {
            break;
        }
        let k = 2 * j as u64;
        poch *= Complex::with_val(wp, &s + (k - 1)) * Complex::with_val(wp, &s + k);
        xpow /= &x2;
        fact *= (k + 1) * (k + 2);
    }
    HurwitzParts { regular: sum, x }
}

pub fn hurwitz_zeta(s: &Complex, a: &Float, prec: u32) -> Result<Complex> {
    if s.real() == &1 && s.imag().is_zero() {
        return Err(Error::Unsupported("Hurwitz zeta has a pole at s = 1".into()));
    }
    let parts = hurwitz_parts(s, a, prec);
    let wp = parts.regular.prec().0;
    let one_minus_s = Complex::with_val(wp, 1 - Complex::with_val(wp, s));
    let pole = Complex::with_val(wp, &one_minus_s * parts.x.ln()).exp() / Complex::with_val(wp, -&one_minus_s);
    Ok(Complex::with_val(prec, parts.regular + pole))
}

fn is_nonpositive_integer(s: &Complex) -> bool {
    s.imag().is_zero() && s.real().is_integer() && *s.real() <= 0
}

/// Gamma on the complex plane.
pub fn gamma(s: &Complex, prec: u32) -> Result<Complex> {
    if is_nonpositive_integer(s) {
        return Err(Error::Unsupported(format!(
            "Gamma has a pole at s = {}",
            s.real().to_f64()
        )));
    }
    if s.imag().is_zero() {
        let g = Float::with_val(prec, s.real().gamma_ref());
        return Ok(Complex::with_val(prec, (g, 0)));
    }
    let wp = prec + 32;
    let s = Complex::with_val(wp, s);
    // shift right until Stirling converges to wp bits
    let target = (wp as f64 * 0.35).ceil();
    let shift = (target - s.real().to_f64()).max(0.0).ceil() as u64;
    let mut prod = Complex::with_val(wp, 1);
    for j in 0..shift {
        prod *= Complex::with_val(wp, &s + j);
    }
    let z = Complex::with_val(wp, &s + shift);
    let ln_z = Complex::with_val(wp, z.ln_ref());
    let mut lg = Complex::with_val(wp, &z - Float::with_val(wp, 0.5)) * &ln_z - &z;
    let half_ln_2pi = Float::with_val(wp, crate::num::two_pi(wp).ln()) / 2u32;
    lg += half_ln_2pi;
    let eps = Float::with_val(wp, 1) >> wp;
    let z2 = Complex::with_val(wp, &z * &z);
    let mut zpow = Complex::with_val(wp, z.recip_ref());
    for j in 1..=(wp as usize) {
        let b = bernoulli(2 * j);
        let denom = Rational::from((2 * j as u64) * (2 * j as u64 - 1));
        let coef = Float::with_val(wp, b / denom);
        let term = Complex::with_val(wp, &zpow * &coef);
        let small = cabs(&term) < eps;
        lg += term;
        if small {
            break;
        }
        zpow /= &z2;
    }
    Ok(Complex::with_val(prec, lg.exp() / prod))
}

/// Upper incomplete Gamma Gamma(a, x) for real x > 0.
pub fn upper_incomplete_gamma(a: &Complex, x: &Float, prec: u32) -> Result<Complex> {
    if *x <= 0 {
        return Err(Error::arg("incomplete Gamma needs x > 0"));
    }
    let wp = prec + 32;
    let x = Float::with_val(wp, x);
    if a.imag().is_zero() && a.real().is_integer() && *a.real() >= 1 {
        // (n-1)! e^{-x} sum_{j<n} x^j / j!
        let n = a.real().to_u32_saturating().unwrap_or(u32::MAX);
        let mut term = Float::with_val(wp, 1);
        let mut sum = Float::with_val(wp, 1);
        for j in 1..n {
            term *= &x;
            term /= j;
            sum += &term;
        }
        let fact = Float::with_val(wp, Integer::from(Integer::factorial(n - 1)));
        let v = sum * fact * Float::with_val(wp, -&x).exp();
        return Ok(Complex::with_val(prec, (v, 0)));
    }
    let a = Complex::with_val(wp, a);
    let prefactor = Complex::with_val(wp, &a * x.clone().ln()).exp() * Float::with_val(wp, -&x).exp();
    if x < 0.5 && !is_nonpositive_integer(&a) {
        // Gamma(a) - gamma(a, x) with the lower series
        let mut term = Complex::with_val(wp, a.recip_ref());
        let mut sum = term.clone();
        let eps = Float::with_val(wp, 1) >> wp;
        for n in 1..100_000u64 {
            term *= &x;
            term /= Complex::with_val(wp, &a + n);
            sum += &term;
            if cabs(&term) < Float::with_val(wp, cabs(&sum) * &eps) {
                break;
            }
        }
        let lower = sum * &prefactor;
        let g = gamma(&a, wp)?;
        return Ok(Complex::with_val(prec, g - lower));
    }
    // modified Lentz on the Legendre continued fraction
    let tiny = Float::with_val(wp, 1) >> (4 * wp);
    let eps = Float::with_val(wp, 1) >> (wp - 4);
    let mut b = Complex::with_val(wp, Complex::with_val(wp, &x + 1u32) - &a);
    let mut c = Complex::with_val(wp, (Float::with_val(wp, 1) << (4 * wp), 0));
    let mut d = Complex::with_val(wp, b.recip_ref());
    let mut h = d.clone();
    let mut converged = false;
    for i in 1..2_000_000u64 {
        let an = Complex::with_val(wp, Complex::with_val(wp, &a - i) * i);
        b += 2u32;
        d = Complex::with_val(wp, &an * &d) + &b;
        if cabs(&d) < tiny {
            d = Complex::with_val(wp, (tiny.clone(), 0));
        }
        c = Complex::with_val(wp, &an / &c) + &b;
        if cabs(&c) < tiny {
            c = Complex::with_val(wp, (tiny.clone(), 0));
        }
        d = Complex::with_val(wp, d.recip_ref());
        let del = Complex::with_val(wp, &d * &c);
        h *= &del;
        if cabs(&Complex::with_val(wp, &del - 1u32)) < eps {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Ambiguous("incomplete Gamma continued fraction did not converge".into()));
    }
    Ok(Complex::with_val(prec, prefactor * h))
}

/// (2 pi)^{-s} as a complex number.
pub fn two_pi_pow_neg(s: &Complex, prec: u32) -> Complex {
    let ln = Float::with_val(prec + 16, crate::num::two_pi(prec + 16).ln());
    Complex::with_val(prec, Complex::with_val(prec + 16, -s) * ln).exp()
}

/// Real power helper: x^y for Float x > 0 and complex y.
pub fn real_pow(x: &Float, y: &Complex, prec: u32) -> Complex {
    let ln = Float::with_val(prec + 16, x.ln_ref());
    Complex::with_val(prec, Complex::with_val(prec + 16, y * ln).exp())
}

pub fn pow_u(x: &Complex, n: u32) -> Complex {
    Complex::with_val(x.prec().0, x.pow(n))
}
