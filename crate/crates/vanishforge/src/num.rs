//! Small helpers over `rug` floats and complex numbers.

use rug::float::Constant;
use rug::{Complex, Float, Rational};

use crate::error::{Error, Result};

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn two_pi(prec: u32) -> Float {
    pi(prec) * 2u32
}

pub fn czero(prec: u32) -> Complex {
    Complex::new(prec)
}

pub fn cone(prec: u32) -> Complex {
    Complex::with_val(prec, 1)
}

pub fn ci(prec: u32) -> Complex {
    Complex::with_val(prec, (0, 1))
}

/// i^n for any integer n, exactly.
pub fn i_pow(n: i64, prec: u32) -> Complex {
    match n.rem_euclid(4) {
        0 => Complex::with_val(prec, (1, 0)),
        1 => Complex::with_val(prec, (0, 1)),
        2 => Complex::with_val(prec, (-1, 0)),
        _ => Complex::with_val(prec, (0, -1)),
    }
}

/// e^{2 pi i num / den}. Quarter turns are exact.
pub fn root_of_unity(num: i64, den: u64, prec: u32) -> Complex {
    assert!(den > 0, "root of unity with zero denominator");
    let r = num.rem_euclid(den as i64) as u64;
    if (4 * r).is_multiple_of(den) {
        return i_pow((4 * r / den) as i64, prec);
    }
    let angle = two_pi(prec + 16) * r / den;
    let (s, c) = angle.sin_cos(Float::new(prec + 16));
    Complex::with_val(prec, (c, s))
}

/// e(z) = e^{2 pi i z}.
pub fn e_of(z: &Complex) -> Complex {
    let prec = z.prec().0;
    let arg = Complex::with_val(prec, z * ci(prec)) * two_pi(prec);
    arg.exp()
}

pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn rational_to_float(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

pub fn binomial(n: u64, k: u64) -> rug::Integer {
    if k > n {
        return rug::Integer::new();
    }
    rug::Integer::from(n).binomial(k as u32)
}

/// |a - b| / max(|a|, |b|), or 0 when both vanish.
pub fn rel_err(a: &Complex, b: &Complex) -> Float {
    let prec = a.prec().0.max(b.prec().0);
    let d = cabs(&Complex::with_val(prec, a - b));
    let m = cabs(a).max(&cabs(b));
    if m.is_zero() {
        return Float::new(prec);
    }
    d / m
}

/// |a - b| / max(|a|, |b|, floor).
pub fn rel_err_floor(a: &Complex, b: &Complex, floor: &Float) -> Float {
    let prec = a.prec().0.max(b.prec().0);
    let d = cabs(&Complex::with_val(prec, a - b));
    let m = cabs(a).max(&cabs(b)).max(floor);
    if m.is_zero() {
        return Float::new(prec);
    }
    d / m
}

pub fn l2_norm(v: &[Complex]) -> Float {
    let prec = v.first().map(|z| z.prec().0).unwrap_or(64);
    let mut s = Float::new(prec);
    for z in v {
        s += Float::with_val(prec, z.norm_ref());
    }
    s.sqrt()
}

pub fn max_abs(v: &[Complex]) -> Float {
    let prec = v.first().map(|z| z.prec().0).unwrap_or(64);
    let mut m = Float::new(prec);
    for z in v {
        let a = cabs(z);
        if a > m {
            m = a;
        }
    }
    m
}

/// Number of significant decimal digits that faithfully carry `prec` bits.
pub fn decimal_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

pub fn fmt_float(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(decimal_digits(x.prec())))
}

/// Short scientific rendering for human-readable tables.
pub fn fmt_sci(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

pub fn fmt_complex_sci(z: &Complex, digits: usize) -> String {
    let (re, im) = (z.real(), z.imag());
    if im.is_zero() {
        return fmt_sci(re, digits);
    }
    let sign = if im.is_sign_negative() { "-" } else { "+" };
    let abs_im = Float::with_val(im.prec(), im.abs_ref());
    format!("{} {} {}i", fmt_sci(re, digits), sign, fmt_sci(&abs_im, digits))
}

pub fn parse_float(s: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(s.trim()).map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Complex numbers travel as a pair of full-precision decimal strings.
pub fn cx_to_strings(z: &Complex) -> [String; 2] {
    [fmt_float(z.real()), fmt_float(z.imag())]
}

pub fn cx_from_strings(s: &[String; 2], prec: u32) -> Result<Complex> {
    Ok(Complex::with_val(prec, (parse_float(&s[0], prec)?, parse_float(&s[1], prec)?)))
}

pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}
