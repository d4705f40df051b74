//! Dirichlet characters modulo odd primes, the discrete Fourier transform,
//! Gauss sums and Dirichlet L-values.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::num::{is_odd_prime, root_of_unity};
use crate::special::{bernoulli_poly, hurwitz_parts, real_pow};

#[derive(Debug)]
struct PrimeTables {
    p: u64,
    g: u64,
    /// dlog[n] = a with g^a = n, for 1 <= n < p.
    dlog: Vec<u64>,
}

static TABLES: RwLock<BTreeMap<u64, Arc<PrimeTables>>> = RwLock::new(BTreeMap::new());

fn tables(p: u64) -> Result<Arc<PrimeTables>> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if let Some(t) = TABLES.read().expect("character cache poisoned").get(&p) {
        return Ok(t.clone());
    }
    let g = smallest_primitive_root(p);
    let mut dlog = vec![0u64; p as usize];
    let mut x = 1u64;
    for a in 0..p - 1 {
        dlog[x as usize] = a;
        x = x * g % p;
    }
    let t = Arc::new(PrimeTables { p, g, dlog });
    TABLES.write().expect("character cache poisoned").insert(p, t.clone());
    Ok(t)
}

fn smallest_primitive_root(p: u64) -> u64 {
    let order = p - 1;
    let mut factors = Vec::new();
    let mut n = order;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            factors.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, order / q, p) != 1))
        .expect("every prime has a primitive root")
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// The character mod p sending the smallest primitive root g to
/// e^{2 pi i j/(p-1)}. Values are kept as exponents and only turned into
/// floating complex numbers on request.
#[derive(Clone)]
pub struct DirichletCharacter {
    tables: Arc<PrimeTables>,
    index: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.index == other.index
    }
}

impl Eq for DirichletCharacter {}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi[{} mod {}]", self.index, self.modulus())
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi_{}^({})", self.modulus(), self.index)
    }
}

impl DirichletCharacter {
    pub fn new(p: u64, index: u64) -> Result<Self> {
        let tables = tables(p)?;
        if index > p - 2 {
            return Err(Error::arg(format!("character index {index} out of range 0..={} mod {p}", p - 2)));
        }
        Ok(DirichletCharacter { tables, index })
    }

    pub fn modulus(&self) -> u64 {
        self.tables.p
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn primitive_root(&self) -> u64 {
        self.tables.g
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    /// Order of the value group, p - 1.
    pub fn order(&self) -> u64 {
        self.tables.p - 1
    }

    /// chi(-1) as +1 or -1.
    pub fn parity(&self) -> i32 {
        if self.index.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn conjugate(&self) -> Self {
        let q = self.order();
        DirichletCharacter { tables: self.tables.clone(), index: (q - self.index) % q }
    }

    /// Exponent e with chi(n) = e^{2 pi i e/(p-1)}, or None when p | n.
    pub fn exponent(&self, n: i64) -> Option<u64> {
        let p = self.tables.p as i64;
        let r = n.rem_euclid(p) as usize;
        if r == 0 {
            return None;
        }
        Some(self.index * self.tables.dlog[r] % self.order())
    }

    pub fn value(&self, n: i64, prec: u32) -> Complex {
        match self.exponent(n) {
            None => Complex::new(prec),
            Some(e) => root_of_unity(e as i64, self.order(), prec),
        }
    }

    /// chi(0), ..., chi(p-1).
    pub fn values(&self, prec: u32) -> Vec<Complex> {
        (0..self.tables.p as i64).map(|n| self.value(n, prec)).collect()
    }

    /// sum_n chi(n) e(n/p). Each summand is a single root of unity of order
    /// dividing p(p-1), evaluated directly.
    pub fn gauss_sum(&self, prec: u32) -> Complex {
        let p = self.tables.p;
        let q = self.order();
        let mut acc = Complex::new(prec + 16);
        for n in 1..p {
            let e = self.exponent(n as i64).expect("n is a unit");
            let num = (e * p + n * q) as i64;
            acc += root_of_unity(num, p * q, prec + 16);
        }
        Complex::with_val(prec, acc)
    }

    /// Whether L(chi, s) vanishes at the integer s for parity reasons.
    pub fn is_trivial_zero(&self, s: i64) -> bool {
        if self.is_principal() || s > 0 {
            return false;
        }
        if self.parity() == 1 {
            s % 2 == 0
        } else {
            s % 2 != 0
        }
    }
}

impl Serialize for DirichletCharacter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CharacterRecord { modulus: self.modulus(), index: self.index }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirichletCharacter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CharacterRecord::deserialize(d)?;
        DirichletCharacter::new(r.modulus, r.index).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CharacterRecord {
    modulus: u64,
    index: u64,
}

/// The p - 2 non-principal characters mod p, ordered by index.
pub fn enumerate_characters(p: u64) -> Result<Vec<DirichletCharacter>> {
    let t = tables(p)?;
    Ok((1..p - 1).map(|j| DirichletCharacter { tables: t.clone(), index: j }).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Forward: sum_n f(n) e^{-2 pi i jn/N}; inverse: (1/N) sum_n f(n) e^{2 pi i jn/N}.
pub fn dft(values: &[Complex], direction: Direction) -> Result<Vec<Complex>> {
    let n = values.len();
    if n == 0 {
        return Err(Error::arg("DFT of an empty vector"));
    }
    let prec = values[0].prec().0;
    let sign: i64 = match direction {
        Direction::Forward => -1,
        Direction::Inverse => 1,
    };
    let roots: Vec<Complex> = (0..n).map(|r| root_of_unity(sign * r as i64, n as u64, prec + 16)).collect();
    let out = (0..n)
        .map(|j| {
            let mut acc = Complex::new(prec + 16);
            for (m, v) in values.iter().enumerate() {
                acc += Complex::with_val(prec + 16, v * &roots[(j * m) % n]);
            }
            if direction == Direction::Inverse {
                acc /= n as u32;
            }
            Complex::with_val(prec, acc)
        })
        .collect();
    Ok(out)
}

/// L(chi, s) = p^{-s} sum_a chi(a) zeta(s, a/p) with Euler-Maclaurin Hurwitz
/// zeta. At s = 1 the pole terms cancel and are replaced by their limit.
pub fn dirichlet_l(chi: &DirichletCharacter, s: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    if chi.is_principal() {
        return Err(Error::arg("L-functions of the principal character are not supported"));
    }
    let prec = ctx.prec();
    let p = chi.modulus();
    let at_one = s.imag().is_zero() && *s.real() == 1;
    let mut acc: Option<Complex> = None;
    let mut wp = prec;
    for a in 1..p {
        let x_a = Float::with_val(prec + 64, Rational::from((a, p)));
        let parts = hurwitz_parts(s, &x_a, prec);
        wp = parts.regular.prec().0;
        let chi_a = chi.value(a as i64, wp);
        let term = if at_one {
            parts.regular - Complex::with_val(wp, parts.x.ln())
        } else {
            let one_minus_s = Complex::with_val(wp, 1 - Complex::with_val(wp, s));
            let pole = real_pow(&parts.x, &one_minus_s, wp) / Complex::with_val(wp, -&one_minus_s);
            parts.regular + pole
        };
        let t = Complex::with_val(wp, &chi_a * &term);
        acc = Some(match acc {
            None => t,
            Some(v) => v + t,
        });
    }
    let sum = acc.expect("p >= 3 gives at least two terms");
    let p_f = Float::with_val(wp, p);
    let scale = real_pow(&p_f, &Complex::with_val(wp, -Complex::with_val(wp, s)), wp);
    Ok(Complex::with_val(prec, sum * scale))
}

/// B_{n,chi} = p^{n-1} sum_a chi(a) B_n(a/p), with the exact rational
/// Bernoulli polynomial values combined against chi at working precision.
pub fn generalized_bernoulli(chi: &DirichletCharacter, n: u32, prec: u32) -> Complex {
    let p = chi.modulus();
    let mut acc = Complex::new(prec + 32);
    for a in 1..p {
        let b = bernoulli_poly(n as usize, &Rational::from((a, p)));
        let b = Float::with_val(prec + 32, &b);
        acc += chi.value(a as i64, prec + 32) * b;
    }
    let pw = Float::with_val(prec + 32, rug::ops::Pow::pow(rug::Integer::from(p), n.saturating_sub(1)));
    Complex::with_val(prec, acc * pw)
}

/// L(chi, 1 - n) = -B_{n,chi}/n for n >= 1.
pub fn dirichlet_l_negative(chi: &DirichletCharacter, n: u32, prec: u32) -> Result<Complex> {
    if chi.is_principal() {
        return Err(Error::arg("L-functions of the principal character are not supported"));
    }
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    Ok(Complex::with_val(prec, -generalized_bernoulli(chi, n, prec) / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{cabs, pi, rel_err};

    #[test]
    fn mod_three_is_legendre() {
        let chars = enumerate_characters(3).unwrap();
        assert_eq!(chars.len(), 1);
        let chi = &chars[0];
        assert_eq!(chi.parity(), -1);
        assert_eq!(chi.value(1, 64), Complex::with_val(64, 1));
        assert_eq!(chi.value(2, 64), Complex::with_val(64, -1));
        assert_eq!(chi.value(3, 64), Complex::new(64));
    }

    #[test]
    fn chi5_sends_two_to_i() {
        let chars = enumerate_characters(5).unwrap();
        assert_eq!(chars.len(), 3);
        assert_eq!(chars[0].primitive_root(), 2);
        assert_eq!(chars[0].value(2, 64), Complex::with_val(64, (0, 1)));
        assert_eq!(chars[0].conjugate(), chars[2]);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(enumerate_characters(9), Err(Error::NotOddPrime(9))));
        assert!(enumerate_characters(2).is_err());
        assert!(DirichletCharacter::new(5, 4).is_err());
    }

    #[test]
    fn multiplicative_and_orthogonal() {
        for p in [3u64, 5, 7, 11, 13] {
            let chars = enumerate_characters(p).unwrap();
            for chi in &chars {
                for m in 1..p as i64 {
                    for n in 1..p as i64 {
                        let lhs = chi.exponent(m * n).unwrap();
                        let rhs = (chi.exponent(m).unwrap() + chi.exponent(n).unwrap()) % chi.order();
                        assert_eq!(lhs, rhs);
                    }
                }
                let sum: Complex = chi.values(128).into_iter().fold(Complex::new(128), |a, b| a + b);
                assert!(cabs(&sum) < 1e-35);
                assert_eq!(chi.value(-1, 64), Complex::with_val(64, chi.parity()));
            }
        }
    }

    #[test]
    fn gauss_sum_of_legendre_three() {
        let chi = &enumerate_characters(3).unwrap()[0];
        let g = chi.gauss_sum(128);
        let expect = Complex::with_val(128, (0, Float::with_val(128, 3).sqrt()));
        assert!(rel_err(&g, &expect) < 1e-35);
    }

    #[test]
    fn dft_of_delta_is_ones() {
        let mut v = vec![Complex::new(128); 6];
        v[0] = Complex::with_val(128, 1);
        for z in dft(&v, Direction::Forward).unwrap() {
            assert_eq!(z, Complex::with_val(128, 1));
        }
    }

    #[test]
    fn legendre_three_at_one() {
        let ctx = PrecisionContext::default();
        let chi = &enumerate_characters(3).unwrap()[0];
        let l = dirichlet_l(chi, &Complex::with_val(256, 1), &ctx).unwrap();
        let expect = Complex::with_val(256, pi(256) / (Float::with_val(256, 3).sqrt() * 3u32));
        assert!(rel_err(&l, &expect) < 1e-70);
    }

    #[test]
    fn trivial_zero_labels() {
        let chars = enumerate_characters(5).unwrap();
        let odd = &chars[0];
        let even = &chars[1];
        assert!(even.is_trivial_zero(0) && even.is_trivial_zero(-2) && !even.is_trivial_zero(-1));
        assert!(odd.is_trivial_zero(-1) && !odd.is_trivial_zero(0) && !odd.is_trivial_zero(1));
    }
}
