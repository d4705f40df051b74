//! Cotangent power sums, the Taylor constants delta_nu(u), and the
//! Berndt-Yeap closed form for sum cot^{2n}(pi j/N).

use std::sync::{Arc, RwLock};

use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::num::{binomial, pi};
use crate::special::bernoulli;

/// S*(n, m) = sum_j (-1)^j C(m, j)(m - j)^n = m! {n over m}.
pub fn stirling_star(n: u32, m: u32) -> Result<Integer> {
    if m > n {
        return Err(Error::arg(format!("stirling_star needs m <= n, got n={n}, m={m}")));
    }
    let mut acc = Integer::new();
    for j in 0..=m {
        let t = binomial(m as u64, j as u64) * rug::ops::Pow::pow(Integer::from(m - j), n);
        if j % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    Ok(acc)
}

/// An exact Gaussian rational. delta_nu(u) is real except delta_1(0) = -i,
/// which only ever multiplies sum beta = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaCoeff {
    pub re: Rational,
    pub im: Rational,
}

impl DeltaCoeff {
    pub fn is_zero(&self) -> bool {
        self.re.cmp0().is_eq() && self.im.cmp0().is_eq()
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0().is_eq()
    }

    pub fn to_complex(&self, prec: u32) -> Complex {
        Complex::with_val(prec, (Float::with_val(prec, &self.re), Float::with_val(prec, &self.im)))
    }
}

#[derive(Debug)]
pub struct DeltaTable {
    max_nu: usize,
    /// entries[nu - 1][u] for 0 <= u <= nu
    entries: Vec<Vec<DeltaCoeff>>,
}

impl DeltaTable {
    pub fn max_nu(&self) -> usize {
        self.max_nu
    }

    pub fn get(&self, nu: usize, u: usize) -> &DeltaCoeff {
        &self.entries[nu - 1][u]
    }

    fn build(max_nu: usize) -> DeltaTable {
        // S*(n, l) for n < max_nu via S*(n, m) = m (S*(n-1, m) + S*(n-1, m-1))
        let mut sstar: Vec<Vec<Integer>> = vec![vec![Integer::from(1)]];
        for n in 1..max_nu {
            let prev = &sstar[n - 1];
            let mut row = vec![Integer::new(); n + 1];
            for (m, slot) in row.iter_mut().enumerate().skip(1) {
                let a = prev.get(m).cloned().unwrap_or_default();
                let b = prev[m - 1].clone();
                *slot = (a + b) * m as u32;
            }
            sstar.push(row);
        }
        let mut pascal: Vec<Vec<Integer>> = Vec::with_capacity(max_nu);
        for l in 0..max_nu {
            let row = (0..=l).map(|u| binomial(l as u64, u as u64)).collect();
            pascal.push(row);
        }
        let c = |l: usize, u: isize| -> Integer {
            if u < 0 || u as usize > l {
                Integer::new()
            } else {
                pascal[l][u as usize].clone()
            }
        };

        let mut entries = Vec::with_capacity(max_nu);
        let mut fact = Integer::from(1);
        for nu in 1..=max_nu {
            if nu > 1 {
                fact *= (nu - 1) as u32;
            }
            let mut row = Vec::with_capacity(nu + 1);
            for u in 0..=nu {
                let mut acc = Integer::new();
                for l in u.saturating_sub(1)..nu {
                    let diff = c(l, u as isize) - c(l, u as isize - 1);
                    if diff.cmp0().is_eq() {
                        continue;
                    }
                    let mut t = (&sstar[nu - 1][l] * diff) << (nu - 1 - l) as u32;
                    if (nu + l - u) % 2 == 1 {
                        t = -t;
                    }
                    acc += t;
                }
                let q = Rational::from((acc, fact.clone()));
                let entry = match (nu + u) % 4 {
                    0 => DeltaCoeff { re: q, im: Rational::new() },
                    1 => DeltaCoeff { re: Rational::new(), im: q },
                    2 => DeltaCoeff { re: -q, im: Rational::new() },
                    _ => DeltaCoeff { re: Rational::new(), im: -q },
                };
                row.push(entry);
            }
            entries.push(row);
        }
        DeltaTable { max_nu, entries }
    }
}

static DELTA: RwLock<Option<Arc<DeltaTable>>> = RwLock::new(None);

/// Shared table covering at least nu <= max_nu.
pub fn delta_table(max_nu: usize) -> Arc<DeltaTable> {
    let max_nu = max_nu.max(1);
    if let Some(t) = DELTA.read().expect("delta cache poisoned").as_ref() {
        if t.max_nu >= max_nu {
            return t.clone();
        }
    }
    let mut guard = DELTA.write().expect("delta cache poisoned");
    if let Some(t) = guard.as_ref() {
        if t.max_nu >= max_nu {
            return t.clone();
        }
    }
    let grown = guard.as_ref().map(|t| t.max_nu * 2).unwrap_or(16);
    let t = Arc::new(DeltaTable::build(max_nu.max(grown)));
    *guard = Some(t.clone());
    t
}

/// delta_nu(u) = i^{nu+u}/(nu-1)! sum_l (-1)^{nu+l-u} 2^{nu-1-l} S*(nu-1,l) (C(l,u) - C(l,u-1)).
pub fn delta_coeff(nu: usize, u: usize) -> Result<DeltaCoeff> {
    if nu < 1 || u > nu {
        return Err(Error::arg(format!("delta_coeff needs 1 <= nu and u <= nu, got nu={nu}, u={u}")));
    }
    Ok(delta_table(nu).get(nu, u).clone())
}

/// cot(pi r/N) for r = 1..N-1.
pub fn cot_values(n: usize, prec: u32) -> Vec<Float> {
    let pi = pi(prec);
    (1..n).map(|r| (Float::with_val(prec, &pi * r as u32) / n as u32).cot()).collect()
}

/// S_u = sum_r beta(r) cot^u(pi r/N) for u = 0..=max_u.
pub fn cot_power_sums(beta: &[Complex], n: usize, max_u: usize, prec: u32) -> Result<Vec<Complex>> {
    if n < 3 {
        return Err(Error::arg(format!("level must be at least 3, got {n}")));
    }
    if beta.len() != n - 1 {
        return Err(Error::arg(format!("expected {} coefficients for level {n}, got {}", n - 1, beta.len())));
    }
    let wp = prec + 32 + (max_u as f64 * (n as f64).log2()).ceil() as u32;
    let cots = cot_values(n, wp);
    let mut powers: Vec<Complex> = beta.iter().map(|b| Complex::with_val(wp, b)).collect();
    let mut out = Vec::with_capacity(max_u + 1);
    for _u in 0..=max_u {
        let mut acc = Complex::new(wp);
        for p in &powers {
            acc += p;
        }
        out.push(Complex::with_val(prec, acc));
        for (p, c) in powers.iter_mut().zip(&cots) {
            *p *= c;
        }
    }
    Ok(out)
}

pub fn cot_power_sum(beta: &[Complex], n: usize, u: usize, prec: u32) -> Result<Complex> {
    Ok(cot_power_sums(beta, n, u, prec)?.pop().expect("nonempty"))
}

/// Right side of the Berndt-Yeap identity for sum_{j=1}^{N-1} cot^{2n}(pi j/N).
pub fn berndt_yeap_closed_form(n: u32, big_n: u64) -> Result<Rational> {
    if n < 1 || big_n < 2 {
        return Err(Error::arg("berndt_yeap_closed_form needs n >= 1 and N >= 2"));
    }
    let n = n as usize;
    // b_j = B_{2j}/(2j)!
    let mut b = Vec::with_capacity(n + 1);
    for j in 0..=n {
        b.push(bernoulli(2 * j) / Rational::from(Integer::factorial(2 * j as u32)));
    }
    // coefficients of (sum_j b_j x^j)^{2n}, truncated at x^n
    let mut power = vec![Rational::new(); n + 1];
    power[0] = Rational::from(1);
    for _ in 0..2 * n {
        let mut next = vec![Rational::new(); n + 1];
        for (i, pi) in power.iter().enumerate() {
            if pi.cmp0().is_eq() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
                next[i + j] += Rational::from(pi * bj);
            }
        }
        power = next;
    }
    let mut inner = Rational::new();
    let n2 = Integer::from(big_n) * big_n;
    let mut npow = Integer::from(1);
    for (j0, bj0) in b.iter().enumerate() {
        inner += Rational::from(bj0 * &power[n - j0]) * &npow;
        npow *= &n2;
    }
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };
    let four_n = Integer::from(1) << (2 * n as u32);
    Ok(Rational::from(sign * Integer::from(big_n)) - Rational::from(sign) * Rational::from(four_n) * inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cabs;

    #[test]
    fn stirling_examples() {
        assert_eq!(stirling_star(4, 4).unwrap(), 24);
        assert_eq!(stirling_star(3, 2).unwrap(), 6);
        assert_eq!(stirling_star(5, 1).unwrap(), 1);
        assert_eq!(stirling_star(0, 0).unwrap(), 1);
        assert!(stirling_star(2, 3).is_err());
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        let t = delta_table(12);
        assert!(t.max_nu() >= 12);
        for n in 0..10u32 {
            for m in 0..=n {
                let _ = stirling_star(n, m).unwrap();
            }
        }
    }

    #[test]
    fn small_delta_values() {
        let r = |n: i64, d: i64| Rational::from((n, d));
        assert_eq!(delta_coeff(1, 0).unwrap(), DeltaCoeff { re: r(0, 1), im: r(-1, 1) });
        assert_eq!(delta_coeff(1, 1).unwrap(), DeltaCoeff { re: r(1, 1), im: r(0, 1) });
        let d2: Vec<_> = (0..=2).map(|u| delta_coeff(2, u).unwrap().re).collect();
        assert_eq!(d2, vec![r(1, 1), r(0, 1), r(1, 1)]);
        let d4: Vec<_> = (0..=4).map(|u| delta_coeff(4, u).unwrap().re).collect();
        assert_eq!(d4, vec![r(1, 3), r(0, 1), r(4, 3), r(0, 1), r(1, 1)]);
        assert!(delta_coeff(3, 4).is_err());
        assert!(delta_coeff(0, 0).is_err());
    }

    #[test]
    fn delta_diagonal_nonzero_and_real_beyond_first() {
        for nu in 1..=20 {
            assert!(!delta_coeff(nu, nu).unwrap().is_zero());
            for u in 0..=nu {
                let d = delta_coeff(nu, u).unwrap();
                if (nu, u) != (1, 0) {
                    assert!(d.is_real(), "delta_{nu}({u}) not real");
                }
            }
        }
    }

    #[test]
    fn cot_square_sum_classical() {
        let ones = vec![Complex::with_val(128, 1); 4];
        let s = cot_power_sum(&ones, 5, 2, 128).unwrap();
        assert!(cabs(&(s.clone() - Complex::with_val(128, 4))) < 1e-35);
        let s1 = cot_power_sum(&ones, 5, 1, 128).unwrap();
        assert!(cabs(&s1) < 1e-35);
        assert!(cot_power_sum(&ones, 6, 1, 128).is_err());
    }

    #[test]
    fn closed_form_small_cases() {
        assert_eq!(berndt_yeap_closed_form(1, 5).unwrap(), 4);
        assert_eq!(berndt_yeap_closed_form(1, 7).unwrap(), 10);
        assert_eq!(berndt_yeap_closed_form(2, 5).unwrap(), Rational::from((36, 5)));
        assert_eq!(berndt_yeap_closed_form(2, 7).unwrap(), 38);
    }
}
