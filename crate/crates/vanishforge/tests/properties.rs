//! Randomized invariants.

use proptest::prelude::*;
use rug::Complex;

use vanishforge::characters::enumerate_characters;
use vanishforge::eisenstein::{EisensteinCombination, EisensteinTerm};
use vanishforge::lfunctions::l_value;
use vanishforge::num::{cabs, rel_err};
use vanishforge::tensor::{bi_order, TensorElement};
use vanishforge::weak::{taylor_coeffs, Order, WeakFunction};
use vanishforge::{DirichletCharacter, PrecisionContext};

const PREC: u32 = 256;
const PRIMES: [u64; 5] = [3, 5, 7, 11, 13];

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn w0(n: usize, raw: &[(f64, f64)]) -> WeakFunction {
    let mut beta: Vec<Complex> = raw.iter().take(n - 2).map(|&z| Complex::with_val(PREC, z)).collect();
    let sum = beta.iter().fold(Complex::new(PREC), |a, b| a + b);
    beta.push(Complex::with_val(PREC, -sum));
    WeakFunction::new(n, beta).unwrap()
}

fn coeff() -> impl Strategy<Value = (f64, f64)> {
    (-4.0..4.0f64, -4.0..4.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn characters_are_multiplicative(pi in 0usize..5, j in 0u64..12, m in -300i64..300, n in -300i64..300) {
        let p = PRIMES[pi];
        let chi = DirichletCharacter::new(p, j % (p - 1)).unwrap();
        let lhs = chi.value(m * n, PREC);
        let rhs = Complex::with_val(PREC, chi.value(m, PREC) * chi.value(n, PREC));
        prop_assert!(cabs(&Complex::with_val(PREC, lhs - rhs)) < 1e-70);
    }

    #[test]
    fn gauss_sum_times_conjugate(pi in 0usize..5, j in 1u64..12) {
        let p = PRIMES[pi];
        let chi = DirichletCharacter::new(p, 1 + j % (p - 2)).unwrap();
        let prod = Complex::with_val(PREC, chi.gauss_sum(PREC) * chi.conjugate().gauss_sum(PREC));
        let want = Complex::with_val(PREC, chi.parity() * p as i32);
        prop_assert!(rel_err(&prod, &want) < 1e-70);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eisenstein_coefficients_are_multiplicative(
        pair in 0usize..8, k in 3u32..7, m in 1u64..40, n in 1u64..40
    ) {
        prop_assume!(gcd(m, n) == 1);
        let pairs: Vec<(DirichletCharacter, DirichletCharacter)> = enumerate_characters(5)
            .unwrap()
            .into_iter()
            .flat_map(|c| enumerate_characters(7).unwrap().into_iter().map(move |d| (c.clone(), d)))
            .filter(|(c, d)| c.parity() * d.parity() == if k % 2 == 0 { 1 } else { -1 })
            .collect();
        let (chi, psi) = pairs[pair % pairs.len()].clone();
        let f = EisensteinCombination::new(
            k, 5, 7, vec![EisensteinTerm { chi, psi, coeff: Complex::with_val(PREC, 1) }], &ctx(),
        ).unwrap();
        let q = f.q_expansion((m * n) as usize, PREC).unwrap();
        let lhs = Complex::with_val(PREC, &q.coeffs[(m * n) as usize] * &q.coeffs[1]);
        let rhs = Complex::with_val(PREC, &q.coeffs[m as usize] * &q.coeffs[n as usize]);
        let scale = cabs(&q.coeffs[1]).square() * ((m * n) as f64).powi(k as i32);
        prop_assert!(cabs(&Complex::with_val(PREC, lhs - rhs)) < scale * 1e-70);
    }

    #[test]
    fn l_value_is_linear(a in coeff(), b in coeff(), s in 1i64..4) {
        let c = ctx();
        let t = |chi: u64, psi: u64, z: (f64, f64)| EisensteinTerm {
            chi: DirichletCharacter::new(5, chi).unwrap(),
            psi: DirichletCharacter::new(7, psi).unwrap(),
            coeff: Complex::with_val(PREC, z),
        };
        let f = EisensteinCombination::new(4, 5, 7, vec![t(1, 1, (1.0, 0.0))], &c).unwrap();
        let g = EisensteinCombination::new(4, 5, 7, vec![t(2, 4, (1.0, 0.0))], &c).unwrap();
        let ca = Complex::with_val(PREC, a);
        let cb = Complex::with_val(PREC, b);
        let h = f.scaled(&ca).add(&g.scaled(&cb), &c).unwrap();
        let sc = Complex::with_val(PREC, s);
        let lhs = l_value(&h, &sc, &c).unwrap();
        let rhs = Complex::with_val(
            PREC,
            l_value(&f, &sc, &c).unwrap() * &ca + l_value(&g, &sc, &c).unwrap() * &cb,
        );
        let size = cabs(&l_value(&f, &sc, &c).unwrap()) * 8 + cabs(&l_value(&g, &sc, &c).unwrap()) * 8;
        prop_assert!(cabs(&Complex::with_val(PREC, lhs - rhs)) <= size * 1e-70);
    }

    #[test]
    fn taylor_coefficients_are_linear(
        ni in 0usize..3, x in prop::collection::vec(coeff(), 11), y in prop::collection::vec(coeff(), 11), a in coeff()
    ) {
        let n = [5usize, 7, 13][ni];
        let c = ctx();
        let (u, v) = (w0(n, &x), w0(n, &y));
        let ca = Complex::with_val(PREC, a);
        let sum = u.scale(&ca).axpy(&Complex::with_val(PREC, 1), &v).unwrap();
        let tu = taylor_coeffs(&u, 8, &c).unwrap();
        let tv = taylor_coeffs(&v, 8, &c).unwrap();
        let ts = taylor_coeffs(&sum, 8, &c).unwrap();
        for i in 0..8 {
            let want = Complex::with_val(PREC, &tu[i] * &ca + &tv[i]);
            let size = (cabs(&tu[i]) * cabs(&ca) + cabs(&tv[i])) + 1e-60;
            prop_assert!(cabs(&Complex::with_val(PREC, &ts[i] - want)) <= size * 1e-60);
        }
    }

    #[test]
    fn reflection_flips_odd_taylor_coefficients(ni in 0usize..3, x in prop::collection::vec(coeff(), 11)) {
        let n = [5usize, 7, 13][ni];
        let c = ctx();
        let u = w0(n, &x);
        let a = taylor_coeffs(&u, 8, &c).unwrap();
        let b = taylor_coeffs(&u.reflect(), 8, &c).unwrap();
        for i in 0..8 {
            let want = if i % 2 == 0 { a[i].clone() } else { Complex::with_val(PREC, -&a[i]) };
            prop_assert!(cabs(&Complex::with_val(PREC, &b[i] - want)) <= (cabs(&a[i]) + 1e-60) * 1e-60);
        }
    }

    #[test]
    fn bi_order_is_scale_invariant(c in 0usize..3, d in 0usize..5, z in coeff(), extra in coeff()) {
        prop_assume!(z.0.abs() + z.1.abs() > 1e-3);
        let ctx = ctx();
        let base = TensorElement::elementary(5, 7, c, d, PREC).unwrap();
        let other = TensorElement::elementary(5, 7, 2, 4, PREC).unwrap().scale(&Complex::with_val(PREC, extra));
        let t = base.add(&other).unwrap().scale(&Complex::with_val(PREC, z));
        let (oc, od) = bi_order(&t, &ctx).unwrap();
        prop_assert_eq!(oc, Order::Finite(c));
        prop_assert_eq!(od, Order::Finite(d));
    }

    #[test]
    fn weak_function_records_round_trip(ni in 0usize..3, x in prop::collection::vec(coeff(), 11)) {
        let n = [5usize, 7, 13][ni];
        let u = w0(n, &x);
        let json = serde_json::to_string(&u.to_record()).unwrap();
        let back = WeakFunction::from_record(&serde_json::from_str(&json).unwrap(), PREC).unwrap();
        prop_assert_eq!(back, u);
    }
}
