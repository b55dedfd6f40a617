use fliess::algebra::{enumerate_words, shuffle, Alphabet, Word};
use fliess::bounds::{eeta_bound, seta_bound};
use fliess::numeric::factorial;
use fliess::operators::{iterated_integral, iterated_integral_pc, iterated_sum, iterated_sum_partition, QuadratureControl};
use fliess::signals::{channel_l1_norms, Channel, ContinuousInput, DiscreteInput};
use proptest::prelude::*;

fn word(m: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..=m, 0..=max_len).prop_map(Word::new)
}

fn increments(m: usize, steps: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-0.3f64..0.3, m), 1..=steps)
}

proptest! {
    #[test]
    fn sum_recursion_matches_partitions(eta in word(2, 4), controls in increments(2, 6), n_frac in 0.0f64..=1.0) {
        let d = DiscreteInput::from_controls(0.2, &controls).unwrap();
        let n = (n_frac * d.steps() as f64).round() as usize;
        let a = iterated_sum(&eta, &d, n).unwrap();
        let b = iterated_sum_partition(&eta, &d, n, 1_000_000).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn shuffle_identity_for_integrals(a in word(1, 3), b in word(1, 3), amp in -1.5f64..1.5, omega in 0.5f64..6.0) {
        let u = ContinuousInput::new(vec![Channel::sinusoid(amp, omega, 0.3)], 0.8).unwrap();
        let ctl = QuadratureControl::default();
        let lhs = iterated_integral(&a, &u, 0.8, &ctl).unwrap() * iterated_integral(&b, &u, 0.8, &ctl).unwrap();
        let rhs: f64 = shuffle(&a, &b).iter().map(|(w, c)| c * iterated_integral(w, &u, 0.8, &ctl).unwrap()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn sums_respect_binomial_bound(eta in word(2, 4), controls in increments(2, 8)) {
        let d = DiscreteInput::from_controls(0.2, &controls).unwrap();
        let r_hat = d.sup_norm_over(&[0, 1, 2]);
        let s = iterated_sum(&eta, &d, d.steps()).unwrap();
        prop_assert!(s.abs() <= seta_bound(eta.len(), d.steps(), r_hat) * (1.0 + 1e-12));
    }

    #[test]
    fn integrals_respect_factorial_bound(eta in word(1, 4), values in prop::collection::vec(-2.0f64..2.0, 1..5)) {
        let n = values.len();
        let breaks: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
        let u = ContinuousInput::new(vec![Channel::piecewise_constant(breaks, values).unwrap()], 1.0).unwrap();
        let e = iterated_integral(&eta, &u, 1.0, &QuadratureControl::default()).unwrap();
        let bound = eeta_bound(&eta, &channel_l1_norms(&u)).unwrap();
        prop_assert!(e.abs() <= bound * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn binomial_bound_is_attained_by_constant_increments() {
    for (n, r) in [(1usize, 0.5), (7, 0.04), (50, 0.04)] {
        let d = DiscreteInput::constant(2, n, r, r).unwrap();
        for len in 0..=4 {
            for eta in enumerate_words(Alphabet::new(2), len, 1000).unwrap() {
                let s = iterated_sum(&eta, &d, n).unwrap();
                let b = seta_bound(len, n, r);
                assert!((s - b).abs() <= 1e-12 * b.max(1.0), "{eta} N={n}");
            }
        }
    }
}

#[test]
fn factorial_bound_is_attained_by_constant_inputs() {
    let u = ContinuousInput::new(vec![Channel::constant(1.0), Channel::constant(1.0)], 0.7).unwrap();
    let norms = channel_l1_norms(&u);
    let ctl = QuadratureControl::default();
    // equality holds for words with a single letter type; mixing letters splits the mass
    for eta in ["x1x1", "x0x0x0", "x2x2x2x2"] {
        let eta: Word = eta.parse().unwrap();
        let e = iterated_integral(&eta, &u, 0.7, &ctl).unwrap();
        assert!((e - eeta_bound(&eta, &norms).unwrap()).abs() < 1e-12);
    }
    let x0x1: Word = "x0x1".parse().unwrap();
    let delta = 0.1;
    let u = ContinuousInput::constant(1.0, delta).unwrap();
    let e = iterated_integral(&x0x1, &u, delta, &ctl).unwrap();
    let bound = eeta_bound(&x0x1, &channel_l1_norms(&u)).unwrap();
    assert!((bound - delta * delta).abs() < 1e-15);
    assert!(e <= bound);
}

#[test]
fn constant_input_integrals_are_powers() {
    let u = ContinuousInput::constant(1.0, 0.9).unwrap();
    for j in 0..8 {
        let e = iterated_integral(&Word::power(1, j), &u, 0.9, &QuadratureControl::default()).unwrap();
        let exact = 0.9f64.powi(j as i32) / factorial(j);
        // RK4 is exact up to length 4; beyond that only the quadrature tolerance holds
        let tol = if j <= 4 { 1e-15 } else { QuadratureControl::default().tol };
        assert!((e - exact).abs() < tol, "j={j}");
    }
}

#[test]
fn pc_integral_tends_to_sum_as_steps_refine() {
    // S_η and the piecewise-constant E_η share their leading term; the gap shrinks like 1/L
    let eta: Word = "x1x1x0".parse().unwrap();
    let mut prev = f64::INFINITY;
    for l in [10, 20, 40, 80] {
        let d = DiscreteInput::constant(1, l, 1.0 / l as f64, 1.0 / l as f64).unwrap();
        let gap = (iterated_sum(&eta, &d, l).unwrap() - iterated_integral_pc(&eta, &d).unwrap()).abs();
        assert!(gap < prev * 0.6);
        prev = gap;
    }
}
