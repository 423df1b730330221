use incompat::linalg::{self, op_norm, re_trace_prod, CMat};
use incompat::measurement::{DichotomicObservable, MeasurementSet};
use incompat::sampling::{haar_unitary, random_basis_measurement, random_projective_observable, SeededRng};
use incompat::sdp::{
    compatibility_lambda_dichotomic, joint_feasible, tau_dichotomic, tau_general, verify_witness_dichotomic,
    witness_search,
};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// U diag(s) U* with s uniform in [-1, 1].
fn random_observable(d: usize, rng: &mut SeededRng) -> DichotomicObservable {
    let u = haar_unitary(d, rng);
    let s: Vec<f64> = (0..d).map(|_| 2.0 * rng.uniform() - 1.0).collect();
    DichotomicObservable::from_matrix(linalg::hermitian_part(&(&u * linalg::diag_real(&s) * u.adjoint()))).unwrap()
}

fn compress(a: &DichotomicObservable, v: &CMat) -> DichotomicObservable {
    DichotomicObservable::from_matrix(linalg::hermitian_part(&(v.adjoint() * a.matrix() * v))).unwrap()
}

proptest! {
    #![proptest_config(cfg(12))]

    /// The optimal witness pairs to λ, is feasible, and its pairing recomputed
    /// from the effects matches.
    #[test]
    fn duality_consistency(seed in any::<u64>(), d in 2usize..5, g in 2usize..4) {
        let mut rng = SeededRng::new(seed, 0);
        let a: Vec<_> = (0..g).map(|_| random_observable(d, &mut rng)).collect();
        let set = MeasurementSet::from_observables(&a).unwrap();
        let (lam, _) = compatibility_lambda_dichotomic(&a).unwrap();
        let w = witness_search(&set).unwrap();
        prop_assert!((w.pairing - lam.value).abs() <= 1e-6, "{} vs {}", w.pairing, lam.value);
        let recomputed: f64 = set
            .povms()
            .iter()
            .zip(&w.witness)
            .map(|(p, wx)| wx.iter().enumerate().map(|(i, m)| re_trace_prod(m.matrix(), p.effect(i))).sum::<f64>())
            .sum();
        prop_assert!((recomputed - w.pairing).abs() <= 1e-9);
        let y: Vec<_> = w.witness.iter().map(|wx| wx[0].clone()).collect();
        prop_assert!(verify_witness_dichotomic(&y, &w.state).unwrap());
        prop_assert!((linalg::trace(w.state.matrix()).re - 1.0).abs() < 1e-9);
        prop_assert!(linalg::lambda_min(w.state.matrix()) >= -1e-9);
    }

    #[test]
    fn compression_does_not_lower_tau(seed in any::<u64>(), k in prop::sample::select(vec![2usize, 4])) {
        let mut rng = SeededRng::new(seed, 1);
        let a: Vec<_> = (0..2).map(|_| random_observable(8, &mut rng)).collect();
        let v = haar_unitary(8, &mut rng).columns(0, k).into_owned();
        let c: Vec<_> = a.iter().map(|x| compress(x, &v)).collect();
        let full = tau_dichotomic(&a).unwrap();
        let small = tau_dichotomic(&c).unwrap();
        prop_assert!(small.upper >= full.lower - 1e-6, "{} < {}", small.upper, full.lower);
    }

    #[test]
    fn lambda_is_lipschitz(seed in any::<u64>(), d in 2usize..5, scale in 0.0f64..0.5) {
        let mut rng = SeededRng::new(seed, 2);
        let a: Vec<_> = (0..2).map(|_| random_observable(d, &mut rng)).collect();
        let b: Vec<_> = a
            .iter()
            .map(|x| {
                let p = random_observable(d, &mut rng);
                let m = x.matrix().scale(1.0 - scale) + p.matrix().scale(scale);
                DichotomicObservable::from_matrix(linalg::hermitian_part(&m)).unwrap()
            })
            .collect();
        let la = compatibility_lambda_dichotomic(&a).unwrap().0.value;
        let lb = compatibility_lambda_dichotomic(&b).unwrap().0.value;
        let dist: f64 = a.iter().zip(&b).map(|(x, y)| op_norm(&(x.matrix() - y.matrix()))).sum();
        prop_assert!((la - lb).abs() <= dist + 1e-6, "|{la} - {lb}| > {dist}");
    }
}

proptest! {
    #![proptest_config(cfg(6))]

    #[test]
    fn bisection_brackets_feasibility(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = SeededRng::new(seed, 3);
        let set = MeasurementSet::new(vec![random_basis_measurement(d, &mut rng), random_basis_measurement(d, &mut rng)])
            .unwrap();
        let tol = 1e-4;
        let b = tau_general(&set, tol).unwrap();
        prop_assert!(b.lower <= b.upper && b.upper - b.lower <= tol + 1e-12);
        prop_assert!(joint_feasible(&set, (b.lower - tol).max(0.0)).unwrap().0);
        if b.upper + tol <= 1.0 {
            prop_assert!(!joint_feasible(&set, b.upper + tol).unwrap().0);
        }
    }

    /// On dichotomic sets the bisection and the λ program agree.
    #[test]
    fn bisection_matches_lambda(seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed, 4);
        let a: Vec<_> = (0..2).map(|_| random_projective_observable(4, 2, &mut rng).unwrap()).collect();
        let set = MeasurementSet::from_observables(&a).unwrap();
        let exact = tau_dichotomic(&a).unwrap().lower;
        let b = tau_general(&set, 1e-4).unwrap();
        prop_assert!(b.lower - 1e-4 <= exact && exact <= b.upper + 1e-4, "{exact} outside [{}, {}]", b.lower, b.upper);
    }
}
