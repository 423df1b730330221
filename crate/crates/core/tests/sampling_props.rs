use incompat::linalg::{self, max_abs, unitarity_defect, CMat};
use incompat::measurement::is_projective;
use incompat::sampling::{
    haar_unitary, random_basis_measurement, random_induced_povm, random_projection, random_subspace, SeededRng,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn same_seed_and_stream_repeat(seed in any::<u64>(), stream in any::<u64>(), d in 1usize..9) {
        let a = haar_unitary(d, &mut SeededRng::new(seed, stream));
        let b = haar_unitary(d, &mut SeededRng::new(seed, stream));
        prop_assert_eq!(a, b);
        let p = random_induced_povm(d, 2, d, &mut SeededRng::new(seed, stream)).unwrap();
        let q = random_induced_povm(d, 2, d, &mut SeededRng::new(seed, stream)).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn samplers_produce_valid_objects(seed in any::<u64>(), d in 1usize..10, r in 0usize..10) {
        let mut rng = SeededRng::new(seed, 3);
        prop_assert!(unitarity_defect(&haar_unitary(d, &mut rng)) < 1e-10);
        let r = r.min(d);
        let s = random_subspace(d, r, &mut rng).unwrap();
        prop_assert_eq!(s.rank(), r);
        let p = random_projection(d, r, &mut rng).unwrap();
        let m = p.matrix();
        prop_assert!(max_abs(&(m * m - m)) < 1e-10);
        prop_assert!((linalg::trace(m).re - r as f64).abs() < 1e-10);
        prop_assert!(is_projective(&random_basis_measurement(d, &mut rng), 1e-10));
    }
}

#[test]
fn rank_above_dimension_is_rejected() {
    let mut rng = SeededRng::new(0, 0);
    assert!(random_subspace(3, 4, &mut rng).is_err());
    assert!(random_induced_povm(5, 2, 2, &mut rng).is_err());
}

/// E[U A U*] = Tr(A) I / d, entrywise within 3 standard errors.
#[test]
fn haar_first_moment() {
    let d = 5;
    let mut rng = SeededRng::new(99, 0);
    let raw = CMat::from_fn(d, d, |_, _| rng.complex_normal());
    let a = linalg::hermitian_part(&raw);
    let want = linalg::identity(d).scale(linalg::trace(&a).re / d as f64);
    let n = 20_000;
    let mut sum = linalg::zeros(d);
    let mut sq = vec![0.0; d * d];
    for _ in 0..n {
        let u = haar_unitary(d, &mut rng);
        let x = &u * &a * u.adjoint();
        for i in 0..d {
            for j in 0..d {
                sq[i * d + j] += x[(i, j)].norm_sqr();
            }
        }
        sum += x;
    }
    let nf = n as f64;
    for i in 0..d {
        for j in 0..d {
            let m = sum[(i, j)] / nf;
            let var = sq[i * d + j] / nf - m.norm_sqr();
            let se = (var / nf).sqrt();
            let dev = (m - want[(i, j)]).norm();
            assert!(dev <= 3.0 * se + 1e-12, "entry ({i},{j}): deviation {dev:.3e}, se {se:.3e}");
        }
    }
}

/// Upper-tail χ² critical value at level 1e-4 for 9 degrees of freedom.
const CHI2_9: f64 = 33.720;

/// Goodness of fit of |U_ij|² against Beta(1, d−1) on equiprobable bins; every
/// column, and each column after a fixed permutation, must look the same.
#[test]
fn column_permutation_leaves_marginals_invariant() {
    let d = 6;
    let n = 3000;
    let bins = 10;
    let edges: Vec<f64> =
        (1..bins).map(|b| 1.0 - (1.0 - b as f64 / bins as f64).powf(1.0 / (d as f64 - 1.0))).collect();
    let bin_of = |x: f64| edges.iter().position(|&e| x < e).unwrap_or(bins - 1);
    let perm = [3usize, 0, 5, 1, 4, 2];
    let mut rng = SeededRng::new(5, 0);
    let mut plain = vec![vec![0usize; bins]; d];
    let mut permuted = vec![vec![0usize; bins]; d];
    for _ in 0..n {
        let u = haar_unitary(d, &mut rng);
        for c in 0..d {
            plain[c][bin_of(u[(0, c)].norm_sqr())] += 1;
            permuted[c][bin_of(u[(1, perm[c])].norm_sqr())] += 1;
        }
    }
    let expected = n as f64 / bins as f64;
    let chi2 = |counts: &[usize]| counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>();
    let worst = plain.iter().chain(&permuted).map(|c| chi2(c)).fold(0.0, f64::max);
    assert!(worst < CHI2_9, "worst chi2 {worst}");
    // two-sample homogeneity between a column and its permuted image
    for c in 0..d {
        let stat: f64 = (0..bins)
            .map(|b| {
                let (x, y) = (plain[c][b] as f64, permuted[c][b] as f64);
                if x + y == 0.0 {
                    0.0
                } else {
                    (x - y).powi(2) / (x + y)
                }
            })
            .sum();
        assert!(stat < CHI2_9, "column {c}: homogeneity chi2 {stat}");
    }
}
