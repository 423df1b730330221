//! Closed-form compatibility criteria, known bounds on τ, witness sufficiency and η.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::measurement::{DichotomicObservable, HermitianOperator, MeasurementSet, Povm};
use crate::sampling::SeededRng;

pub const JORDAN_TOL: f64 = 1e-5;
pub const JORDAN_FLOOR: f64 = -1e-9;
pub const MAX_ENUMERATION: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    LowerOnTau,
    UpperOnTau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundSource {
    InverseSqrtG,
    BinomialCd,
    InverseG,
    OutcomeCount,
    MubUpper,
    Cloning,
    JordanProduct,
    Compression,
    CompressedPair,
    NoiseContent,
    Sdp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub kind: BoundKind,
    pub source: BoundSource,
    pub applicability: String,
    /// The bound is attained by some set with these parameters.
    pub tight: bool,
}

impl BoundValue {
    fn new(value: f64, kind: BoundKind, source: BoundSource, applicability: &str) -> Self {
        BoundValue { value: value.clamp(0.0, 1.0), kind, source, applicability: applicability.into(), tight: false }
    }
}

/// c(d) = 4^{-d'} binom(2d', d') with d' = floor(d/2).
pub fn binomial_cd(d: usize) -> f64 {
    let dp = (d / 2) as u64;
    // multiply in halves to stay in range for large d
    (0..dp).fold(1.0, |acc, i| acc * (2 * dp - i) as f64 / ((i + 1) as f64 * 4.0))
}

/// Every bound on the compatibility degree that applies to sets with these parameters.
///
/// Lower bounds hold for every such set. The MUB upper bound is the degree of
/// g mutually unbiased bases and is reported when all k_x = d.
pub fn bound_library(d: usize, g: usize, k_list: &[usize]) -> Vec<BoundValue> {
    let gf = g as f64;
    let df = d as f64;
    let mut out = Vec::new();
    let dichotomic = !k_list.is_empty() && k_list.iter().all(|&k| k == 2);
    if dichotomic {
        let mut b = BoundValue::new(1.0 / gf.sqrt(), BoundKind::LowerOnTau, BoundSource::InverseSqrtG, "dichotomic");
        let n = (g.saturating_sub(1)).div_ceil(2);
        b.tight = n < 63 && d as u64 >= 1u64 << n;
        out.push(b);
        out.push(BoundValue::new(binomial_cd(d), BoundKind::LowerOnTau, BoundSource::BinomialCd, "dichotomic"));
    }
    out.push(BoundValue::new(1.0 / gf, BoundKind::LowerOnTau, BoundSource::InverseG, "any POVMs"));
    let kmax = k_list.iter().copied().max().unwrap_or(1) as f64;
    out.push(BoundValue::new(
        (gf + kmax * df) / (gf * (1.0 + kmax * df)),
        BoundKind::LowerOnTau,
        BoundSource::OutcomeCount,
        "any POVMs",
    ));
    if !k_list.is_empty() && k_list.iter().all(|&k| k == d) {
        out.push(BoundValue::new(
            (gf + df) / (gf * (df + 1.0)),
            BoundKind::LowerOnTau,
            BoundSource::Cloning,
            "basis measurements",
        ));
        let sd = df.sqrt();
        let mut b = BoundValue::new(
            (gf + sd) / (gf * (sd + 1.0)),
            BoundKind::UpperOnTau,
            BoundSource::MubUpper,
            "mutually unbiased bases",
        );
        b.tight = true;
        out.push(b);
    }
    out
}

/// The best lower bound from the library (defaults to 0 when none applies).
pub fn best_lower(bounds: &[BoundValue]) -> f64 {
    bounds.iter().filter(|b| b.kind == BoundKind::LowerOnTau).map(|b| b.value).fold(0.0, f64::max)
}

fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

/// All anticommutators M_i N_j + N_j M_i are PSD (sufficient for compatibility).
pub fn jordan_compatible(m: &Povm, n: &Povm) -> Result<bool> {
    if m.dim() != n.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", m.dim(), n.dim())));
    }
    for e in m.effects() {
        for f in n.effects() {
            if linalg::lambda_min(&anticommutator(e.matrix(), f.matrix())) < JORDAN_FLOOR {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn jordan_ok(pairs: &[(CMat, CMat)], id: &CMat, t: f64) -> bool {
    pairs.iter().all(|(ac, sum)| {
        let m = ac.scale(t * t) + sum.scale(t * (1.0 - t)) + id.scale(0.5 * (1.0 - t) * (1.0 - t));
        linalg::is_psd_shifted(&m, -JORDAN_FLOOR)
    })
}

/// Largest t in [0,1] for which the Jordan criterion certifies the noisy pair
/// (2P−I, 2Q−I) compatible, by bisection to width `tol`.
pub fn jordan_tau_lower(p: &CMat, q: &CMat, tol: f64) -> Result<BoundValue> {
    if p.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", p.nrows(), q.nrows())));
    }
    let d = p.nrows();
    let id = linalg::identity(d);
    let pc = &id - p;
    let qc = &id - q;
    let mut pairs = Vec::with_capacity(4);
    for pp in [p, &pc] {
        for qq in [q, &qc] {
            pairs.push((anticommutator(pp, qq), pp + qq));
        }
    }
    let mk =
        |v| BoundValue::new(v, BoundKind::LowerOnTau, BoundSource::JordanProduct, "pairs of projective observables");
    if jordan_ok(&pairs, &id, 1.0) {
        return Ok(mk(1.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if jordan_ok(&pairs, &id, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mk(lo))
}

/// Σ_x Σ_i λ_min(M_{i|x}) ≥ g − 1 (sufficient for compatibility).
pub fn noise_content_compatible(set: &MeasurementSet) -> bool {
    noise_content(set) >= set.g() as f64 - 1.0 - 1e-12
}

pub fn noise_content(set: &MeasurementSet) -> f64 {
    set.povms().iter().flat_map(|p| p.effects()).map(|e| linalg::lambda_min(e.matrix())).sum()
}

/// Odometer over f: [g] → [k], calling `visit` with Σ_x W_{f(x)|x}.
fn for_each_selection(w: &[Vec<CMat>], mut visit: impl FnMut(&[usize], &CMat) -> bool) {
    let g = w.len();
    let d = w[0][0].nrows();
    let mut f = vec![0usize; g];
    let mut sum = w.iter().fold(linalg::zeros(d), |acc, wx| acc + &wx[0]);
    loop {
        if !visit(&f, &sum) {
            return;
        }
        let mut x = 0;
        loop {
            if x == g {
                return;
            }
            let k = w[x].len();
            let old = f[x];
            f[x] = (old + 1) % k;
            sum += &w[x][f[x]] - &w[x][old];
            if f[x] != 0 {
                break;
            }
            x += 1;
        }
    }
}

/// max_f λ_max(Σ_x W_{f(x)|x}) ≤ 1/d by exhaustive enumeration.
pub fn witness_sufficient(w: &[Vec<HermitianOperator>]) -> Result<bool> {
    let first = w.first().and_then(|wx| wx.first()).ok_or(Error::Empty)?;
    let d = first.dim();
    let k = w[0].len();
    if w.iter().any(|wx| wx.len() != k) {
        return Err(Error::ParameterOutOfRange("witness needs a uniform outcome count".into()));
    }
    if (k as f64).powi(w.len() as i32) > MAX_ENUMERATION as f64 {
        return Err(Error::ProblemTooLarge(format!("k^g = {k}^{} exceeds {MAX_ENUMERATION}", w.len())));
    }
    let mats: Vec<Vec<CMat>> = w.iter().map(|wx| wx.iter().map(|m| m.matrix().clone()).collect()).collect();
    let bound = 1.0 / d as f64 + 1e-10;
    let mut ok = true;
    for_each_selection(&mats, |_, s| {
        ok = linalg::lambda_max(s) <= bound;
        ok
    });
    Ok(ok)
}

/// max over sign patterns of λ_max(Σ ε_x A_x).
pub fn max_sign_lambda(a: &[DichotomicObservable]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    if a.len() > crate::sdp::MAX_G_VERIFY {
        return Err(Error::GTooLarge { g: a.len(), max: crate::sdp::MAX_G_VERIFY });
    }
    let mats: Vec<&CMat> = a.iter().map(|x| x.matrix()).collect();
    let mut best = f64::NEG_INFINITY;
    crate::sdp::for_each_sign_sum(&mats, |s| {
        best = best.max(linalg::lambda_max(s));
        true
    });
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColinearWitness {
    pub is_witness: bool,
    /// Noisy sets with t above this are certified incompatible (when is_witness).
    pub certified_t_threshold: f64,
    pub max_sign_lambda: f64,
}

/// W_x = s A_x / d with ρ = I/d.
pub fn colinear_projection_witness(a: &[DichotomicObservable], s: f64) -> Result<ColinearWitness> {
    for (x, obs) in a.iter().enumerate() {
        let m = obs.matrix();
        let defect = linalg::max_abs(&(m * m - linalg::identity(obs.dim())));
        if defect > 1e-8 {
            return Err(Error::ParameterOutOfRange(format!("observable {x} is not projective (defect {defect:.2e})")));
        }
    }
    let l = max_sign_lambda(a)?;
    Ok(ColinearWitness {
        is_witness: s * l <= 1.0 + 1e-9,
        certified_t_threshold: 1.0 / (s * a.len() as f64),
        max_sign_lambda: l,
    })
}

fn check_unitaries(u: &[CMat]) -> Result<usize> {
    let d = u.first().ok_or(Error::Empty)?.nrows();
    for (x, m) in u.iter().enumerate() {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!("unitary {x} is {}x{}", m.nrows(), m.ncols())));
        }
    }
    Ok(d)
}

/// η(U_1..U_g) = max_f λ_max(Σ_x u_{f(x)|x} u_{f(x)|x}*) with u_{i|x} the i-th column of U_x.
///
/// The selected rank-one projectors have the same nonzero spectrum as their
/// g x g Gram matrix, which is what gets diagonalised.
pub fn eta(u: &[CMat]) -> Result<f64> {
    let d = check_unitaries(u)?;
    let g = u.len();
    if (d as f64).powi(g as i32) > MAX_ENUMERATION as f64 {
        return Err(Error::ProblemTooLarge(format!("d^g = {d}^{g} exceeds {MAX_ENUMERATION}; use eta_lower_sampled")));
    }
    let overlaps: Vec<Vec<CMat>> = (0..g).map(|x| (0..g).map(|y| u[x].adjoint() * &u[y]).collect()).collect();
    let mut f = vec![0usize; g];
    let mut best: f64 = 0.0;
    loop {
        let gram = CMat::from_fn(g, g, |x, y| overlaps[x][y][(f[x], f[y])]);
        best = best.max(linalg::lambda_max(&gram));
        let mut x = 0;
        loop {
            if x == g {
                return Ok(best);
            }
            f[x] += 1;
            if f[x] < d {
                break;
            }
            f[x] = 0;
            x += 1;
        }
    }
}

/// η(I, U) = 1 + max_{ij} |U_ij|.
pub fn eta_g2(u: &CMat) -> f64 {
    1.0 + linalg::max_abs(u)
}

/// (d η − g) / (g (d − 1)).
pub fn eta_incompatibility_threshold(eta_value: f64, d: usize, g: usize) -> Result<f64> {
    if d < 2 || g < 1 {
        return Err(Error::ParameterOutOfRange(format!("need d >= 2 and g >= 1, got d={d}, g={g}")));
    }
    let gf = g as f64;
    if !(1.0 - 1e-9..=gf + 1e-9).contains(&eta_value) {
        return Err(Error::ParameterOutOfRange(format!("eta = {eta_value} outside [1, {g}]")));
    }
    let df = d as f64;
    Ok((df * eta_value - gf) / (gf * (df - 1.0)))
}

fn sup_sum(u: &[CMat], phi: &CVec) -> f64 {
    u.iter().map(|m| (m.adjoint() * phi).iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)).sum()
}

/// Lower bound on η: max of Σ_x ‖U_x* φ‖_∞² over the d·g columns of the U_x and
/// `trials` random unit vectors.
pub fn eta_lower_sampled(u: &[CMat], trials: usize, rng: &mut SeededRng) -> Result<f64> {
    let d = check_unitaries(u)?;
    let mut best: f64 = 0.0;
    for m in u {
        for i in 0..d {
            best = best.max(sup_sum(u, &m.column(i).into_owned()));
        }
    }
    for _ in 0..trials {
        let v = CVec::from_fn(d, |_, _| rng.complex_normal());
        let phi = v.unscale(v.norm());
        best = best.max(sup_sum(u, &phi));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag_real, fourier, pauli_x, pauli_z};
    use crate::measurement::{pauli_basis, povm_from_matrices};
    use crate::sampling::{basis_measurement, haar_unitary};

    fn binomial(n: u64, k: u64) -> f64 {
        let k = k.min(n - k);
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    fn find(bs: &[BoundValue], s: BoundSource) -> &BoundValue {
        bs.iter().find(|b| b.source == s).unwrap()
    }

    #[test]
    fn library_examples() {
        let bs = bound_library(8, 4, &[2, 2, 2, 2]);
        let b = find(&bs, BoundSource::InverseSqrtG);
        assert!((b.value - 0.5).abs() < 1e-15 && b.tight);
        assert!(!find(&bound_library(2, 4, &[2; 4]), BoundSource::InverseSqrtG).tight);
        assert!((binomial_cd(2) - 0.5).abs() < 1e-15);
        assert!((binomial_cd(3) - 0.5).abs() < 1e-15);
        assert!((binomial_cd(8) - binomial(8, 4) / 256.0).abs() < 1e-15);
        let bases = bound_library(2, 2, &[2, 2]);
        assert!((find(&bases, BoundSource::Cloning).value - 2.0 / 3.0).abs() < 1e-15);
        let mub = find(&bases, BoundSource::MubUpper).value;
        assert!((mub - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(bound_library(3, 2, &[2, 3]).iter().all(|b| b.source != BoundSource::Cloning));
    }

    #[test]
    fn jordan_examples() {
        let z = povm_from_matrices(&[diag_real(&[1.0, 0.0]), diag_real(&[0.0, 1.0])]).unwrap();
        assert!(jordan_compatible(&z, &z).unwrap());
        let x = basis_measurement(&fourier(2));
        assert!(!jordan_compatible(&z, &x).unwrap());
        let flat = povm_from_matrices(&[linalg::identity(2).scale(0.3), linalg::identity(2).scale(0.7)]).unwrap();
        assert!(jordan_compatible(&x, &flat).unwrap());
        // the most negative eigenvalue of |0><0||+><+| + h.c. is cos θ (cos θ − 1) at θ = π/4
        let ac = anticommutator(z.effect(0), x.effect(0));
        let c45 = 1.0 / 2f64.sqrt();
        assert!((linalg::lambda_min(&ac) + c45 * (1.0 - c45)).abs() < 1e-12);
    }

    #[test]
    fn jordan_lower_qubit() {
        let p = diag_real(&[1.0, 0.0]);
        let q = (linalg::identity(2) + pauli_x()).scale(0.5);
        let b = jordan_tau_lower(&p, &q, 1e-5).unwrap();
        assert!((b.value - 1.0 / 2f64.sqrt()).abs() < 2e-5, "{}", b.value);
        assert_eq!(jordan_tau_lower(&p, &p, 1e-5).unwrap().value, 1.0);
    }

    #[test]
    fn noise_content_examples() {
        let flat = povm_from_matrices(&[linalg::identity(2).scale(0.5), linalg::identity(2).scale(0.5)]).unwrap();
        assert!(noise_content_compatible(&MeasurementSet::new(vec![flat.clone(), flat]).unwrap()));
        let bases =
            MeasurementSet::new(vec![basis_measurement(&linalg::identity(3)), basis_measurement(&fourier(3))]).unwrap();
        assert!(!noise_content_compatible(&bases));
        let e = povm_from_matrices(&[diag_real(&[0.34, 0.66]), diag_real(&[0.66, 0.34])]).unwrap();
        let three = MeasurementSet::new(vec![e.clone(), e.clone(), e]).unwrap();
        assert!((noise_content(&three) - 2.04).abs() < 1e-12);
        assert!(noise_content_compatible(&three));
    }

    #[test]
    fn witness_sufficiency_examples() {
        let d = 3;
        let zero = vec![vec![HermitianOperator::from_hermitian_part(&linalg::zeros(d)); 2]; 2];
        assert!(witness_sufficient(&zero).unwrap());
        let g = 2;
        let flat = HermitianOperator::from_hermitian_part(&linalg::identity(d).scale(1.0 / (g * d) as f64));
        let edge = vec![vec![flat; 3]; g];
        assert!(witness_sufficient(&edge).unwrap());
        // colinear basis witness α U_x|i><i|U_x* with α = 1/(d η)
        let u = vec![linalg::identity(d), fourier(d)];
        let alpha = 1.0 / (d as f64 * eta(&u).unwrap());
        let w: Vec<Vec<HermitianOperator>> = u
            .iter()
            .map(|m| {
                basis_measurement(m)
                    .effects()
                    .iter()
                    .map(|e| HermitianOperator::from_hermitian_part(&e.matrix().scale(alpha)))
                    .collect()
            })
            .collect();
        assert!(witness_sufficient(&w).unwrap());
        let over: Vec<Vec<HermitianOperator>> = w
            .iter()
            .map(|wx| wx.iter().map(|e| HermitianOperator::from_hermitian_part(&e.matrix().scale(1.01))).collect())
            .collect();
        assert!(!witness_sufficient(&over).unwrap());
    }

    #[test]
    fn colinear_examples() {
        let a = pauli_basis(2);
        let cw = colinear_projection_witness(&a, 1.0 / 2f64.sqrt()).unwrap();
        assert!(cw.is_witness);
        assert!((cw.certified_t_threshold - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(!colinear_projection_witness(&a, 0.75).unwrap().is_witness);
        let tiny = colinear_projection_witness(&a, 1e-6).unwrap();
        assert!(tiny.is_witness && tiny.certified_t_threshold > 1e5);
        let soft = [DichotomicObservable::from_matrix(pauli_z().scale(0.5)).unwrap()];
        assert!(colinear_projection_witness(&soft, 1.0).is_err());
    }

    #[test]
    fn eta_examples() {
        assert!((eta(&[fourier(4)]).unwrap() - 1.0).abs() < 1e-12);
        assert!((eta(&[linalg::identity(3), linalg::identity(3)]).unwrap() - 2.0).abs() < 1e-12);
        for d in [2, 3, 5] {
            let e = eta(&[linalg::identity(d), fourier(d)]).unwrap();
            assert!((e - (1.0 + 1.0 / (d as f64).sqrt())).abs() < 1e-12);
        }
        assert!((eta_g2(&linalg::identity(4)) - 2.0).abs() < 1e-15);
        assert!((eta_g2(&fourier(2)) - 1.70710678118654752).abs() < 1e-12);
        let big: Vec<CMat> = (0..7).map(|_| linalg::identity(8)).collect();
        assert!(matches!(eta(&big), Err(Error::ProblemTooLarge(_))));
    }

    #[test]
    fn eta_three_bases_against_sampled_and_bounds() {
        let mut rng = SeededRng::new(11, 0);
        let u: Vec<CMat> = (0..3).map(|_| haar_unitary(4, &mut rng)).collect();
        let exact = eta(&u).unwrap();
        let low = eta_lower_sampled(&u, 200, &mut rng).unwrap();
        assert!(low <= exact + 1e-10 && exact <= 3.0 && exact >= 1.0);
        assert!(low > 1.0);
    }

    #[test]
    fn threshold_examples() {
        assert!((eta_incompatibility_threshold(3.0, 7, 3).unwrap() - 1.0).abs() < 1e-15);
        let t = eta_incompatibility_threshold(1.0 + 1.0 / 2f64.sqrt(), 2, 2).unwrap();
        assert!((t - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        let d = 1000usize;
        let g = 2 * d;
        let e = 135.0 * (d as f64).ln() * g as f64 / d as f64;
        let t = eta_incompatibility_threshold(e.min(g as f64), d, g).unwrap();
        assert!((t - (135.0 * (d as f64).ln() - 1.0) / (d as f64 - 1.0)).abs() < 1e-12);
        assert!(eta_incompatibility_threshold(0.5, 4, 2).is_err());
        assert!(eta_incompatibility_threshold(1.5, 1, 2).is_err());
    }

    #[test]
    fn sampled_lower_cases() {
        let mut rng = SeededRng::new(12, 0);
        assert!((eta_lower_sampled(&[fourier(3)], 5, &mut rng).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (eta_lower_sampled(&[linalg::identity(3), linalg::identity(3)], 5, &mut rng).unwrap() - 2.0).abs() < 1e-12
        );
        let _ = c(0.0, 0.0);
    }
}
