//! Compatibility degrees and incompatibility witnesses via semidefinite programming.

pub mod ipm;
pub mod problem;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::measurement::{DichotomicObservable, HermitianOperator, MeasurementSet};
pub use ipm::InteriorPoint;
pub use problem::{Constraint, Coord, Entry, SdpProblem, Sense, Term};

pub const MAX_G_DICHOTOMIC: usize = 16;
pub const MAX_JOINT_OUTCOMES: usize = 4096;
pub const MAX_G_VERIFY: usize = 24;
pub const BISECTION_TOL: f64 = 1e-4;
pub const BISECTION_MAX_ITER: usize = 40;
/// Joint POVM counts as existing when its smallest eigenvalue margin is above this.
pub const FEASIBILITY_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Inaccurate,
    SolverFailure,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective in the problem's own sense (midpoint of primal and dual values).
    pub value: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub x: Vec<CMat>,
    pub y: Vec<f64>,
    pub s: Vec<CMat>,
}

impl SolveReport {
    pub fn failure(msg: &str) -> Self {
        let _ = msg;
        SolveReport {
            status: SolveStatus::SolverFailure,
            value: f64::NAN,
            primal_value: f64::NAN,
            dual_value: f64::NAN,
            gap: f64::INFINITY,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            iterations: 0,
            x: Vec::new(),
            y: Vec::new(),
            s: Vec::new(),
        }
    }

    fn usable(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Inaccurate)
    }
}

pub trait SdpSolver {
    fn solve(&self, problem: &SdpProblem) -> SolveReport;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_source: String,
    pub upper_source: String,
    /// Unclipped 1/λ when the bracket came from the λ program.
    pub tau_tilde: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessCertificate {
    /// W_{i|x}, outer index x.
    pub witness: Vec<Vec<HermitianOperator>>,
    pub state: HermitianOperator,
    pub pairing: f64,
}

impl WitnessCertificate {
    pub fn certifies(&self) -> bool {
        self.pairing > 1.0 + 1e-7
    }
}

fn solver_error(r: &SolveReport) -> Error {
    Error::SolverFailure(format!(
        "status {:?}, gap {:.2e}, residuals {:.2e}/{:.2e}",
        r.status, r.gap, r.primal_residual, r.dual_residual
    ))
}

/// Mixed-radix enumeration of joint outcomes v = (v_1..v_g).
fn joint_outcomes(counts: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0; counts.len()];
            for x in (0..counts.len()).rev() {
                v[x] = idx % counts[x];
                idx /= counts[x];
            }
            v
        })
        .collect()
}

fn joint_size_guard(counts: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for &k in counts {
        total = total.saturating_mul(k);
    }
    if total > MAX_JOINT_OUTCOMES {
        return Err(Error::ProblemTooLarge(format!("joint POVM needs {total} blocks, limit is {MAX_JOINT_OUTCOMES}")));
    }
    Ok(total)
}

/// λ program in gauge-fixed form:
/// min μ  s.t.  J_v ⪰ 0,  Σ_{v_x=i} J_v − Σ_{v_x=k_x−1} J_v = E_{i|x} − E_{k_x−1|x},  Σ_v J_v ⪯ μ I.
///
/// Blocks: J_v (one per joint outcome), T (slack for μI − ΣJ), μ (1x1).
/// The dual variables of the first family are W_{i|x} (i < k_x − 1), those of the
/// second are −ρ.
pub fn lambda_program(set: &MeasurementSet) -> Result<SdpProblem> {
    let counts = set.outcome_counts();
    let nj = joint_size_guard(&counts)?;
    let d = set.dim();
    let outcomes = joint_outcomes(&counts);
    let coords = Coord::all(d);
    let mut blocks = vec![d; nj];
    let t_block = nj;
    let mu_block = nj + 1;
    blocks.push(d);
    blocks.push(1);
    let mut p = SdpProblem::new(blocks, Sense::Minimize);
    p.objective.push(Term { block: mu_block, entries: Coord::Diag(0).entries(1.0) });
    for (x, povm) in set.povms().iter().enumerate() {
        let k = counts[x];
        let last = povm.effect(k - 1);
        for i in 0..k.saturating_sub(1) {
            let diff = povm.effect(i) - last;
            for &f in &coords {
                let mut terms = Vec::new();
                for (bi, v) in outcomes.iter().enumerate() {
                    if v[x] == i {
                        terms.push(Term { block: bi, entries: f.entries(1.0) });
                    } else if v[x] == k - 1 {
                        terms.push(Term { block: bi, entries: f.entries(-1.0) });
                    }
                }
                p.constraints.push(Constraint { terms, rhs: f.of(&diff) });
            }
        }
    }
    for &f in &coords {
        let mut terms: Vec<Term> = (0..nj).map(|bi| Term { block: bi, entries: f.entries(1.0) }).collect();
        terms.push(Term { block: t_block, entries: f.entries(1.0) });
        if f.is_diag() {
            terms.push(Term { block: mu_block, entries: Coord::Diag(0).entries(-1.0) });
        }
        p.constraints.push(Constraint { terms, rhs: 0.0 });
    }
    Ok(p)
}

/// Reads (W, ρ) from the dual of `lambda_program`.
fn witness_from_dual(set: &MeasurementSet, y: &[f64]) -> (Vec<Vec<CMat>>, CMat) {
    let d = set.dim();
    let coords = Coord::all(d);
    let n = coords.len();
    let mut offset = 0;
    let mut w = Vec::new();
    for povm in set.povms() {
        let k = povm.outcomes();
        let mut wx: Vec<CMat> = Vec::new();
        for _ in 0..k.saturating_sub(1) {
            wx.push(problem::assemble(d, &coords, &y[offset..offset + n]));
            offset += n;
        }
        let last = wx.iter().fold(linalg::zeros(d), |acc, m| acc - m);
        wx.push(last);
        w.push(wx);
    }
    let r = problem::assemble(d, &coords, &y[offset..offset + n]);
    (w, -r)
}

/// Rescales (W, ρ) so that ρ − Σ_x W_{v_x|x} ⪰ 0 holds exactly for every v.
fn repair_certificate(w: &mut [Vec<CMat>], rho: &mut CMat) {
    let d = rho.nrows();
    let counts: Vec<usize> = w.iter().map(Vec::len).collect();
    let mut worst = linalg::lambda_min(rho);
    for v in joint_outcomes(&counts) {
        let mut m = rho.clone();
        for (x, &i) in v.iter().enumerate() {
            m -= &w[x][i];
        }
        worst = worst.min(linalg::lambda_min(&m));
    }
    let shift = if worst < 0.0 { -worst * (1.0 + 1e-9) + 1e-15 } else { 0.0 };
    let mut fixed = linalg::hermitian_part(&(&*rho + linalg::identity(d).scale(shift)));
    let tr = fixed.trace().re;
    fixed = fixed.unscale(tr);
    *rho = fixed;
    for wx in w.iter_mut() {
        for m in wx.iter_mut() {
            *m = linalg::hermitian_part(m).unscale(tr);
        }
    }
}

fn pairing(set: &MeasurementSet, w: &[Vec<CMat>]) -> f64 {
    set.povms()
        .iter()
        .zip(w)
        .map(|(p, wx)| wx.iter().enumerate().map(|(i, m)| linalg::re_trace_prod(m, p.effect(i))).sum::<f64>())
        .sum()
}

/// Solves the λ program for an arbitrary set; returns the report and the certificate.
pub fn lambda_general(set: &MeasurementSet, solver: &dyn SdpSolver) -> Result<(SolveReport, WitnessCertificate)> {
    let prob = lambda_program(set)?;
    let report = solver.solve(&prob);
    if !report.usable() {
        return Err(solver_error(&report));
    }
    let (mut w, mut rho) = witness_from_dual(set, &report.y);
    repair_certificate(&mut w, &mut rho);
    let value = pairing(set, &w);
    let cert = WitnessCertificate {
        witness: w.iter().map(|wx| wx.iter().map(HermitianOperator::from_hermitian_part).collect()).collect(),
        state: HermitianOperator::from_hermitian_part(&rho),
        pairing: value,
    };
    Ok((report, cert))
}

fn check_dichotomic(a: &[DichotomicObservable]) -> Result<MeasurementSet> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    if a.len() > MAX_G_DICHOTOMIC {
        return Err(Error::GTooLarge { g: a.len(), max: MAX_G_DICHOTOMIC });
    }
    MeasurementSet::from_observables(a)
}

/// λ(A) = max Σ Tr(A_x Y_x) s.t. Σ ε_x Y_x ⪯ ρ for all sign patterns, ρ a state.
///
/// The returned report's `value` is λ(A); the optimisers are in the certificate
/// (Y_x = W_{0|x}).
pub fn compatibility_lambda_dichotomic(a: &[DichotomicObservable]) -> Result<(SolveReport, WitnessCertificate)> {
    let set = check_dichotomic(a)?;
    lambda_general(&set, &InteriorPoint::default())
}

fn bracket_from_lambda(lambda: f64, source: &str) -> TauBracket {
    let tilde = 1.0 / lambda;
    let tau = tilde.min(1.0);
    TauBracket {
        lower: tau,
        upper: tau,
        lower_source: source.to_string(),
        upper_source: source.to_string(),
        tau_tilde: Some(tilde),
    }
}

pub fn tau_dichotomic(a: &[DichotomicObservable]) -> Result<TauBracket> {
    let (report, _) = compatibility_lambda_dichotomic(a)?;
    Ok(bracket_from_lambda(report.value, "sdp_lambda_dichotomic"))
}

/// Program for the largest margin μ with J_v ⪰ μ I and marginals equal to the
/// t-noised effects. μ = w − 1 with w ⪰ 0 (μ ≥ −1 is never binding).
pub fn joint_program(set: &MeasurementSet, t: f64) -> Result<SdpProblem> {
    let noisy = set.with_noise(t)?;
    let counts = noisy.outcome_counts();
    let nj = joint_size_guard(&counts)?;
    let d = noisy.dim();
    let outcomes = joint_outcomes(&counts);
    let coords = Coord::all(d);
    let w_block = nj;
    let mut blocks = vec![d; nj];
    blocks.push(1);
    let mut p = SdpProblem::new(blocks, Sense::Maximize);
    p.objective.push(Term { block: w_block, entries: Coord::Diag(0).entries(1.0) });
    for (x, povm) in noisy.povms().iter().enumerate() {
        let k = counts[x];
        let cells = (nj / k) as f64;
        // the last outcome of every POVM after the first is implied by normalisation
        let kept = if x == 0 { k } else { k - 1 };
        for i in 0..kept {
            for &f in &coords {
                let mut terms: Vec<Term> = outcomes
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v[x] == i)
                    .map(|(bi, _)| Term { block: bi, entries: f.entries(1.0) })
                    .collect();
                let mut rhs = f.of(povm.effect(i));
                if f.is_diag() {
                    terms.push(Term { block: w_block, entries: Coord::Diag(0).entries(cells) });
                    rhs += cells;
                }
                p.constraints.push(Constraint { terms, rhs });
            }
        }
    }
    Ok(p)
}

/// Whether the t-noised set admits a joint POVM.
pub fn joint_feasible(set: &MeasurementSet, t: f64) -> Result<(bool, SolveReport)> {
    joint_feasible_with(set, t, &InteriorPoint::default())
}

pub fn joint_feasible_with(set: &MeasurementSet, t: f64, solver: &dyn SdpSolver) -> Result<(bool, SolveReport)> {
    let prob = joint_program(set, t)?;
    let report = solver.solve(&prob);
    if !report.usable() {
        return Err(solver_error(&report));
    }
    let margin = report.value - 1.0;
    Ok((margin >= FEASIBILITY_FLOOR, report))
}

/// Bisection on t over [0, 1] with joint_feasible.
pub fn tau_general(set: &MeasurementSet, tol: f64) -> Result<TauBracket> {
    let solver = InteriorPoint::default();
    let source = "sdp_joint_bisection".to_string();
    if joint_feasible_with(set, 1.0, &solver)?.0 {
        return Ok(TauBracket {
            lower: 1.0,
            upper: 1.0,
            lower_source: source.clone(),
            upper_source: source,
            tau_tilde: None,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if joint_feasible_with(set, mid, &solver)?.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TauBracket { lower: lo, upper: hi, lower_source: source.clone(), upper_source: source, tau_tilde: None })
}

/// Optimal witness for the set. Dichotomic sets use the sign-pattern program,
/// others the gauge-fixed joint-POVM dual; both are `lambda_program`.
pub fn witness_search(set: &MeasurementSet) -> Result<WitnessCertificate> {
    if set.is_dichotomic() && set.g() > MAX_G_DICHOTOMIC {
        return Err(Error::GTooLarge { g: set.g(), max: MAX_G_DICHOTOMIC });
    }
    Ok(lambda_general(set, &InteriorPoint::default())?.1)
}

/// Sign-pattern enumeration in Gray-code order; calls `f` with Σ ε_x M_x.
pub(crate) fn for_each_sign_sum(ms: &[&CMat], mut f: impl FnMut(&CMat) -> bool) {
    let g = ms.len();
    let mut sum = ms.iter().fold(linalg::zeros(ms[0].nrows()), |acc, m| acc + *m);
    let mut signs = vec![1.0; g];
    if !f(&sum) {
        return;
    }
    for step in 1u64..(1u64 << g) {
        let bit = step.trailing_zeros() as usize;
        signs[bit] = -signs[bit];
        let delta = ms[bit].scale(2.0 * signs[bit]);
        sum += delta;
        if !f(&sum) {
            return;
        }
    }
}

/// ρ − Σ ε_x W_x ⪰ −1e−8 for all sign patterns.
pub fn verify_witness_dichotomic(w: &[HermitianOperator], rho: &HermitianOperator) -> Result<bool> {
    if w.len() > MAX_G_VERIFY {
        return Err(Error::GTooLarge { g: w.len(), max: MAX_G_VERIFY });
    }
    if w.iter().any(|m| m.dim() != rho.dim()) {
        return Err(Error::DimensionMismatch("witness and state dimensions differ".into()));
    }
    if w.is_empty() {
        return Ok(linalg::lambda_min(rho.matrix()) >= -1e-8);
    }
    let mats: Vec<&CMat> = w.iter().map(|m| m.matrix()).collect();
    let mut ok = true;
    for_each_sign_sum(&mats, |s| {
        ok = linalg::lambda_min(&(rho.matrix() - s)) >= -1e-8;
        ok
    });
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, pauli_x, pauli_z};
    use crate::measurement::{pauli_basis, povm_from_matrices};
    use crate::sampling::basis_measurement;

    fn obs(m: CMat) -> DichotomicObservable {
        DichotomicObservable::from_matrix(m).unwrap()
    }

    #[test]
    fn lambda_of_z_x() {
        let (r, cert) = compatibility_lambda_dichotomic(&pauli_basis(2)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.value - 2f64.sqrt()).abs() < 1e-7, "{}", r.value);
        assert!((cert.pairing - 2f64.sqrt()).abs() < 1e-7);
        let w: Vec<HermitianOperator> = cert.witness.iter().map(|wx| wx[0].clone()).collect();
        assert!(verify_witness_dichotomic(&w, &cert.state).unwrap());
    }

    #[test]
    fn single_and_repeated_observable() {
        let (r, _) = compatibility_lambda_dichotomic(&[obs(pauli_z())]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-7);
        // a compatible pair pairs to at most Tr ρ = 1 with any witness
        let zz = [obs(pauli_z()), obs(pauli_z())];
        let (r, _) = compatibility_lambda_dichotomic(&zz).unwrap();
        assert!((r.value - 1.0).abs() < 1e-7, "{}", r.value);
        let b = tau_dichotomic(&zz).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-7 && (b.upper - 1.0).abs() < 1e-7);
        // unsharp observable: τ̃ exceeds 1 and is clipped
        let half = [obs(pauli_z().scale(0.5))];
        let b = tau_dichotomic(&half).unwrap();
        assert!((b.tau_tilde.unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(b.lower, 1.0);
    }

    #[test]
    fn tau_of_three_paulis() {
        let b = tau_dichotomic(&pauli_basis(3)).unwrap();
        assert!((b.lower - 1.0 / 3f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn joint_feasibility_around_threshold() {
        let set = MeasurementSet::from_observables(&pauli_basis(2)).unwrap();
        assert!(joint_feasible(&set, 0.0).unwrap().0);
        assert!(joint_feasible(&set, 0.70).unwrap().0);
        assert!(!joint_feasible(&set, 0.72).unwrap().0);
    }

    #[test]
    fn single_povm_has_tau_one() {
        let p = povm_from_matrices(&[
            diag_real(&[1.0, 0.0, 0.0]),
            diag_real(&[0.0, 1.0, 0.0]),
            diag_real(&[0.0, 0.0, 1.0]),
        ])
        .unwrap();
        let set = MeasurementSet::new(vec![p]).unwrap();
        let b = tau_general(&set, 1e-4).unwrap();
        assert_eq!(b.lower, 1.0);
    }

    #[test]
    fn qubit_mub_bisection() {
        let set =
            MeasurementSet::new(vec![basis_measurement(&linalg::identity(2)), basis_measurement(&linalg::fourier(2))])
                .unwrap();
        let b = tau_general(&set, 1e-4).unwrap();
        let expect = 0.5 * (1.0 + 1.0 / (2f64.sqrt() + 1.0));
        assert!(b.lower <= expect + 1e-6 && expect <= b.upper + 1e-6, "{b:?}");
        assert!(b.upper - b.lower <= 1e-4);
    }

    #[test]
    fn witness_for_paulis() {
        let set = MeasurementSet::from_observables(&pauli_basis(3)).unwrap();
        let cert = witness_search(&set).unwrap();
        assert!((cert.pairing - 3f64.sqrt()).abs() < 1e-6);
        assert!(cert.certifies());
        assert!((cert.state.matrix().trace().re - 1.0).abs() < 1e-8);
        let zz = MeasurementSet::from_observables(&[obs(pauli_z()), obs(pauli_z())]).unwrap();
        assert!(!witness_search(&zz).unwrap().certifies());
    }

    #[test]
    fn general_witness_on_qutrit_bases() {
        let set =
            MeasurementSet::new(vec![basis_measurement(&linalg::identity(3)), basis_measurement(&linalg::fourier(3))])
                .unwrap();
        let cert = witness_search(&set).unwrap();
        assert!(cert.certifies());
        // the certificate is a witness for every v
        let counts = set.outcome_counts();
        for v in joint_outcomes(&counts) {
            let mut m = cert.state.matrix().clone();
            for (x, &i) in v.iter().enumerate() {
                m -= cert.witness[x][i].matrix();
            }
            assert!(linalg::lambda_min(&m) >= -1e-10);
        }
        // 1/pairing can only overestimate tau
        let tau = 0.5 * (1.0 + 1.0 / (3f64.sqrt() + 1.0));
        assert!(1.0 / cert.pairing >= tau - 1e-6);
    }

    #[test]
    fn verify_examples() {
        let rho = HermitianOperator::from_hermitian_part(&linalg::identity(2).scale(0.5));
        let w = |s: f64| {
            [
                HermitianOperator::from_hermitian_part(&pauli_z().scale(s / 2.0)),
                HermitianOperator::from_hermitian_part(&pauli_x().scale(s / 2.0)),
            ]
        };
        // λ_max(Z ± X) = √2, so s/2·√2 ≤ 1/2 exactly when s ≤ 1/√2
        assert!(verify_witness_dichotomic(&w(1.0 / 2f64.sqrt()), &rho).unwrap());
        assert!(!verify_witness_dichotomic(&w(0.72), &rho).unwrap());
        let zero = [HermitianOperator::from_hermitian_part(&linalg::zeros(2))];
        assert!(verify_witness_dichotomic(&zero, &rho).unwrap());
        assert!(!verify_witness_dichotomic(&w(2.0), &rho).unwrap());
    }

    #[test]
    fn guards() {
        let many: Vec<DichotomicObservable> = (0..17).map(|_| obs(pauli_z())).collect();
        assert!(matches!(tau_dichotomic(&many), Err(Error::GTooLarge { .. })));
        let big: Vec<_> = (0..3).map(|_| basis_measurement(&linalg::identity(17))).collect();
        let set = MeasurementSet::new(big).unwrap();
        assert!(matches!(joint_feasible(&set, 0.5), Err(Error::ProblemTooLarge(_))));
    }
}
