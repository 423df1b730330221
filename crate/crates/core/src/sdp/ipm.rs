//! Primal-dual interior-point method (HKM direction, Mehrotra predictor-corrector).

use nalgebra::{DMatrix, DVector};

use super::problem::{Entry, SdpProblem, Sense};
use super::{SdpSolver, SolveReport, SolveStatus};
use crate::linalg::{hermitian_part, CMat};

#[derive(Debug, Clone)]
pub struct InteriorPoint {
    pub max_iter: usize,
    /// Target for relative residuals and gap before stopping early.
    pub tol: f64,
    pub step_fraction: f64,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        InteriorPoint { max_iter: 120, tol: 1e-10, step_fraction: 0.98 }
    }
}

pub const OPTIMAL_RESIDUAL: f64 = 1e-8;
pub const OPTIMAL_GAP: f64 = 1e-7;
const INACCURATE_LEVEL: f64 = 1e-5;

struct Layout<'a> {
    /// per block: (constraint index, entries)
    uses: Vec<Vec<(usize, &'a [Entry])>>,
    c: Vec<CMat>,
    b: DVector<f64>,
}

fn layout(p: &SdpProblem) -> Layout<'_> {
    let mut uses: Vec<Vec<(usize, &[Entry])>> = vec![Vec::new(); p.blocks.len()];
    for (i, con) in p.constraints.iter().enumerate() {
        for t in &con.terms {
            uses[t.block].push((i, &t.entries));
        }
    }
    let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut cm: Vec<CMat> = p.blocks.iter().map(|&n| CMat::zeros(n, n)).collect();
    for t in &p.objective {
        for e in &t.entries {
            cm[t.block][(e.row, e.col)] += e.value * sign;
        }
    }
    let b = DVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|c| c.rhs));
    Layout { uses, c: cm, b }
}

/// A(Z)_i = Σ_b Re Tr(A_ib Z_b); Z need not be Hermitian.
fn apply_a(l: &Layout, z: &[CMat], m: usize) -> DVector<f64> {
    let mut out = DVector::zeros(m);
    for (blk, uses) in l.uses.iter().enumerate() {
        for &(i, ents) in uses {
            let mut s = 0.0;
            for e in ents {
                s += (e.value * z[blk][(e.col, e.row)]).re;
            }
            out[i] += s;
        }
    }
    out
}

fn apply_at(l: &Layout, y: &DVector<f64>, sizes: &[usize]) -> Vec<CMat> {
    let mut out: Vec<CMat> = sizes.iter().map(|&n| CMat::zeros(n, n)).collect();
    for (blk, uses) in l.uses.iter().enumerate() {
        for &(i, ents) in uses {
            let yi = y[i];
            if yi == 0.0 {
                continue;
            }
            for e in ents {
                out[blk][(e.row, e.col)] += e.value * yi;
            }
        }
    }
    out
}

fn inner(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| crate::linalg::re_trace_prod(x, y)).sum()
}

fn fro(a: &[CMat]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn hpd_inverse(m: &CMat) -> Option<CMat> {
    let ch = hermitian_part(m).cholesky()?;
    Some(hermitian_part(&ch.inverse()))
}

/// Largest step keeping X + a ΔX positive definite (may be infinite).
fn max_step(x: &CMat, dx: &CMat) -> f64 {
    let n = x.nrows();
    if n == 1 {
        let (xv, dv) = (x[(0, 0)].re, dx[(0, 0)].re);
        return if dv < 0.0 { -xv / dv } else { f64::INFINITY };
    }
    let ch = match hermitian_part(x).cholesky() {
        Some(ch) => ch,
        None => return 0.0,
    };
    let l = ch.l();
    let w = match l.solve_lower_triangular(dx) {
        Some(w) => w,
        None => return 0.0,
    };
    let w2 = match l.solve_lower_triangular(&w.adjoint()) {
        Some(w2) => w2,
        None => return 0.0,
    };
    let lmin = crate::linalg::lambda_min(&w2);
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn schur(l: &Layout, x: &[CMat], sinv: &[CMat], m: usize) -> DMatrix<f64> {
    let mut big = DMatrix::<f64>::zeros(m, m);
    for (blk, uses) in l.uses.iter().enumerate() {
        let xb = &x[blk];
        let sb = &sinv[blk];
        for (u, &(i, ei)) in uses.iter().enumerate() {
            for &(j, ej) in &uses[u..] {
                let mut s = 0.0;
                for a in ei {
                    for bb in ej {
                        // Re Tr(A_i X A_j S^-1): a_pq X_qr b_rs Sinv_sp
                        s += (a.value * xb[(a.col, bb.row)] * bb.value * sb[(bb.col, a.row)]).re;
                    }
                }
                big[(i, j)] += s;
                if i != j {
                    big[(j, i)] += s;
                }
            }
        }
    }
    big
}

enum Factor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(m: DMatrix<f64>) -> Option<Factor> {
        if let Some(ch) = m.clone().cholesky() {
            return Some(Factor::Chol(ch));
        }
        let scale = m.diagonal().amax().max(1.0);
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += 1e-13 * scale;
        }
        if let Some(ch) = reg.cholesky() {
            return Some(Factor::Chol(ch));
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(Factor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, r: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Chol(ch) => Some(ch.solve(r)),
            Factor::Lu(lu) => lu.solve(r),
        }
    }
}

struct Direction {
    dx: Vec<CMat>,
    dy: DVector<f64>,
    ds: Vec<CMat>,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    l: &Layout,
    sizes: &[usize],
    x: &[CMat],
    sinv: &[CMat],
    rp: &DVector<f64>,
    rd: &[CMat],
    h: &[CMat],
    fac: &Factor,
) -> Option<Direction> {
    let m = rp.len();
    let xrs: Vec<CMat> = x.iter().zip(rd).zip(sinv).map(|((xb, rb), sb)| xb * rb * sb).collect();
    let rhs = rp - apply_a(l, h, m) + apply_a(l, &xrs, m);
    let dy = fac.solve(&rhs)?;
    let aty = apply_at(l, &dy, sizes);
    let ds: Vec<CMat> = rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
    let dx: Vec<CMat> =
        h.iter().zip(x).zip(&ds).zip(sinv).map(|(((hb, xb), dsb), sb)| hb - hermitian_part(&(xb * dsb * sb))).collect();
    Some(Direction { dx, dy, ds })
}

impl SdpSolver for InteriorPoint {
    fn solve(&self, p: &SdpProblem) -> SolveReport {
        if let Err(msg) = p.check() {
            return SolveReport::failure(&msg);
        }
        let sizes = p.blocks.clone();
        let m = p.constraints.len();
        let l = layout(p);
        let n_total: f64 = sizes.iter().map(|&n| n as f64).sum();
        let bnorm = l.b.norm();
        let cnorm = fro(&l.c);
        let scale = 1.0f64.max(l.b.amax()).max(l.c.iter().map(crate::linalg::max_abs).fold(0.0, f64::max));
        let start = 10.0 * scale;
        let mut x: Vec<CMat> = sizes.iter().map(|&n| CMat::identity(n, n).scale(start)).collect();
        let mut s: Vec<CMat> = sizes.iter().map(|&n| CMat::identity(n, n).scale(start)).collect();
        let mut y = DVector::<f64>::zeros(m);

        let mut stalls = 0;
        let mut iterations = 0;
        let mut best: Option<(f64, Vec<CMat>, DVector<f64>, Vec<CMat>)> = None;
        for it in 0..self.max_iter {
            iterations = it;
            let ax = apply_a(&l, &x, m);
            let rp = &l.b - ax;
            let aty = apply_at(&l, &y, &sizes);
            let rd: Vec<CMat> = l.c.iter().zip(&aty).zip(&s).map(|((cb, a), sb)| cb - a - sb).collect();
            let pobj = inner(&l.c, &x);
            let dobj = l.b.dot(&y);
            let pres = rp.norm() / (1.0 + bnorm);
            let dres = fro(&rd) / (1.0 + cnorm);
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            let merit = pres.max(dres).max(gap);
            if best.as_ref().is_none_or(|b| merit < b.0) {
                best = Some((merit, x.clone(), y.clone(), s.clone()));
            }
            if pres < self.tol && dres < self.tol && gap < self.tol {
                break;
            }
            if !pobj.is_finite()
                || !dobj.is_finite()
                || y.amax() > 1e12
                || x.iter().any(|b| crate::linalg::max_abs(b) > 1e12)
            {
                break;
            }
            let mu = inner(&x, &s) / n_total;
            let sinv: Vec<CMat> = match s.iter().map(hpd_inverse).collect::<Option<Vec<_>>>() {
                Some(v) => v,
                None => break,
            };
            let fac = match Factor::new(schur(&l, &x, &sinv, m)) {
                Some(f) => f,
                None => break,
            };
            // predictor
            let h_aff: Vec<CMat> = x.iter().map(|b| -b).collect();
            let aff = match direction(&l, &sizes, &x, &sinv, &rp, &rd, &h_aff, &fac) {
                Some(d) => d,
                None => break,
            };
            let ap = x.iter().zip(&aff.dx).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min).min(1.0);
            let ad = s.iter().zip(&aff.ds).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min).min(1.0);
            let xa: Vec<CMat> = x.iter().zip(&aff.dx).map(|(a, b)| a + b.scale(ap)).collect();
            let sa: Vec<CMat> = s.iter().zip(&aff.ds).map(|(a, b)| a + b.scale(ad)).collect();
            let mu_aff = inner(&xa, &sa) / n_total;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            // corrector
            let h: Vec<CMat> = x
                .iter()
                .zip(&sinv)
                .zip(aff.dx.iter().zip(&aff.ds))
                .map(|((xb, sb), (dxb, dsb))| sb.scale(sigma * mu) - xb - hermitian_part(&(dxb * dsb * sb)))
                .collect();
            let dir = match direction(&l, &sizes, &x, &sinv, &rp, &rd, &h, &fac) {
                Some(d) => d,
                None => break,
            };
            let ap = x.iter().zip(&dir.dx).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
            let ad = s.iter().zip(&dir.ds).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
            let ap = (self.step_fraction * ap).min(1.0);
            let ad = (self.step_fraction * ad).min(1.0);
            if ap < 1e-10 && ad < 1e-10 {
                stalls += 1;
                if stalls > 3 {
                    break;
                }
            }
            for (xb, d) in x.iter_mut().zip(&dir.dx) {
                *xb = hermitian_part(&(&*xb + d.scale(ap)));
            }
            for (sb, d) in s.iter_mut().zip(&dir.ds) {
                *sb = hermitian_part(&(&*sb + d.scale(ad)));
            }
            y += dir.dy.scale(ad);
        }

        let (_, x, y, s) = best.expect("at least one iterate");
        let rp = &l.b - apply_a(&l, &x, m);
        let aty = apply_at(&l, &y, &sizes);
        let rd: Vec<CMat> = l.c.iter().zip(&aty).zip(&s).map(|((cb, a), sb)| cb - a - sb).collect();
        let pobj = inner(&l.c, &x);
        let dobj = l.b.dot(&y);
        let primal_residual = rp.norm() / (1.0 + bnorm);
        let dual_residual = fro(&rd) / (1.0 + cnorm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let worst = primal_residual.max(dual_residual);
        let status = if worst <= OPTIMAL_RESIDUAL && gap <= OPTIMAL_GAP {
            SolveStatus::Optimal
        } else if y.amax() > 1e10 || x.iter().any(|b| crate::linalg::max_abs(b) > 1e10) {
            SolveStatus::Infeasible
        } else if worst <= INACCURATE_LEVEL && gap <= INACCURATE_LEVEL {
            SolveStatus::Inaccurate
        } else {
            SolveStatus::SolverFailure
        };
        let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
        SolveReport {
            status,
            value: sign * 0.5 * (pobj + dobj),
            primal_value: sign * pobj,
            dual_value: sign * dobj,
            gap,
            primal_residual,
            dual_residual,
            iterations,
            x,
            y: y.iter().copied().collect(),
            s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, c, max_abs};
    use crate::sdp::problem::{Constraint, Coord, Term};

    fn coord_constraint(block: usize, f: Coord, rhs: f64) -> Constraint {
        Constraint { terms: vec![Term { block, entries: f.entries(1.0) }], rhs }
    }

    #[test]
    fn linear_program_in_scalar_blocks() {
        // min x0 + 2 x1 s.t. x0 + x1 = 1, x >= 0  -> value 1
        let mut p = SdpProblem::new(vec![1, 1], Sense::Minimize);
        p.objective = vec![
            Term { block: 0, entries: Coord::Diag(0).entries(1.0) },
            Term { block: 1, entries: Coord::Diag(0).entries(2.0) },
        ];
        p.constraints.push(Constraint {
            terms: vec![
                Term { block: 0, entries: Coord::Diag(0).entries(1.0) },
                Term { block: 1, entries: Coord::Diag(0).entries(1.0) },
            ],
            rhs: 1.0,
        });
        let r = InteriorPoint::default().solve(&p);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.value - 1.0).abs() < 1e-8);
        assert!((r.x[0][(0, 0)].re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn min_eigenvalue_program() {
        // min Re Tr(C X) s.t. Tr X = 1, X ⪰ 0  ->  lambda_min(C)
        let cm = linalg::pauli_x() + linalg::pauli_y().scale(0.5) + linalg::pauli_z().scale(0.25);
        let mut p = SdpProblem::new(vec![2], Sense::Minimize);
        let mut ents = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                ents.push(Entry { row: i, col: j, value: cm[(i, j)] });
            }
        }
        p.objective.push(Term { block: 0, entries: ents });
        p.constraints.push(Constraint {
            terms: vec![Term {
                block: 0,
                entries: vec![
                    Entry { row: 0, col: 0, value: c(1.0, 0.0) },
                    Entry { row: 1, col: 1, value: c(1.0, 0.0) },
                ],
            }],
            rhs: 1.0,
        });
        let r = InteriorPoint::default().solve(&p);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.value - linalg::lambda_min(&cm)).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn fixed_coordinates_are_reproduced() {
        // feasibility of a fixed PSD matrix with complex entries
        let target = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(0.5, 0.0)]);
        let mut p = SdpProblem::new(vec![2], Sense::Maximize);
        for f in Coord::all(2) {
            p.constraints.push(coord_constraint(0, f, f.of(&target)));
        }
        let r = InteriorPoint::default().solve(&p);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(max_abs(&(&r.x[0] - target)) < 1e-7);
    }
}
