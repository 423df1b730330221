//! Standard-form conic program over complex Hermitian blocks.
//!
//! Primal:  min Σ_b Re Tr(C_b X_b)  s.t.  Σ_b Re Tr(A_ib X_b) = b_i,  X_b ⪰ 0.
//! Dual:    max bᵀy                 s.t.  S_b = C_b − Σ_i y_i A_ib ⪰ 0.
//!
//! Affine PSD constraints are expressed through slack blocks; real scalars
//! with a sign constraint are 1x1 blocks.

use crate::linalg::{c, CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

/// Restriction of a Hermitian coefficient matrix to one block, as sparse entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub block: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<Term>,
    pub sense: Sense,
}

/// Real coordinates of a Hermitian matrix: X_pp, Re X_pq, Im X_pq (p < q).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

impl Coord {
    /// The d² coordinates of a d x d Hermitian matrix in a fixed order.
    pub fn all(d: usize) -> Vec<Coord> {
        let mut out = Vec::with_capacity(d * d);
        for p in 0..d {
            out.push(Coord::Diag(p));
            for q in p + 1..d {
                out.push(Coord::Re(p, q));
                out.push(Coord::Im(p, q));
            }
        }
        out
    }

    /// Entries of the Hermitian A with Re Tr(A X) equal to this coordinate of X.
    pub fn entries(self, scale: f64) -> Vec<Entry> {
        match self {
            Coord::Diag(p) => vec![Entry { row: p, col: p, value: c(scale, 0.0) }],
            Coord::Re(p, q) => vec![
                Entry { row: p, col: q, value: c(0.5 * scale, 0.0) },
                Entry { row: q, col: p, value: c(0.5 * scale, 0.0) },
            ],
            Coord::Im(p, q) => vec![
                Entry { row: p, col: q, value: c(0.0, 0.5 * scale) },
                Entry { row: q, col: p, value: c(0.0, -0.5 * scale) },
            ],
        }
    }

    pub fn of(self, m: &CMat) -> f64 {
        match self {
            Coord::Diag(p) => m[(p, p)].re,
            Coord::Re(p, q) => m[(p, q)].re,
            Coord::Im(p, q) => m[(p, q)].im,
        }
    }

    pub fn is_diag(self) -> bool {
        matches!(self, Coord::Diag(_))
    }
}

/// Σ_f y_f A_f for the coordinate functionals, i.e. the Hermitian matrix whose
/// real pairing with X reproduces Σ_f y_f f(X).
pub fn assemble(d: usize, coords: &[Coord], y: &[f64]) -> CMat {
    let mut m = CMat::zeros(d, d);
    for (f, &v) in coords.iter().zip(y) {
        for e in f.entries(v) {
            m[(e.row, e.col)] += e.value;
        }
    }
    m
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>, sense: Sense) -> Self {
        SdpProblem { blocks, constraints: Vec::new(), objective: Vec::new(), sense }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Checks indices against block sizes.
    pub fn check(&self) -> Result<(), String> {
        let check_terms = |terms: &[Term]| -> Result<(), String> {
            for t in terms {
                let n = *self.blocks.get(t.block).ok_or_else(|| format!("block {} does not exist", t.block))?;
                if t.entries.iter().any(|e| e.row >= n || e.col >= n) {
                    return Err(format!("entry outside block {} of size {n}", t.block));
                }
            }
            Ok(())
        };
        check_terms(&self.objective)?;
        for con in &self.constraints {
            check_terms(&con.terms)?;
        }
        Ok(())
    }
}
