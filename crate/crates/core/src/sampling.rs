//! Seeded samplers for Haar unitaries, random projections, bases and induced POVMs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::measurement::{validate_povm, DichotomicObservable, HermitianOperator, Povm};

/// ChaCha20 stream addressed by (seed, stream_id).
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        SeededRng { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian, E|z|^2 = 1.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(s * self.normal(), s * self.normal())
    }

    pub fn sign(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMat {
        // column-major fill keeps the draw order fixed
        let mut m = CMat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.complex_normal();
            }
        }
        m
    }
}

/// d x r matrix with Haar-distributed orthonormal columns (Ginibre + QR with phase fix).
fn haar_columns(d: usize, r: usize, rng: &mut SeededRng) -> CMat {
    if r == 0 {
        return CMat::zeros(d, 0);
    }
    let qr = rng.ginibre(d, r).qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..r {
        let z = rr[(j, j)];
        let n = z.norm();
        let phase = if n > 0.0 { z / n } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(d: usize, rng: &mut SeededRng) -> CMat {
    assert!(d >= 1, "haar_unitary needs d >= 1");
    haar_columns(d, d, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

impl Subspace {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_basis(basis: CMat) -> Result<Self> {
        let r = basis.ncols();
        let defect = linalg::max_abs(&(basis.adjoint() * &basis - linalg::identity(r)));
        if defect > 1e-10 {
            return Err(Error::ParameterOutOfRange(format!("basis columns not orthonormal (defect {defect:.2e})")));
        }
        Ok(Subspace { basis })
    }

    /// Range of an orthogonal projector.
    pub fn from_projector(p: &CMat) -> Self {
        Subspace { basis: linalg::range_basis(p, 0.5) }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }
}

pub fn random_subspace(d: usize, r: usize, rng: &mut SeededRng) -> Result<Subspace> {
    if r > d {
        return Err(Error::RankOutOfRange { rank: r, dim: d });
    }
    Ok(Subspace { basis: haar_columns(d, r, rng) })
}

pub fn random_projection(d: usize, r: usize, rng: &mut SeededRng) -> Result<HermitianOperator> {
    let s = random_subspace(d, r, rng)?;
    Ok(HermitianOperator::from_hermitian_part(&s.projector()))
}

/// A = 2P - I for a Haar projection of rank r.
pub fn random_projective_observable(d: usize, r: usize, rng: &mut SeededRng) -> Result<DichotomicObservable> {
    let p = random_projection(d, r, rng)?;
    crate::measurement::observable_from_projector(p.matrix())
}

/// Rank-one effects |u_i><u_i| from the columns of a Haar unitary.
pub fn random_basis_measurement(d: usize, rng: &mut SeededRng) -> Povm {
    let u = haar_unitary(d, rng);
    basis_measurement(&u)
}

pub fn basis_measurement(u: &CMat) -> Povm {
    let effects: Vec<HermitianOperator> = (0..u.ncols())
        .map(|i| HermitianOperator::from_hermitian_part(&linalg::outer(&u.column(i).into_owned())))
        .collect();
    validate_povm(&effects).expect("columns of a unitary give a POVM")
}

/// M_i = V*(|i><i| ⊗ I_n)V with V the first d columns of a Haar unitary on C^k ⊗ C^n.
pub fn random_induced_povm(d: usize, k: usize, n: usize, rng: &mut SeededRng) -> Result<Povm> {
    if k * n < d {
        return Err(Error::AncillaTooSmall { kn: k * n, d });
    }
    let v = haar_columns(k * n, d, rng);
    let effects: Vec<HermitianOperator> = (0..k)
        .map(|i| {
            let rows = v.rows(i * n, n);
            HermitianOperator::from_hermitian_part(&(rows.adjoint() * rows))
        })
        .collect();
    validate_povm(&effects)
}
