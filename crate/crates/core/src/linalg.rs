//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

/// Builds a matrix from real entries given row by row.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| c(rows[i][j], 0.0))
}

pub fn diag_real(v: &[f64]) -> CMat {
    let mut m = zeros(v.len());
    for (i, x) in v.iter().enumerate() {
        m[(i, i)] = c(*x, 0.0);
    }
    m
}

pub fn pauli_x() -> CMat {
    from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMat {
    diag_real(&[1.0, -1.0])
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// (M + M^H) / 2
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Re Tr(A B) without forming the product.
pub fn re_trace_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            let x = a[(i, k)] * b[(k, i)];
            s += x.re;
        }
    }
    s
}

/// Ascending eigenvalues of a Hermitian matrix (the input is symmetrised first).
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Ascending eigenpairs of a Hermitian matrix; eigenvectors are columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

pub fn lambda_min(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

pub fn lambda_max(m: &CMat) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// Operator norm of a Hermitian matrix.
pub fn herm_norm(m: &CMat) -> f64 {
    let v = eigvalsh(m);
    match (v.first(), v.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => 0.0,
    }
}

/// Largest singular value of an arbitrary matrix, as √λ_max(m*m).
pub fn op_norm(m: &CMat) -> f64 {
    // nalgebra's complex SVD occasionally returns factors that do not reconstruct m
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() < m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    lambda_max(&gram).max(0.0).sqrt()
}

/// λ_min(m) ≥ −shift, via Cholesky of the real embedding [[Re, −Im], [Im, Re]] of m + shift·I.
pub fn is_psd_shifted(m: &CMat, shift: f64) -> bool {
    // complex Cholesky in nalgebra does not reject negative pivots, real Cholesky does
    let n = m.nrows();
    let h = hermitian_part(m);
    let mut r = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + n, j)] = z.im;
        }
        r[(i, i)] += shift;
        r[(i + n, i + n)] += shift;
    }
    r.cholesky().is_some()
}

/// Orthonormal basis of the eigenspace of a Hermitian matrix with eigenvalues above `cut`.
pub fn range_basis(m: &CMat, cut: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > cut).collect();
    CMat::from_fn(m.nrows(), cols.len(), |r, j| vecs[(r, cols[j])])
}

/// Unnormalised DFT matrix scaled to be unitary.
pub fn fourier(d: usize) -> CMat {
    let s = 1.0 / (d as f64).sqrt();
    CMat::from_fn(d, d, |i, j| {
        let ang = 2.0 * std::f64::consts::PI * (i * j) as f64 / d as f64;
        c(s * ang.cos(), s * ang.sin())
    })
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.ncols())))
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}
