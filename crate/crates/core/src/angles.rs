//! Principal angles between subspaces and compressions of projection pairs to a qubit.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::criteria::{BoundKind, BoundSource, BoundValue};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::measurement::DichotomicObservable;
use crate::sampling::Subspace;

pub const SIN_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSpectrum {
    /// Nontrivial principal angles, ascending, in [0, π/2].
    pub angles: Vec<f64>,
    /// (d, rank E, rank F)
    pub dims: (usize, usize, usize),
    /// max(0, rank E + rank F − d) directions lie in E ∩ F for dimensional reasons.
    pub forced_zero: usize,
    /// |rank E − rank F| directions of the larger subspace are orthogonal to the smaller one.
    pub forced_right: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(m: [f64; 3]) -> Result<Self> {
        let n = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1.0 + 1e-12 {
            return Err(Error::ParameterOutOfRange(format!("Bloch vector norm {n} > 1")));
        }
        Ok(BlochVector(m))
    }

    /// Components (Tr MX, Tr MY, Tr MZ)/2 of a qubit observable.
    pub fn of(m: &CMat) -> Result<Self> {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::DimensionMismatch(format!("expected 2x2, got {}x{}", m.nrows(), m.ncols())));
        }
        let comp = |p: &CMat| linalg::re_trace_prod(m, p) / 2.0;
        BlochVector::new([comp(&linalg::pauli_x()), comp(&linalg::pauli_y()), comp(&linalg::pauli_z())])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn matrix(&self) -> CMat {
        linalg::pauli_x().scale(self.0[0]) + linalg::pauli_y().scale(self.0[1]) + linalg::pauli_z().scale(self.0[2])
    }
}

struct AnglePairs {
    spectrum: AngleSpectrum,
    e: Vec<CVec>,
    f: Vec<CVec>,
}

fn angle_pairs(e: &Subspace, f: &Subspace) -> Result<AnglePairs> {
    let d = e.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch(format!("ambient dimensions {d} and {}", f.dim())));
    }
    let (re, rf) = (e.rank(), f.rank());
    let forced_zero = (re + rf).saturating_sub(d);
    let n = re.min(rf).min(d - re).min(d - rf);
    let forced_right = re.max(rf) - re.min(rf);
    let mut pairs = AnglePairs {
        spectrum: AngleSpectrum { angles: Vec::with_capacity(n), dims: (d, re, rf), forced_zero, forced_right },
        e: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
    };
    if n == 0 {
        return Ok(pairs);
    }
    // right singular vectors of E*F from the eigenvectors of F*E E*F, cos and sin
    // of each angle from the components of F v inside and outside E
    let overlap = e.basis().adjoint() * f.basis();
    let (_, vecs) = linalg::eigh(&(overlap.adjoint() * &overlap));
    for i in (0..rf).rev().skip(forced_zero).take(n) {
        let fv = f.basis() * vecs.column(i);
        let inside = e.basis() * (e.basis().adjoint() * &fv);
        let (c, s) = (inside.norm(), (&fv - &inside).norm());
        pairs.spectrum.angles.push(s.atan2(c));
        let ev = if c > 0.0 { inside.unscale(c) } else { inside };
        pairs.e.push(ev);
        pairs.f.push(fv);
    }
    Ok(pairs)
}

pub fn principal_angles(e: &Subspace, f: &Subspace) -> Result<AngleSpectrum> {
    Ok(angle_pairs(e, f)?.spectrum)
}

/// λ± = α + β − 2αβ ± 2√(α(1−α)β(1−β)).
pub fn lambda_pm(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("{name} = {v} not in (0,1)")));
        }
    }
    let mid = alpha + beta - 2.0 * alpha * beta;
    let rad = 2.0 * (alpha * (1.0 - alpha) * beta * (1.0 - beta)).sqrt();
    Ok(((mid - rad).clamp(0.0, 1.0), (mid + rad).clamp(0.0, 1.0)))
}

/// d x 2 isometry V with V*(2P−I)V = Z and V*(2Q−I)V = cos 2θ Z + sin 2θ X, built on the
/// principal angle θ closest to `target`.
pub fn compression_isometry(p: &CMat, q: &CMat, target: f64) -> Result<(CMat, f64)> {
    compression_isometry_subspaces(&Subspace::from_projector(p), &Subspace::from_projector(q), target)
}

pub fn compression_isometry_subspaces(e: &Subspace, f: &Subspace, target: f64) -> Result<(CMat, f64)> {
    let pairs = angle_pairs(e, f)?;
    let angles = &pairs.spectrum.angles;
    let i = (0..angles.len())
        .min_by(|&a, &b| (angles[a] - target).abs().total_cmp(&(angles[b] - target).abs()))
        .ok_or(Error::NoNontrivialAngle)?;
    let theta = angles[i];
    let (s, c) = theta.sin_cos();
    if s <= SIN_FLOOR {
        return Err(Error::SinZero(theta));
    }
    let v = &pairs.e[i];
    let vp = (&pairs.f[i] - v.scale(c)).unscale(s);
    let mut out = CMat::zeros(e.dim(), 2);
    out.set_column(0, v);
    out.set_column(1, &vp);
    Ok((out, theta))
}

/// Compatibility degree of two unbiased qubit observables m·σ and n·σ.
pub fn pauli_tau(m: &BlochVector, n: &BlochVector) -> f64 {
    let (a, b) = (m.0, n.0);
    let plus = (0..3).map(|i| (a[i] + b[i]).powi(2)).sum::<f64>().sqrt();
    let minus = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
    let s = plus + minus;
    if s <= 2.0 {
        1.0
    } else {
        2.0 / s
    }
}

/// The compressed form cos 2θ Z + sin 2θ X of the second observable.
pub fn compressed_form(theta: f64) -> BlochVector {
    let (s, c) = (2.0 * theta).sin_cos();
    BlochVector([s, 0.0, c])
}

fn plus_projector_of_projective(a: &DichotomicObservable) -> Result<CMat> {
    let m = a.matrix();
    let defect = linalg::max_abs(&(m * m - linalg::identity(a.dim())));
    if defect > 1e-8 {
        return Err(Error::ParameterOutOfRange(format!("observable is not projective (defect {defect:.2e})")));
    }
    Ok((m + linalg::identity(a.dim())).scale(0.5))
}

/// τ(A,B) ≤ 1/(1/τ_target − ε) where ε measures how far the compression is from the
/// target qubit pair (Z, cos 2θ Z + sin 2θ X).
pub fn compression_upper_bound(a: &DichotomicObservable, b: &DichotomicObservable, target: f64) -> Result<BoundValue> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    let (v, _) = compression_isometry(&plus_projector_of_projective(a)?, &plus_projector_of_projective(b)?, target)?;
    let vh = v.adjoint();
    let z = BlochVector([0.0, 0.0, 1.0]);
    let sigma = compressed_form(target);
    let eps = linalg::op_norm(&(&vh * a.matrix() * &v - z.matrix()))
        + linalg::op_norm(&(&vh * b.matrix() * &v - sigma.matrix()));
    let inv = 1.0 / pauli_tau(&z, &sigma) - eps;
    let value = if inv > 0.0 { (1.0 / inv).min(1.0) } else { 1.0 };
    Ok(BoundValue {
        value,
        kind: BoundKind::UpperOnTau,
        source: BoundSource::Compression,
        applicability: "pairs of projective observables".into(),
        tight: false,
    })
}

/// τ(A,B) ≤ 1/(cos θ + sin θ) using the exact compression on the principal angle nearest π/4.
pub fn compressed_pair_upper_bound(a: &DichotomicObservable, b: &DichotomicObservable) -> Result<BoundValue> {
    let (_, theta) =
        compression_isometry(&plus_projector_of_projective(a)?, &plus_projector_of_projective(b)?, FRAC_PI_4)?;
    Ok(BoundValue {
        value: pauli_tau(&BlochVector([0.0, 0.0, 1.0]), &compressed_form(theta)),
        kind: BoundKind::UpperOnTau,
        source: BoundSource::CompressedPair,
        applicability: "pairs of projective observables".into(),
        tight: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum JordanMode {
    Balanced { alpha: f64, beta: f64 },
    Unbalanced { alpha: f64 },
}

/// True when α lies outside the disc regime of the unbalanced construction.
pub fn unbalanced_alpha(alpha: f64) -> bool {
    let h = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    alpha > 0.5 + h || alpha < 0.5 - h
}

/// Asymptotic minimum eigenvalue of the Jordan-criterion matrix for noise t.
pub fn jordan_min_curve(t: f64, mode: JordanMode) -> Result<f64> {
    let out = |msg: String| Err(Error::ParameterOutOfRange(msg));
    match mode {
        JordanMode::Balanced { alpha, beta } => {
            let (lm, lp) = lambda_pm(alpha, beta)?;
            let lo = 1.0 / (2.0 * lp.sqrt());
            let hi = if lm <= 1e-15 { f64::INFINITY } else { 1.0 / (2.0 * lm.sqrt()) };
            if !(t >= lo - 1e-12 && t <= hi + 1e-12) {
                return out(format!("t = {t} outside [{lo}, {hi}]"));
            }
            Ok(0.25 - t * t / 2.0)
        }
        JordanMode::Unbalanced { alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) || !unbalanced_alpha(alpha) {
                return out(format!("alpha = {alpha} is not in the unbalanced range"));
            }
            let l = 4.0 * alpha * (1.0 - alpha);
            let hi = 1.0 / (l.sqrt() + (1.0 - l).sqrt());
            if !(t >= 0.0 && t <= hi + 1e-12) {
                return out(format!("t = {t} outside [0, {hi}]"));
            }
            Ok((l - 0.5) * t * t - l.sqrt() * t + 0.5)
        }
    }
}
