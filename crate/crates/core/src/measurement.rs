//! Effects, POVMs, dichotomic observables and the white-noise map.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_FLOOR: f64 = 1e-9;
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMat,
}

impl HermitianOperator {
    pub fn new(entries: CMat) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::NonHermitian { defect });
        }
        Ok(HermitianOperator { entries })
    }

    /// Symmetrises `m` instead of rejecting small defects.
    pub fn from_hermitian_part(m: &CMat) -> Self {
        HermitianOperator { entries: linalg::hermitian_part(m) }
    }

    pub fn identity(d: usize) -> Self {
        HermitianOperator { entries: linalg::identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    /// Real eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.entries)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &CMat {
        self.effects[i].matrix()
    }
}

/// Checks positivity and normalisation and wraps the effects.
pub fn validate_povm(effects: &[HermitianOperator]) -> Result<Povm> {
    let first = effects.first().ok_or(Error::Empty)?;
    let d = first.dim();
    let mut sum = linalg::zeros(d);
    for (i, e) in effects.iter().enumerate() {
        if e.dim() != d {
            return Err(Error::DimensionMismatch(format!("effect {i} has dim {}, expected {d}", e.dim())));
        }
        let worst = linalg::lambda_min(e.matrix());
        if worst < -PSD_FLOOR {
            return Err(Error::NegativeEffect { index: i, worst });
        }
        sum += e.matrix();
    }
    let deviation = linalg::max_abs(&(sum - linalg::identity(d)));
    if deviation > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { deviation });
    }
    Ok(Povm { effects: effects.to_vec() })
}

pub fn povm_from_matrices(ms: &[CMat]) -> Result<Povm> {
    let effects = ms.iter().cloned().map(HermitianOperator::new).collect::<Result<Vec<_>>>()?;
    validate_povm(&effects)
}

/// Each effect becomes t E_i + (1-t) I/k.
pub fn apply_white_noise(povm: &Povm, t: f64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&t) || t.is_nan() {
        return Err(Error::TOutOfRange(t));
    }
    let k = povm.outcomes() as f64;
    let id = linalg::identity(povm.dim()).scale((1.0 - t) / k);
    let effects =
        povm.effects.iter().map(|e| HermitianOperator { entries: e.matrix().scale(t) + &id }).collect::<Vec<_>>();
    validate_povm(&effects)
}

pub fn is_projective(povm: &Povm, tol: f64) -> bool {
    povm.effects.iter().all(|e| {
        let m = e.matrix();
        linalg::max_abs(&(m * m - m)) <= tol
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    a: HermitianOperator,
}

impl DichotomicObservable {
    pub fn new(a: HermitianOperator) -> Result<Self> {
        let ev = a.eigenvalues();
        let lo = ev[0];
        let hi = ev[ev.len() - 1];
        if lo < -1.0 - PSD_FLOOR || hi > 1.0 + PSD_FLOOR {
            let worst = if -lo > hi { lo } else { hi };
            return Err(Error::SpectrumOutOfRange(worst));
        }
        Ok(DichotomicObservable { a })
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.a.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.a
    }

    /// ((I + A)/2, (I - A)/2)
    pub fn povm(&self) -> Povm {
        povm_of(self)
    }

    /// Projector onto the +1 eigenspace when A is projective.
    pub fn plus_projector(&self) -> CMat {
        (linalg::identity(self.dim()) + self.matrix()).scale(0.5)
    }
}

pub fn povm_of(a: &DichotomicObservable) -> Povm {
    let id = linalg::identity(a.dim());
    let plus = (&id + a.matrix()).scale(0.5);
    let minus = (&id - a.matrix()).scale(0.5);
    Povm { effects: vec![HermitianOperator { entries: plus }, HermitianOperator { entries: minus }] }
}

pub fn observable_of(povm: &Povm) -> Result<DichotomicObservable> {
    if povm.outcomes() != 2 {
        return Err(Error::NotDichotomic(povm.outcomes()));
    }
    let a = povm.effect(0).scale(2.0) - linalg::identity(povm.dim());
    Ok(DichotomicObservable { a: HermitianOperator::from_hermitian_part(&a) })
}

/// Observable 2P - I of an orthogonal projector.
pub fn observable_from_projector(p: &CMat) -> Result<DichotomicObservable> {
    let id = linalg::identity(p.nrows());
    DichotomicObservable::new(HermitianOperator::from_hermitian_part(&(p.scale(2.0) - id)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    povms: Vec<Povm>,
}

impl MeasurementSet {
    pub fn new(povms: Vec<Povm>) -> Result<Self> {
        let first = povms.first().ok_or(Error::Empty)?;
        let d = first.dim();
        if let Some((x, p)) = povms.iter().enumerate().find(|(_, p)| p.dim() != d) {
            return Err(Error::DimensionMismatch(format!("povm {x} has dim {}, expected {d}", p.dim())));
        }
        Ok(MeasurementSet { povms })
    }

    pub fn from_observables(obs: &[DichotomicObservable]) -> Result<Self> {
        Self::new(obs.iter().map(povm_of).collect())
    }

    pub fn dim(&self) -> usize {
        self.povms[0].dim()
    }

    pub fn g(&self) -> usize {
        self.povms.len()
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.povms.iter().map(Povm::outcomes).collect()
    }

    pub fn is_dichotomic(&self) -> bool {
        self.povms.iter().all(|p| p.outcomes() == 2)
    }

    pub fn observables(&self) -> Result<Vec<DichotomicObservable>> {
        self.povms.iter().map(observable_of).collect()
    }

    pub fn with_noise(&self, t: f64) -> Result<Self> {
        let povms = self.povms.iter().map(|p| apply_white_noise(p, t)).collect::<Result<Vec<_>>>()?;
        Ok(MeasurementSet { povms })
    }
}

/// g pairwise anticommuting Hermitian unitaries on 2^ceil((g-1)/2) dimensions.
///
/// Order is Z..Z first, then for each qubit slot j the pair Z^{⊗j}⊗X⊗I.. and
/// Z^{⊗j}⊗Y⊗I.., so g = 2 gives (Z, X) and g = 3 gives (Z, X, Y).
pub fn pauli_basis(g: usize) -> Vec<DichotomicObservable> {
    assert!(g >= 1, "pauli_basis needs g >= 1");
    let n = g / 2; // ceil((g - 1) / 2)
    let chain = |slot: Option<(usize, CMat)>| -> CMat {
        let mut m = linalg::identity(1);
        for q in 0..n {
            let f = match &slot {
                None => linalg::pauli_z(),
                Some((j, _)) if q < *j => linalg::pauli_z(),
                Some((j, p)) if q == *j => p.clone(),
                Some(_) => linalg::identity(2),
            };
            m = linalg::kron(&m, &f);
        }
        m
    };
    let mut out = vec![chain(None)];
    for j in 0..n {
        out.push(chain(Some((j, linalg::pauli_x()))));
        out.push(chain(Some((j, linalg::pauli_y()))));
    }
    out.truncate(g);
    out.into_iter().map(|m| DichotomicObservable { a: HermitianOperator { entries: m } }).collect()
}

// JSON: complex entries are [re, im] pairs, row-major.

fn matrix_to_json(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix rows must form a square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(&self.entries).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = matrix_from_json(&rows).map_err(serde::de::Error::custom)?;
        HermitianOperator::new(m).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PovmJson {
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl Serialize for Povm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PovmJson { dim: self.dim(), effects: self.effects.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PovmJson::deserialize(d)?;
        let p = validate_povm(&raw.effects).map_err(serde::de::Error::custom)?;
        if p.dim() != raw.dim {
            return Err(serde::de::Error::custom(format!("declared dim {} but effects are {}", raw.dim, p.dim())));
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct SetJson {
    dim: usize,
    outcome_counts: Vec<usize>,
    povms: Vec<Povm>,
}

impl Serialize for MeasurementSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetJson { dim: self.dim(), outcome_counts: self.outcome_counts(), povms: self.povms.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurementSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SetJson::deserialize(d)?;
        let set = MeasurementSet::new(raw.povms).map_err(serde::de::Error::custom)?;
        if set.dim() != raw.dim || set.outcome_counts() != raw.outcome_counts {
            return Err(serde::de::Error::custom("dim or outcome_counts disagree with the listed POVMs"));
        }
        Ok(set)
    }
}
