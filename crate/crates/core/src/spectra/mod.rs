//! Reference spectral laws, empirical spectra, and induced-POVM threshold curves.

pub mod quadrature;

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::HermitianOperator;
use quadrature::{edge_integrand, gk15, integrate_edges, theta_of, ABS_TOL};

pub const CDF_GRID: usize = 10_000;
pub const ATOM_TOL: f64 = 1e-9;

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Atoms plus an absolutely continuous part on a compact support.
#[derive(Clone)]
pub struct SpectralLaw {
    atoms: Vec<(f64, f64)>,
    support: (f64, f64),
    density: Option<Density>,
    table: Arc<OnceLock<Vec<f64>>>,
}

impl fmt::Debug for SpectralLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralLaw")
            .field("atoms", &self.atoms)
            .field("support", &self.support)
            .field("has_density", &self.density.is_some())
            .finish()
    }
}

impl SpectralLaw {
    /// `support` is the interval carrying the density; a degenerate interval means no density.
    pub fn new(atoms: Vec<(f64, f64)>, support: (f64, f64), density: Option<Density>) -> Self {
        let atoms = atoms.into_iter().filter(|&(_, m)| m > 0.0).collect();
        let density = density.filter(|_| support.1 > support.0);
        SpectralLaw { atoms, support, density, table: Arc::new(OnceLock::new()) }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    pub fn density(&self, x: f64) -> f64 {
        match &self.density {
            Some(f) if x > self.support.0 && x < self.support.1 => f(x),
            _ => 0.0,
        }
    }

    /// ∫ x^p dμ.
    pub fn moment(&self, p: u32) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|&(x, m)| m * x.powi(p as i32)).sum();
        let cont = match &self.density {
            Some(f) => {
                let g = |x: f64| f(x) * x.powi(p as i32);
                integrate_edges(&g, self.support.0, self.support.1, PI, ABS_TOL)?
            }
            None => 0.0,
        };
        Ok(atoms + cont)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.moment(0)
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    fn table(&self) -> &[f64] {
        self.table.get_or_init(|| {
            let mut out = vec![0.0; CDF_GRID + 1];
            if let Some(f) = &self.density {
                let (a, b) = self.support;
                let g = edge_integrand(f.as_ref(), a, b);
                let dt = PI / CDF_GRID as f64;
                for j in 0..CDF_GRID {
                    out[j + 1] = out[j] + gk15(&g, j as f64 * dt, (j + 1) as f64 * dt).0;
                }
            }
            out
        })
    }

    /// Mass of the continuous part on (−∞, x].
    pub fn continuous_cdf(&self, x: f64) -> f64 {
        let Some(f) = &self.density else { return 0.0 };
        let (a, b) = self.support;
        let table = self.table();
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return table[CDF_GRID];
        }
        let dt = PI / CDF_GRID as f64;
        let theta = theta_of(x, a, b);
        let j = ((theta / dt) as usize).min(CDF_GRID - 1);
        let g = edge_integrand(f.as_ref(), a, b);
        table[j] + gk15(&g, j as f64 * dt, theta).0
    }

    /// μ((−∞, x]), with atoms within ATOM_TOL of x counted.
    pub fn cdf(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|&&(l, _)| l <= x + ATOM_TOL).map(|&(_, m)| m).sum();
        atoms + self.continuous_cdf(x)
    }

    /// μ((−∞, x)), with atoms within ATOM_TOL of x excluded.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|&&(l, _)| l < x - ATOM_TOL).map(|&(_, m)| m).sum();
        atoms + self.continuous_cdf(x)
    }

    /// Smallest x with cdf(x) ≥ u, by bisection.
    pub fn quantile(&self, u: f64) -> f64 {
        let lo_atom = self.atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
        let hi_atom = self.atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
        let (mut lo, mut hi) = (self.support.0.min(lo_atom) - 1.0, self.support.1.max(hi_atom));
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSpectrum {
    eigenvalues: Vec<f64>,
}

impl EmpiricalSpectrum {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.total_cmp(b));
        EmpiricalSpectrum { eigenvalues: values }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn empirical_spectrum(h: &HermitianOperator) -> EmpiricalSpectrum {
    EmpiricalSpectrum::from_values(h.eigenvalues())
}

/// sup_x |F_emp(x) − F_law(x)|, checking both one-sided limits at every eigenvalue.
pub fn ks_distance(emp: &EmpiricalSpectrum, law: &SpectralLaw) -> Result<f64> {
    let (a, b) = law.support();
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure("law support must be finite".into()));
    }
    let ev = emp.eigenvalues();
    let n = ev.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < ev.len() {
        let mut j = i;
        while j < ev.len() && ev[j] == ev[i] {
            j += 1;
        }
        let x = ev[i];
        worst = worst.max((i as f64 / n - law.cdf_left(x)).abs());
        worst = worst.max((j as f64 / n - law.cdf(x)).abs());
        i = j;
    }
    if ev.is_empty() {
        return Err(Error::Empty);
    }
    Ok(worst)
}

/// Free sum of g symmetric Bernoullis: density g/(2π(g² − x²))·√(4(g−1) − x²).
pub fn kesten_mckay(g: usize) -> Result<SpectralLaw> {
    if g < 2 {
        return Err(Error::ParameterOutOfRange(format!("kesten_mckay needs g >= 2, got {g}")));
    }
    let gf = g as f64;
    let r2 = 4.0 * (gf - 1.0);
    let r = r2.sqrt();
    let density: Density = Arc::new(move |x: f64| gf / (2.0 * PI * (gf * gf - x * x)) * (r2 - x * x).max(0.0).sqrt());
    Ok(SpectralLaw::new(Vec::new(), (-r, r), Some(density)))
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// E⟨φ|U*ΔU|φ⟩^p for a balanced ±1 diagonal Δ and Haar U in even dimension d.
pub fn haar_projection_moment(d: usize, p: u32) -> Result<f64> {
    if d < 2 || d % 2 == 1 {
        return Err(Error::ParameterOutOfRange(format!("d must be even and >= 2, got {d}")));
    }
    if p % 2 == 1 {
        return Ok(0.0);
    }
    let q = (p / 2) as u64;
    let d = d as u64;
    Ok(binomial(d / 2 + q - 1, q) / binomial(d + 2 * q - 1, 2 * q))
}

fn phi_raw(s: f64, t: f64) -> (f64, f64) {
    let mid = s + t - 2.0 * s * t;
    let rad = 2.0 * (s * t * (1.0 - s) * (1.0 - t)).max(0.0).sqrt();
    ((mid - rad).clamp(0.0, 1.0), (mid + rad).clamp(0.0, 1.0))
}

/// φ±(s, t) = s + t − 2st ± 2√(st(1−s)(1−t)).
pub fn phi_pm(s: f64, t: f64) -> Result<(f64, f64)> {
    for v in [s, t] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("{v} not in (0,1)")));
        }
    }
    Ok(phi_raw(s, t))
}

/// Limiting spectrum of an effect of a random induced POVM with k outcomes and ratio c = d/(kn).
pub fn nu_kc(k: usize, c: f64) -> Result<SpectralLaw> {
    if k < 2 || !(c > 0.0 && c <= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need k >= 2 and c in (0,1], got k={k}, c={c}")));
    }
    let kf = k as f64;
    let atoms = vec![(0.0, (1.0 - 1.0 / (c * kf)).max(0.0)), (1.0, (1.0 - 1.0 / c + 1.0 / (c * kf)).max(0.0))];
    let (lo, hi) = phi_raw(c, 1.0 / kf);
    let density: Density =
        Arc::new(move |x: f64| ((x - lo) * (hi - x)).max(0.0).sqrt() / (2.0 * PI * c * x * (1.0 - x)));
    let density = (hi - lo > 1e-12).then_some(density);
    Ok(SpectralLaw::new(atoms, (lo, hi), density))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InducedThresholds {
    /// Above: asymptotically incompatible (any g).
    pub witness_c: f64,
    /// Below: asymptotically compatible, Jordan criterion (g = 2).
    pub jordan_c_g2: f64,
    /// Below: asymptotically compatible, noise content (g = 2).
    pub noise_c_g2: f64,
    /// Below: asymptotically compatible, noise content (any g).
    pub noise_c_g: f64,
}

pub fn induced_thresholds(k: usize, g: usize) -> Result<InducedThresholds> {
    if k < 2 || g < 2 {
        return Err(Error::ParameterOutOfRange(format!("need k, g >= 2, got k={k}, g={g}")));
    }
    let (k, g) = (k as f64, g as f64);
    let s2 = 2f64.sqrt();
    let witness_c = 4.0 * (k - 1.0) * g / ((k - 1.0).powi(2) * g * g - 2.0 * (k - 2.0) * (k - 1.0) * g + k * k);
    let jordan_c_g2 = ((3.0 - 2.0 * s2) * k + 2.0 * (s2 - 1.0)) / (k * k + 4.0 * k - 4.0);
    let noise_c_g2 = 1.0 / (6.0 * k + 4.0 * ((k - 1.0) * (2.0 * k - 1.0)).sqrt() - 4.0);
    let noise_c_g =
        1.0 / g / (2.0 * g * (k - 1.0) + 2.0 * ((g - 1.0) * (k - 1.0) * (g * (k - 1.0) + 1.0)).sqrt() - k + 2.0);
    Ok(InducedThresholds { witness_c, jordan_c_g2, noise_c_g2, noise_c_g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn kesten_mckay_examples() {
        let km = kesten_mckay(2).unwrap();
        assert!((km.density(0.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        for x in [-1.9, -0.3, 1.2] {
            assert!((km.density(x) - 1.0 / (PI * (4.0 - x * x).sqrt())).abs() < 1e-12);
        }
        assert!((kesten_mckay(5).unwrap().support().1 - 4.0).abs() < 1e-15);
        for g in [2, 3, 7] {
            let km = kesten_mckay(g).unwrap();
            assert!((km.total_mass().unwrap() - 1.0).abs() < 1e-6);
            assert!((km.moment(2).unwrap() - g as f64).abs() < 1e-4);
            assert!((km.density(1.1) - km.density(-1.1)).abs() < 1e-15);
        }
        assert!(kesten_mckay(1).is_err());
    }

    #[test]
    fn moment_examples() {
        assert_eq!(haar_projection_moment(6, 3).unwrap(), 0.0);
        assert!((haar_projection_moment(2, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((haar_projection_moment(4, 4).unwrap() - 3.0 / 35.0).abs() < 1e-15);
        assert!(haar_projection_moment(3, 2).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_pm(0.5, 0.5).unwrap(), (0.0, 1.0));
        let (a, b) = phi_pm(0.25, 0.5).unwrap();
        let r = 2.0 * 0.046875f64.sqrt();
        assert!((a - (0.5 - r)).abs() < 1e-15 && (b - (0.5 + r)).abs() < 1e-15);
        assert!((a - 0.0670).abs() < 1e-4);
        assert!(phi_pm(1.0, 0.5).is_err());
    }

    #[test]
    fn nu_examples() {
        let nu = nu_kc(2, 1.0).unwrap();
        assert!(!nu.has_density());
        assert_eq!(nu.atoms(), &[(0.0, 0.5), (1.0, 0.5)]);
        let nu = nu_kc(2, 0.25).unwrap();
        assert!(nu.atoms().is_empty());
        assert!((nu.support().0 - 0.0670).abs() < 1e-4 && (nu.support().1 - 0.9330).abs() < 1e-4);
        assert!((nu.total_mass().unwrap() - 1.0).abs() < 1e-6);
        assert!(nu_kc(1, 0.5).is_err() && nu_kc(2, 1.5).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = induced_thresholds(2, 2).unwrap();
        assert!((t.witness_c - 1.0).abs() < 1e-15);
        assert!((t.jordan_c_g2 - (2.0 - 2f64.sqrt()) / 4.0).abs() < 1e-15);
        assert!((t.noise_c_g2 - 1.0 / (8.0 + 4.0 * 3f64.sqrt())).abs() < 1e-15);
        let k = 1e4 as usize;
        assert!((k as f64 * induced_thresholds(k, 2).unwrap().witness_c / 8.0 - 1.0).abs() < 0.01);
        let g = 1e4 as usize;
        assert!((4.0 * (g * g) as f64 * induced_thresholds(2, g).unwrap().noise_c_g - 1.0).abs() < 0.01);
    }

    #[test]
    fn empirical_examples() {
        let e = empirical_spectrum(&HermitianOperator::identity(3));
        assert_eq!(e.eigenvalues(), &[1.0, 1.0, 1.0]);
        let z = empirical_spectrum(&HermitianOperator::new(linalg::pauli_z()).unwrap());
        assert_eq!(z.dim(), 2);
        let law = SpectralLaw::new(vec![(-1.0, 0.5), (1.0, 0.5)], (0.0, 0.0), None);
        assert!(ks_distance(&z, &law).unwrap() < 1e-12);
    }

    #[test]
    fn quantile_sample_is_close() {
        let law = kesten_mckay(3).unwrap();
        let n = 1000;
        let emp = EmpiricalSpectrum::from_values((0..n).map(|i| law.quantile((i as f64 + 0.5) / n as f64)).collect());
        assert!(ks_distance(&emp, &law).unwrap() <= 1.0 / n as f64 + 1e-3);
    }
}
