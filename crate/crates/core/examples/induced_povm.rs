//! Effect spectrum of a random induced POVM against its limit law ν_{k,c}, and the
//! compatibility criteria applied to two such POVMs.

use incompat::criteria::{jordan_compatible, noise_content_compatible};
use incompat::measurement::MeasurementSet;
use incompat::sampling::{random_induced_povm, SeededRng};
use incompat::spectra::{empirical_spectrum, induced_thresholds, ks_distance, nu_kc, phi_pm};

fn main() -> incompat::Result<()> {
    let (d, k, n) = (64, 2, 128);
    let c = d as f64 / (k * n) as f64;
    let mut rng = SeededRng::new(3, 0);
    let m = random_induced_povm(d, k, n, &mut rng)?;
    let spec = empirical_spectrum(&m.effects()[0]);
    let (lo, hi) = phi_pm(c, 1.0 / k as f64)?;
    println!("c = {c}: support [{lo:.4}, {hi:.4}]");
    let ev = spec.eigenvalues();
    println!("empirical range [{:.4}, {:.4}]", ev[0], ev[ev.len() - 1]);
    println!("KS to nu_(k,c) {:.4}", ks_distance(&spec, &nu_kc(k, c)?)?);
    let other = random_induced_povm(d, k, n, &mut rng)?;
    println!("jordan criterion says compatible: {}", jordan_compatible(&m, &other)?);
    let set = MeasurementSet::new(vec![m, other])?;
    println!("noise content criterion says compatible: {}", noise_content_compatible(&set));
    let t = induced_thresholds(k, 2)?;
    println!("thresholds in c: witness {:.4}, jordan {:.4}, noise {:.4}", t.witness_c, t.jordan_c_g2, t.noise_c_g2);
    Ok(())
}
