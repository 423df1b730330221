//! Kesten-McKay law against the spectrum of a random sign sum of projections,
//! plus the exact Haar moments.

use incompat::linalg;
use incompat::measurement::HermitianOperator;
use incompat::sampling::{random_projective_observable, SeededRng};
use incompat::spectra::{empirical_spectrum, haar_projection_moment, kesten_mckay, ks_distance};

fn main() -> incompat::Result<()> {
    let (d, g) = (200, 3);
    let mut rng = SeededRng::new(2, 0);
    let mut sum = linalg::zeros(d);
    for _ in 0..g {
        let a = random_projective_observable(d, d / 2, &mut rng)?;
        sum += a.matrix().scale(rng.sign());
    }
    let spec = empirical_spectrum(&HermitianOperator::from_hermitian_part(&sum));
    let law = kesten_mckay(g)?;
    let ev = spec.eigenvalues();
    println!(
        "d={d} g={g}: KS {:.4}, lambda_max {:.4}, edge {:.4}",
        ks_distance(&spec, &law)?,
        ev[ev.len() - 1],
        law.support().1
    );
    println!("p  E X^p (d=8)  lemma bound");
    for p in (2..=10).step_by(2) {
        let bound = (1..=p / 2).map(f64::from).product::<f64>() * (2.0f64 / 8.0).powi(p as i32 / 2);
        println!("{p:<2} {:.3e}   {bound:.3e}", haar_projection_moment(8, p)?);
    }
    Ok(())
}
