//! Optimal witness for a pair of random qutrit bases, checked against the
//! noisy joint-measurability test on both sides of 1/pairing.

use incompat::measurement::MeasurementSet;
use incompat::sampling::{random_basis_measurement, SeededRng};
use incompat::sdp::{joint_feasible, witness_search};

fn main() -> incompat::Result<()> {
    let mut rng = SeededRng::new(42, 0);
    let set = MeasurementSet::new(vec![random_basis_measurement(3, &mut rng), random_basis_measurement(3, &mut rng)])?;
    let cert = witness_search(&set)?;
    let t = 1.0 / cert.pairing;
    println!("pairing {:.6}, certifies incompatibility: {}", cert.pairing, cert.certifies());
    for probe in [t - 1e-3, t + 1e-3] {
        let (ok, _) = joint_feasible(&set, probe.clamp(0.0, 1.0))?;
        println!("t = {probe:.6}: jointly measurable = {ok}");
    }
    Ok(())
}
