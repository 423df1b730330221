//! Two mutually unbiased bases: bisection on the joint-measurement SDP against
//! the closed form ½(1 + 1/(√d + 1)).

use incompat::linalg::{fourier, identity};
use incompat::measurement::MeasurementSet;
use incompat::sampling::basis_measurement;
use incompat::sdp::tau_general;

fn main() -> incompat::Result<()> {
    for d in 2..=5 {
        let set = MeasurementSet::new(vec![basis_measurement(&identity(d)), basis_measurement(&fourier(d))])?;
        let b = tau_general(&set, 1e-5)?;
        let closed = 0.5 * (1.0 + 1.0 / ((d as f64).sqrt() + 1.0));
        println!("d={d}: tau in [{:.6}, {:.6}], closed form {closed:.6}", b.lower, b.upper);
    }
    Ok(())
}
