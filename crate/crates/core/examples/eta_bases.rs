//! η for random bases: exact enumeration, the two-basis closed form and the
//! sampled lower bound, with the resulting incompatibility thresholds.

use incompat::criteria::{eta, eta_g2, eta_incompatibility_threshold, eta_lower_sampled};
use incompat::sampling::{haar_unitary, SeededRng};

fn main() -> incompat::Result<()> {
    let mut rng = SeededRng::new(9, 0);
    for d in [8, 64, 256] {
        let u = haar_unitary(d, &mut rng);
        let e = eta_g2(&u);
        let t = eta_incompatibility_threshold(e, d, 2)?;
        let predicted = 0.5 * (1.0 + (3.0 * (d as f64).ln() / d as f64).sqrt());
        println!("two bases d={d}: eta {e:.5}, threshold {t:.5}, 1/2(1+sqrt(3 log d/d)) = {predicted:.5}");
    }
    let us: Vec<_> = (0..3).map(|_| haar_unitary(8, &mut rng)).collect();
    let exact = eta(&us)?;
    let sampled = eta_lower_sampled(&us, 2000, &mut rng)?;
    println!("three bases d=8: exact {exact:.5}, sampled lower bound {sampled:.5}");
    println!("threshold {:.5}", eta_incompatibility_threshold(exact, 8, 3)?);
    Ok(())
}
