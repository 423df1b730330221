//! Principal angles between two Haar-random half-dimensional subspaces, binned,
//! next to the uniform limit on [0, π/2].

use std::f64::consts::FRAC_PI_2;

use incompat::angles::{lambda_pm, principal_angles};
use incompat::sampling::{random_subspace, SeededRng};

fn main() -> incompat::Result<()> {
    let d = 400;
    let mut rng = SeededRng::new(4, 0);
    let e = random_subspace(d, d / 2, &mut rng)?;
    let f = random_subspace(d, d / 2, &mut rng)?;
    let spec = principal_angles(&e, &f)?;
    let (lm, lp) = lambda_pm(0.5, 0.5)?;
    println!("{} angles, cos² support [{lm}, {lp}]", spec.angles.len());
    let bins = 10;
    let mut counts = vec![0usize; bins];
    for t in &spec.angles {
        counts[((t / FRAC_PI_2 * bins as f64) as usize).min(bins - 1)] += 1;
    }
    for (i, c) in counts.iter().enumerate() {
        println!("{:.3} {:>4} {}", (i as f64 + 0.5) * FRAC_PI_2 / bins as f64, c, "#".repeat(c / 2));
    }
    Ok(())
}
