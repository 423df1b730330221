//! Witness W_x = s A_x / d for g random balanced projections, with s taken from
//! the largest sign-sum eigenvalue.

use incompat::criteria::{colinear_projection_witness, max_sign_lambda};
use incompat::sampling::{random_projective_observable, SeededRng};

fn main() -> incompat::Result<()> {
    let (d, g) = (24, 12);
    let mut rng = SeededRng::new(5, 0);
    let a: Vec<_> = (0..g).map(|_| random_projective_observable(d, d / 2, &mut rng)).collect::<Result<_, _>>()?;
    let l = max_sign_lambda(&a)?;
    let w = colinear_projection_witness(&a, 1.0 / l)?;
    let gf = g as f64;
    println!("max sign-sum eigenvalue {l:.4} (free-probability edge {:.4})", 2.0 * (gf - 1.0).sqrt());
    println!("witness: {}, certifies incompatibility for t > {:.4}", w.is_witness, w.certified_t_threshold);
    println!(
        "reference points: 2 sqrt(g-1)/g = {:.4}, 31/sqrt(g) = {:.4}",
        2.0 * (gf - 1.0).sqrt() / gf,
        31.0 / gf.sqrt()
    );
    Ok(())
}
