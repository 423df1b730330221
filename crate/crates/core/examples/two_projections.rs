//! Two Haar-random projections: Jordan lower bound, compression upper bound and,
//! in small dimension, the SDP value in between.
//!
//! `cargo run --release --example two_projections -- 60 0.5`

use std::f64::consts::FRAC_PI_4;

use incompat::angles::{compressed_pair_upper_bound, compression_upper_bound};
use incompat::criteria::{jordan_tau_lower, JORDAN_TOL};
use incompat::sampling::{random_projective_observable, SeededRng};
use incompat::sdp::tau_dichotomic;

fn main() -> incompat::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(40);
    let alpha: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.5);
    let r = (alpha * d as f64).floor() as usize;
    let mut rng = SeededRng::new(1, 0);
    let a = random_projective_observable(d, r, &mut rng)?;
    let b = random_projective_observable(d, r, &mut rng)?;
    let lower = jordan_tau_lower(&a.plus_projector(), &b.plus_projector(), JORDAN_TOL)?;
    let upper = compression_upper_bound(&a, &b, FRAC_PI_4)?;
    let pair = compressed_pair_upper_bound(&a, &b)?;
    println!("d={d} rank={r}");
    println!("jordan lower       {:.6}", lower.value);
    println!("compression upper  {:.6}", upper.value);
    println!("compressed pair    {:.6}", pair.value);
    if d <= 10 {
        println!("sdp                {:.6}", tau_dichotomic(&[a, b])?.lower);
    }
    println!("1/sqrt(2)          {:.6}", std::f64::consts::FRAC_1_SQRT_2);
    Ok(())
}
