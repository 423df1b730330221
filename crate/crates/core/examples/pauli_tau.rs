//! Compatibility degree of g anticommuting Pauli-type observables.
//!
//! `cargo run --example pauli_tau -- 6`

use incompat::measurement::pauli_basis;
use incompat::sdp::tau_dichotomic;

fn main() -> incompat::Result<()> {
    let g_max: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    println!("g  d  tau        1/sqrt(g)");
    for g in 2..=g_max {
        let obs = pauli_basis(g);
        let b = tau_dichotomic(&obs)?;
        println!("{g:<2} {:<2} {:.8} {:.8}", obs[0].dim(), b.lower, 1.0 / (g as f64).sqrt());
    }
    Ok(())
}
