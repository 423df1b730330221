//! Closed-form bounds on the minimal compatibility degree, next to the SDP value
//! of the extremal example.

use incompat::criteria::{best_lower, bound_library};
use incompat::measurement::pauli_basis;
use incompat::sdp::tau_dichotomic;

fn main() -> incompat::Result<()> {
    for (d, g) in [(2, 2), (2, 3), (4, 5), (8, 7)] {
        let bounds = bound_library(d, g, &vec![2; g]);
        println!("d={d} g={g}");
        for b in &bounds {
            println!(
                "  {:<12} {:?} {:.6}{}",
                format!("{:?}", b.source),
                b.kind,
                b.value,
                if b.tight { " (tight)" } else { "" }
            );
        }
        println!("  best lower {:.6}", best_lower(&bounds));
        if pauli_basis(g)[0].dim() == d {
            println!("  sdp on Pauli set {:.6}", tau_dichotomic(&pauli_basis(g))?.lower);
        }
    }
    Ok(())
}
