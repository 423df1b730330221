//! Compatibility degrees, incompatibility witnesses and random-measurement
//! experiments for finite-dimensional quantum measurements.
//!
//! The modules follow the data flow: [`measurement`] holds POVMs and observables,
//! [`sampling`] draws them from Haar-type ensembles, [`sdp`] computes compatibility
//! degrees and optimal witnesses, [`criteria`] and [`angles`] give closed-form bounds,
//! [`spectra`] the limiting spectral laws, and [`harness`] runs seeded experiments.
//!
//! Each capability has a runnable example:
//!
//! ```text
//! cargo run --release --example pauli_tau
//! cargo run --release --example mub_pair
//! cargo run --release --example witness
//! cargo run --release --example bounds
//! cargo run --release --example two_projections -- 60 0.5
//! cargo run --release --example principal_angles
//! cargo run --release --example colinear_witness
//! cargo run --release --example eta_bases
//! cargo run --release --example induced_povm
//! cargo run --release --example spectral_laws
//! cargo run --release --example run_experiment -- crates/core/configs/two_bases.json
//! ```
//!
//! ```
//! use incompat::measurement::pauli_basis;
//! use incompat::sdp::tau_dichotomic;
//!
//! let tau = tau_dichotomic(&pauli_basis(3)).unwrap();
//! assert!((tau.lower - 1.0 / 3f64.sqrt()).abs() < 1e-5);
//! ```

pub mod angles;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod sampling;
pub mod sdp;
pub mod spectra;

pub use error::{Error, Result};
