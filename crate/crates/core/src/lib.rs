//! Information gain versus disturbance for quantum decoys.
//!
//! Alice hides decoys `(|j> + i|k>)/√2` among her message words `|j>` on an
//! `n`-dimensional channel. An eavesdropper who guesses message words with
//! mean fidelity `G` is caught on decoys with probability at least
//!
//! ```text
//! D(G) = 1/2 - (1/2n) (√G + √((n-1)(1-G)))²
//! ```
//!
//! This crate builds attacks ([`attacks`]), evaluates `G` and `D` both from
//! their definitions and as linear functionals of the attack's Choi state
//! ([`metrics`], [`choi`]), checks the bound and its tightness ([`tradeoff`]),
//! and simulates the protocol ([`protocol`]).

pub mod attacks;
pub mod choi;
pub mod cli;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod protocol;
pub mod tradeoff;

pub use attacks::{AttackSpec, GeneralizedMeasurement};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use tradeoff::{disturbance_bound, TradeoffPoint};
