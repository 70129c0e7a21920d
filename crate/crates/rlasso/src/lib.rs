//! Noise-blind sparse recovery via the pth-root LASSO and companion decoders.
//!
//! The crate bundles:
//! - dense linear algebra primitives sized for desk-scale experiments
//!   ([`matrix`], [`svd`]),
//! - seeded random measurement ensembles and signal models ([`ensembles`]),
//! - a primal-dual solver for the rLASSO, basis pursuit, quadratically
//!   constrained basis pursuit and the constrained LASSO ([`solver`]),
//! - closed-form tuning rules and recovery-error constants ([`tuning`]),
//! - a brute-force linear-programming oracle certifying null space
//!   properties and sharp recovery thresholds at small sizes ([`oracle`]),
//! - experiment orchestration with CSV output ([`experiment`]).

pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod prox;
pub mod rng;
pub mod simplex;
pub mod solver;
pub mod svd;
pub mod tuning;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, DenseVector, NormExponent, SupportSet};
pub use rng::RngSeed;
