//! Speech-driven lip motion synthesis toolkit.
//!
//! This crate contains the algorithmic core: dense linear algebra, seeded
//! randomness, recurrent sequence networks (LSTM/BLSTM) with analytic
//! backward passes, adversarial and regression training schedules, speech
//! feature extraction, a synthetic paired corpus with a known ground-truth
//! mapping, and the objective-evaluation machinery (PCA, Parzen-window
//! log-likelihood, functional-feature emotion classification, preference
//! statistics).
//!
//! The crate is `no_std` + `alloc`: it performs no IO and uses [`libm`] for
//! transcendental functions, so results are bit-identical across platforms.
//! File formats and the command-line surface live in the companion `lipsyn`
//! crate.
//!
//! Everything is 64-bit floating point and deterministic given a root seed:
//! the same seed yields the same corpus, the same parameter trajectories and
//! the same reports on every platform.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod activation;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod matrix;
pub mod nets;
pub mod num;
pub mod rng;
pub mod speech;
pub mod synth;
pub mod train;

pub use error::Error;
pub use matrix::Matrix;
pub use rng::SeededRng;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
