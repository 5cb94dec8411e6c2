//! Numerical core for hierarchical rate splitting (HRS) over correlated MIMO
//! downlink channels.
//!
//! The crate is `no_std` and only needs an allocator. It covers:
//!
//! - [`channel`]: one-ring covariance construction for a uniform circular
//!   array and correlated Rayleigh draws with imperfect CSI.
//! - [`hrs`]: the two-layer precoder stack, power split and exact rates.
//! - [`similarity`] and [`cluster`]: projection-Frobenius similarity,
//!   agglomerative user clustering and the exhaustive small-N oracle.
//! - [`dataset`]: labeled sample generation, balancing, augmentation, splits.
//! - [`mlp`]: a float64 two-hidden-layer classifier trained with Adam.
//! - [`eval`]: baselines and boxplot statistics.
//!
//! File formats, configuration parsing and the CLI live in the `hrs-sim`
//! companion crate.
#![no_std]
#![warn(rust_2018_idioms, unused_qualifications)]

extern crate alloc;

pub mod channel;
pub mod cluster;
pub mod dataset;
mod error;
pub mod eval;
pub mod hrs;
pub mod linalg;
pub mod mlp;
pub mod partition;
pub mod rng;
pub mod similarity;

pub use error::{Error, Result};
pub use num_complex::Complex64;
