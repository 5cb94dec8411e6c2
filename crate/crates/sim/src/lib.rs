//! Std companion to `hrs-core`: configuration files, binary dataset and
//! checkpoint formats, parallel pipeline drivers and report writers.

pub mod config;
pub mod error;
pub mod format;
pub mod pipeline;
pub mod report;

pub use error::{Result, SimError};
