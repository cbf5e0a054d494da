//! File formats and command-line front end for the `redmax-core` units.

pub mod cli;
pub mod formats;

pub use redmax_core as core;
