//! Capacitance extraction and single-electron charge-transfer analysis for
//! buried double-dot devices read out by SETs.

pub mod analysis;
pub mod capsolve;
pub mod charging;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod numfmt;
pub mod units;

pub use error::{Error, Result};
