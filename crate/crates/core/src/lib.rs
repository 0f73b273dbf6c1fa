//! DRAM placement and timing simulation for triangular block interleavers.

pub mod dram;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod mapping;
pub mod oracle;

pub use error::{Error, Result};
