pub mod bsm;
pub mod cli;
pub mod config;
pub mod erasure;
pub mod error;
pub mod gsm;
pub mod network;
pub mod pauli;
pub mod presets;
pub mod report;
pub mod stabilizer;
pub mod stats;
pub mod syndrome;
pub mod threshold;
pub mod unionfind;
pub mod verify;

pub use error::{Error, Result};
