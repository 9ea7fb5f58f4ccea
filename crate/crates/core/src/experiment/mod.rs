//! Monte Carlo campaigns.

pub mod campaign;
pub mod config;
pub mod report;

pub use campaign::*;
pub use config::*;
pub use report::*;
