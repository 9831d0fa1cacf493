pub mod averaging;
pub mod cli;
pub mod config;
pub mod error;
pub mod measures;
pub mod numeric;
pub mod potential;
pub mod sft;
pub mod thermo;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
