pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod moments;
pub mod quantum;
pub mod serde_util;

pub use error::{Result, UrError};
