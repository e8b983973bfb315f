pub mod bayes;
pub mod data;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod frontier;
pub mod measures;
pub mod plugin;

pub use error::{Error, Result};
