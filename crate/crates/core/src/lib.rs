pub mod adversarial;
pub mod cli;
pub mod container;
pub mod dataset;
pub mod decompose;
pub mod error;
pub mod forecast;
pub mod frame;
pub mod metrics;
pub mod models;
pub mod selection;
pub mod synthetic;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
