pub mod accel;
pub mod config;
pub mod densela;
pub mod error;
pub mod metrics;
pub mod models;
pub mod report;
pub mod schemes;
pub mod sweep;

pub use error::{Error, Result};
