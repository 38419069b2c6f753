//! Extreme-value QQ and mean excess plots with confidence bands built from
//! their weak limits.

pub mod bands;
pub mod cli;
pub mod data;
pub mod distributions;
pub mod error;
pub mod limitsim;
pub mod numeric;
pub mod output;
pub mod plotsets;
pub mod rng;

pub use data::{ingest, InputFormat, OrderedSample, TailIndexEstimate};
pub use error::{Error, Result};
pub use rng::RngStream;
