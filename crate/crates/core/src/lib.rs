//! Semantic action abstraction and sequential pattern mining for canvas interaction logs.

pub mod abstraction;
pub mod error;
pub mod ingest;
pub mod mining;
pub mod model;
pub mod stats;
pub mod synth;
pub mod timeline;

pub use error::{Error, Result};
