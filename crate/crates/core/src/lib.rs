//! Site-suitability engine for EV charging infrastructure: raster and
//! vector ingest, layer transforms, per-region weighted overlay, image
//! metrics, paired-tile export and a synthetic scenario generator.

pub mod dataset;
pub mod error;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod scenario;
pub mod suitability;
pub mod transforms;
pub mod vector;

pub use error::{Error, ErrorClass, Result};
