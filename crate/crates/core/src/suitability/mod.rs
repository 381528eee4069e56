//! Region classification, per-region weighted overlay, four-level
//! categorization, synthesis and parking augmentation.

mod levels;
mod overlay;
mod parking;
mod region;
mod spec;

pub use levels::{levelize, synthesize, LevelGrid, LevelMethod, LEVEL_CODES};
pub use overlay::{overlay, run_model};
pub use parking::{augment_with_parking, extract_candidate_sites, Augmentation};
pub use region::{classify_regions, RegionClass, RegionMap, RegionThresholds, MILE_M};
pub use spec::{layers, Criterion, SuitabilitySpec};
