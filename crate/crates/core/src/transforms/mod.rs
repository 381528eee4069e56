//! Layer preprocessing kernels.

mod edt;
mod landcover;
mod quantile;
mod zones;

pub use edt::distance_transform;
pub use landcover::{classes, landcover_fractions, zonal_landcover_fractions, LandcoverFractions};
pub use quantile::{quantile_normalize, Direction};
pub use zones::{columns, paint_attribute, zonal_mean, zonal_min, AttributeTable, ZoneSet};
