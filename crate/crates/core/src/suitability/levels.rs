use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RegionClass;
use crate::error::{Error, Result};
use crate::raster::{CategoricalGrid, Grid};

pub const LEVEL_CODES: [u32; 4] = [1, 2, 3, 4];

/// How composite scores are cut into four levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelMethod {
    /// Equal-count quartiles of the ranked cells.
    #[default]
    Quantile,
    /// Fixed breaks at 0.75, 0.5 and 0.25 on the [0, 1] score.
    EqualInterval,
}

/// Suitability levels 1 (most suitable) to 4, with 0 for nodata or outside
/// the modelled region.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid(CategoricalGrid);

impl LevelGrid {
    /// Rejects any code outside 0..=4. The code table is always 1..=4.
    pub fn new(grid: CategoricalGrid) -> Result<Self> {
        let geo = *grid.geo();
        CategoricalGrid::new(geo, grid.values().to_vec(), &LEVEL_CODES)
            .map(LevelGrid)
            .map_err(|_| {
                let c = grid.values().iter().find(|&&c| c > 4).copied().unwrap_or_default();
                Error::InvalidGrid(format!("level grid holds code {c}"))
            })
    }

    pub fn from_grid(grid: &Grid) -> Result<Self> {
        Self::new(CategoricalGrid::from_grid(grid)?)
    }

    pub fn as_categorical(&self) -> &CategoricalGrid {
        &self.0
    }

    pub fn values(&self) -> &[u32] {
        self.0.values()
    }

    /// `[count of 0, count of level 1, ..., count of level 4]`.
    pub fn histogram(&self) -> [usize; 5] {
        let mut h = [0; 5];
        for &c in self.0.values() {
            h[c as usize] += 1;
        }
        h
    }

    pub fn to_grid(&self) -> Grid {
        self.0.to_grid()
    }
}

pub fn levelize(composite: &Grid, method: LevelMethod) -> Result<LevelGrid> {
    let geo = *composite.geo();
    let mut cells: Vec<(usize, f64)> = (0..geo.len())
        .filter_map(|i| composite.valid(i).map(|v| (i, v)))
        .collect();
    let n = cells.len();
    if n < 4 {
        return Err(Error::TooFewCells(n));
    }
    let mut levels = vec![0u32; geo.len()];
    match method {
        LevelMethod::Quantile => {
            // score descending, then cell index ascending
            cells.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores").then(a.0.cmp(&b.0)));
            let mut start = 0;
            for (k, level) in LEVEL_CODES.iter().enumerate() {
                let remaining = n - start;
                let buckets_left = LEVEL_CODES.len() - k;
                let size = remaining.div_ceil(buckets_left);
                for &(i, _) in &cells[start..start + size] {
                    levels[i] = *level;
                }
                start += size;
            }
        }
        LevelMethod::EqualInterval => {
            for (i, v) in cells {
                levels[i] = if v >= 0.75 {
                    1
                } else if v >= 0.5 {
                    2
                } else if v >= 0.25 {
                    3
                } else {
                    4
                };
            }
        }
    }
    Ok(LevelGrid(CategoricalGrid::new(geo, levels, &LEVEL_CODES)?))
}

/// Mosaics per-region levels: each cell takes the level from the model of
/// its own region class, 0 where the region code is 0.
pub fn synthesize(
    levels_by_region: &BTreeMap<RegionClass, LevelGrid>,
    region_raster: &CategoricalGrid,
) -> Result<LevelGrid> {
    let geo = *region_raster.geo();
    for (region, lg) in levels_by_region {
        geo.check_aligned(lg.as_categorical().geo(), &format!("{region} levels"))?;
    }
    let mut out = vec![0u32; geo.len()];
    for (i, &code) in region_raster.values().iter().enumerate() {
        if code == 0 {
            continue;
        }
        let region =
            RegionClass::from_code(code).ok_or_else(|| Error::InvalidGrid(format!("unknown region code {code}")))?;
        let model = levels_by_region
            .get(&region)
            .ok_or_else(|| Error::MissingRegionModel(region.to_string()))?;
        out[i] = model.values()[i];
    }
    Ok(LevelGrid(CategoricalGrid::new(geo, out, &LEVEL_CODES)?))
}
