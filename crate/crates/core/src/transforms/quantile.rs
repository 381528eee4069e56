use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Grid;

/// Which end of a criterion's value range is preferable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "higher")]
    HigherBetter,
    /// Small values (short distances) preferred; scores are reflected.
    #[serde(rename = "nearer")]
    NearerBetter,
}

/// Rank-based normalization to (0, 1) using the Hazen plotting position
/// `(rank - 0.5) / n`, with tied values sharing their average rank.
/// `NearerBetter` reflects the score to `1 - score`. Nodata stays nodata.
pub fn quantile_normalize(layer: &Grid, direction: Direction) -> Result<Grid> {
    let mut cells: Vec<(usize, f64)> = layer
        .values()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v != layer.nodata())
        .map(|(i, &v)| (i, v))
        .collect();
    if cells.is_empty() {
        return Err(Error::AllNodata);
    }
    // partial_cmp so that 0.0 and -0.0 tie; values are finite
    cells.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("grid values are finite"));

    let n = cells.len() as f64;
    let mut out = layer.values().to_vec();
    let mut start = 0;
    while start < cells.len() {
        let mut end = start + 1;
        while end < cells.len() && cells[end].1 == cells[start].1 {
            end += 1;
        }
        // 1-based ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        let score = (rank - 0.5) / n;
        let score = match direction {
            Direction::HigherBetter => score,
            Direction::NearerBetter => 1.0 - score,
        };
        for &(i, _) in &cells[start..end] {
            out[i] = score;
        }
        start = end;
    }
    Grid::new(*layer.geo(), layer.nodata(), out)
}
