use std::collections::BTreeMap;

use crate::error::Result;
use crate::raster::{CategoricalGrid, Grid, DEFAULT_NODATA};

/// Land-cover classes produced by the upstream classifier.
pub mod classes {
    pub const DEVELOPED: u32 = 1;
    pub const BARREN: u32 = 2;
    pub const GREEN: u32 = 3;
    pub const WATER: u32 = 4;
}

#[derive(Debug, Clone)]
pub struct LandcoverFractions {
    pub developed: Grid,
    pub underdeveloped: Grid,
}

/// Share of classified cells in the `(2r+1)²` window around each cell whose
/// code is in `developed_codes`. Cells with code 0 are unclassified: they
/// are left out of every window and get nodata themselves.
pub fn landcover_fractions(
    landcover: &CategoricalGrid,
    developed_codes: &[u32],
    window_radius: usize,
) -> LandcoverFractions {
    let geo = *landcover.geo();
    let (w, h) = (geo.width, geo.height);

    // summed-area tables with a zero border row and column
    let sw = w + 1;
    let mut valid = vec![0u32; sw * (h + 1)];
    let mut dev = vec![0u32; sw * (h + 1)];
    for row in 0..h {
        for col in 0..w {
            let code = landcover.get(col, row);
            let v = (code != 0) as u32;
            let d = (code != 0 && developed_codes.contains(&code)) as u32;
            let i = (row + 1) * sw + col + 1;
            valid[i] = v + valid[i - 1] + valid[i - sw] - valid[i - sw - 1];
            dev[i] = d + dev[i - 1] + dev[i - sw] - dev[i - sw - 1];
        }
    }
    let window = |t: &[u32], c0: usize, c1: usize, r0: usize, r1: usize| {
        t[(r1 + 1) * sw + c1 + 1] + t[r0 * sw + c0] - t[r0 * sw + c1 + 1] - t[(r1 + 1) * sw + c0]
    };

    let r = window_radius;
    let mut developed = vec![DEFAULT_NODATA; w * h];
    let mut underdeveloped = vec![DEFAULT_NODATA; w * h];
    for row in 0..h {
        for col in 0..w {
            if landcover.get(col, row) == 0 {
                continue;
            }
            let (c0, c1) = (col.saturating_sub(r), (col + r).min(w - 1));
            let (r0, r1) = (row.saturating_sub(r), (row + r).min(h - 1));
            let n = window(&valid, c0, c1, r0, r1);
            let d = window(&dev, c0, c1, r0, r1);
            let frac = d as f64 / n as f64;
            let i = geo.index(col, row);
            developed[i] = frac;
            underdeveloped[i] = 1.0 - frac;
        }
    }
    LandcoverFractions {
        developed: Grid::new(geo, DEFAULT_NODATA, developed).expect("aligned with land cover"),
        underdeveloped: Grid::new(geo, DEFAULT_NODATA, underdeveloped).expect("aligned with land cover"),
    }
}

/// Per-zone variant: each zone's cells get the developed share of the
/// classified cells inside that zone. Cells outside every zone, and zones
/// with no classified cells, are nodata.
pub fn zonal_landcover_fractions(
    landcover: &CategoricalGrid,
    zones: &CategoricalGrid,
    developed_codes: &[u32],
) -> Result<LandcoverFractions> {
    let geo = *zones.geo();
    geo.check_aligned(landcover.geo(), "land cover vs zones")?;
    let mut tally: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for (&zone, &code) in zones.values().iter().zip(landcover.values()) {
        if zone != 0 && code != 0 {
            let t = tally.entry(zone).or_default();
            t.0 += 1;
            t.1 += developed_codes.contains(&code) as usize;
        }
    }
    let share: BTreeMap<u32, f64> = tally.into_iter().map(|(z, (n, d))| (z, d as f64 / n as f64)).collect();
    let mut developed = vec![DEFAULT_NODATA; geo.len()];
    let mut underdeveloped = vec![DEFAULT_NODATA; geo.len()];
    for (i, zone) in zones.values().iter().enumerate() {
        if let Some(&f) = share.get(zone) {
            developed[i] = f;
            underdeveloped[i] = 1.0 - f;
        }
    }
    Ok(LandcoverFractions {
        developed: Grid::new(geo, DEFAULT_NODATA, developed)?,
        underdeveloped: Grid::new(geo, DEFAULT_NODATA, underdeveloped)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;
    use crate::rng::XorShift64Star;

    fn lc(w: usize, h: usize, values: Vec<u32>) -> CategoricalGrid {
        CategoricalGrid::from_values(GeoRef::new(w, h, 0.0, 0.0, 1.0).unwrap(), values).unwrap()
    }

    #[test]
    fn all_developed() {
        for r in 0..4 {
            let f = landcover_fractions(&lc(5, 4, vec![1; 20]), &[classes::DEVELOPED], r);
            assert!(f.developed.values().iter().all(|&v| v == 1.0));
            assert!(f.underdeveloped.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn checkerboard_radius_zero() {
        let values: Vec<u32> = (0..16).map(|i| if (i % 4 + i / 4) % 2 == 0 { 1 } else { 3 }).collect();
        let f = landcover_fractions(&lc(4, 4, values.clone()), &[1], 0);
        for (v, code) in f.developed.values().iter().zip(&values) {
            assert_eq!(*v, if *code == 1 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn matches_direct_window_count() {
        let mut rng = XorShift64Star::new(3);
        for _ in 0..20 {
            let (w, h) = (1 + rng.below(15) as usize, 1 + rng.below(15) as usize);
            let values: Vec<u32> = (0..w * h).map(|_| rng.below(5) as u32).collect();
            let grid = lc(w, h, values);
            let r = rng.below(4) as usize;
            let f = landcover_fractions(&grid, &[1, 2], r);
            for row in 0..h {
                for col in 0..w {
                    let i = row * w + col;
                    if grid.get(col, row) == 0 {
                        assert_eq!(f.developed.values()[i], DEFAULT_NODATA);
                        continue;
                    }
                    let (mut n, mut d) = (0, 0);
                    for rr in row.saturating_sub(r)..=(row + r).min(h - 1) {
                        for cc in col.saturating_sub(r)..=(col + r).min(w - 1) {
                            let c = grid.get(cc, rr);
                            if c != 0 {
                                n += 1;
                                d += (c == 1 || c == 2) as usize;
                            }
                        }
                    }
                    let dv = f.developed.values()[i];
                    assert_eq!(dv, d as f64 / n as f64);
                    assert!((0.0..=1.0).contains(&dv));
                    assert_eq!(dv + f.underdeveloped.values()[i], 1.0);
                }
            }
        }
    }

    #[test]
    fn zonal_shares() {
        let landcover = lc(4, 2, vec![1, 3, 0, 1, 1, 1, 3, 0]);
        let zones = lc(4, 2, vec![1, 1, 2, 2, 1, 1, 3, 0]);
        let f = zonal_landcover_fractions(&landcover, &zones, &[1]).unwrap();
        assert_eq!(
            f.developed.values(),
            &[0.75, 0.75, 1.0, 1.0, 0.75, 0.75, 0.0, DEFAULT_NODATA]
        );
        assert_eq!(f.underdeveloped.values()[0], 0.25);
    }
}
