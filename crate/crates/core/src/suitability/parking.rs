use super::spec::layers;
use super::{Criterion, LevelGrid, SuitabilitySpec};
use crate::error::Result;
use crate::raster::{CategoricalGrid, Grid, DEFAULT_NODATA};
use crate::transforms::Direction;
use crate::vector::{Feature, FeatureSet, Geometry, PropValue};

#[derive(Debug, Clone)]
pub struct Augmentation {
    /// Input spec plus a `parking_availability` criterion.
    pub spec: SuitabilitySpec,
    /// 1.0 where parking survives the residential and environmental
    /// exclusions, 0.0 elsewhere.
    pub candidate_mask: Grid,
    /// Raw layer for the new criterion: share of candidate cells in the
    /// `(2r+1)²` window around each cell, clipped at the grid edge.
    pub density: Grid,
}

fn on(g: &Grid, i: usize) -> bool {
    g.valid(i).is_some_and(|v| v != 0.0)
}

pub fn augment_with_parking(
    spec: &SuitabilitySpec,
    parking: &Grid,
    residential: &Grid,
    environmental: &Grid,
    window_radius: usize,
) -> Result<Augmentation> {
    let geo = *parking.geo();
    geo.check_aligned(residential.geo(), "residential mask")?;
    geo.check_aligned(environmental.geo(), "environmental mask")?;

    let candidate: Vec<f64> = (0..geo.len())
        .map(|i| (on(parking, i) && !on(residential, i) && !on(environmental, i)) as u8 as f64)
        .collect();

    let (w, h) = (geo.width, geo.height);
    let sw = w + 1;
    let mut sat = vec![0u64; sw * (h + 1)];
    for row in 0..h {
        for col in 0..w {
            let i = (row + 1) * sw + col + 1;
            sat[i] = candidate[row * w + col] as u64 + sat[i - 1] + sat[i - sw] - sat[i - sw - 1];
        }
    }
    let r = window_radius;
    let mut density = vec![0.0; geo.len()];
    for row in 0..h {
        for col in 0..w {
            let (c0, c1) = (col.saturating_sub(r), (col + r).min(w - 1));
            let (r0, r1) = (row.saturating_sub(r), (row + r).min(h - 1));
            let count =
                sat[(r1 + 1) * sw + c1 + 1] + sat[r0 * sw + c0] - sat[r0 * sw + c1 + 1] - sat[(r1 + 1) * sw + c0];
            let area = (c1 - c0 + 1) * (r1 - r0 + 1);
            density[row * w + col] = count as f64 / area as f64;
        }
    }

    let mut spec = spec.clone();
    spec.criteria.push(Criterion {
        name: layers::PARKING_AVAILABILITY.to_string(),
        layer: layers::PARKING_AVAILABILITY.to_string(),
        direction: Direction::HigherBetter,
        weight: 1.0,
    });
    spec.validate()?;

    Ok(Augmentation {
        spec,
        candidate_mask: Grid::new(geo, DEFAULT_NODATA, candidate)?,
        density: Grid::new(geo, DEFAULT_NODATA, density)?,
    })
}

/// One point per Level-1 candidate cell, at the cell centre, in row-major
/// cell order. Properties: `level` (always 1) and `zone`.
pub fn extract_candidate_sites(
    levels: &LevelGrid,
    candidate_mask: &Grid,
    zones: &CategoricalGrid,
) -> Result<FeatureSet> {
    let geo = *levels.as_categorical().geo();
    geo.check_aligned(candidate_mask.geo(), "candidate mask")?;
    geo.check_aligned(zones.geo(), "zones")?;
    let mut features = Vec::new();
    for (i, &level) in levels.values().iter().enumerate() {
        if level != 1 || candidate_mask.valid(i) != Some(1.0) {
            continue;
        }
        let (col, row) = geo.col_row(i);
        let (x, y) = geo.cell_center(col, row);
        features.push(
            Feature::new(Geometry::Point([x, y]))
                .with("level", PropValue::Num(1.0))
                .with("zone", PropValue::Num(zones.values()[i] as f64)),
        );
    }
    Ok(FeatureSet::new(features))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;
    use crate::rng::XorShift64Star;
    use crate::suitability::RegionClass;
    use crate::transforms::quantile_normalize;

    fn grid(geo: GeoRef, v: Vec<f64>) -> Grid {
        Grid::new(geo, DEFAULT_NODATA, v).unwrap()
    }

    #[test]
    fn exclusions_and_extra_criterion() {
        let geo = GeoRef::new(4, 1, 0.0, 0.0, 10.0).unwrap();
        let parking = grid(geo, vec![1.0, 1.0, 1.0, 0.0]);
        let residential = grid(geo, vec![0.0, 1.0, 0.0, 0.0]);
        let environmental = grid(geo, vec![0.0, 0.0, 1.0, 1.0]);
        let base = SuitabilitySpec::canonical(RegionClass::Tnc);
        let aug = augment_with_parking(&base, &parking, &residential, &environmental, 1).unwrap();
        assert_eq!(aug.candidate_mask.values(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(aug.spec.criteria.len(), base.criteria.len() + 1);
        let extra = aug.spec.criteria.last().unwrap();
        assert_eq!(extra.layer, "parking_availability");
        assert_eq!(extra.direction, Direction::HigherBetter);
        assert_eq!(extra.weight, 1.0);
        assert_eq!(aug.density.values(), &[0.5, 1.0 / 3.0, 0.0, 0.0]);
    }

    #[test]
    fn no_parking_gives_uniform_scores() {
        let geo = GeoRef::new(5, 5, 0.0, 0.0, 1.0).unwrap();
        let zero = Grid::filled(geo, 0.0);
        let aug =
            augment_with_parking(&SuitabilitySpec::canonical(RegionClass::Rural), &zero, &zero, &zero, 2).unwrap();
        assert!(aug.candidate_mask.values().iter().all(|&v| v == 0.0));
        let s = quantile_normalize(&aug.density, Direction::HigherBetter).unwrap();
        assert!(s.values().iter().all(|&v| v == s.values()[0]));
    }

    #[test]
    fn candidates_never_exceed_parking() {
        let mut rng = XorShift64Star::new(5);
        let geo = GeoRef::new(16, 11, 0.0, 0.0, 1.0).unwrap();
        let spec = SuitabilitySpec::canonical(RegionClass::Corridor);
        for _ in 0..30 {
            let mut rand_mask = |p: f64| grid(geo, (0..geo.len()).map(|_| rng.bernoulli(p) as u8 as f64).collect());
            let (p, r, e) = (rand_mask(0.4), rand_mask(0.3), rand_mask(0.2));
            let aug = augment_with_parking(&spec, &p, &r, &e, 2).unwrap();
            let count = |g: &Grid| g.values().iter().filter(|&&v| v == 1.0).count();
            assert!(count(&aug.candidate_mask) <= count(&p));
            for i in 0..geo.len() {
                let expect = p.values()[i] == 1.0 && r.values()[i] == 0.0 && e.values()[i] == 0.0;
                assert_eq!(aug.candidate_mask.values()[i] == 1.0, expect);
                assert!((0.0..=1.0).contains(&aug.density.values()[i]));
            }
        }
    }

    #[test]
    fn sites_on_level_one_candidates() {
        let geo = GeoRef::new(3, 2, 100.0, 200.0, 10.0).unwrap();
        let levels = LevelGrid::new(CategoricalGrid::from_values(geo, vec![1, 1, 2, 4, 1, 0]).unwrap()).unwrap();
        let zones = CategoricalGrid::from_values(geo, vec![7, 7, 8, 7, 9, 9]).unwrap();
        let cand = grid(geo, vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let sites = extract_candidate_sites(&levels, &cand, &zones).unwrap();
        assert_eq!(sites.len(), 2);
        assert_eq!(sites.features[0].geometry, Geometry::Point([115.0, 205.0]));
        assert_eq!(sites.features[0].number("zone"), Some(7.0));
        assert_eq!(sites.features[1].geometry, Geometry::Point([115.0, 215.0]));
        assert_eq!(sites.features[1].number("level"), Some(1.0));

        let none = grid(geo, vec![0.0; 6]);
        assert!(extract_candidate_sites(&levels, &none, &zones).unwrap().is_empty());
    }
}
