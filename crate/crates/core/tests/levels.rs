use std::collections::BTreeMap;

use evsite_core::raster::{CategoricalGrid, GeoRef, Grid, DEFAULT_NODATA};
use evsite_core::rng::XorShift64Star;
use evsite_core::suitability::{levelize, synthesize, LevelMethod, RegionClass};

#[test]
fn eight_distinct_scores_two_per_level() {
    let geo = GeoRef::new(8, 1, 0.0, 0.0, 1.0).unwrap();
    let scores = vec![0.05, 0.95, 0.3, 0.6, 0.9, 0.1, 0.55, 0.35];
    let lv = levelize(&Grid::new(geo, DEFAULT_NODATA, scores).unwrap(), LevelMethod::Quantile).unwrap();
    assert_eq!(lv.values(), &[4, 1, 3, 2, 1, 4, 2, 3]);
    assert_eq!(lv.histogram(), [0, 2, 2, 2, 2]);
}

#[test]
fn mosaic_on_random_multi_region_scenarios() {
    let mut rng = XorShift64Star::new(2024);
    for _ in 0..20 {
        let w = 5 + rng.below(20) as usize;
        let h = 5 + rng.below(20) as usize;
        let geo = GeoRef::new(w, h, 0.0, 0.0, 30.0).unwrap();
        let codes: Vec<u32> = (0..w * h)
            .map(|i| {
                if i < 12 {
                    (i % 3 + 1) as u32
                } else {
                    rng.below(4) as u32
                }
            })
            .collect();
        let regions = CategoricalGrid::from_values(geo, codes.clone()).unwrap();
        let mut per_region = BTreeMap::new();
        for class in RegionClass::ALL {
            let composite: Vec<f64> = codes
                .iter()
                .map(|&c| {
                    if c == class.code() {
                        rng.next_f64()
                    } else {
                        DEFAULT_NODATA
                    }
                })
                .collect();
            let lv = levelize(
                &Grid::new(geo, DEFAULT_NODATA, composite).unwrap(),
                LevelMethod::Quantile,
            )
            .unwrap();
            per_region.insert(class, lv);
        }
        let synth = synthesize(&per_region, &regions).unwrap();
        for (i, (&code, &level)) in codes.iter().zip(synth.values()).enumerate() {
            match RegionClass::from_code(code) {
                None => assert_eq!(level, 0),
                Some(class) => {
                    assert_eq!(level, per_region[&class].values()[i]);
                    assert!((1..=4).contains(&level));
                }
            }
        }
        assert!(synth.values().iter().all(|&v| v <= 4));
    }
}
