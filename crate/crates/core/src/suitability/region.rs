use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{CategoricalGrid, Grid};
use crate::transforms::{columns, zonal_min, ZoneSet};

/// One statute mile in metres.
pub const MILE_M: f64 = 1609.344;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionClass {
    Tnc,
    Corridor,
    Rural,
}

impl RegionClass {
    pub const ALL: [RegionClass; 3] = [RegionClass::Tnc, RegionClass::Corridor, RegionClass::Rural];

    /// Code used in region rasters.
    pub fn code(self) -> u32 {
        match self {
            RegionClass::Tnc => 1,
            RegionClass::Corridor => 2,
            RegionClass::Rural => 3,
        }
    }

    pub fn from_code(code: u32) -> Option<RegionClass> {
        match code {
            1 => Some(RegionClass::Tnc),
            2 => Some(RegionClass::Corridor),
            3 => Some(RegionClass::Rural),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::Tnc => "tnc",
            RegionClass::Corridor => "corridor",
            RegionClass::Rural => "rural",
        }
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionThresholds {
    /// Zones at or below this many housing units per square mile are rural.
    pub rural_housing_max: f64,
    /// Zones whose nearest cell is at most this far from the corridor are
    /// corridor zones.
    pub corridor_distance_m: f64,
}

impl Default for RegionThresholds {
    fn default() -> Self {
        RegionThresholds {
            rural_housing_max: 200.0,
            corridor_distance_m: MILE_M,
        }
    }
}

impl RegionThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.rural_housing_max > 0.0 && self.rural_housing_max.is_finite()) {
            return Err(Error::Config(format!(
                "rural_housing_max must be positive, got {}",
                self.rural_housing_max
            )));
        }
        if !(self.corridor_distance_m > 0.0 && self.corridor_distance_m.is_finite()) {
            return Err(Error::Config(format!(
                "corridor_distance_m must be positive, got {}",
                self.corridor_distance_m
            )));
        }
        Ok(())
    }

    /// Rural first, then corridor, then TNC. Both thresholds inclusive.
    pub fn classify(&self, housing_units_per_sqmi: f64, corridor_distance_m: f64) -> RegionClass {
        if housing_units_per_sqmi <= self.rural_housing_max {
            RegionClass::Rural
        } else if corridor_distance_m <= self.corridor_distance_m {
            RegionClass::Corridor
        } else {
            RegionClass::Tnc
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegionMap {
    pub per_zone: BTreeMap<u32, RegionClass>,
    /// Minimum corridor distance over each zone's cells; infinite for zones
    /// with no cells in the raster.
    pub zone_corridor_distance: BTreeMap<u32, f64>,
    /// Region code per cell (see [`RegionClass::code`]), 0 outside zones.
    pub raster: CategoricalGrid,
}

impl RegionMap {
    pub fn zone_counts(&self) -> BTreeMap<RegionClass, usize> {
        let mut counts: BTreeMap<RegionClass, usize> = RegionClass::ALL.iter().map(|&r| (r, 0)).collect();
        for class in self.per_zone.values() {
            *counts.entry(*class).or_default() += 1;
        }
        counts
    }

    /// 1.0 on cells of `class`, 0.0 elsewhere.
    pub fn mask(&self, class: RegionClass) -> Grid {
        self.raster.mask_of(class.code())
    }
}

pub fn classify_regions(zones: &ZoneSet, corridor_distance: &Grid, thresholds: &RegionThresholds) -> Result<RegionMap> {
    corridor_distance
        .geo()
        .check_aligned(zones.zones().geo(), "corridor distance vs zones")?;
    let table = zones.attributes();
    table.column_index(columns::HOUSING_UNITS_PER_SQMI)?;
    let zone_min = zonal_min(corridor_distance, zones.zones())?;

    let mut per_zone = BTreeMap::new();
    let mut zone_corridor_distance = BTreeMap::new();
    for zone in table.zone_ids() {
        let housing = table.get(zone, columns::HOUSING_UNITS_PER_SQMI)?;
        let dist = zone_min.get(&zone).copied().unwrap_or(f64::INFINITY);
        per_zone.insert(zone, thresholds.classify(housing, dist));
        zone_corridor_distance.insert(zone, dist);
    }

    let codes: Vec<u32> = zones
        .zones()
        .values()
        .iter()
        .map(|&z| if z == 0 { 0 } else { per_zone[&z].code() })
        .collect();
    let raster = CategoricalGrid::new(*zones.zones().geo(), codes, &RegionClass::ALL.map(RegionClass::code))?;
    Ok(RegionMap {
        per_zone,
        zone_corridor_distance,
        raster,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{GeoRef, DEFAULT_NODATA};
    use crate::transforms::AttributeTable;

    #[test]
    fn rule_order_and_ties() {
        let t = RegionThresholds::default();
        assert_eq!(t.classify(150.0, 5000.0), RegionClass::Rural);
        assert_eq!(t.classify(500.0, 800.0), RegionClass::Corridor);
        assert_eq!(t.classify(500.0, 3000.0), RegionClass::Tnc);
        assert_eq!(t.classify(200.0, 500.0), RegionClass::Rural);
        assert_eq!(t.classify(201.0, MILE_M), RegionClass::Corridor);
        assert_eq!(t.classify(201.0, MILE_M + 1e-9), RegionClass::Tnc);
    }

    #[test]
    fn zone_distance_is_minimum_over_cells() {
        let geo = GeoRef::new(4, 1, 0.0, 0.0, 1000.0).unwrap();
        let zones = CategoricalGrid::from_values(geo, vec![1, 1, 2, 0]).unwrap();
        let table = AttributeTable::from_reader("id,housing_units_per_sqmi\n1,500\n2,500\n3,100\n".as_bytes()).unwrap();
        let zs = ZoneSet::new(zones, table).unwrap();
        let dist = Grid::new(geo, DEFAULT_NODATA, vec![1500.0, 2500.0, 2000.0, 0.0]).unwrap();
        let map = classify_regions(&zs, &dist, &RegionThresholds::default()).unwrap();
        assert_eq!(map.per_zone[&1], RegionClass::Corridor);
        assert_eq!(map.per_zone[&2], RegionClass::Tnc);
        // zone 3 has attributes but no cells
        assert_eq!(map.per_zone[&3], RegionClass::Rural);
        assert_eq!(map.raster.values(), &[2, 2, 1, 0]);
        let counts = map.zone_counts();
        assert_eq!(counts.values().sum::<usize>(), 3);
    }

    #[test]
    fn missing_housing_column() {
        let geo = GeoRef::new(1, 1, 0.0, 0.0, 1.0).unwrap();
        let zones = CategoricalGrid::from_values(geo, vec![1]).unwrap();
        let table = AttributeTable::from_reader("id,population_density\n1,5\n".as_bytes()).unwrap();
        let zs = ZoneSet::new(zones, table).unwrap();
        let dist = Grid::filled(geo, 0.0);
        assert!(matches!(
            classify_regions(&zs, &dist, &RegionThresholds::default()),
            Err(Error::MissingColumn(_))
        ));
    }
}
