use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RegionClass;
use crate::error::{Error, Result};
use crate::transforms::Direction;

/// Names of the layers the pipeline builds. Criteria reference these.
pub mod layers {
    pub const POPULATION_DENSITY: &str = "population_density";
    pub const TRAFFIC_DENSITY: &str = "traffic_density";
    /// Distance to the nearest public (Level 2 or 3) charger.
    pub const EVCS_DISTANCE: &str = "evcs_distance";
    /// Distance to the nearest non-Tesla DC fast charger.
    pub const DCFC_DISTANCE: &str = "dcfc_distance";
    pub const SUBSTATION_110_DISTANCE: &str = "substation_110_distance";
    pub const SUBSTATION_220_DISTANCE: &str = "substation_220_distance";
    pub const CORRIDOR_DISTANCE: &str = "corridor_distance";
    pub const DEVELOPED: &str = "developed";
    pub const UNDERDEVELOPED: &str = "underdeveloped";
    pub const PCT_HISPANIC_BLACK: &str = "pct_hispanic_black";
    pub const PCT_BELOW_POVERTY: &str = "pct_below_poverty";
    pub const PCT_MULTIFAMILY: &str = "pct_multifamily";
    pub const PCT_ZERO_VEHICLE: &str = "pct_zero_vehicle";
    pub const DAC_FLAG: &str = "dac_flag";
    pub const PARKING_AVAILABILITY: &str = "parking_availability";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub name: String,
    pub layer: String,
    pub direction: Direction,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

/// One region's weighted-overlay model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitabilitySpec {
    pub region: RegionClass,
    pub criteria: Vec<Criterion>,
}

impl SuitabilitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.criteria.is_empty() {
            return Err(Error::InvalidSpec(format!("{} spec has no criteria", self.region)));
        }
        let mut names = BTreeSet::new();
        for c in &self.criteria {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "criterion `{}` has weight {}; weights must be finite and positive",
                    c.name, c.weight
                )));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate criterion name `{}`", c.name)));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SuitabilitySpec = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    /// Bundled model for `region`. The EVCS and DCFC distance criteria are
    /// `higher`: zones far from existing chargers score as gaps to fill.
    pub fn canonical(region: RegionClass) -> SuitabilitySpec {
        let text = match region {
            RegionClass::Tnc => CANONICAL_TNC,
            RegionClass::Corridor => CANONICAL_CORRIDOR,
            RegionClass::Rural => CANONICAL_RURAL,
        };
        Self::from_json(text).expect("bundled spec is valid")
    }

    /// Bundled variant that treats proximity to existing chargers as
    /// desirable (`nearer`) instead.
    pub fn alternate(region: RegionClass) -> SuitabilitySpec {
        let text = match region {
            RegionClass::Tnc => ALTERNATE_TNC,
            RegionClass::Corridor => ALTERNATE_CORRIDOR,
            RegionClass::Rural => ALTERNATE_RURAL,
        };
        Self::from_json(text).expect("bundled spec is valid")
    }
}

pub const CANONICAL_TNC: &str = include_str!("../../specs/tnc.json");
pub const CANONICAL_CORRIDOR: &str = include_str!("../../specs/corridor.json");
pub const CANONICAL_RURAL: &str = include_str!("../../specs/rural.json");
pub const ALTERNATE_TNC: &str = include_str!("../../specs/alternate/tnc.json");
pub const ALTERNATE_CORRIDOR: &str = include_str!("../../specs/alternate/corridor.json");
pub const ALTERNATE_RURAL: &str = include_str!("../../specs/alternate/rural.json");

#[cfg(test)]
mod tests {
    use super::*;

    fn names(spec: &SuitabilitySpec) -> Vec<&str> {
        spec.criteria.iter().map(|c| c.layer.as_str()).collect()
    }

    #[test]
    fn canonical_models() {
        let tnc = SuitabilitySpec::canonical(RegionClass::Tnc);
        assert_eq!(
            names(&tnc),
            [
                layers::POPULATION_DENSITY,
                layers::TRAFFIC_DENSITY,
                layers::EVCS_DISTANCE,
                layers::SUBSTATION_220_DISTANCE,
                layers::DEVELOPED,
                layers::PCT_HISPANIC_BLACK,
                layers::PCT_BELOW_POVERTY,
                layers::PCT_MULTIFAMILY,
                layers::PCT_ZERO_VEHICLE,
            ]
        );
        let rural = SuitabilitySpec::canonical(RegionClass::Rural);
        assert_eq!(
            names(&rural),
            [
                layers::POPULATION_DENSITY,
                layers::TRAFFIC_DENSITY,
                layers::EVCS_DISTANCE,
                layers::SUBSTATION_220_DISTANCE,
                layers::UNDERDEVELOPED,
            ]
        );
        let corridor = SuitabilitySpec::canonical(RegionClass::Corridor);
        assert_eq!(
            names(&corridor),
            [
                layers::POPULATION_DENSITY,
                layers::TRAFFIC_DENSITY,
                layers::SUBSTATION_110_DISTANCE,
                layers::DAC_FLAG,
                layers::CORRIDOR_DISTANCE,
                layers::DCFC_DISTANCE,
            ]
        );
        for region in RegionClass::ALL {
            let spec = SuitabilitySpec::canonical(region);
            assert_eq!(spec.region, region);
            assert!(spec.criteria.iter().all(|c| c.weight == 1.0));
            for c in &spec.criteria {
                let nearer = c.layer.starts_with("substation_") || c.layer == layers::CORRIDOR_DISTANCE;
                let expected = if nearer {
                    Direction::NearerBetter
                } else {
                    Direction::HigherBetter
                };
                assert_eq!(c.direction, expected, "{}", c.name);
            }
        }
    }

    #[test]
    fn alternates_flip_only_charger_distances() {
        for region in RegionClass::ALL {
            let canon = SuitabilitySpec::canonical(region);
            let alt = SuitabilitySpec::alternate(region);
            assert_eq!(canon.criteria.len(), alt.criteria.len());
            for (c, a) in canon.criteria.iter().zip(&alt.criteria) {
                assert_eq!(c.layer, a.layer);
                let charger = c.layer == layers::EVCS_DISTANCE || c.layer == layers::DCFC_DISTANCE;
                if charger {
                    assert_eq!(a.direction, Direction::NearerBetter);
                } else {
                    assert_eq!(a.direction, c.direction);
                }
            }
        }
    }

    #[test]
    fn json_shape() {
        let spec = SuitabilitySpec::from_json(
            r#"{"region": "rural", "criteria": [{"name": "pop", "layer": "population_density", "direction": "higher"}]}"#,
        )
        .unwrap();
        assert_eq!(spec.criteria[0].weight, 1.0);
        assert_eq!(SuitabilitySpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn invalid_specs() {
        let empty = r#"{"region": "tnc", "criteria": []}"#;
        assert!(SuitabilitySpec::from_json(empty).is_err());
        let zero =
            r#"{"region": "tnc", "criteria": [{"name": "a", "layer": "a", "direction": "higher", "weight": 0}]}"#;
        assert!(SuitabilitySpec::from_json(zero).is_err());
        let dup = r#"{"region": "tnc", "criteria": [
            {"name": "a", "layer": "a", "direction": "higher"},
            {"name": "a", "layer": "b", "direction": "nearer"}]}"#;
        assert!(SuitabilitySpec::from_json(dup).is_err());
        let bad_region = r#"{"region": "urban", "criteria": [{"name": "a", "layer": "a", "direction": "higher"}]}"#;
        assert!(SuitabilitySpec::from_json(bad_region).is_err());
        let bad_dir = r#"{"region": "tnc", "criteria": [{"name": "a", "layer": "a", "direction": "lower"}]}"#;
        assert!(SuitabilitySpec::from_json(bad_dir).is_err());
    }
}
