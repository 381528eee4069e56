use std::collections::BTreeMap;

use super::SuitabilitySpec;
use crate::error::{Error, Result};
use crate::raster::{Grid, DEFAULT_NODATA};
use crate::transforms::quantile_normalize;

fn resolve<'a>(spec: &SuitabilitySpec, layers: &'a BTreeMap<String, Grid>) -> Result<Vec<&'a Grid>> {
    spec.criteria
        .iter()
        .map(|c| {
            layers.get(&c.layer).ok_or_else(|| Error::MissingLayer {
                criterion: c.name.clone(),
                layer: c.layer.clone(),
            })
        })
        .collect()
}

/// Weighted mean of already-normalized criterion scores,
/// `sum(w_i * s_i) / sum(w_i)`, over cells inside `region_mask` where every
/// criterion is valid. Everything else is nodata.
pub fn overlay(spec: &SuitabilitySpec, layers: &BTreeMap<String, Grid>, region_mask: &Grid) -> Result<Grid> {
    spec.validate()?;
    let scored = resolve(spec, layers)?;
    let geo = *region_mask.geo();
    for (c, g) in spec.criteria.iter().zip(&scored) {
        geo.check_aligned(g.geo(), &format!("criterion `{}`", c.name))?;
    }
    let total: f64 = spec.criteria.iter().map(|c| c.weight).sum();

    let values = (0..geo.len())
        .map(|i| {
            if region_mask.valid(i) != Some(1.0) {
                return DEFAULT_NODATA;
            }
            let mut acc = 0.0;
            for (c, g) in spec.criteria.iter().zip(&scored) {
                match g.valid(i) {
                    Some(s) => acc += c.weight * s,
                    None => return DEFAULT_NODATA,
                }
            }
            acc / total
        })
        .collect();
    Grid::new(geo, DEFAULT_NODATA, values)
}

/// Runs one region model from raw layers: each criterion layer is clipped
/// to the region, quantile-normalized in its declared direction, then
/// overlaid.
pub fn run_model(spec: &SuitabilitySpec, raw_layers: &BTreeMap<String, Grid>, region_mask: &Grid) -> Result<Grid> {
    spec.validate()?;
    let raw = resolve(spec, raw_layers)?;
    let mut normalized = BTreeMap::new();
    for (c, layer) in spec.criteria.iter().zip(raw) {
        let clipped = layer.masked(region_mask)?;
        let scores = quantile_normalize(&clipped, c.direction).map_err(|e| match e {
            Error::AllNodata => Error::InvalidSpec(format!(
                "{} model: layer `{}` has no valid cells inside the region",
                spec.region, c.layer
            )),
            other => other,
        })?;
        normalized.insert(c.layer.clone(), scores);
    }
    overlay(spec, &normalized, region_mask)
}
