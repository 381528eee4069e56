//! End-to-end run: ingest, layer building, region classification, the three
//! region models (base and parking-augmented), synthesis and outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{
    read_ascii_grid, render_categorical, write_ascii_grid, CategoricalGrid, GeoRef, Grid, Palette, DEFAULT_NODATA,
};
use crate::scenario::files;
use crate::suitability::{
    augment_with_parking, classify_regions, extract_candidate_sites, layers, levelize, run_model, synthesize,
    LevelGrid, LevelMethod, RegionClass, RegionMap, RegionThresholds, SuitabilitySpec,
};
use crate::transforms::{
    columns, distance_transform, landcover_fractions, paint_attribute, zonal_landcover_fractions, AttributeTable,
    ZoneSet,
};
use crate::vector::{rasterize_points, rasterize_polygons, rasterize_polyline, FeatureSet, PointMode};

pub const THREADS_ENV: &str = "EVSITE_THREADS";
pub const REPORT_FILE: &str = "run_report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub zones: PathBuf,
    pub attributes: PathBuf,
    pub landcover: PathBuf,
    pub traffic: PathBuf,
    pub corridor: PathBuf,
    pub evcs: PathBuf,
    pub substations: PathBuf,
    pub parking: PathBuf,
    pub residential: PathBuf,
    pub environmental: PathBuf,
}

/// Spec file per region; a missing entry means the bundled canonical spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tnc: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corridor: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rural: Option<PathBuf>,
}

impl SpecPaths {
    fn get(&self, region: RegionClass) -> Option<&PathBuf> {
        match region {
            RegionClass::Tnc => self.tnc.as_ref(),
            RegionClass::Corridor => self.corridor.as_ref(),
            RegionClass::Rural => self.rural.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandcoverOptions {
    pub developed_codes: Vec<u32>,
    pub aggregation: LandcoverAggregation,
    /// Used by the `window` aggregation only.
    pub window_radius: usize,
}

/// How developed-area shares are aggregated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandcoverAggregation {
    /// Moving `(2r+1)²` window around each cell.
    #[default]
    Window,
    /// One share per zone, painted over the zone.
    Zone,
}

impl Default for LandcoverOptions {
    fn default() -> Self {
        LandcoverOptions {
            developed_codes: vec![crate::transforms::classes::DEVELOPED],
            aggregation: LandcoverAggregation::Window,
            window_radius: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationOptions {
    pub enabled: bool,
    pub window_radius: usize,
}

impl Default for AugmentationOptions {
    fn default() -> Self {
        AugmentationOptions {
            enabled: true,
            window_radius: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    #[serde(default)]
    pub specs: SpecPaths,
    #[serde(default)]
    pub thresholds: RegionThresholds,
    #[serde(default)]
    pub level_method: LevelMethod,
    #[serde(default)]
    pub landcover: LandcoverOptions,
    #[serde(default)]
    pub augmentation: AugmentationOptions,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Config matching the layout written by the scenario generator.
    pub fn for_scenario(seed: u64) -> RunConfig {
        let spec = |r: RegionClass| Some(PathBuf::from(format!("{}/{r}.json", files::SPEC_DIR)));
        RunConfig {
            inputs: Inputs {
                zones: files::ZONES.into(),
                attributes: files::ATTRIBUTES.into(),
                landcover: files::LANDCOVER.into(),
                traffic: files::TRAFFIC.into(),
                corridor: files::CORRIDOR.into(),
                evcs: files::EVCS.into(),
                substations: files::SUBSTATIONS.into(),
                parking: files::PARKING.into(),
                residential: files::RESIDENTIAL.into(),
                environmental: files::ENVIRONMENTAL.into(),
            },
            specs: SpecPaths {
                tnc: spec(RegionClass::Tnc),
                corridor: spec(RegionClass::Corridor),
                rural: spec(RegionClass::Rural),
            },
            thresholds: RegionThresholds::default(),
            level_method: LevelMethod::Quantile,
            landcover: LandcoverOptions::default(),
            augmentation: AugmentationOptions::default(),
            output_dir: "out".into(),
            seed,
        }
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.thresholds.validate()?;
        if cfg.landcover.developed_codes.is_empty() {
            return Err(Error::Config("landcover.developed_codes is empty".into()));
        }
        Ok(cfg)
    }

    /// Reads a config file and resolves relative paths against its
    /// directory.
    pub fn read(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg = Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok(cfg.resolved(base))
    }

    pub fn resolved(mut self, base: &Path) -> RunConfig {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let i = &mut self.inputs;
        for p in [
            &mut i.zones,
            &mut i.attributes,
            &mut i.landcover,
            &mut i.traffic,
            &mut i.corridor,
            &mut i.evcs,
            &mut i.substations,
            &mut i.parking,
            &mut i.residential,
            &mut i.environmental,
        ] {
            fix(p);
        }
        for p in [&mut self.specs.tnc, &mut self.specs.corridor, &mut self.specs.rural]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.output_dir);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    fn load_specs(&self) -> Result<BTreeMap<RegionClass, SuitabilitySpec>> {
        RegionClass::ALL
            .iter()
            .map(|&region| {
                let spec = match self.specs.get(region) {
                    None => SuitabilitySpec::canonical(region),
                    Some(p) => SuitabilitySpec::read(p).map_err(|e| Error::Config(e.to_string()))?,
                };
                if spec.region != region {
                    return Err(Error::Config(format!(
                        "spec for `{region}` declares region `{}`",
                        spec.region
                    )));
                }
                Ok((region, spec))
            })
            .collect()
    }
}

/// Parses `EVSITE_THREADS`; unset or 0 means one thread per core.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
    }
}

/// Level counts `[L1, L2, L3, L4]`.
pub type LevelCounts = [usize; 4];

fn counts(levels: &LevelGrid) -> LevelCounts {
    let h = levels.histogram();
    [h[1], h[2], h[3], h[4]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    /// Keyed by region name plus `synth` for the mosaic.
    pub levels: BTreeMap<String, LevelCounts>,
    pub level1_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub level_method: LevelMethod,
    pub zone_counts: BTreeMap<String, usize>,
    pub region_cells: BTreeMap<String, usize>,
    pub base: LevelSummary,
    pub augmented: Option<LevelSummary>,
    pub candidate_cells: usize,
    pub candidate_sites: usize,
    pub points_outside_extent: BTreeMap<String, usize>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

struct Loaded {
    zones: ZoneSet,
    landcover: CategoricalGrid,
    traffic: Grid,
    corridor: FeatureSet,
    evcs: FeatureSet,
    substations: FeatureSet,
    parking: FeatureSet,
    residential: FeatureSet,
    environmental: FeatureSet,
}

fn load_inputs(i: &Inputs) -> Result<Loaded> {
    let zones = CategoricalGrid::from_grid(&read_ascii_grid(&i.zones)?)
        .map_err(|e| Error::InvalidGrid(format!("{}: {e}", i.zones.display())))?;
    let attributes = AttributeTable::read_csv(&i.attributes)?;
    let zones = ZoneSet::new(zones, attributes).map_err(|e| match e {
        Error::MissingZone(_) | Error::AttributeRange { .. } => {
            Error::InvalidGrid(format!("{}: {e}", i.attributes.display()))
        }
        other => other,
    })?;
    let geo = *zones.zones().geo();
    let landcover = CategoricalGrid::from_grid(&read_ascii_grid(&i.landcover)?)
        .map_err(|e| Error::InvalidGrid(format!("{}: {e}", i.landcover.display())))?;
    geo.check_aligned(landcover.geo(), &i.landcover.display().to_string())?;
    let traffic = read_ascii_grid(&i.traffic)?;
    geo.check_aligned(traffic.geo(), &i.traffic.display().to_string())?;
    Ok(Loaded {
        zones,
        landcover,
        traffic,
        corridor: FeatureSet::read(&i.corridor)?,
        evcs: FeatureSet::read(&i.evcs)?,
        substations: FeatureSet::read(&i.substations)?,
        parking: FeatureSet::read(&i.parking)?,
        residential: FeatureSet::read(&i.residential)?,
        environmental: FeatureSet::read(&i.environmental)?,
    })
}

/// Distance in metres to the nearest cell crossed by any corridor polyline.
pub fn corridor_distance(corridor: &FeatureSet, geo: &GeoRef) -> Result<Grid> {
    let mut mask = vec![0.0; geo.len()];
    for line in corridor.polylines() {
        for (m, v) in mask.iter_mut().zip(rasterize_polyline(line, geo).values()) {
            if *v == 1.0 {
                *m = 1.0;
            }
        }
    }
    distance_transform(&Grid::new(*geo, DEFAULT_NODATA, mask)?)
}

/// Level-3 chargers outside the Tesla network.
pub fn is_dcfc(f: &crate::vector::Feature) -> bool {
    f.number("level") == Some(3.0) && f.string("network") != Some("tesla")
}

struct LayerBuilder<'a> {
    data: &'a Loaded,
    paths: &'a Inputs,
    landcover: &'a LandcoverOptions,
    outside: BTreeMap<String, usize>,
}

impl LayerBuilder<'_> {
    fn point_distance(&mut self, name: &str, fs: &FeatureSet, source: &Path) -> Result<Grid> {
        let geo = self.data.zones.zones().geo();
        let raster = rasterize_points(fs, geo, PointMode::Presence);
        self.outside.insert(name.to_string(), raster.skipped);
        distance_transform(&raster.grid).map_err(|e| match e {
            Error::EmptyFeatureSet => Error::InvalidGrid(format!(
                "layer `{name}`: no source features inside the study area in {}",
                source.display()
            )),
            other => other,
        })
    }

    fn corridor_distance(&self) -> Result<Grid> {
        corridor_distance(&self.data.corridor, self.data.zones.zones().geo()).map_err(|e| match e {
            Error::EmptyFeatureSet => Error::InvalidGrid(format!(
                "corridor does not cross the study area in {}",
                self.paths.corridor.display()
            )),
            other => other,
        })
    }

    fn build(&mut self, name: &str) -> Result<Option<Grid>> {
        let d = self.data;
        let kv_at_least = |kv: f64| move |f: &crate::vector::Feature| f.number("kv").is_some_and(|v| v >= kv);
        let grid = match name {
            layers::POPULATION_DENSITY => paint_attribute(&d.zones, columns::POPULATION_DENSITY)?,
            layers::TRAFFIC_DENSITY => d.traffic.clone(),
            layers::EVCS_DISTANCE => self.point_distance(name, &d.evcs, &self.paths.evcs)?,
            layers::DCFC_DISTANCE => self.point_distance(name, &d.evcs.filter(is_dcfc), &self.paths.evcs)?,
            layers::SUBSTATION_110_DISTANCE => {
                self.point_distance(name, &d.substations.filter(kv_at_least(110.0)), &self.paths.substations)?
            }
            layers::SUBSTATION_220_DISTANCE => {
                self.point_distance(name, &d.substations.filter(kv_at_least(220.0)), &self.paths.substations)?
            }
            layers::CORRIDOR_DISTANCE => self.corridor_distance()?,
            layers::DEVELOPED | layers::UNDERDEVELOPED => {
                let codes = &self.landcover.developed_codes;
                let f = match self.landcover.aggregation {
                    LandcoverAggregation::Window => {
                        landcover_fractions(&d.landcover, codes, self.landcover.window_radius)
                    }
                    LandcoverAggregation::Zone => zonal_landcover_fractions(&d.landcover, d.zones.zones(), codes)?,
                };
                if name == layers::DEVELOPED {
                    f.developed
                } else {
                    f.underdeveloped
                }
            }
            layers::PCT_HISPANIC_BLACK
            | layers::PCT_BELOW_POVERTY
            | layers::PCT_MULTIFAMILY
            | layers::PCT_ZERO_VEHICLE
            | layers::DAC_FLAG => paint_attribute(&d.zones, name)?,
            _ => return Ok(None),
        };
        Ok(Some(grid))
    }
}

struct ModelOutput {
    composite: Grid,
    levels: LevelGrid,
}

fn run_region(
    spec: &SuitabilitySpec,
    layers: &BTreeMap<String, Grid>,
    regions: &RegionMap,
    method: LevelMethod,
) -> Result<ModelOutput> {
    let mask = regions.mask(spec.region);
    let geo = *mask.geo();
    if !mask.values().contains(&1.0) {
        let empty = CategoricalGrid::new(geo, vec![0; geo.len()], &crate::suitability::LEVEL_CODES)?;
        return Ok(ModelOutput {
            composite: Grid::new(geo, DEFAULT_NODATA, vec![DEFAULT_NODATA; geo.len()])?,
            levels: LevelGrid::new(empty)?,
        });
    }
    let composite = run_model(spec, layers, &mask)?;
    let levels = levelize(&composite, method).map_err(|e| match e {
        Error::TooFewCells(n) => Error::InvalidGrid(format!(
            "{} model has only {n} scorable cells; at least 4 are needed",
            spec.region
        )),
        other => other,
    })?;
    Ok(ModelOutput { composite, levels })
}

fn run_all(
    specs: &BTreeMap<RegionClass, SuitabilitySpec>,
    layers: &BTreeMap<String, Grid>,
    regions: &RegionMap,
    method: LevelMethod,
) -> Result<BTreeMap<RegionClass, ModelOutput>> {
    let results: Vec<Result<(RegionClass, ModelOutput)>> = specs
        .par_iter()
        .map(|(&r, spec)| run_region(spec, layers, regions, method).map(|o| (r, o)))
        .collect();
    results.into_iter().collect()
}

fn summarize(models: &BTreeMap<RegionClass, ModelOutput>, synth: &LevelGrid) -> LevelSummary {
    let mut levels: BTreeMap<String, LevelCounts> =
        models.iter().map(|(r, m)| (r.to_string(), counts(&m.levels))).collect();
    let s = counts(synth);
    levels.insert("synth".into(), s);
    LevelSummary {
        levels,
        level1_cells: s[0],
    }
}

struct Writer {
    dir: PathBuf,
    written: Vec<String>,
}

impl Writer {
    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn grid(&mut self, name: &str, g: &Grid) -> Result<()> {
        let p = self.path(name);
        write_ascii_grid(g, p)
    }

    fn image(&mut self, name: &str, g: &CategoricalGrid, palette: &Palette) -> Result<()> {
        let p = self.path(name);
        render_categorical(g, palette)?.write_ppm(p)
    }

    fn models(&mut self, prefix: &str, models: &BTreeMap<RegionClass, ModelOutput>) -> Result<()> {
        for (r, m) in models {
            self.grid(&format!("composite{prefix}_{r}.asc"), &m.composite)?;
            self.grid(&format!("levels{prefix}_{r}.asc"), &m.levels.to_grid())?;
        }
        Ok(())
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Runs the full pipeline inside a pool sized by `EVSITE_THREADS`.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let threads = threads_from_env()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_in_current_pool(config))
}

pub fn run_in_current_pool(config: &RunConfig) -> Result<RunReport> {
    let total = Instant::now();
    let mut timings = BTreeMap::new();
    config.thresholds.validate()?;
    let specs = config.load_specs()?;

    let t = Instant::now();
    let data = load_inputs(&config.inputs)?;
    timings.insert("load".to_string(), ms(t));

    let t = Instant::now();
    let mut builder = LayerBuilder {
        data: &data,
        paths: &config.inputs,
        landcover: &config.landcover,
        outside: BTreeMap::new(),
    };
    let mut wanted: BTreeSet<&str> = specs
        .values()
        .flat_map(|s| s.criteria.iter().map(|c| c.layer.as_str()))
        .collect();
    wanted.insert(layers::CORRIDOR_DISTANCE);
    let mut layer_map = BTreeMap::new();
    for name in wanted {
        if let Some(g) = builder.build(name)? {
            layer_map.insert(name.to_string(), g);
        }
    }
    let outside = builder.outside;
    timings.insert("layers".to_string(), ms(t));

    let t = Instant::now();
    let regions = classify_regions(&data.zones, &layer_map[layers::CORRIDOR_DISTANCE], &config.thresholds)?;
    timings.insert("classify".to_string(), ms(t));

    let t = Instant::now();
    let base = run_all(&specs, &layer_map, &regions, config.level_method)?;
    let base_levels: BTreeMap<RegionClass, LevelGrid> = base.iter().map(|(r, m)| (*r, m.levels.clone())).collect();
    let base_synth = synthesize(&base_levels, &regions.raster)?;
    timings.insert("base_models".to_string(), ms(t));

    let t = Instant::now();
    let geo = *data.zones.zones().geo();
    let parking = rasterize_polygons(&data.parking, &geo);
    let residential = rasterize_polygons(&data.residential, &geo);
    let environmental = rasterize_polygons(&data.environmental, &geo);
    let radius = config.augmentation.window_radius;
    let mut candidate_mask = None;
    let mut augmented = None;
    if config.augmentation.enabled {
        let mut aug_specs = BTreeMap::new();
        let mut aug_layers = layer_map.clone();
        for (&r, spec) in &specs {
            let aug = augment_with_parking(spec, &parking, &residential, &environmental, radius)?;
            aug_layers.insert(layers::PARKING_AVAILABILITY.to_string(), aug.density);
            candidate_mask = Some(aug.candidate_mask);
            aug_specs.insert(r, aug.spec);
        }
        let models = run_all(&aug_specs, &aug_layers, &regions, config.level_method)?;
        let lv: BTreeMap<RegionClass, LevelGrid> = models.iter().map(|(r, m)| (*r, m.levels.clone())).collect();
        let synth = synthesize(&lv, &regions.raster)?;
        augmented = Some((models, synth));
    }
    let candidate_mask = match candidate_mask {
        Some(m) => m,
        None => {
            let any = SuitabilitySpec::canonical(RegionClass::Tnc);
            augment_with_parking(&any, &parking, &residential, &environmental, radius)?.candidate_mask
        }
    };
    let final_synth = augmented.as_ref().map(|(_, s)| s).unwrap_or(&base_synth);
    let sites = extract_candidate_sites(final_synth, &candidate_mask, data.zones.zones())?;
    timings.insert("augmentation".to_string(), ms(t));

    let t = Instant::now();
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut w = Writer {
        dir: out.clone(),
        written: Vec::new(),
    };
    w.grid("regions.asc", &regions.raster.to_grid())?;
    w.image("regions.ppm", &regions.raster, &Palette::regions())?;
    w.models("", &base)?;
    w.grid("levels_synth.asc", &base_synth.to_grid())?;
    w.image("levels_synth.ppm", base_synth.as_categorical(), &Palette::levels())?;
    if let Some((models, synth)) = &augmented {
        w.models("_aug", models)?;
        w.grid("levels_synth_aug.asc", &synth.to_grid())?;
        w.image("levels_synth_aug.ppm", synth.as_categorical(), &Palette::levels())?;
    }
    w.grid("candidate_mask.asc", &candidate_mask)?;
    let p = w.path("candidates.geojson");
    sites.write(p)?;
    timings.insert("write".to_string(), ms(t));

    let region_cells = RegionClass::ALL
        .iter()
        .map(|r| {
            (
                r.to_string(),
                regions.raster.values().iter().filter(|&&c| c == r.code()).count(),
            )
        })
        .collect();
    let mut report = RunReport {
        seed: config.seed,
        level_method: config.level_method,
        zone_counts: regions
            .zone_counts()
            .into_iter()
            .map(|(r, n)| (r.to_string(), n))
            .collect(),
        region_cells,
        base: summarize(&base, &base_synth),
        augmented: augmented.as_ref().map(|(m, s)| summarize(m, s)),
        candidate_cells: candidate_mask.values().iter().filter(|&&v| v == 1.0).count(),
        candidate_sites: sites.len(),
        points_outside_extent: outside,
        outputs: w.written.clone(),
        timings_ms: timings,
    };
    report.outputs.push(REPORT_FILE.to_string());
    report.timings_ms.insert("total".to_string(), ms(total));
    let p = out.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    Ok(report)
}
