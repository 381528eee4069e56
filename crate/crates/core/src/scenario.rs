//! Deterministic synthetic study area: a `k`×`k` block-group partition, a
//! diagonal corridor, a developed core, chargers, substations, parcels and
//! the run configuration that ties them together.
//!
//! All arithmetic is `+ - * /`, `sqrt` and rounding, so the bytes written for
//! a seed do not depend on the platform's libm.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pipeline::RunConfig;
use crate::raster::{write_ascii_grid, CategoricalGrid, GeoRef, Grid, DEFAULT_NODATA};
use crate::rng::XorShift64Star;
use crate::suitability::{RegionClass, RegionThresholds, SuitabilitySpec};
use crate::transforms::{classes, columns, distance_transform, zonal_min, AttributeTable};
use crate::vector::{rasterize_polyline, Coord, Feature, FeatureSet, Geometry, PropValue};

/// Bounds and target mean for one generated attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64, mean: f64) -> Range {
        Range { min, max, mean }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let finite = self.min.is_finite() && self.max.is_finite() && self.mean.is_finite();
        if !finite || self.min > self.max || self.mean < self.min || self.mean > self.max {
            return Err(Error::Config(format!(
                "range `{name}` must satisfy min <= mean <= max, got {} / {} / {}",
                self.min, self.mean, self.max
            )));
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        v.max(self.min).min(self.max)
    }

    /// Exponent `p` for `min + (max - min) * u^p`, whose mean is
    /// `min + (max - min) / (p + 1)`.
    fn skew_power(&self) -> u32 {
        if self.max == self.min {
            return 1;
        }
        if self.mean == self.min {
            return 64;
        }
        ((self.max - self.mean) / (self.mean - self.min))
            .round()
            .clamp(1.0, 64.0) as u32
    }

    fn sample(&self, rng: &mut XorShift64Star) -> f64 {
        let u = rng.next_f64();
        let mut up = 1.0;
        for _ in 0..self.skew_power() {
            up *= u;
        }
        self.min + (self.max - self.min) * up
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeRanges {
    pub population_density: Range,
    pub housing_units_per_sqmi: Range,
    pub pct_hispanic_black: Range,
    pub pct_below_poverty: Range,
    pub pct_multifamily: Range,
    pub pct_zero_vehicle: Range,
    pub traffic_density: Range,
}

impl Default for AttributeRanges {
    fn default() -> Self {
        AttributeRanges {
            population_density: Range::new(0.0, 424_352.0, 4_529.0),
            housing_units_per_sqmi: Range::new(0.0, 20_000.0, 1_800.0),
            pct_hispanic_black: Range::new(0.0, 1.0, 0.36),
            pct_below_poverty: Range::new(0.0, 1.0, 0.11),
            pct_multifamily: Range::new(0.0, 1.0, 0.31),
            pct_zero_vehicle: Range::new(0.0, 1.0, 0.05),
            traffic_density: Range::new(0.0, 305_897.0, 9_597.0),
        }
    }
}

impl AttributeRanges {
    fn all(&self) -> [(&'static str, &Range); 7] {
        [
            (columns::POPULATION_DENSITY, &self.population_density),
            (columns::HOUSING_UNITS_PER_SQMI, &self.housing_units_per_sqmi),
            (columns::PCT_HISPANIC_BLACK, &self.pct_hispanic_black),
            (columns::PCT_BELOW_POVERTY, &self.pct_below_poverty),
            (columns::PCT_MULTIFAMILY, &self.pct_multifamily),
            (columns::PCT_ZERO_VEHICLE, &self.pct_zero_vehicle),
            ("traffic_density", &self.traffic_density),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    /// Zones per side of the square block-group partition.
    pub zone_grid: usize,
    pub n_evcs: usize,
    pub n_substations: usize,
    pub n_parking: usize,
    pub n_residential: usize,
    pub n_environmental: usize,
    pub ranges: AttributeRanges,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 42,
            width: 96,
            height: 96,
            cell_size: 100.0,
            zone_grid: 8,
            n_evcs: 40,
            n_substations: 6,
            n_parking: 60,
            n_residential: 8,
            n_environmental: 5,
            ranges: AttributeRanges::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        GeoRef::new(self.width, self.height, 0.0, 0.0, self.cell_size)?;
        if self.zone_grid < 2 || self.zone_grid > self.width || self.zone_grid > self.height {
            return Err(Error::Config(format!(
                "zone_grid must be between 2 and the grid size, got {}",
                self.zone_grid
            )));
        }
        if self.zone_grid * self.zone_grid < 3 {
            return Err(Error::Config("need at least 3 zones".into()));
        }
        if self.n_evcs == 0 {
            return Err(Error::Config("n_evcs must be at least 1".into()));
        }
        if self.n_substations < 2 {
            return Err(Error::Config("n_substations must be at least 2".into()));
        }
        for (name, r) in self.ranges.all() {
            r.validate(name)?;
            if columns::FRACTIONS.contains(&name) && (r.min < 0.0 || r.max > 1.0) {
                return Err(Error::Config(format!("range `{name}` must lie within [0, 1]")));
            }
            if r.min < 0.0 {
                return Err(Error::Config(format!("range `{name}` must be non-negative")));
            }
        }
        let h = &self.ranges.housing_units_per_sqmi;
        let rural = RegionThresholds::default().rural_housing_max;
        if h.min > rural || h.max <= rural {
            return Err(Error::Config(format!(
                "housing range [{}, {}] must straddle the rural threshold {rural}",
                h.min, h.max
            )));
        }
        Ok(())
    }

    fn geo(&self) -> GeoRef {
        GeoRef::new(self.width, self.height, 0.0, 0.0, self.cell_size).expect("validated")
    }
}

/// Everything the generator produces, before serialization.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub config: ScenarioConfig,
    pub zones: CategoricalGrid,
    pub attributes: AttributeTable,
    pub landcover: CategoricalGrid,
    pub traffic: Grid,
    pub corridor: FeatureSet,
    pub evcs: FeatureSet,
    pub substations: FeatureSet,
    pub parking: FeatureSet,
    pub residential: FeatureSet,
    pub environmental: FeatureSet,
    /// Zones the generator forced into each region class.
    pub anchors: BTreeMap<RegionClass, u32>,
}

fn round_to(v: f64, scale: f64) -> f64 {
    (v * scale).round() / scale
}

fn dist(a: Coord, b: Coord) -> f64 {
    ((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])).sqrt()
}

/// Urban intensity in (0, 1]: `1 / (1 + (d / r)^2)` around the core.
fn intensity(p: Coord, core: Coord, radius: f64) -> f64 {
    let q = dist(p, core) / radius;
    1.0 / (1.0 + q * q)
}

struct Layout {
    geo: GeoRef,
    core: Coord,
    radius: f64,
}

impl Layout {
    fn cell_intensity(&self, col: usize, row: usize) -> f64 {
        let (x, y) = self.geo.cell_center(col, row);
        intensity([x, y], self.core, self.radius)
    }

    /// Random cell, accepted with probability `floor + (1 - floor) * I`.
    fn pick_cell(&self, rng: &mut XorShift64Star, floor: f64, max_w: usize, max_h: usize) -> (usize, usize) {
        let (cols, rows) = (self.geo.width - max_w + 1, self.geo.height - max_h + 1);
        loop {
            let col = rng.below(cols as u64) as usize;
            let row = rng.below(rows as u64) as usize;
            let p = floor + (1.0 - floor) * self.cell_intensity(col, row);
            if rng.next_f64() < p {
                return (col, row);
            }
        }
    }

    fn rectangle(&self, col: usize, row: usize, w: usize, h: usize) -> Geometry {
        let cs = self.geo.cell_size;
        let inset = 0.1 * cs;
        let x0 = self.geo.origin_x + col as f64 * cs + inset;
        let y0 = self.geo.origin_y + row as f64 * cs + inset;
        let x1 = self.geo.origin_x + (col + w) as f64 * cs - inset;
        let y1 = self.geo.origin_y + (row + h) as f64 * cs - inset;
        Geometry::Polygon(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]])
    }

    fn parcels(&self, rng: &mut XorShift64Star, n: usize, size: (usize, usize), floor: f64, kind: &str) -> FeatureSet {
        let span = (size.1 - size.0 + 1) as u64;
        let max = size.1.min(self.geo.width).min(self.geo.height);
        let features = (0..n)
            .map(|_| {
                let w = (size.0 + rng.below(span) as usize).min(max);
                let h = (size.0 + rng.below(span) as usize).min(max);
                let (col, row) = self.pick_cell(rng, floor, w, h);
                Feature::new(self.rectangle(col, row, w, h)).with("kind", PropValue::Str(kind.to_string()))
            })
            .collect();
        FeatureSet::new(features)
    }
}

pub fn generate(config: &ScenarioConfig) -> Result<Bundle> {
    config.validate()?;
    let mut rng = XorShift64Star::new(config.seed);
    let geo = config.geo();
    let (w, h, cs) = (config.width, config.height, config.cell_size);
    let (wf, hf) = (w as f64 * cs, h as f64 * cs);
    let ranges = &config.ranges;

    // core in the upper-left quarter, corridor from bottom to top on a
    // diagonal that keeps well clear of it
    let jitter = |rng: &mut XorShift64Star, span: f64| rng.uniform(-span, span);
    let core = [
        round_to(0.25 * wf + jitter(&mut rng, 0.04 * wf), 100.0),
        round_to(0.75 * hf + jitter(&mut rng, 0.04 * hf), 100.0),
    ];
    let layout = Layout {
        geo,
        core,
        radius: 0.2 * wf.min(hf),
    };
    let (ax, ay, bx, by) = (0.15 * wf, 0.5 * cs, 0.95 * wf, hf - 0.5 * cs);
    let corridor_line: Vec<Coord> = (0..5)
        .map(|k| {
            let t = k as f64 / 4.0;
            let dx = if k == 0 || k == 4 {
                0.0
            } else {
                jitter(&mut rng, 1.5 * cs)
            };
            [
                round_to(ax + t * (bx - ax) + dx, 100.0),
                round_to(ay + t * (by - ay), 100.0),
            ]
        })
        .collect();
    let corridor = FeatureSet::new(vec![
        Feature::new(Geometry::PolyLine(corridor_line.clone())).with("name", PropValue::Str("corridor".into()))
    ]);

    // zones
    let k = config.zone_grid;
    let zone_of = |col: usize, row: usize| ((row * k / h) * k + col * k / w + 1) as u32;
    let zone_values: Vec<u32> = (0..geo.len())
        .map(|i| {
            let (c, r) = geo.col_row(i);
            zone_of(c, r)
        })
        .collect();
    let zones = CategoricalGrid::new(geo, zone_values, &(1..=(k * k) as u32).collect::<Vec<_>>())?;
    let zone_center = |z: u32| {
        let (zr, zc) = ((z - 1) as usize / k, (z - 1) as usize % k);
        [(zc as f64 + 0.5) * wf / k as f64, (zr as f64 + 0.5) * hf / k as f64]
    };
    let zone_intensity: BTreeMap<u32, f64> = (1..=(k * k) as u32)
        .map(|z| (z, intensity(zone_center(z), core, layout.radius)))
        .collect();

    let corridor_mask = rasterize_polyline(&corridor_line, &geo);
    let corridor_distance = distance_transform(&corridor_mask)?;
    let zone_corridor = zonal_min(&corridor_distance, &zones)?;

    // attributes
    let hr = &ranges.housing_units_per_sqmi;
    let mut housing: BTreeMap<u32, f64> = BTreeMap::new();
    let mut fractions: BTreeMap<u32, [f64; 4]> = BTreeMap::new();
    let mut persons: BTreeMap<u32, f64> = BTreeMap::new();
    for (&z, &iz) in &zone_intensity {
        let hu = hr.clamp((hr.mean * 3.0 * iz * (0.5 + rng.next_f64())).round());
        housing.insert(z, hu);
        persons.insert(z, rng.uniform(1.8, 3.2));
        let boost = 0.5 + iz;
        let f = [
            ranges.pct_hispanic_black.sample(&mut rng),
            ranges.pct_below_poverty.sample(&mut rng),
            ranges.pct_multifamily.sample(&mut rng) * boost,
            ranges.pct_zero_vehicle.sample(&mut rng) * boost,
        ];
        fractions.insert(z, f);
    }

    // anchors: one zone per region class regardless of what was sampled
    let thresholds = RegionThresholds::default();
    let far: Vec<u32> = zone_corridor
        .iter()
        .filter(|(_, &d)| d > thresholds.corridor_distance_m)
        .map(|(&z, _)| z)
        .collect();
    let near: Vec<u32> = zone_corridor
        .iter()
        .filter(|(_, &d)| d <= thresholds.corridor_distance_m)
        .map(|(&z, _)| z)
        .collect();
    let by_intensity = |zs: &[u32], pick_max: bool, exclude: &[u32]| {
        zs.iter()
            .copied()
            .filter(|z| !exclude.contains(z))
            .fold(None, |best: Option<u32>, z| match best {
                None => Some(z),
                Some(b) => {
                    let better = if pick_max {
                        zone_intensity[&z] > zone_intensity[&b]
                    } else {
                        zone_intensity[&z] < zone_intensity[&b]
                    };
                    Some(if better { z } else { b })
                }
            })
    };
    let tnc = by_intensity(&far, true, &[])
        .ok_or_else(|| Error::Config("every zone is within the corridor distance; enlarge the grid".into()))?;
    let corridor_zone = by_intensity(&near, true, &[])
        .ok_or_else(|| Error::Config("no zone lies within the corridor distance".into()))?;
    let all: Vec<u32> = zone_intensity.keys().copied().collect();
    let rural = by_intensity(&all, false, &[tnc, corridor_zone]).expect("at least 3 zones");

    let non_rural = (thresholds.rural_housing_max * 5.0).min(hr.max);
    let set_min = |m: &mut BTreeMap<u32, f64>, z: u32, v: f64| {
        let e = m.get_mut(&z).expect("zone");
        *e = e.max(v);
    };
    set_min(&mut housing, tnc, non_rural);
    set_min(&mut housing, corridor_zone, non_rural);
    let rural_cap = (thresholds.rural_housing_max * 0.6).max(hr.min);
    let e = housing.get_mut(&rural).expect("zone");
    *e = e.min(rural_cap);
    let anchors = BTreeMap::from([
        (RegionClass::Tnc, tnc),
        (RegionClass::Corridor, corridor_zone),
        (RegionClass::Rural, rural),
    ]);

    let mut attributes = AttributeTable::new(
        [
            columns::POPULATION_DENSITY,
            columns::HOUSING_UNITS_PER_SQMI,
            columns::PCT_HISPANIC_BLACK,
            columns::PCT_BELOW_POVERTY,
            columns::PCT_MULTIFAMILY,
            columns::PCT_ZERO_VEHICLE,
            columns::DAC_FLAG,
        ]
        .map(String::from)
        .to_vec(),
    )?;
    for (&z, &hu) in &housing {
        let pop = ranges.population_density.clamp((hu * persons[&z]).round());
        let f = fractions[&z];
        let frac = [
            ranges.pct_hispanic_black.clamp(round_to(f[0], 10_000.0)),
            ranges.pct_below_poverty.clamp(round_to(f[1], 10_000.0)),
            ranges.pct_multifamily.clamp(round_to(f[2], 10_000.0)),
            ranges.pct_zero_vehicle.clamp(round_to(f[3], 10_000.0)),
        ];
        let dac = (frac[1] >= 0.2 && frac[0] >= 0.4) || rng.bernoulli(0.08);
        attributes.insert(z, vec![pop, hu, frac[0], frac[1], frac[2], frac[3], dac as u8 as f64])?;
    }

    // land cover and traffic
    let mut lc = Vec::with_capacity(geo.len());
    let mut traffic = Vec::with_capacity(geo.len());
    let tr = &ranges.traffic_density;
    for i in 0..geo.len() {
        let (c, r) = geo.col_row(i);
        let ic = layout.cell_intensity(c, r);
        let p_dev = (1.3 * ic).min(1.0);
        let code = if rng.next_f64() < p_dev {
            classes::DEVELOPED
        } else {
            let v = rng.next_f64();
            if v < 0.06 {
                classes::WATER
            } else if v < 0.3 {
                classes::BARREN
            } else {
                classes::GREEN
            }
        };
        lc.push(code);
        let q = corridor_distance.values()[i] / 600.0;
        let t = tr.mean * 4.0 * (0.7 / (1.0 + q * q) + 0.3 * ic) * (0.75 + 0.5 * rng.next_f64());
        traffic.push(tr.clamp(t.round()));
    }
    let landcover = CategoricalGrid::new(
        geo,
        lc,
        &[classes::DEVELOPED, classes::BARREN, classes::GREEN, classes::WATER],
    )?;
    let traffic = Grid::new(geo, DEFAULT_NODATA, traffic)?;

    // point features
    let point_in = |rng: &mut XorShift64Star, col: usize, row: usize| {
        let x = geo.origin_x + (col as f64 + rng.next_f64()) * cs;
        let y = geo.origin_y + (row as f64 + rng.next_f64()) * cs;
        Geometry::Point([round_to(x, 100.0), round_to(y, 100.0)])
    };
    let evcs = FeatureSet::new(
        (0..config.n_evcs)
            .map(|n| {
                let (col, row) = layout.pick_cell(&mut rng, 0.1, 1, 1);
                let level = if n == 0 || rng.bernoulli(0.3) { 3.0 } else { 2.0 };
                let tesla = n != 0 && level == 3.0 && rng.bernoulli(0.35);
                Feature::new(point_in(&mut rng, col, row))
                    .with("level", PropValue::Num(level))
                    .with("network", PropValue::Str(if tesla { "tesla" } else { "other" }.into()))
            })
            .collect(),
    );
    let substations = FeatureSet::new(
        (0..config.n_substations)
            .map(|n| {
                let (col, row) = layout.pick_cell(&mut rng, 1.0, 1, 1);
                let kv = match n {
                    0 => 220.0,
                    1 => 110.0,
                    _ if rng.bernoulli(0.4) => 220.0,
                    _ => 110.0,
                };
                Feature::new(point_in(&mut rng, col, row)).with("kv", PropValue::Num(kv))
            })
            .collect(),
    );

    let parking = layout.parcels(&mut rng, config.n_parking, (1, 3), 0.05, "parking");
    let residential = layout.parcels(&mut rng, config.n_residential, (3, 8), 0.2, "residential");
    let environmental = layout.parcels(&mut rng, config.n_environmental, (3, 10), 1.0, "environmental");

    Ok(Bundle {
        config: config.clone(),
        zones,
        attributes,
        landcover,
        traffic,
        corridor,
        evcs,
        substations,
        parking,
        residential,
        environmental,
        anchors,
    })
}

/// File names written by [`write_bundle`], relative to the bundle root.
pub mod files {
    pub const ZONES: &str = "zones.asc";
    pub const ATTRIBUTES: &str = "zone_attributes.csv";
    pub const LANDCOVER: &str = "landcover.asc";
    pub const TRAFFIC: &str = "traffic.asc";
    pub const CORRIDOR: &str = "corridor.geojson";
    pub const EVCS: &str = "evcs.geojson";
    pub const SUBSTATIONS: &str = "substations.geojson";
    pub const PARKING: &str = "parking.geojson";
    pub const RESIDENTIAL: &str = "residential.geojson";
    pub const ENVIRONMENTAL: &str = "environmental.geojson";
    pub const SPEC_DIR: &str = "specs";
    pub const RUN_CONFIG: &str = "run_config.json";
    pub const SCENARIO: &str = "scenario.json";
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_bundle(bundle: &Bundle, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let spec_dir = dir.join(files::SPEC_DIR);
    fs::create_dir_all(&spec_dir).map_err(|e| Error::io(&spec_dir, e))?;

    write_ascii_grid(&bundle.zones.to_grid(), dir.join(files::ZONES))?;
    write_text(&dir.join(files::ATTRIBUTES), &bundle.attributes.to_csv_string())?;
    write_ascii_grid(&bundle.landcover.to_grid(), dir.join(files::LANDCOVER))?;
    write_ascii_grid(&bundle.traffic, dir.join(files::TRAFFIC))?;
    bundle.corridor.write(dir.join(files::CORRIDOR))?;
    bundle.evcs.write(dir.join(files::EVCS))?;
    bundle.substations.write(dir.join(files::SUBSTATIONS))?;
    bundle.parking.write(dir.join(files::PARKING))?;
    bundle.residential.write(dir.join(files::RESIDENTIAL))?;
    bundle.environmental.write(dir.join(files::ENVIRONMENTAL))?;
    for region in RegionClass::ALL {
        write_text(
            &spec_dir.join(format!("{region}.json")),
            &SuitabilitySpec::canonical(region).to_json(),
        )?;
    }
    write_text(
        &dir.join(files::RUN_CONFIG),
        &RunConfig::for_scenario(bundle.config.seed).to_json(),
    )?;
    let mut scenario = serde_json::to_string_pretty(&bundle.config)?;
    scenario.push('\n');
    write_text(&dir.join(files::SCENARIO), &scenario)
}

/// Generates and writes a bundle; returns its golden hash.
pub fn generate_to(config: &ScenarioConfig, dir: impl AsRef<Path>) -> Result<String> {
    let bundle = generate(config)?;
    write_bundle(&bundle, dir.as_ref())?;
    golden_hash(dir)
}

/// Files never included in a golden hash: they hold wall-clock timings.
pub const HASH_EXCLUDED: &[&str] = &["run_report.json"];

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, PathBuf)>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let kind = entry.file_type().map_err(|e| Error::io(&path, e))?;
        if kind.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("under root");
            let rel = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            out.push((rel, path));
        }
    }
    Ok(())
}

/// Content digest of a directory tree: files sorted by `/`-separated
/// relative path, each contributing the line `"<path>\0<sha256 hex>\n"` to an
/// outer SHA-256. Files named in [`HASH_EXCLUDED`] are skipped. An empty
/// tree hashes to the SHA-256 of the empty string.
pub fn golden_hash(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut entries = Vec::new();
    collect_files(dir, dir, &mut entries)?;
    entries.retain(|(rel, _)| {
        let name = rel.rsplit('/').next().unwrap_or(rel);
        !HASH_EXCLUDED.contains(&name)
    });
    entries.sort();
    let mut outer = Sha256::new();
    for (rel, path) in entries {
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        outer.update(rel.as_bytes());
        outer.update([0u8]);
        outer.update(hex::encode(Sha256::digest(&bytes)).as_bytes());
        outer.update(b"\n");
    }
    Ok(hex::encode(outer.finalize()))
}
