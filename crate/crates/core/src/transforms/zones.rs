//! Block-group zones and their attribute table.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{CategoricalGrid, Grid, DEFAULT_NODATA};

/// Well-known attribute column names.
pub mod columns {
    /// Residents per square mile.
    pub const POPULATION_DENSITY: &str = "population_density";
    pub const PCT_HISPANIC_BLACK: &str = "pct_hispanic_black";
    pub const PCT_BELOW_POVERTY: &str = "pct_below_poverty";
    pub const PCT_MULTIFAMILY: &str = "pct_multifamily";
    pub const PCT_ZERO_VEHICLE: &str = "pct_zero_vehicle";
    pub const HOUSING_UNITS_PER_SQMI: &str = "housing_units_per_sqmi";
    /// Justice40 disadvantaged-community flag, 0 or 1.
    pub const DAC_FLAG: &str = "dac_flag";

    pub const FRACTIONS: [&str; 4] = [PCT_HISPANIC_BLACK, PCT_BELOW_POVERTY, PCT_MULTIFAMILY, PCT_ZERO_VEHICLE];
}

/// Named real columns keyed by zone id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttributeTable {
    columns: Vec<String>,
    rows: BTreeMap<u32, Vec<f64>>,
}

impl AttributeTable {
    pub fn new(columns: Vec<String>) -> Result<Self> {
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(Error::Config(format!("duplicate attribute column `{c}`")));
            }
        }
        Ok(AttributeTable {
            columns,
            rows: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, zone: u32, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::Config(format!(
                "zone {zone}: expected {} attribute values, got {}",
                self.columns.len(),
                values.len()
            )));
        }
        if zone == 0 {
            return Err(Error::Config("zone id 0 is reserved for no zone".into()));
        }
        if self.rows.insert(zone, values).is_some() {
            return Err(Error::Config(format!("duplicate attribute row for zone {zone}")));
        }
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn zone_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn get(&self, zone: u32, column: &str) -> Result<f64> {
        let idx = self.column_index(column)?;
        self.rows.get(&zone).map(|r| r[idx]).ok_or(Error::MissingZone(zone))
    }

    /// Adds (or replaces) a column from per-zone values; zones missing from
    /// `values` get `fill`.
    pub fn set_column(&mut self, name: &str, values: &BTreeMap<u32, f64>, fill: f64) {
        let idx = match self.columns.iter().position(|c| c == name) {
            Some(i) => i,
            None => {
                self.columns.push(name.to_string());
                for row in self.rows.values_mut() {
                    row.push(fill);
                }
                self.columns.len() - 1
            }
        };
        for (zone, row) in self.rows.iter_mut() {
            row[idx] = values.get(zone).copied().unwrap_or(fill);
        }
    }

    /// CSV with a header row; the first column is the zone id.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<AttributeTable> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file).map_err(|e| e.with_path(path))
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<AttributeTable> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::parse(1, 0, e.to_string()))?.clone();
        if headers.len() < 2 {
            return Err(Error::parse(
                1,
                0,
                "attribute CSV needs an id column and at least one attribute",
            ));
        }
        let mut table = AttributeTable::new(headers.iter().skip(1).map(str::to_string).collect())
            .map_err(|e| Error::parse(1, 0, e.to_string()))?;
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::parse(line, 0, e.to_string()))?;
            let id_text = &record[0];
            let id: u32 = id_text
                .parse()
                .map_err(|_| Error::parse(line, 1, format!("zone id `{id_text}` is not a non-negative integer")))?;
            let mut values = Vec::with_capacity(record.len() - 1);
            for (col, tok) in record.iter().enumerate().skip(1) {
                let v: f64 = tok
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| Error::parse(line, col + 1, format!("non-numeric value `{tok}`")))?;
                values.push(v);
            }
            table
                .insert(id, values)
                .map_err(|e| Error::parse(line, 0, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("zone_id");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (zone, row) in &self.rows {
            out.push_str(&zone.to_string());
            for v in row {
                out.push(',');
                out.push_str(&crate::raster::format_value(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Zone raster plus attribute table.
#[derive(Debug, Clone)]
pub struct ZoneSet {
    zones: CategoricalGrid,
    attributes: AttributeTable,
}

impl ZoneSet {
    /// Checks that every zone in the raster has an attribute row and that
    /// the well-known columns hold values in their domains.
    pub fn new(zones: CategoricalGrid, attributes: AttributeTable) -> Result<Self> {
        for &code in zones.code_table() {
            if !attributes.rows.contains_key(&code) {
                return Err(Error::MissingZone(code));
            }
        }
        for (idx, name) in attributes.columns.iter().enumerate() {
            let ok: fn(f64) -> bool = match name.as_str() {
                n if columns::FRACTIONS.contains(&n) => |v| (0.0..=1.0).contains(&v),
                columns::DAC_FLAG => |v| v == 0.0 || v == 1.0,
                columns::HOUSING_UNITS_PER_SQMI | columns::POPULATION_DENSITY => |v| v >= 0.0,
                _ => continue,
            };
            for (&zone, row) in &attributes.rows {
                if !ok(row[idx]) {
                    return Err(Error::AttributeRange {
                        zone,
                        column: name.clone(),
                        value: row[idx],
                    });
                }
            }
        }
        Ok(ZoneSet { zones, attributes })
    }

    pub fn zones(&self) -> &CategoricalGrid {
        &self.zones
    }

    pub fn attributes(&self) -> &AttributeTable {
        &self.attributes
    }

    pub fn attributes_mut(&mut self) -> &mut AttributeTable {
        &mut self.attributes
    }
}

/// Each cell takes its zone's value in `column`; zone 0 becomes nodata.
pub fn paint_attribute(zones: &ZoneSet, column: &str) -> Result<Grid> {
    let table = &zones.attributes;
    let idx = table.column_index(column)?;
    let values = zones
        .zones
        .values()
        .iter()
        .map(|&code| {
            if code == 0 {
                Ok(DEFAULT_NODATA)
            } else {
                table.rows.get(&code).map(|r| r[idx]).ok_or(Error::MissingZone(code))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Grid::new(*zones.zones.geo(), DEFAULT_NODATA, values)
}

/// Mean of valid `layer` cells per zone.
pub fn zonal_mean(layer: &Grid, zones: &CategoricalGrid) -> Result<BTreeMap<u32, f64>> {
    layer.geo().check_aligned(zones.geo(), "zonal mean")?;
    let mut acc: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (i, &code) in zones.values().iter().enumerate() {
        if code == 0 {
            continue;
        }
        if let Some(v) = layer.valid(i) {
            let e = acc.entry(code).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    Ok(acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

/// Minimum of valid `layer` cells per zone.
pub fn zonal_min(layer: &Grid, zones: &CategoricalGrid) -> Result<BTreeMap<u32, f64>> {
    layer.geo().check_aligned(zones.geo(), "zonal min")?;
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (i, &code) in zones.values().iter().enumerate() {
        if code == 0 {
            continue;
        }
        if let Some(v) = layer.valid(i) {
            let e = acc.entry(code).or_insert(f64::INFINITY);
            *e = e.min(v);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;

    fn two_zones() -> ZoneSet {
        let geo = GeoRef::new(3, 2, 0.0, 0.0, 1.0).unwrap();
        let zones = CategoricalGrid::from_values(geo, vec![1, 1, 2, 0, 2, 2]).unwrap();
        let csv = "zone_id,population_density,pct_below_poverty\n1,1000,0.1\n2,2000,0.3\n";
        let table = AttributeTable::from_reader(csv.as_bytes()).unwrap();
        ZoneSet::new(zones, table).unwrap()
    }

    #[test]
    fn paints_zone_values() {
        let zs = two_zones();
        let g = paint_attribute(&zs, columns::POPULATION_DENSITY).unwrap();
        assert_eq!(g.values(), &[1000.0, 1000.0, 2000.0, DEFAULT_NODATA, 2000.0, 2000.0]);
        assert_eq!(paint_attribute(&zs, columns::POPULATION_DENSITY).unwrap(), g);
        let means = zonal_mean(&g, zs.zones()).unwrap();
        assert_eq!(means[&1], 1000.0);
        assert_eq!(means[&2], 2000.0);
        assert!(matches!(paint_attribute(&zs, "nope"), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn missing_zone_row_is_named() {
        let geo = GeoRef::new(2, 1, 0.0, 0.0, 1.0).unwrap();
        let zones = CategoricalGrid::from_values(geo, vec![1, 7]).unwrap();
        let table = AttributeTable::from_reader("id,population_density\n1,5\n".as_bytes()).unwrap();
        let err = ZoneSet::new(zones, table).unwrap_err();
        assert!(matches!(err, Error::MissingZone(7)));
        assert!(err.to_string().contains('7'));
    }

    #[test]
    fn percentage_domain_is_checked() {
        let geo = GeoRef::new(1, 1, 0.0, 0.0, 1.0).unwrap();
        let zones = CategoricalGrid::from_values(geo, vec![1]).unwrap();
        let table = AttributeTable::from_reader("id,pct_zero_vehicle\n1,1.5\n".as_bytes()).unwrap();
        assert!(matches!(
            ZoneSet::new(zones.clone(), table),
            Err(Error::AttributeRange { .. })
        ));
        let table = AttributeTable::from_reader("id,dac_flag\n1,0.5\n".as_bytes()).unwrap();
        assert!(ZoneSet::new(zones, table).is_err());
    }

    #[test]
    fn csv_errors_carry_position() {
        let err = AttributeTable::from_reader("id,a\n1,2\n2,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 2, .. }), "{err:?}");
        assert!(AttributeTable::from_reader("id,a\n1,2\n1,3\n".as_bytes()).is_err());
        assert!(AttributeTable::from_reader("id,a,a\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let table = AttributeTable::from_reader("zone_id,a,b\n3,0.25,7\n1,2,-1\n".as_bytes()).unwrap();
        let back = AttributeTable::from_reader(table.to_csv_string().as_bytes()).unwrap();
        assert_eq!(table, back);
    }
}
