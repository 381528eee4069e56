//! Vector features: a GeoJSON subset (Point, LineString, single-ring
//! Polygon) and rasterization onto aligned grids.

mod rasterize;

pub use rasterize::{
    rasterize_points, rasterize_polygon, rasterize_polygons, rasterize_polyline, PointMode, PointRaster,
};

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub type Coord = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(Coord),
    /// At least two vertices.
    PolyLine(Vec<Coord>),
    /// Outer ring, explicitly closed (first vertex == last vertex).
    Polygon(Vec<Coord>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropValue {
    Str(String),
    Num(f64),
}

impl PropValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            PropValue::Num(n) => Some(*n),
            PropValue::Str(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropValue::Str(s) => Some(s),
            PropValue::Num(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub geometry: Geometry,
    pub properties: BTreeMap<String, PropValue>,
}

impl Feature {
    pub fn new(geometry: Geometry) -> Self {
        Feature {
            geometry,
            properties: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: PropValue) -> Self {
        self.properties.insert(key.to_string(), value);
        self
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.properties.get(key).and_then(PropValue::as_f64)
    }

    pub fn string(&self, key: &str) -> Option<&str> {
        self.properties.get(key).and_then(PropValue::as_str)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSet {
    pub features: Vec<Feature>,
}

impl FeatureSet {
    pub fn new(features: Vec<Feature>) -> Self {
        FeatureSet { features }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn filter(&self, pred: impl Fn(&Feature) -> bool) -> FeatureSet {
        FeatureSet {
            features: self.features.iter().filter(|f| pred(f)).cloned().collect(),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (Coord, &Feature)> {
        self.features.iter().filter_map(|f| match f.geometry {
            Geometry::Point(p) => Some((p, f)),
            _ => None,
        })
    }

    pub fn polylines(&self) -> impl Iterator<Item = &[Coord]> {
        self.features.iter().filter_map(|f| match &f.geometry {
            Geometry::PolyLine(v) => Some(v.as_slice()),
            _ => None,
        })
    }

    pub fn polygons(&self) -> impl Iterator<Item = &[Coord]> {
        self.features.iter().filter_map(|f| match &f.geometry {
            Geometry::Polygon(v) => Some(v.as_slice()),
            _ => None,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<FeatureSet> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_geojson_subset(&text).map_err(|e| match e {
            Error::GeoJson(m) => Error::GeoJson(format!("{}: {m}", path.display())),
            Error::Json(j) => Error::GeoJson(format!("{}: {j}", path.display())),
            other => other,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serialize_geojson(self);
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn coord(v: &Value, what: &str) -> Result<Coord> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::GeoJson(format!("{what}: position must be an array")))?;
    if arr.len() < 2 {
        return Err(Error::GeoJson(format!("{what}: position needs two coordinates")));
    }
    let x = arr[0].as_f64();
    let y = arr[1].as_f64();
    match (x, y) {
        (Some(x), Some(y)) if x.is_finite() && y.is_finite() => Ok([x, y]),
        _ => Err(Error::GeoJson(format!("{what}: coordinates must be finite numbers"))),
    }
}

fn coord_list(v: &Value, what: &str) -> Result<Vec<Coord>> {
    v.as_array()
        .ok_or_else(|| Error::GeoJson(format!("{what}: expected an array of positions")))?
        .iter()
        .map(|c| coord(c, what))
        .collect()
}

fn parse_geometry(g: &Value, idx: usize) -> Result<Geometry> {
    let what = format!("feature {idx}");
    let kind = g
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::GeoJson(format!("{what}: geometry has no type")))?;
    let coords = || {
        g.get("coordinates")
            .ok_or_else(|| Error::GeoJson(format!("{what}: geometry has no coordinates")))
    };
    match kind {
        "Point" => Ok(Geometry::Point(coord(coords()?, &what)?)),
        "LineString" => {
            let line = coord_list(coords()?, &what)?;
            if line.len() < 2 {
                return Err(Error::GeoJson(format!("{what}: LineString needs at least 2 positions")));
            }
            Ok(Geometry::PolyLine(line))
        }
        "Polygon" => {
            let rings = coords()?
                .as_array()
                .ok_or_else(|| Error::GeoJson(format!("{what}: Polygon coordinates must be an array of rings")))?;
            if rings.len() != 1 {
                return Err(Error::GeoJson(format!(
                    "{what}: Polygon must have exactly one ring (holes unsupported), found {}",
                    rings.len()
                )));
            }
            let ring = coord_list(&rings[0], &what)?;
            if ring.len() < 3 {
                return Err(Error::GeoJson(format!(
                    "{what}: polygon ring needs at least 3 positions"
                )));
            }
            let (first, last) = (ring[0], ring[ring.len() - 1]);
            if first != last {
                return Err(Error::UnclosedRing { first, last });
            }
            Ok(Geometry::Polygon(ring))
        }
        other => Err(Error::UnsupportedGeometry(other.to_string())),
    }
}

fn parse_properties(p: Option<&Value>, idx: usize) -> Result<BTreeMap<String, PropValue>> {
    let mut out = BTreeMap::new();
    let Some(p) = p else { return Ok(out) };
    if p.is_null() {
        return Ok(out);
    }
    let obj = p
        .as_object()
        .ok_or_else(|| Error::GeoJson(format!("feature {idx}: properties must be an object")))?;
    for (k, v) in obj {
        let pv = match v {
            Value::String(s) => PropValue::Str(s.clone()),
            Value::Number(n) => PropValue::Num(n.as_f64().unwrap_or(f64::NAN)),
            _ => {
                return Err(Error::GeoJson(format!(
                    "feature {idx}: property `{k}` must be a string or number"
                )))
            }
        };
        out.insert(k.clone(), pv);
    }
    Ok(out)
}

/// Parses a FeatureCollection restricted to Point, LineString and
/// single-ring Polygon geometries.
pub fn parse_geojson_subset(text: &str) -> Result<FeatureSet> {
    let root: Value = serde_json::from_str(text)?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::GeoJson("top-level object must be a FeatureCollection".into()));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::GeoJson("FeatureCollection has no `features` array".into()))?;
    let mut out = Vec::with_capacity(features.len());
    for (idx, f) in features.iter().enumerate() {
        if f.get("type").and_then(Value::as_str) != Some("Feature") {
            return Err(Error::GeoJson(format!("feature {idx}: type must be `Feature`")));
        }
        let geometry = f
            .get("geometry")
            .filter(|g| !g.is_null())
            .ok_or_else(|| Error::GeoJson(format!("feature {idx}: missing geometry")))?;
        out.push(Feature {
            geometry: parse_geometry(geometry, idx)?,
            properties: parse_properties(f.get("properties"), idx)?,
        });
    }
    Ok(FeatureSet { features: out })
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn position(c: &Coord) -> Value {
    Value::Array(vec![number(c[0]), number(c[1])])
}

/// Serializes with sorted property keys so output is byte-stable.
pub fn serialize_geojson(fs: &FeatureSet) -> String {
    let features: Vec<Value> = fs
        .features
        .iter()
        .map(|f| {
            let geometry = match &f.geometry {
                Geometry::Point(p) => json!({"type": "Point", "coordinates": position(p)}),
                Geometry::PolyLine(v) => {
                    json!({"type": "LineString", "coordinates": v.iter().map(position).collect::<Vec<_>>()})
                }
                Geometry::Polygon(v) => {
                    json!({"type": "Polygon", "coordinates": [v.iter().map(position).collect::<Vec<_>>()]})
                }
            };
            let props: Map<String, Value> = f
                .properties
                .iter()
                .map(|(k, v)| {
                    let v = match v {
                        PropValue::Str(s) => Value::String(s.clone()),
                        PropValue::Num(n) => number(*n),
                    };
                    (k.clone(), v)
                })
                .collect();
            json!({"type": "Feature", "geometry": geometry, "properties": props})
        })
        .collect();
    serde_json::to_string(&json!({"type": "FeatureCollection", "features": features}))
        .expect("GeoJSON value serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_a_point_with_properties() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Point","coordinates":[1,2]},"properties":{"kv":220}}]}"#;
        let fs = parse_geojson_subset(text).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs.features[0].geometry, Geometry::Point([1.0, 2.0]));
        assert_eq!(fs.features[0].number("kv"), Some(220.0));
    }

    #[test]
    fn rejects_outside_the_subset() {
        let multi = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"MultiPolygon","coordinates":[]},"properties":{}}]}"#;
        let err = parse_geojson_subset(multi).unwrap_err();
        assert!(matches!(err, Error::UnsupportedGeometry(ref t) if t == "MultiPolygon"));
        assert!(err.to_string().contains("unsupported geometry"));

        let open = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}}]}"#;
        assert!(matches!(parse_geojson_subset(open), Err(Error::UnclosedRing { .. })));

        let holes = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Polygon","coordinates":[
                [[0,0],[4,0],[4,4],[0,0]],[[1,1],[2,1],[2,2],[1,1]]]}}]}"#;
        assert!(parse_geojson_subset(holes).is_err());

        assert!(matches!(parse_geojson_subset("{not json"), Err(Error::Json(_))));
        assert!(parse_geojson_subset(r#"{"type":"Feature"}"#).is_err());
        let nested = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{"a":[1]}}]}"#;
        assert!(parse_geojson_subset(nested).is_err());
    }

    fn arb_coord() -> impl Strategy<Value = Coord> {
        (-1e5f64..1e5, -1e5f64..1e5).prop_map(|(x, y)| [x, y])
    }

    fn arb_feature() -> impl Strategy<Value = Feature> {
        let geom = prop_oneof![
            arb_coord().prop_map(Geometry::Point),
            proptest::collection::vec(arb_coord(), 2..6).prop_map(Geometry::PolyLine),
            proptest::collection::vec(arb_coord(), 3..6).prop_map(|mut v| {
                v.push(v[0]);
                Geometry::Polygon(v)
            }),
        ];
        let props = proptest::collection::btree_map(
            "[a-z]{1,6}",
            prop_oneof![
                (-1e6f64..1e6).prop_map(PropValue::Num),
                "[a-zA-Z0-9 ]{0,8}".prop_map(PropValue::Str)
            ],
            0..4,
        );
        (geom, props).prop_map(|(geometry, properties)| Feature { geometry, properties })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(features in proptest::collection::vec(arb_feature(), 0..6)) {
            let fs = FeatureSet::new(features);
            let text = serialize_geojson(&fs);
            prop_assert_eq!(parse_geojson_subset(&text).unwrap(), fs);
        }
    }
}
