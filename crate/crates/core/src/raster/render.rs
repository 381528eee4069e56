//! Static map rendering to PPM, one pixel per cell, north row first.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{CategoricalGrid, Grid};
use crate::error::{Error, Result};
use crate::image::ImageBuf;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub enum Palette {
    /// Exact integer codes to colours.
    Codes {
        colors: BTreeMap<u32, Rgb>,
        background: Rgb,
    },
    /// Value ranges: a value goes to the first bucket whose upper bound is
    /// `>=` it; `colors` has one more entry than `upper_bounds`.
    Buckets {
        upper_bounds: Vec<f64>,
        colors: Vec<Rgb>,
        background: Rgb,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PaletteFile {
    #[serde(default = "white")]
    background: Rgb,
    codes: Option<BTreeMap<String, Rgb>>,
    buckets: Option<Vec<BucketEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BucketEntry {
    max: Option<f64>,
    color: Rgb,
}

fn white() -> Rgb {
    [255, 255, 255]
}

impl Palette {
    /// Level 1 (most suitable) dark green through Level 4 red.
    pub fn levels() -> Palette {
        let colors = BTreeMap::from([
            (1, [26, 150, 65]),
            (2, [166, 217, 106]),
            (3, [253, 174, 97]),
            (4, [215, 25, 28]),
        ]);
        Palette::Codes {
            colors,
            background: white(),
        }
    }

    /// TNC / corridor / rural region classes.
    pub fn regions() -> Palette {
        let colors = BTreeMap::from([(1, [94, 60, 153]), (2, [230, 97, 1]), (3, [77, 175, 74])]);
        Palette::Codes {
            colors,
            background: white(),
        }
    }

    /// Parses `{"background": [r,g,b], "codes": {"1": [r,g,b], ...}}` or
    /// `{"background": ..., "buckets": [{"max": 0.25, "color": [...]}, ..., {"color": [...]}]}`.
    pub fn from_json(text: &str) -> Result<Palette> {
        let file: PaletteFile = serde_json::from_str(text)?;
        match (file.codes, file.buckets) {
            (Some(codes), None) => {
                let mut colors = BTreeMap::new();
                for (k, v) in codes {
                    let code: u32 = k
                        .parse()
                        .map_err(|_| Error::Config(format!("palette code `{k}` is not a non-negative integer")))?;
                    colors.insert(code, v);
                }
                Ok(Palette::Codes {
                    colors,
                    background: file.background,
                })
            }
            (None, Some(buckets)) => {
                let Some((last, init)) = buckets.split_last() else {
                    return Err(Error::Config("palette needs at least one bucket".into()));
                };
                if last.max.is_some() {
                    return Err(Error::Config("last palette bucket must be open (no `max`)".into()));
                }
                let mut upper_bounds = Vec::with_capacity(init.len());
                for b in init {
                    let m = b
                        .max
                        .ok_or_else(|| Error::Config("only the last palette bucket may omit `max`".into()))?;
                    if upper_bounds.last().is_some_and(|&p| m <= p) {
                        return Err(Error::Config("palette bucket bounds must increase".into()));
                    }
                    upper_bounds.push(m);
                }
                Ok(Palette::Buckets {
                    upper_bounds,
                    colors: buckets.iter().map(|b| b.color).collect(),
                    background: file.background,
                })
            }
            _ => Err(Error::Config(
                "palette needs exactly one of `codes` or `buckets`".into(),
            )),
        }
    }

    pub fn background(&self) -> Rgb {
        match self {
            Palette::Codes { background, .. } | Palette::Buckets { background, .. } => *background,
        }
    }

    fn color_of(&self, value: f64) -> Result<Rgb> {
        match self {
            Palette::Codes { colors, .. } => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::NotACode(value));
                }
                let code = value as u32;
                colors.get(&code).copied().ok_or(Error::MissingPaletteEntry(code))
            }
            Palette::Buckets {
                upper_bounds, colors, ..
            } => {
                let i = upper_bounds
                    .iter()
                    .position(|&b| value <= b)
                    .unwrap_or(upper_bounds.len());
                Ok(colors[i])
            }
        }
    }
}

fn render_cells(
    width: usize,
    height: usize,
    palette: &Palette,
    cell: impl Fn(usize, usize) -> Option<f64>,
) -> Result<ImageBuf> {
    let mut samples = Vec::with_capacity(width * height * 3);
    for row in (0..height).rev() {
        for col in 0..width {
            let rgb = match cell(col, row) {
                Some(v) => palette.color_of(v)?,
                None => palette.background(),
            };
            samples.extend_from_slice(&rgb);
        }
    }
    ImageBuf::new(width, height, 3, samples)
}

/// Nodata cells take the palette background.
pub fn render_grid(grid: &Grid, palette: &Palette) -> Result<ImageBuf> {
    let geo = grid.geo();
    render_cells(geo.width, geo.height, palette, |c, r| grid.valid(geo.index(c, r)))
}

/// Code 0 takes the palette background.
pub fn render_categorical(grid: &CategoricalGrid, palette: &Palette) -> Result<ImageBuf> {
    let geo = grid.geo();
    render_cells(geo.width, geo.height, palette, |c, r| {
        let code = grid.get(c, r);
        (code != 0).then_some(code as f64)
    })
}
