//! Paired-tile export for image-to-image training: tiles of an input image
//! and of a rendered target, joined side by side, with a seeded
//! train/test split.
//!
//! Layout written by [`export_dataset`]:
//!
//! ```text
//! <out>/pairs/0000.ppm      input tile on the left, target on the right
//! <out>/manifest.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuf;
use crate::rng::XorShift64Star;

pub const TILE_SIZE: usize = 256;
pub const TRAIN_FRACTION: f64 = 0.8;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAIRS_DIR: &str = "pairs";

#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    /// Top-left pixel `(col, row)` in the source image.
    pub origin: (usize, usize),
    pub image: ImageBuf,
}

/// Non-overlapping square tiles in row-major origin order. Partial tiles at
/// the right and bottom edges are dropped.
pub fn cut_tiles(image: &ImageBuf, tile: usize, stride: usize) -> Result<Vec<Tile>> {
    if tile == 0 || stride == 0 {
        return Err(Error::Dataset("tile and stride must be positive".into()));
    }
    if image.width() < tile || image.height() < tile {
        return Err(Error::ImageTooSmall(format!(
            "{}x{} image is smaller than one {tile}x{tile} tile",
            image.width(),
            image.height()
        )));
    }
    let mut tiles = Vec::new();
    for y in (0..=image.height() - tile).step_by(stride) {
        for x in (0..=image.width() - tile).step_by(stride) {
            tiles.push(Tile {
                origin: (x, y),
                image: image.crop(x, y, tile, tile)?,
            });
        }
    }
    Ok(tiles)
}

/// Joins `input` (left half) and `target` (right half) into one image.
pub fn join_pair(input: &ImageBuf, target: &ImageBuf) -> Result<ImageBuf> {
    if !input.same_shape(target) {
        return Err(Error::ShapeMismatch(format!(
            "input tile {}x{}x{} vs target tile {}x{}x{}",
            input.width(),
            input.height(),
            input.channels(),
            target.width(),
            target.height(),
            target.channels()
        )));
    }
    let mut samples = Vec::with_capacity(input.samples().len() * 2);
    for y in 0..input.height() {
        samples.extend_from_slice(input.row(y));
        samples.extend_from_slice(target.row(y));
    }
    ImageBuf::new(input.width() * 2, input.height(), input.channels(), samples)
}

/// Inverse of [`join_pair`].
pub fn split_composite(composite: &ImageBuf) -> Result<(ImageBuf, ImageBuf)> {
    if !composite.width().is_multiple_of(2) {
        return Err(Error::InvalidImage(format!(
            "composite width {} is odd",
            composite.width()
        )));
    }
    let half = composite.width() / 2;
    Ok((
        composite.crop(0, 0, half, composite.height())?,
        composite.crop(half, 0, half, composite.height())?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub origin: (usize, usize),
    pub composite: ImageBuf,
}

/// Pairs tiles by position. Counts and origins must match one to one.
pub fn make_pairs(inputs: &[Tile], targets: &[Tile]) -> Result<Vec<Pair>> {
    if inputs.len() != targets.len() {
        return Err(Error::Dataset(format!(
            "{} input tiles vs {} target tiles",
            inputs.len(),
            targets.len()
        )));
    }
    inputs
        .iter()
        .zip(targets)
        .map(|(i, t)| {
            if i.origin != t.origin {
                return Err(Error::Dataset(format!(
                    "input tile at {:?} paired with target tile at {:?}",
                    i.origin, t.origin
                )));
            }
            Ok(Pair {
                origin: i.origin,
                composite: join_pair(&i.image, &t.image)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Size of the training set: `floor(fraction * n)`, with a small epsilon so
/// products like `0.8 * 10` land on the intended integer.
pub fn train_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}

/// Shuffles `0..n` with Fisher-Yates under xorshift64* seeded by `seed`; the
/// first `train_count(n, fraction)` ids of the permutation are train. The
/// result is indexed by id.
pub fn split_train_test(n: usize, fraction: f64, seed: u64) -> Result<Vec<Split>> {
    if n < 2 {
        return Err(Error::Dataset(format!("need at least 2 samples to split, got {n}")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Dataset(format!(
            "train fraction must be in (0, 1), got {fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    XorShift64Star::new(seed).shuffle(&mut order);
    let mut split = vec![Split::Test; n];
    for &id in &order[..train_count(n, fraction)] {
        split[id] = Split::Train;
    }
    Ok(split)
}

/// One exported pair. Field order is alphabetical so the serialized manifest
/// has sorted keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    pub file: String,
    pub id: String,
    /// `[col, row]` of the tile in its source image.
    pub origin: [usize; 2],
    pub scene: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilePairManifest {
    /// `[width, height]` of every composite.
    pub composite_size: [usize; 2],
    pub pairs: Vec<PairRecord>,
    pub seed: u64,
    pub split: BTreeMap<String, Split>,
    pub tile_size: usize,
}

impl TilePairManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<TilePairManifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: TilePairManifest = serde_json::from_str(&text)?;
        m.validate(TRAIN_FRACTION)?;
        Ok(m)
    }

    pub fn ids_in(&self, which: Split) -> Vec<&str> {
        self.split
            .iter()
            .filter(|(_, s)| **s == which)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Checks the structural invariants: unique ids, a split entry for every
    /// pair and nothing else, train size `floor(fraction * n)`, composite
    /// size twice the tile width.
    pub fn validate(&self, fraction: f64) -> Result<()> {
        let n = self.pairs.len();
        let mut ids = std::collections::BTreeSet::new();
        for p in &self.pairs {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::Dataset(format!("duplicate pair id {}", p.id)));
            }
            if !self.split.contains_key(&p.id) {
                return Err(Error::Dataset(format!("pair {} has no split entry", p.id)));
            }
        }
        if self.split.len() != n {
            return Err(Error::Dataset(format!(
                "{} split entries for {n} pairs",
                self.split.len()
            )));
        }
        let train = self.ids_in(Split::Train).len();
        if train != train_count(n, fraction) {
            return Err(Error::Dataset(format!(
                "{train} training pairs, expected {}",
                train_count(n, fraction)
            )));
        }
        if self.composite_size != [2 * self.tile_size, self.tile_size] {
            return Err(Error::Dataset(format!(
                "composite size {:?} does not match tile size {}",
                self.composite_size, self.tile_size
            )));
        }
        Ok(())
    }
}

/// One source scene: an input image and its aligned target rendering.
#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    pub input: ImageBuf,
    pub target: ImageBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportOptions {
    pub tile_size: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            tile_size: TILE_SIZE,
            train_fraction: TRAIN_FRACTION,
            seed: 0,
        }
    }
}

pub fn pair_id(index: usize) -> String {
    format!("{index:04}")
}

/// Tiles every scene, numbers the pairs in scene order then tile order,
/// writes `pairs/<id>.ppm` and `manifest.json`, and returns the manifest.
pub fn export_dataset(scenes: &[Scene], out_dir: impl AsRef<Path>, opts: &ExportOptions) -> Result<TilePairManifest> {
    let out_dir = out_dir.as_ref();
    let mut records = Vec::new();
    let mut composites = Vec::new();
    for scene in scenes {
        if scene.input.width() != scene.target.width() || scene.input.height() != scene.target.height() {
            return Err(Error::ShapeMismatch(format!(
                "scene `{}`: input {}x{} vs target {}x{}",
                scene.name,
                scene.input.width(),
                scene.input.height(),
                scene.target.width(),
                scene.target.height()
            )));
        }
        let inputs = cut_tiles(&scene.input, opts.tile_size, opts.tile_size)?;
        let targets = cut_tiles(&scene.target, opts.tile_size, opts.tile_size)?;
        for pair in make_pairs(&inputs, &targets)? {
            let id = pair_id(records.len());
            records.push(PairRecord {
                file: format!("{PAIRS_DIR}/{id}.ppm"),
                id,
                origin: [pair.origin.0, pair.origin.1],
                scene: scene.name.clone(),
            });
            composites.push(pair.composite);
        }
    }
    let split = split_train_test(records.len(), opts.train_fraction, opts.seed)?;

    let pairs_dir = out_dir.join(PAIRS_DIR);
    fs::create_dir_all(&pairs_dir).map_err(|e| Error::io(&pairs_dir, e))?;
    records
        .par_iter()
        .zip(composites.par_iter())
        .try_for_each(|(r, img)| img.write_ppm(out_dir.join(&r.file)))?;

    let manifest = TilePairManifest {
        composite_size: [2 * opts.tile_size, opts.tile_size],
        split: records.iter().zip(&split).map(|(r, s)| (r.id.clone(), *s)).collect(),
        pairs: records,
        seed: opts.seed,
        tile_size: opts.tile_size,
    };
    manifest.validate(opts.train_fraction)?;
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, c: usize, rng: &mut XorShift64Star) -> ImageBuf {
        ImageBuf::new(w, h, c, (0..w * h * c).map(|_| rng.below(256) as u8).collect()).unwrap()
    }

    #[test]
    fn tiling() {
        let mut rng = XorShift64Star::new(1);
        let tiles = cut_tiles(&img(512, 512, 3, &mut rng), 256, 256).unwrap();
        let origins: Vec<_> = tiles.iter().map(|t| t.origin).collect();
        assert_eq!(origins, [(0, 0), (256, 0), (0, 256), (256, 256)]);
        assert_eq!(cut_tiles(&img(300, 300, 1, &mut rng), 256, 256).unwrap().len(), 1);
        assert!(matches!(
            cut_tiles(&img(255, 400, 1, &mut rng), 256, 256),
            Err(Error::ImageTooSmall(_))
        ));
        for _ in 0..10 {
            let (w, h) = (4 + rng.below(40) as usize, 4 + rng.below(40) as usize);
            let t = 1 + rng.below(4) as usize;
            assert_eq!(
                cut_tiles(&img(w, h, 1, &mut rng), t, t).unwrap().len(),
                (w / t) * (h / t)
            );
        }
    }

    #[test]
    fn composite_halves_are_byte_exact() {
        let mut rng = XorShift64Star::new(2);
        for _ in 0..10 {
            let a = img(16, 16, 3, &mut rng);
            let b = img(16, 16, 3, &mut rng);
            let c = join_pair(&a, &b).unwrap();
            assert_eq!((c.width(), c.height()), (32, 16));
            let (l, r) = split_composite(&c).unwrap();
            assert_eq!(l, a);
            assert_eq!(r, b);
        }
    }

    #[test]
    fn mismatched_origins_rejected() {
        let mut rng = XorShift64Star::new(3);
        let a = Tile {
            origin: (0, 0),
            image: img(4, 4, 1, &mut rng),
        };
        let b = Tile {
            origin: (4, 0),
            image: img(4, 4, 1, &mut rng),
        };
        assert!(make_pairs(std::slice::from_ref(&a), &[b]).is_err());
        assert!(make_pairs(std::slice::from_ref(&a), &[]).is_err());
        let same = a.clone();
        assert_eq!(make_pairs(std::slice::from_ref(&a), &[same]).unwrap().len(), 1);
    }

    #[test]
    fn split_sizes() {
        for (n, train) in [(103, 82), (5, 4), (4, 3), (10, 8), (2, 1)] {
            let s = split_train_test(n, 0.8, 7).unwrap();
            assert_eq!(s.iter().filter(|&&x| x == Split::Train).count(), train, "n = {n}");
            assert_eq!(s.len(), n);
        }
        assert!(split_train_test(1, 0.8, 7).is_err());
        assert!(split_train_test(0, 0.8, 7).is_err());
    }

    #[test]
    fn split_determinism() {
        assert_eq!(
            split_train_test(1000, 0.8, 42).unwrap(),
            split_train_test(1000, 0.8, 42).unwrap()
        );
        assert_ne!(
            split_train_test(1000, 0.8, 42).unwrap(),
            split_train_test(1000, 0.8, 43).unwrap()
        );
    }

    #[test]
    fn manifest_keys_sorted() {
        let m = TilePairManifest {
            composite_size: [8, 4],
            pairs: vec![PairRecord {
                file: "pairs/0000.ppm".into(),
                id: "0000".into(),
                origin: [0, 4],
                scene: "s".into(),
            }],
            seed: 1,
            split: BTreeMap::from([("0000".to_string(), Split::Test)]),
            tile_size: 4,
        };
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["composite_size", "pairs", "seed", "split", "tile_size"]);
        let text = m.to_json();
        let pos = |k: &str| text.find(k).unwrap();
        assert!(
            pos("\"file\"") < pos("\"id\"")
                && pos("\"id\"") < pos("\"origin\"")
                && pos("\"origin\"") < pos("\"scene\"")
        );
    }
}
