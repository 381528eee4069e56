//! Exact Euclidean distance transform.
//!
//! Two separable passes of the lower-envelope-of-parabolas algorithm
//! (Felzenszwalb & Huttenlocher): squared distances along columns first,
//! then along rows. All intermediate values are integer squared cell
//! distances, so the result is exact up to the final square root.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{Grid, DEFAULT_NODATA};

/// Distance in map units from each cell centre to the nearest feature cell
/// centre. Feature cells are valid cells with a nonzero value.
pub fn distance_transform(mask: &Grid) -> Result<Grid> {
    let geo = *mask.geo();
    let (w, h) = (geo.width, geo.height);

    let mut any = false;
    // column-major so each column is contiguous for the first pass
    let mut cols = vec![f64::INFINITY; w * h];
    for row in 0..h {
        for col in 0..w {
            if mask.valid(geo.index(col, row)).is_some_and(|v| v != 0.0) {
                cols[col * h + row] = 0.0;
                any = true;
            }
        }
    }
    if !any {
        return Err(Error::EmptyFeatureSet);
    }

    cols.par_chunks_mut(h).for_each(squared_edt_1d);

    let mut rows = vec![0.0; w * h];
    for col in 0..w {
        for row in 0..h {
            rows[row * w + col] = cols[col * h + row];
        }
    }
    rows.par_chunks_mut(w).for_each(squared_edt_1d);

    let cs = geo.cell_size;
    let values = rows.into_iter().map(|d2| d2.sqrt() * cs).collect();
    Grid::new(geo, DEFAULT_NODATA, values)
}

/// In-place 1-D squared distance transform of a sampled function where
/// `f[q]` is 0 at sites, a finite squared distance from an earlier pass, or
/// infinity.
fn squared_edt_1d(f: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if sites.is_empty() {
        return;
    }
    let parabola = |q: usize, fq: f64| fq + (q * q) as f64;

    // v: parabola vertices on the envelope; z: boundaries between them
    let mut v = Vec::with_capacity(sites.len());
    let mut z = Vec::with_capacity(sites.len() + 1);
    v.push(sites[0]);
    z.push(f64::NEG_INFINITY);
    for &q in &sites[1..] {
        let mut s;
        loop {
            let p = *v.last().expect("envelope never empties");
            s = (parabola(q, f[q]) - parabola(p, f[p])) / (2.0 * (q as f64 - p as f64));
            if s <= *z.last().expect("boundary per vertex") {
                v.pop();
                z.pop();
            } else {
                break;
            }
        }
        v.push(q);
        z.push(s);
    }

    let f_at: Vec<f64> = v.iter().map(|&p| f[p]).collect();
    let mut k = 0;
    for (q, out) in f.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *out = d * d + f_at[k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;
    use crate::rng::XorShift64Star;

    fn grid(w: usize, h: usize, cs: f64, values: Vec<f64>) -> Grid {
        Grid::new(GeoRef::new(w, h, 0.0, 0.0, cs).unwrap(), -1.0, values).unwrap()
    }

    fn brute_force(mask: &Grid) -> Vec<f64> {
        let geo = mask.geo();
        let features: Vec<(f64, f64)> = (0..geo.len())
            .filter(|&i| mask.values()[i] == 1.0)
            .map(|i| {
                let (c, r) = geo.col_row(i);
                (c as f64, r as f64)
            })
            .collect();
        (0..geo.len())
            .map(|i| {
                let (c, r) = geo.col_row(i);
                features
                    .iter()
                    .map(|&(fc, fr)| ((c as f64 - fc).powi(2) + (r as f64 - fr).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
                    * geo.cell_size
            })
            .collect()
    }

    #[test]
    fn single_row() {
        let d = distance_transform(&grid(3, 1, 1.0, vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(d.values(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn centre_cell() {
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let d = distance_transform(&grid(3, 3, 2.0, v)).unwrap();
        let diag = 2.0 * 2f64.sqrt();
        assert_eq!(d.values(), &[diag, 2.0, diag, 2.0, 0.0, 2.0, diag, 2.0, diag]);
    }

    #[test]
    fn empty_mask_errors() {
        assert!(matches!(
            distance_transform(&grid(2, 2, 1.0, vec![0.0; 4])),
            Err(Error::EmptyFeatureSet)
        ));
        // nodata cells are never features
        assert!(matches!(
            distance_transform(&grid(2, 1, 1.0, vec![-1.0, 0.0])),
            Err(Error::EmptyFeatureSet)
        ));
    }

    #[test]
    fn matches_brute_force_and_is_lipschitz() {
        let mut rng = XorShift64Star::new(2024);
        for trial in 0..30 {
            let w = 1 + rng.below(40) as usize;
            let h = 1 + rng.below(40) as usize;
            let density = [0.001, 0.01, 0.1, 0.5][trial % 4];
            let mut v: Vec<f64> = (0..w * h)
                .map(|_| if rng.bernoulli(density) { 1.0 } else { 0.0 })
                .collect();
            let seed_cell = rng.below((w * h) as u64) as usize;
            v[seed_cell] = 1.0;
            let cs = rng.uniform(0.5, 30.0);
            let mask = grid(w, h, cs, v);
            let d = distance_transform(&mask).unwrap();
            let oracle = brute_force(&mask);
            for (i, (a, b)) in d.values().iter().zip(&oracle).enumerate() {
                assert!((a - b).abs() <= 1e-9 * cs, "trial {trial} cell {i}: {a} vs {b}");
                assert!(*a >= 0.0);
                assert_eq!(*a == 0.0, mask.values()[i] == 1.0);
            }
            for row in 0..h {
                for col in 0..w {
                    if col + 1 < w {
                        assert!((d.get(col, row) - d.get(col + 1, row)).abs() <= cs * (1.0 + 1e-12));
                    }
                    if row + 1 < h {
                        assert!((d.get(col, row) - d.get(col, row + 1)).abs() <= cs * (1.0 + 1e-12));
                    }
                }
            }
        }
    }
}
