use super::{Coord, FeatureSet};
use crate::raster::{GeoRef, Grid, DEFAULT_NODATA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointMode {
    /// 1.0 where at least one point falls in the cell, else 0.0.
    Presence,
    /// Number of points per cell.
    Count,
}

#[derive(Debug, Clone)]
pub struct PointRaster {
    pub grid: Grid,
    /// Points that fell outside the template extent.
    pub skipped: usize,
}

pub fn rasterize_points(fs: &FeatureSet, template: &GeoRef, mode: PointMode) -> PointRaster {
    let mut values = vec![0.0; template.len()];
    let mut skipped = 0;
    for (p, _) in fs.points() {
        match template.locate(p[0], p[1]) {
            Some((c, r)) => {
                let cell = &mut values[template.index(c, r)];
                match mode {
                    PointMode::Presence => *cell = 1.0,
                    PointMode::Count => *cell += 1.0,
                }
            }
            None => skipped += 1,
        }
    }
    PointRaster {
        grid: mask_grid(template, values),
        skipped,
    }
}

fn mask_grid(geo: &GeoRef, values: Vec<f64>) -> Grid {
    Grid::new(*geo, DEFAULT_NODATA, values).expect("template is valid")
}

/// Inclusive `(col, row)` range of cells that may touch the box, padded by
/// one cell and clamped to the grid. `None` when the box misses the grid.
fn cell_range(geo: &GeoRef, min: Coord, max: Coord) -> Option<(usize, usize, usize, usize)> {
    let cs = geo.cell_size;
    let c0 = ((min[0] - geo.origin_x) / cs).floor() - 1.0;
    let c1 = ((max[0] - geo.origin_x) / cs).floor() + 1.0;
    let r0 = ((min[1] - geo.origin_y) / cs).floor() - 1.0;
    let r1 = ((max[1] - geo.origin_y) / cs).floor() + 1.0;
    if c1 < 0.0 || r1 < 0.0 || c0 >= geo.width as f64 || r0 >= geo.height as f64 {
        return None;
    }
    let clamp = |v: f64, hi: usize| v.max(0.0).min(hi as f64 - 1.0) as usize;
    Some((
        clamp(c0, geo.width),
        clamp(c1, geo.width),
        clamp(r0, geo.height),
        clamp(r1, geo.height),
    ))
}

/// Liang–Barsky test of segment `a`–`b` against the closed box.
fn segment_touches_box(a: Coord, b: Coord, min: Coord, max: Coord) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let p = [-d[0], d[0], -d[1], d[1]];
    let q = [a[0] - min[0], max[0] - a[0], a[1] - min[1], max[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for i in 0..4 {
        if p[i] == 0.0 {
            if q[i] < 0.0 {
                return false;
            }
        } else {
            let t = q[i] / p[i];
            if p[i] < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    t0 <= t1
}

/// Supercover rasterization: every cell whose closed square the line
/// touches is marked. This includes every cell whose centre lies within
/// half a cell of the line, since that disc is inscribed in the square.
/// Zero-length segments mark the cell(s) containing the point.
pub fn rasterize_polyline(line: &[Coord], template: &GeoRef) -> Grid {
    let mut values = vec![0.0; template.len()];
    let cs = template.cell_size;
    for seg in line.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let min = [a[0].min(b[0]), a[1].min(b[1])];
        let max = [a[0].max(b[0]), a[1].max(b[1])];
        let Some((c0, c1, r0, r1)) = cell_range(template, min, max) else {
            continue;
        };
        for row in r0..=r1 {
            let y0 = template.origin_y + row as f64 * cs;
            for col in c0..=c1 {
                let x0 = template.origin_x + col as f64 * cs;
                if segment_touches_box(a, b, [x0, y0], [x0 + cs, y0 + cs]) {
                    values[template.index(col, row)] = 1.0;
                }
            }
        }
    }
    if line.len() == 1 {
        if let Some((c, r)) = template.locate(line[0][0], line[0][1]) {
            values[template.index(c, r)] = 1.0;
        }
    }
    mask_grid(template, values)
}

fn is_degenerate(ring: &[Coord]) -> bool {
    let a = ring[0];
    let Some(&b) = ring.iter().find(|&&p| p != a) else {
        return true;
    };
    ring.iter()
        .all(|p| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) == 0.0)
}

/// Even-odd fill on cell centres. A centre lying exactly on an edge counts
/// as inside. Edges are canonicalised by endpoint order first, so the result
/// does not depend on ring orientation.
pub fn rasterize_polygon(ring: &[Coord], template: &GeoRef) -> Grid {
    let mut values = vec![0.0; template.len()];
    fill_polygon(ring, template, &mut values);
    mask_grid(template, values)
}

/// Union of all polygon features.
pub fn rasterize_polygons(fs: &FeatureSet, template: &GeoRef) -> Grid {
    let mut values = vec![0.0; template.len()];
    for ring in fs.polygons() {
        fill_polygon(ring, template, &mut values);
    }
    mask_grid(template, values)
}

fn fill_polygon(ring: &[Coord], geo: &GeoRef, values: &mut [f64]) {
    if ring.len() < 3 || is_degenerate(ring) {
        return;
    }
    // lower endpoint first; horizontal edges contribute no crossings
    let edges: Vec<(Coord, Coord)> = ring
        .windows(2)
        .map(|w| {
            if (w[0][1], w[0][0]) <= (w[1][1], w[1][0]) {
                (w[0], w[1])
            } else {
                (w[1], w[0])
            }
        })
        .collect();

    let mut xs = Vec::new();
    for row in 0..geo.height {
        let (_, y) = geo.cell_center(0, row);
        xs.clear();
        for &(a, b) in &edges {
            if a[1] <= y && y < b[1] {
                xs.push(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
            }
        }
        if xs.len() < 2 {
            continue;
        }
        xs.sort_by(|p, q| p.partial_cmp(q).expect("finite crossings"));
        for pair in xs.chunks_exact(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let Some((c0, c1, _, _)) = cell_range(geo, [lo, y], [hi, y]) else {
                continue;
            };
            for col in c0..=c1 {
                let (cx, _) = geo.cell_center(col, row);
                if cx >= lo && cx <= hi {
                    values[geo.index(col, row)] = 1.0;
                }
            }
        }
    }

    for &(a, b) in &edges {
        let min = [a[0].min(b[0]), a[1].min(b[1])];
        let max = [a[0].max(b[0]), a[1].max(b[1])];
        let Some((c0, c1, r0, r1)) = cell_range(geo, min, max) else {
            continue;
        };
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let tol = 1e-12 * len * (len + geo.cell_size);
        for row in r0..=r1 {
            for col in c0..=c1 {
                let (cx, cy) = geo.cell_center(col, row);
                if cx < min[0] || cx > max[0] || cy < min[1] || cy > max[1] {
                    continue;
                }
                let cross = (b[0] - a[0]) * (cy - a[1]) - (b[1] - a[1]) * (cx - a[0]);
                if cross.abs() <= tol {
                    values[geo.index(col, row)] = 1.0;
                }
            }
        }
    }
}
