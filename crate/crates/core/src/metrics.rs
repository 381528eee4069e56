//! Image-quality metrics: MSE, PSNR and SSIM on 8-bit images.

use serde::ser::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::image::ImageBuf;

pub const PEAK: f64 = 255.0;
/// Stand-in for an infinite PSNR when averaging a batch.
pub const PSNR_CLAMP_DB: f64 = 99.0;
pub const SSIM_C1: f64 = (0.01 * PEAK) * (0.01 * PEAK);
pub const SSIM_C2: f64 = (0.03 * PEAK) * (0.03 * PEAK);
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;

fn check_shape(a: &ImageBuf, b: &ImageBuf) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )))
    }
}

/// Mean squared difference over every sample.
pub fn mse(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    check_shape(a, b)?;
    let sum: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.samples().len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    /// Identical images.
    Infinite,
}

impl Psnr {
    pub fn from_mse(mse: f64, peak: f64) -> Psnr {
        if mse == 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Finite(10.0 * (peak * peak / mse).log10())
        }
    }

    pub fn db(self) -> f64 {
        match self {
            Psnr::Finite(v) => v,
            Psnr::Infinite => f64::INFINITY,
        }
    }

    pub fn clamped(self) -> f64 {
        match self {
            Psnr::Finite(v) => v.min(PSNR_CLAMP_DB),
            Psnr::Infinite => PSNR_CLAMP_DB,
        }
    }
}

/// Finite values as JSON numbers, the infinite marker as the string "inf".
impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(v) => s.serialize_f64(*v),
            Psnr::Infinite => s.serialize_str("inf"),
        }
    }
}

pub fn psnr(a: &ImageBuf, b: &ImageBuf) -> Result<Psnr> {
    Ok(Psnr::from_mse(mse(a, b)?, PEAK))
}

/// Batch mean with infinite entries counted as [`PSNR_CLAMP_DB`].
pub fn mean_psnr(values: &[Psnr]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().map(|p| p.clamped()).sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsimMode {
    /// One window spanning the whole image, uniform weights.
    Global,
    /// Mean over every full 11×11 Gaussian window.
    Windowed,
}

fn ssim_formula(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64) -> f64 {
    ((2.0 * (mx * my) + SSIM_C1) * (2.0 * cxy + SSIM_C2)) / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2))
}

/// Weighted moments about the weighted mean. The mean is accumulated as an
/// offset from the first sample so a constant window has exactly zero
/// variance.
fn moments(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64, f64, f64) {
    let (x0, y0) = (x[0], y[0]);
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..w.len() {
        dx += w[i] * (x[i] - x0);
        dy += w[i] * (y[i] - y0);
    }
    let (mx, my) = (x0 + dx, y0 + dy);
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for i in 0..w.len() {
        let (a, b) = (x[i] - mx, y[i] - my);
        vx += w[i] * (a * a);
        vy += w[i] * (b * b);
        cxy += w[i] * (a * b);
    }
    (mx, my, vx, vy, cxy)
}

/// Normalized 11×11 Gaussian, row-major.
pub fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let mut k: Vec<f64> = g.iter().flat_map(|a| g.iter().map(move |b| a * b)).collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// SSIM on luma. RGB inputs are converted with [`ImageBuf::to_luma`] first.
pub fn ssim(a: &ImageBuf, b: &ImageBuf, mode: SsimMode) -> Result<f64> {
    check_shape(a, b)?;
    let (la, lb) = (a.to_luma(), b.to_luma());
    let x: Vec<f64> = la.samples().iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = lb.samples().iter().map(|&v| v as f64).collect();
    let (w, h) = (a.width(), a.height());
    match mode {
        SsimMode::Global => {
            let weights = vec![1.0 / x.len() as f64; x.len()];
            let (mx, my, vx, vy, cxy) = moments(&x, &y, &weights);
            Ok(ssim_formula(mx, my, vx, vy, cxy))
        }
        SsimMode::Windowed => {
            if w < SSIM_WINDOW || h < SSIM_WINDOW {
                return Err(Error::ImageTooSmall(format!(
                    "windowed SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
                )));
            }
            let kernel = gaussian_window();
            let n = SSIM_WINDOW * SSIM_WINDOW;
            let (mut wx, mut wy) = (vec![0.0; n], vec![0.0; n]);
            // mean as an offset from the first window, exact when all agree
            let mut first = None;
            let mut offset = 0.0;
            let mut count = 0usize;
            for top in 0..=h - SSIM_WINDOW {
                for left in 0..=w - SSIM_WINDOW {
                    for r in 0..SSIM_WINDOW {
                        let src = (top + r) * w + left;
                        wx[r * SSIM_WINDOW..(r + 1) * SSIM_WINDOW].copy_from_slice(&x[src..src + SSIM_WINDOW]);
                        wy[r * SSIM_WINDOW..(r + 1) * SSIM_WINDOW].copy_from_slice(&y[src..src + SSIM_WINDOW]);
                    }
                    let (mx, my, vx, vy, cxy) = moments(&wx, &wy, &kernel);
                    let s = ssim_formula(mx, my, vx, vy, cxy);
                    let s0 = *first.get_or_insert(s);
                    offset += s - s0;
                    count += 1;
                }
            }
            Ok(first.expect("at least one window") + offset / count as f64)
        }
    }
}

/// Windowed SSIM where the image is large enough, global otherwise.
pub fn default_ssim_mode(image: &ImageBuf) -> SsimMode {
    if image.width() >= SSIM_WINDOW && image.height() >= SSIM_WINDOW {
        SsimMode::Windowed
    } else {
        SsimMode::Global
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MetricsReport {
    pub psnr: Psnr,
    pub ssim: f64,
}

impl MetricsReport {
    pub fn compute(a: &ImageBuf, b: &ImageBuf) -> Result<MetricsReport> {
        Ok(MetricsReport {
            psnr: psnr(a, b)?,
            ssim: ssim(a, b, default_ssim_mode(a))?,
        })
    }

    /// `{"psnr":<number or "inf">,"ssim":<number>}`
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite metrics serialize")
    }
}
