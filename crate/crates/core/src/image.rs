//! 8-bit image buffers and binary PPM/PGM (P6/P5) I/O.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Interleaved 8-bit samples, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl ImageBuf {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!("channels must be 1 or 3, got {channels}")));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "expected {} samples, got {}",
                width * height * channels,
                samples.len()
            )));
        }
        Ok(ImageBuf {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn row(&self, y: usize) -> &[u8] {
        let stride = self.width * self.channels;
        &self.samples[y * stride..(y + 1) * stride]
    }

    pub fn same_shape(&self, other: &ImageBuf) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Copies the `w`×`h` window whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<ImageBuf> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::ImageTooSmall(format!(
                "crop {w}x{h} at ({x}, {y}) exceeds {}x{}",
                self.width, self.height
            )));
        }
        let c = self.channels;
        let mut samples = Vec::with_capacity(w * h * c);
        for row in y..y + h {
            samples.extend_from_slice(&self.row(row)[x * c..(x + w) * c]);
        }
        ImageBuf::new(w, h, c, samples)
    }

    /// Single-channel luma, `0.299 R + 0.587 G + 0.114 B` rounded half up.
    /// Computed in integers so there is no float rounding at the half.
    pub fn to_luma(&self) -> ImageBuf {
        if self.channels == 1 {
            return self.clone();
        }
        let samples = self
            .samples
            .chunks_exact(3)
            .map(|p| {
                let sum = 299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32;
                ((sum + 500) / 1000) as u8
            })
            .collect();
        ImageBuf {
            width: self.width,
            height: self.height,
            channels: 1,
            samples,
        }
    }

    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let magic = if self.channels == 3 { "P6" } else { "P5" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.samples);
        out
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_ppm_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_ppm(path: impl AsRef<Path>) -> Result<ImageBuf> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_ppm_bytes(&bytes).map_err(|e| match e {
            Error::InvalidImage(m) => Error::InvalidImage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses binary P6 (RGB) or P5 (gray) with maxval 255.
    pub fn from_ppm_bytes(bytes: &[u8]) -> Result<ImageBuf> {
        let mut pos = 0usize;
        let mut fields = [0usize; 3];
        let magic = next_token(bytes, &mut pos).ok_or_else(|| Error::InvalidImage("empty file".into()))?;
        let channels = match magic {
            b"P6" => 3,
            b"P5" => 1,
            other => {
                return Err(Error::InvalidImage(format!(
                    "unsupported magic `{}`; expected P5 or P6",
                    String::from_utf8_lossy(other)
                )))
            }
        };
        for field in fields.iter_mut() {
            let tok = next_token(bytes, &mut pos).ok_or_else(|| Error::InvalidImage("truncated header".into()))?;
            *field = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidImage(format!("bad header field `{}`", String::from_utf8_lossy(tok))))?;
        }
        let [width, height, maxval] = fields;
        if maxval != 255 {
            return Err(Error::InvalidImage(format!(
                "maxval {maxval} unsupported; expected 255"
            )));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let need = width * height * channels;
        let body = bytes.get(pos..).unwrap_or(&[]);
        if body.len() < need {
            return Err(Error::InvalidImage(format!(
                "expected {need} sample bytes, found {}",
                body.len()
            )));
        }
        ImageBuf::new(width, height, channels, body[..need].to_vec())
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trip() {
        let img = ImageBuf::new(2, 1, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let bytes = img.to_ppm_bytes();
        assert!(bytes.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(ImageBuf::from_ppm_bytes(&bytes).unwrap(), img);

        let gray = ImageBuf::new(1, 2, 1, vec![10, 20]).unwrap();
        assert_eq!(ImageBuf::from_ppm_bytes(&gray.to_ppm_bytes()).unwrap(), gray);
    }

    #[test]
    fn header_comments_and_errors() {
        let bytes = b"P5\n# comment\n1 1\n255\n\x07";
        assert_eq!(ImageBuf::from_ppm_bytes(bytes).unwrap().samples(), &[7]);
        assert!(ImageBuf::from_ppm_bytes(b"P3\n1 1\n255\n1 2 3").is_err());
        assert!(ImageBuf::from_ppm_bytes(b"P5\n2 2\n255\n\x01").is_err());
        assert!(ImageBuf::from_ppm_bytes(b"P5\n1 1\n65535\n\x01\x02").is_err());
    }

    #[test]
    fn luma_rounds_half_up() {
        // 0.299 * 255 + 0.587 * 0 + 0.114 * 0 = 76.245
        let img = ImageBuf::new(3, 1, 3, vec![255, 0, 0, 0, 255, 0, 1, 1, 1]).unwrap();
        assert_eq!(img.to_luma().samples(), &[76, 150, 1]);
        // 0.299 + 0.587 + 0.114 * 251 = 29.5
        let half = ImageBuf::new(1, 1, 3, vec![1, 1, 251]).unwrap();
        assert_eq!(half.to_luma().samples(), &[30]);
    }

    #[test]
    fn crop_window() {
        let img = ImageBuf::new(3, 2, 1, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(img.crop(1, 0, 2, 2).unwrap().samples(), &[2, 3, 5, 6]);
        assert!(img.crop(2, 0, 2, 1).is_err());
    }
}
