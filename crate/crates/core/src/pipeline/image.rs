//! Binary PGM (P5) images and continuum centerline extraction.

use std::path::Path;

use crate::curve::{Curve2D, CurveSource};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: u8 = 128;
/// Maximum share of columns that may contain more than one dark run.
pub const AMBIGUITY_LIMIT: f64 = 0.20;

/// 8-bit grayscale raster, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub mm_per_px: f64,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, mm_per_px: f64) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Argument(format!(
                "{}×{} image needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        if !(mm_per_px > 0.0) || !mm_per_px.is_finite() {
            return Err(Error::Argument(format!(
                "pixel scale must be positive, got {mm_per_px} mm/px"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
            mm_per_px,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8, mm_per_px: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height], mm_per_px)
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    /// Parses binary PGM with maxval ≤ 255.
    pub fn from_pgm(bytes: &[u8], mm_per_px: f64) -> Result<Self> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos)?;
        if magic != b"P5" {
            return Err(Error::Argument("not a binary PGM (expected P5 magic)".to_string()));
        }
        let width = parse_header_number(bytes, &mut pos, "width")?;
        let height = parse_header_number(bytes, &mut pos, "height")?;
        let maxval = parse_header_number(bytes, &mut pos, "maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Argument(format!(
                "unsupported PGM maxval {maxval} (need 1..=255)"
            )));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let n = width * height;
        let data = bytes
            .get(pos..pos + n)
            .ok_or_else(|| Error::Argument(format!("PGM raster truncated: need {n} bytes")))?;
        let pixels = if maxval == 255 {
            data.to_vec()
        } else {
            data.iter()
                .map(|&v| ((v as usize * 255 + maxval / 2) / maxval) as u8)
                .collect()
        };
        Self::new(width, height, pixels, mm_per_px)
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn load_pgm(path: &Path, mm_per_px: f64) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_pgm(&bytes, mm_per_px)
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
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
    if start == *pos {
        return Err(Error::Argument("PGM header ended early".to_string()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Argument(format!("bad PGM {what}")))
}

/// Scan direction for [`extract_centerline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    /// One point per column, left to right; y grows upward in the image.
    X,
    /// One point per row, bottom to top; the first coordinate is the height
    /// above the bottom row and the second the column offset.
    Y,
}

impl std::str::FromStr for ScanAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(ScanAxis::X),
            "y" | "Y" => Ok(ScanAxis::Y),
            other => Err(Error::Argument(format!("scan axis must be x or y, got `{other}`"))),
        }
    }
}

/// Binarizes (`pixel < threshold` is continuum) and emits the mean position of
/// the dark run in every scan line, in metres, with the first point at the
/// origin. Where a scan line holds several runs the longest one is used.
pub fn extract_centerline(image: &GrayImage, threshold: u8, axis: ScanAxis) -> Result<Curve2D> {
    let (lines, depth) = match axis {
        ScanAxis::X => (image.width, image.height),
        ScanAxis::Y => (image.height, image.width),
    };
    let pixel = |line: usize, k: usize| match axis {
        ScanAxis::X => image.get(line, k),
        ScanAxis::Y => image.get(k, image.height - 1 - line),
    };

    let mut points = Vec::new();
    let mut ambiguous = Vec::new();
    for line in 0..lines {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut start = None;
        for k in 0..depth {
            let dark = pixel(line, k) < threshold;
            match (dark, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    runs.push((s, k));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, depth));
        }
        let Some(&(s, e)) = runs.iter().max_by_key(|(s, e)| (e - s, usize::MAX - s)) else {
            continue;
        };
        if runs.len() > 1 {
            ambiguous.push(line);
        }
        let mean = (s + e - 1) as f64 / 2.0;
        let across = match axis {
            ScanAxis::X => (image.height - 1) as f64 - mean,
            ScanAxis::Y => mean,
        };
        points.push([line as f64 * image.mm_per_px * 1e-3, across * image.mm_per_px * 1e-3]);
    }

    if points.is_empty() {
        return Err(Error::Extraction(format!("no pixel darker than {threshold} found")));
    }
    if ambiguous.len() as f64 > AMBIGUITY_LIMIT * points.len() as f64 {
        let shown: Vec<String> = ambiguous.iter().take(12).map(|c| c.to_string()).collect();
        let more = if ambiguous.len() > 12 { ", ..." } else { "" };
        return Err(Error::Extraction(format!(
            "{} of {} scan lines contain several disjoint dark runs: {}{more}",
            ambiguous.len(),
            points.len(),
            shown.join(", ")
        )));
    }
    Ok(Curve2D::new(points, CurveSource::Image).translated_to_origin())
}
