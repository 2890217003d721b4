use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_traits::Float;

use super::HologramError;

pub const SLM_WIDTH: usize = 1920;
pub const SLM_HEIGHT: usize = 1080;
/// Phase steps of an 8-bit SLM.
pub const PHASE_LEVELS: usize = 256;

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), HologramError> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(HologramError::BadDimensions);
    }
    Ok(())
}

/// Wraps into [0, 2π).
fn wrap_phase(p: f64) -> f64 {
    let r = p % TAU;
    let w = if r < 0.0 { r + TAU } else { r };
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// SLM phase in [0, 2π), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl PhaseMap {
    /// Wraps every value into [0, 2π).
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, HologramError> {
        check_dims(width, height, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HologramError::BadPixel);
        }
        Ok(Self {
            width,
            height,
            values: values.into_iter().map(wrap_phase).collect(),
        })
    }

    pub fn flat(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    /// Level `q` becomes `2πq/256`.
    pub fn from_levels(width: usize, height: usize, levels: &[u8]) -> Result<Self, HologramError> {
        check_dims(width, height, levels.len())?;
        Ok(Self {
            width,
            height,
            values: levels.iter().map(|&q| level_phase(q)).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Nearest 8-bit level of every pixel.
    pub fn to_levels(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|p| ((p / TAU * PHASE_LEVELS as f64).round() as usize % PHASE_LEVELS) as u8)
            .collect()
    }

    /// The map as an 8-bit SLM would display it.
    pub fn quantized(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.to_levels().into_iter().map(level_phase).collect(),
        }
    }
}

fn level_phase(q: u8) -> f64 {
    TAU * q as f64 / PHASE_LEVELS as f64
}

/// Far-field amplitude the hologram should produce, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetImage {
    width: usize,
    height: usize,
    amplitudes: Vec<f64>,
}

impl TargetImage {
    /// An all-dark image is accepted here; [`gerchberg_saxton`](super::gerchberg_saxton) rejects it.
    pub fn new(width: usize, height: usize, amplitudes: Vec<f64>) -> Result<Self, HologramError> {
        check_dims(width, height, amplitudes.len())?;
        if amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(HologramError::BadPixel);
        }
        Ok(Self {
            width,
            height,
            amplitudes,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            amplitudes: vec![0.0; width * height],
        }
    }

    /// 8-bit grayscale with 255 as full amplitude.
    pub fn from_levels(width: usize, height: usize, levels: &[u8]) -> Result<Self, HologramError> {
        Self::new(width, height, levels.iter().map(|&q| q as f64 / 255.0).collect())
    }

    /// Grayscale levels scaled so the brightest pixel is 255.
    pub fn to_levels(&self) -> Vec<u8> {
        let peak = self.amplitudes.iter().copied().fold(0.0, f64::max);
        let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
        self.amplitudes
            .iter()
            .map(|a| (a * scale).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [f64] {
        &mut self.amplitudes
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.amplitudes[y * self.width + x]
    }

    /// Σ amplitude².
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn is_dark(&self) -> bool {
        self.amplitudes.iter().all(|&a| a == 0.0)
    }
}

/// Non-negative far-field intensity, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl IntensityImage {
    pub(crate) fn from_raw(width: usize, height: usize, values: Vec<f64>) -> Self {
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Brightest pixel, first in row-major order on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    /// Mean over the `(2r+1)²` window centred on the pixel nearest `(x, y)`,
    /// clipped to the image.
    pub fn window_mean(&self, x: f64, y: f64, r: usize) -> f64 {
        let cx = x.round() as i64;
        let cy = y.round() as i64;
        let r = r as i64;
        let mut sum = 0.0;
        let mut n = 0usize;
        for yy in (cy - r)..=(cy + r) {
            for xx in (cx - r)..=(cx + r) {
                if xx >= 0 && yy >= 0 && (xx as usize) < self.width && (yy as usize) < self.height {
                    sum += self.values[yy as usize * self.width + xx as usize];
                }
                n += 1;
            }
        }
        sum / n as f64
    }

    /// Power in pixels whose centres lie within `radius` of any of `centres`.
    pub fn power_near(&self, centres: &[(f64, f64)], radius: f64) -> f64 {
        let r2 = radius * radius;
        let mut sum = 0.0;
        for y in 0..self.height {
            for x in 0..self.width {
                let near = centres
                    .iter()
                    .any(|&(cx, cy)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r2);
                if near {
                    sum += self.values[y * self.width + x];
                }
            }
        }
        sum
    }
}
