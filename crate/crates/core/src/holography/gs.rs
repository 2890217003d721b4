use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fft::Fft2;
use super::image::{IntensityImage, PhaseMap, TargetImage};
use super::HologramError;

#[derive(Debug, Clone, PartialEq)]
pub struct GsOutcome {
    pub phase: PhaseMap,
    /// `errors[k]` is `1 −` the normalised correlation between the far-field
    /// amplitude of the phase after `k + 1` iterations and the target.
    pub errors: Vec<f64>,
}

/// Gerchberg-Saxton solver with a reusable transform plan.
#[derive(Debug, Clone)]
pub struct GsSolver {
    fft: Fft2,
}

impl GsSolver {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            fft: Fft2::new(width, height),
        }
    }

    pub fn size(&self) -> (usize, usize) {
        (self.fft.width(), self.fft.height())
    }

    fn check(&self, w: usize, h: usize) -> Result<(), HologramError> {
        if (w, h) != self.size() {
            return Err(HologramError::SizeMismatch {
                got: (w, h),
                want: self.size(),
            });
        }
        Ok(())
    }

    /// Runs from a uniformly random SLM phase drawn from `seed`.
    pub fn run(&self, target: &TargetImage, iterations: usize, seed: u64) -> Result<GsOutcome, HologramError> {
        let (w, h) = self.size();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>() * TAU).collect();
        self.iterate(target, iterations, start)
    }

    /// Runs from a given SLM phase (e.g. the previous frame's hologram).
    pub fn run_from(
        &self,
        target: &TargetImage,
        iterations: usize,
        start: &PhaseMap,
    ) -> Result<GsOutcome, HologramError> {
        self.check(start.width(), start.height())?;
        self.iterate(target, iterations, start.values().to_vec())
    }

    fn iterate(&self, target: &TargetImage, iterations: usize, start: Vec<f64>) -> Result<GsOutcome, HologramError> {
        self.check(target.width(), target.height())?;
        if iterations == 0 {
            return Err(HologramError::NoIterations);
        }
        let norm_t = target.power().sqrt();
        if !(norm_t > 0.0) {
            return Err(HologramError::EmptyTarget);
        }
        let amp: Vec<f64> = target.amplitudes().iter().map(|a| a / norm_t).collect();
        let mut phase = start;
        let mut field: Vec<Complex64> = Vec::with_capacity(phase.len());
        let mut errors = Vec::with_capacity(iterations);
        for k in 0..=iterations {
            field.clear();
            field.extend(phase.iter().map(|&p| Complex64::from_polar(1.0, p)));
            self.fft.forward(&mut field);
            if k > 0 {
                errors.push(correlation_error(&field, &amp));
            }
            if k == iterations {
                break;
            }
            for (f, a) in field.iter_mut().zip(&amp) {
                let n = f.norm();
                *f = if n > 0.0 { *f * (a / n) } else { Complex64::new(*a, 0.0) };
            }
            self.fft.inverse(&mut field);
            for (p, f) in phase.iter_mut().zip(&field) {
                *p = f.arg();
            }
        }
        let (w, h) = self.size();
        let phase = PhaseMap::new(w, h, phase)?;
        Ok(GsOutcome { phase, errors })
    }

    /// `|DFT(e^{iφ})|²` normalised to unit total power.
    pub fn far_field(&self, phase: &PhaseMap) -> Result<IntensityImage, HologramError> {
        self.check(phase.width(), phase.height())?;
        let mut field: Vec<Complex64> = phase.values().iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        self.fft.forward(&mut field);
        let mut values: Vec<f64> = field.iter().map(|f| f.norm_sqr()).collect();
        let total: f64 = values.iter().sum();
        for v in values.iter_mut() {
            *v /= total;
        }
        let (w, h) = self.size();
        Ok(IntensityImage::from_raw(w, h, values))
    }
}

fn correlation_error(field: &[Complex64], amp: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut norm2 = 0.0;
    for (f, a) in field.iter().zip(amp) {
        let m = f.norm();
        dot += m * a;
        norm2 += m * m;
    }
    (1.0 - dot / norm2.sqrt()).max(0.0)
}

/// Phase-only hologram whose far field approximates `target`.
pub fn gerchberg_saxton(target: &TargetImage, iterations: usize, seed: u64) -> Result<GsOutcome, HologramError> {
    GsSolver::new(target.width(), target.height()).run(target, iterations, seed)
}

/// Far-field intensity of `phase` under unit plane-wave illumination.
pub fn far_field_intensity(phase: &PhaseMap) -> IntensityImage {
    GsSolver::new(phase.width(), phase.height())
        .far_field(phase)
        .expect("solver built for this size")
}

/// Adds the linear ramp that translates the far field by `(shift_x, shift_y)` bins.
pub fn blazed_grating(phase: &PhaseMap, shift_x: f64, shift_y: f64) -> Result<PhaseMap, HologramError> {
    let (w, h) = (phase.width(), phase.height());
    let ok = |s: f64, n: usize| s.is_finite() && s.abs() <= n as f64 / 2.0;
    if !(ok(shift_x, w) && ok(shift_y, h)) {
        return Err(HologramError::ShiftTooLarge);
    }
    let (fx, fy) = (shift_x / w as f64, shift_y / h as f64);
    let values = phase
        .values()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            p + TAU * ((fx * x).fract() + (fy * y).fract())
        })
        .collect();
    PhaseMap::new(w, h, values)
}
