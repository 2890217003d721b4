//! Parameter estimation against measured glide data.

mod model;
mod simplex;

pub use model::{fit_model, FitConfig, FitResult, Observation, ObservationSet};
pub use simplex::{nelder_mead, Minimum, NelderMeadOptions};

use num_traits::Float;

use crate::physics::PhysicsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("objective is not finite at the start point")]
    NonFiniteStart,
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// Through-origin least-squares mobility `Σ vE / Σ E²` (m²/(V·s)).
pub fn mobility_fit(speeds: &[f64], fields: &[f64]) -> Result<f64, FitError> {
    mobility_fit_with_error(speeds, fields).map(|(slope, _)| slope)
}

/// Mobility together with its regression standard error (zero for a single point).
pub fn mobility_fit_with_error(speeds: &[f64], fields: &[f64]) -> Result<(f64, f64), FitError> {
    if speeds.len() != fields.len() {
        return Err(FitError::InvalidInput("speed and field lists differ in length"));
    }
    if speeds.is_empty() {
        return Err(FitError::InvalidInput("no data"));
    }
    if speeds.iter().chain(fields).any(|v| !v.is_finite()) {
        return Err(FitError::InvalidInput("non-finite data"));
    }
    let see: f64 = fields.iter().map(|e| e * e).sum();
    if see == 0.0 {
        return Err(FitError::InvalidInput("all fields are zero"));
    }
    let sve: f64 = speeds.iter().zip(fields).map(|(v, e)| v * e).sum();
    let slope = sve / see;
    let n = speeds.len();
    let stderr = if n > 1 {
        let rss: f64 = speeds
            .iter()
            .zip(fields)
            .map(|(v, e)| (v - slope * e).powi(2))
            .sum();
        (rss / (n - 1) as f64 / see).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

/// Field magnitude between electrodes, `E = I / (a σ l)` (V/m).
pub fn field_estimate(current: f64, electrode_side: f64, sigma: f64, separation: f64) -> Result<f64, FitError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(FitError::InvalidInput("conductivity must be positive"));
    }
    if !(electrode_side > 0.0 && separation > 0.0) || !electrode_side.is_finite() || !separation.is_finite() {
        return Err(FitError::InvalidInput("electrode size and separation must be positive"));
    }
    if !(current.is_finite() && current >= 0.0) {
        return Err(FitError::InvalidInput("current must be non-negative"));
    }
    Ok(current / (electrode_side * sigma * separation))
}
