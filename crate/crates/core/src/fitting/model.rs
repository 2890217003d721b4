use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::simplex::{nelder_mead, NelderMeadOptions};
use super::FitError;
use crate::physics::{
    default_start, nondimensionalize, Dimension, EquilibriumOptions, FluidMedium, Forcing,
    RobotGeometry, ScaledEquilibrium, ScaledForcing, Scales,
};

/// One measured operating point.
///
/// `input` is whatever drives the robot (field in V/m, or normalised
/// intensity); `field_scale` maps it to a field. Speeds and angles are
/// magnitudes along the direction of travel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    pub input: f64,
    /// m/s
    pub speed: Option<f64>,
    /// rad
    pub alpha: Option<f64>,
    /// m
    pub gap: Option<f64>,
    /// Optional 1σ uncertainty of the speed (m/s); carried, not used as a weight.
    pub uncertainty: Option<f64>,
}

impl Observation {
    pub fn new(input: f64, speed: Option<f64>, alpha: Option<f64>, gap: Option<f64>) -> Self {
        Self {
            input,
            speed,
            alpha,
            gap,
            uncertainty: None,
        }
    }

    fn channels(&self) -> usize {
        [self.speed, self.alpha, self.gap].iter().filter(|c| c.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservationSet {
    rows: Vec<Observation>,
}

impl ObservationSet {
    pub fn new(rows: Vec<Observation>) -> Result<Self, FitError> {
        if rows.len() < 3 {
            return Err(FitError::InvalidInput("at least three observations are required"));
        }
        for r in &rows {
            if !(r.input.is_finite() && r.input >= 0.0) {
                return Err(FitError::InvalidInput("inputs must be finite and non-negative"));
            }
            if r.channels() == 0 {
                return Err(FitError::InvalidInput("observation has no speed, angle or gap"));
            }
            let values = [r.speed, r.alpha, r.gap];
            if values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(FitError::InvalidInput("non-finite observation"));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    /// Copy with the angle channel dropped.
    pub fn without_alpha(&self) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| Observation { alpha: None, ..*r })
                .filter(|r| r.channels() > 0)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub gravity_g: f64,
    /// Dimensionless start `(drive gain, torque A, shear B)`; derived from the
    /// data when absent.
    pub start: Option<[f64; 3]>,
    pub simplex: NelderMeadOptions,
    pub equilibrium: EquilibriumOptions,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            gravity_g: 9.81,
            start: None,
            simplex: NelderMeadOptions::default(),
            equilibrium: EquilibriumOptions {
                record_trajectory: false,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    /// Field per unit input ((V/m) per input unit).
    pub field_scale: f64,
    /// N·m/V
    pub torque_coeff_a: f64,
    /// N/V
    pub shear_coeff_b: f64,
    /// Mean squared error over all available dimensionless channels.
    pub mse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fitted `(drive gain, A, B)`: slip drive per unit input and the torque
    /// and shear loads per unit slip drive, all scaled.
    pub dimensionless: [f64; 3],
}

/// Dimensionless physics model evaluated at sorted inputs.
struct Model<'a> {
    eq: ScaledEquilibrium,
    rows: Vec<Observation>,
    scales: Scales,
    /// −sign(Δβ): maps model output to the direction of travel.
    travel: f64,
    opts: &'a EquilibriumOptions,
    cache: Vec<Option<[f64; 2]>>,
}

impl Model<'_> {
    fn mse(&mut self, p: &[f64]) -> f64 {
        let (gain, a, b) = (p[0], p[1], p[2]);
        let l = self.scales.length;
        let v_scale = self.scales.velocity;
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut chain: Option<[f64; 2]> = None;
        for i in 0..self.rows.len() {
            let r = self.rows[i];
            if r.input == 0.0 {
                if let Some(v) = r.speed {
                    sum += (v / v_scale).powi(2);
                    count += 1;
                }
                continue;
            }
            let eps = -self.travel * gain * r.input;
            let forcing = ScaledForcing::from_coefficients(eps, a, b);
            let start = default_start(eps);
            let guess = self.cache[i].or(chain).unwrap_or(start);
            let s = match self.eq.solve(&forcing, guess, chain.unwrap_or(start), self.opts) {
                Ok(s) => s,
                Err(_) => return f64::INFINITY,
            };
            chain = Some([s.h_center, s.alpha]);
            self.cache[i] = chain;
            if let Some(v) = r.speed {
                sum += (self.travel * s.speed - v / v_scale).powi(2);
                count += 1;
            }
            if let Some(al) = r.alpha {
                sum += (self.travel * s.alpha - al).powi(2);
                count += 1;
            }
            if let Some(h) = r.gap {
                sum += (s.h_center - h / l).powi(2);
                count += 1;
            }
        }
        sum / count as f64
    }
}

/// Fits field scale and the torque/shear coefficients to `obs` by
/// Nelder-Mead on the mean squared error of the dimensionless speed, angle of
/// attack and gap.
pub fn fit_model(
    obs: &ObservationSet,
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    config: &FitConfig,
) -> Result<FitResult, FitError> {
    geometry.validate()?;
    medium.validate()?;
    let db = medium.delta_beta();
    if db == 0.0 {
        return Err(FitError::InvalidInput("slip coefficients are equal; the robot cannot move"));
    }
    let forcing = Forcing {
        delta_phi: 0.0,
        gravity_g: config.gravity_g,
        torque_coeff_a: 0.0,
        shear_coeff_b: 0.0,
    };
    forcing.validate()?;
    if !(config.gravity_g > 0.0) {
        return Err(FitError::InvalidInput("gravity must be positive"));
    }
    let scales = nondimensionalize(geometry, medium, &forcing);
    let mut rows = obs.rows().to_vec();
    rows.sort_by(|a, b| a.input.total_cmp(&b.input));

    let start = match config.start {
        Some(s) => s,
        None => {
            // slip speed ≈ glide speed at low drive
            let (mut sx, mut sxx) = (0.0, 0.0);
            for r in &rows {
                if let Some(v) = r.speed {
                    sx += v / scales.velocity * r.input;
                    sxx += r.input * r.input;
                }
            }
            let gain = if sxx > 0.0 && sx > 0.0 { sx / sxx } else { 1.0 };
            [gain, 5.0, 0.25]
        }
    };

    let n = rows.len();
    let mut model = Model {
        eq: ScaledEquilibrium::new(
            geometry.aspect_ratio(),
            config.equilibrium.n_modes,
            config.equilibrium.y_modes,
        )?,
        rows,
        scales,
        travel: -db.signum(),
        opts: &config.equilibrium,
        cache: vec![None; n],
    };
    let min = nelder_mead(|p| model.mse(p), &start, &config.simplex)?;
    let [gain, a, b] = [min.argmin[0], min.argmin[1], min.argmin[2]];
    let l = geometry.length_l;
    let mu = medium.viscosity_mu;
    Ok(FitResult {
        field_scale: gain * l * scales.of(Dimension::Velocity) / (db.abs() * geometry.electrode_separation),
        torque_coeff_a: a * db * mu * l,
        shear_coeff_b: b * db * mu,
        mse: min.value,
        iterations: min.iterations,
        converged: min.converged,
        dimensionless: [gain, a, b],
    })
}
