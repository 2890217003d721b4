//! Lubrication-zone model of an electrokinetic motor gliding over a substrate.
//!
//! The robot body sits at height `h(x) = h_c + α x` above the substrate. The
//! electric field in the gap follows from current conservation in a wedge,
//! the pressure from a Ritz solve of the Reynolds equation and the body
//! translates and tilts until lift, drag and torque balance gravity and the
//! lumped external forcing `(b Δφ, a Δφ)`.
//!
//! Every solve runs on scaled variables (see [`Scales`]): lengths by `l`,
//! forces by `m g`, velocities by `m g / (μ l)` and time by `μ l² / (m g)`.

use alloc::vec::Vec;

use num_traits::Float;

mod equilibrium;
mod field;
mod forces;
pub mod ode;
mod pressure;
mod rates;
mod scales;
mod sweep;

pub use equilibrium::{
    integrate_to_equilibrium, integrate_with_options, EquilibriumOptions, GapSample,
    ScaledEquilibrium, ScaledSteady, SteadyState,
};
pub use field::{gap_potential, GapField};
pub use forces::{forces_and_torque, Wrench};
pub use pressure::{solve_pressure, solve_pressure_with_slip, PressureBasis, PressureField};
pub use rates::{solve_rates, RateSolver, Response, ScaledForcing};
pub use scales::{nondimensionalize, Dimension, Scales};
pub use sweep::{default_start, scaled_steady_curve, steady_curve, steady_curve_with_options, SweepRow, SCALED_START};

/// Default number of sine modes along the body axis.
pub const DEFAULT_MODES: usize = 16;
/// Default number of even polynomial profiles across the body width.
pub const DEFAULT_Y_MODES: usize = 3;
/// Integration halts once the trailing gap falls below this fraction of `l`.
pub const COLLAPSE_FRACTION: f64 = 1e-4;
/// Below this value of `|α| l / h_c` the wedge expressions use their series.
pub const FLAT_GAP_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhysicsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("gap collapsed (h_minus = {h_minus:e} m)")]
    GapCollapse {
        h_minus: f64,
        trajectory: Vec<GapSample>,
    },
    #[error("singular system: {0}")]
    Singular(&'static str),
    #[error("no equilibrium after {steps} steps")]
    NotConverged { steps: usize },
    #[error("body lifted off (h_center = {h_center:e})")]
    LiftOff { h_center: f64 },
    #[error("pressure field was solved for a different gap or rate set")]
    PressureMismatch,
    #[error("non-finite value encountered")]
    NonFinite,
}

pub type Result<T> = core::result::Result<T, PhysicsError>;

/// Robot body dimensions and mass.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobotGeometry {
    /// Longest dimension `l` (m), along the direction of travel.
    pub length_l: f64,
    /// Width `w` (m).
    pub width_w: f64,
    /// Buoyancy-corrected mass (kg); the weight is `m g`.
    pub mass_m: f64,
    /// Electrode side length (m), used by field-strength estimates.
    pub electrode_side_a: f64,
    /// Distance between electrodes (m); the propulsive field is `Δφ / separation`.
    pub electrode_separation: f64,
}

impl RobotGeometry {
    /// A 400 × 305 μm two-motor body with 70 μm electrodes.
    pub fn reference() -> Self {
        Self {
            length_l: 400e-6,
            width_w: 305e-6,
            mass_m: 5e-10,
            electrode_side_a: 70e-6,
            electrode_separation: 400e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.length_l,
            self.width_w,
            self.mass_m,
            self.electrode_side_a,
            self.electrode_separation,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(PhysicsError::InvalidParameter("geometry fields must be positive"));
        }
        if self.electrode_side_a > self.length_l {
            return Err(PhysicsError::InvalidParameter("electrode larger than body"));
        }
        Ok(())
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.width_w / self.length_l
    }
}

/// Electrolyte properties and surface slip coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluidMedium {
    /// Dynamic viscosity μ (Pa·s).
    pub viscosity_mu: f64,
    /// Conductivity σ (S/m).
    pub conductivity_sigma: f64,
    /// Slip coefficient of the robot body β₊ (m²/(V·s)).
    pub slip_upper: f64,
    /// Slip coefficient of the substrate β₋ (m²/(V·s)).
    pub slip_lower: f64,
}

impl FluidMedium {
    /// Water-like medium at 300 nS/cm with a net mobility of −3e−8 m²/(V·s).
    pub fn reference() -> Self {
        Self {
            viscosity_mu: 1e-3,
            conductivity_sigma: 3e-5,
            slip_upper: 1e-8,
            slip_lower: 4e-8,
        }
    }

    /// Δβ = β₊ − β₋.
    pub fn delta_beta(&self) -> f64 {
        self.slip_upper - self.slip_lower
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.viscosity_mu.is_finite() && self.viscosity_mu > 0.0) {
            return Err(PhysicsError::InvalidParameter("viscosity must be positive"));
        }
        if !(self.conductivity_sigma.is_finite() && self.conductivity_sigma > 0.0) {
            return Err(PhysicsError::InvalidParameter("conductivity must be positive"));
        }
        if !(self.slip_upper.is_finite() && self.slip_lower.is_finite()) {
            return Err(PhysicsError::InvalidParameter("slip coefficients must be finite"));
        }
        Ok(())
    }
}

/// Applied potential and external (non-gap) forcing.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Forcing {
    /// Potential drop between the electrodes Δφ (V).
    pub delta_phi: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity_g: f64,
    /// External torque per volt (N·m/V): τ = a Δφ.
    pub torque_coeff_a: f64,
    /// External thrust per volt (N/V): f_x = b Δφ.
    pub shear_coeff_b: f64,
}

impl Forcing {
    /// Forcing matched to [`RobotGeometry::reference`] and
    /// [`FluidMedium::reference`]; dimensionless torque 10 and shear 0.5 per
    /// unit slip drive.
    pub fn reference(delta_phi: f64) -> Self {
        let geometry = RobotGeometry::reference();
        let medium = FluidMedium::reference();
        let db = medium.delta_beta();
        Self {
            delta_phi,
            gravity_g: 9.81,
            torque_coeff_a: 10.0 * db * medium.viscosity_mu * geometry.length_l,
            shear_coeff_b: 0.5 * db * medium.viscosity_mu,
        }
    }

    pub fn with_delta_phi(self, delta_phi: f64) -> Self {
        Self { delta_phi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_phi.is_finite()
            && self.torque_coeff_a.is_finite()
            && self.shear_coeff_b.is_finite())
        {
            return Err(PhysicsError::InvalidParameter("forcing must be finite"));
        }
        if !(self.gravity_g.is_finite() && self.gravity_g >= 0.0) {
            return Err(PhysicsError::InvalidParameter("gravity must be non-negative"));
        }
        Ok(())
    }
}

/// Configuration of the lubrication gap: centre height and angle of attack.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapState {
    /// Gap height under the body centre (m).
    pub h_center: f64,
    /// Angle of attack α (rad); the gap opens towards +x for α > 0.
    pub alpha: f64,
}

impl GapState {
    pub fn new(h_center: f64, alpha: f64) -> Self {
        Self { h_center, alpha }
    }

    /// Smallest gap height, at the trailing edge.
    pub fn h_minus(&self, length: f64) -> f64 {
        self.h_center - self.alpha.abs() * length / 2.0
    }

    /// Largest gap height, at the leading edge.
    pub fn h_plus(&self, length: f64) -> f64 {
        self.h_center + self.alpha.abs() * length / 2.0
    }

    pub fn height_at(&self, x: f64) -> f64 {
        self.h_center + self.alpha * x
    }

    pub fn validate(&self, length: f64) -> Result<()> {
        if !(self.h_center.is_finite() && self.alpha.is_finite()) {
            return Err(PhysicsError::NonFinite);
        }
        if self.h_minus(length) <= 0.0 {
            return Err(PhysicsError::InvalidParameter("gap touches the substrate"));
        }
        Ok(())
    }
}

/// Rigid-body rates of the robot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rates {
    /// Translation speed along x, V (m/s).
    pub speed_v: f64,
    /// Gap-normal rate U = dh/dt (m/s).
    pub normal_u: f64,
    /// Tilt rate dα/dt (rad/s).
    pub alpha_rate: f64,
}

impl Rates {
    pub fn new(speed_v: f64, normal_u: f64, alpha_rate: f64) -> Self {
        Self {
            speed_v,
            normal_u,
            alpha_rate,
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self::new(self.speed_v * k, self.normal_u * k, self.alpha_rate * k)
    }
}

/// `artanh(r)/r`, accurate near zero.
pub(crate) fn atanh_ratio(r: f64) -> f64 {
    if r.abs() < 1e-4 {
        let r2 = r * r;
        1.0 + r2 / 3.0 + r2 * r2 / 5.0
    } else {
        r.atanh() / r
    }
}

/// `ln(1+u)/u`, accurate near zero.
pub(crate) fn ln1p_ratio(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u / 2.0 + u * u / 3.0 - u * u * u / 4.0
    } else {
        u.ln_1p() / u
    }
}
