use super::field::unit_field;
use super::pressure::PressureBasis;
use super::scales::{Dimension, Scales};
use super::{FluidMedium, GapField, GapState, PhysicsError, PressureField, Rates, Result, RobotGeometry};

/// Force and torque exerted by the gap flow on the body.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Wrench {
    /// Drag along x (N).
    pub fx: f64,
    /// Lift (N).
    pub fz: f64,
    /// Pitching torque about the body centre (N·m).
    pub tau: f64,
}

impl Wrench {
    pub fn new(fx: f64, fz: f64, tau: f64) -> Self {
        Self { fx, fz, tau }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.fx, self.fz, self.tau]
    }

    pub fn max_abs(&self) -> f64 {
        self.fx.abs().max(self.fz.abs()).max(self.tau.abs())
    }
}

/// Shear integrals `w ∫ g(x)/h dx` and `w ∫ g(x) x/h dx` in scaled units.
pub(crate) fn shear_moments(
    basis: &PressureBasis,
    h_center: f64,
    alpha: f64,
    width: f64,
    g: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let (mut m0, mut m1) = (0.0, 0.0);
    for (&x, &w) in basis.nodes.iter().zip(&basis.weights) {
        let v = w * g(x) / (h_center + alpha * x);
        m0 += v;
        m1 += v * x;
    }
    (width * m0, width * m1)
}

/// Lift, drag and torque from the gap:
///
/// ```text
/// f_z = ⟨p⟩ + μ α ⟨(V + Δβ E_x)/h⟩
/// f_x = (α/2) ⟨p⟩ + μ ⟨(V + Δβ E_x)/h⟩
/// τ   = ⟨x p⟩ + μ α ⟨(V + Δβ E_x) x/h⟩
/// ```
///
/// Slip enters through shear only; `pressure` must have been solved for the
/// same gap and rates.
pub fn forces_and_torque(
    gap: GapState,
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    rates: Rates,
    field: &GapField,
    pressure: &PressureField,
) -> Result<Wrench> {
    geometry.validate()?;
    medium.validate()?;
    let l = geometry.length_l;
    gap.validate(l)?;
    if pressure.gap != gap || pressure.rates != rates || field.gap != gap {
        return Err(PhysicsError::PressureMismatch);
    }
    let scales = Scales::kinematic(l, medium.viscosity_mu);
    let basis = PressureBasis::new(pressure.n_modes(), 1)?;
    let (hc, alpha) = (gap.h_center / l, gap.alpha);
    let v = scales.to_scaled(rates.speed_v, Dimension::Velocity);
    let slip = scales.to_scaled(medium.delta_beta() * field.delta_phi / l, Dimension::Velocity);
    let (s0, s1) = shear_moments(&basis, hc, alpha, geometry.aspect_ratio(), |x| {
        v + slip * unit_field(hc, alpha, x)
    });
    let p = scales.to_scaled(pressure.mean_force(), Dimension::Force);
    let xp = scales.to_scaled(pressure.first_moment(), Dimension::Torque);
    Ok(Wrench {
        fx: scales.to_physical(alpha / 2.0 * p + s0, Dimension::Force),
        fz: scales.to_physical(p + alpha * s0, Dimension::Force),
        tau: scales.to_physical(xp + alpha * s1, Dimension::Torque),
    })
}
