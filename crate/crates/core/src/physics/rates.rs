use super::field::unit_field;
use super::forces::shear_moments;
use super::pressure::PressureBasis;
use super::scales::{nondimensionalize, Dimension, Scales};
use super::{
    FluidMedium, Forcing, GapState, PhysicsError, Rates, Result, RobotGeometry, DEFAULT_MODES,
    DEFAULT_Y_MODES,
};
use crate::linalg::solve3;

/// External load and slip drive in scaled units.
///
/// `slip_drive` is `Δβ Δφ / (l v*)`, the slip speed the field would drive
/// over a flat gap, in units of the settling speed `v*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledForcing {
    pub slip_drive: f64,
    pub force_x: f64,
    pub force_z: f64,
    pub torque: f64,
}

impl ScaledForcing {
    /// Unit weight with thrust `b ε` and torque `a ε`, the dimensionless form
    /// of `(b Δφ, m g, a Δφ)`.
    pub fn from_coefficients(slip_drive: f64, torque_coeff: f64, shear_coeff: f64) -> Self {
        Self {
            slip_drive,
            force_x: shear_coeff * slip_drive,
            force_z: 1.0,
            torque: torque_coeff * slip_drive,
        }
    }

    /// Scaled forcing of a physical setup, together with its scale set.
    pub fn from_physical(
        geometry: &RobotGeometry,
        medium: &FluidMedium,
        forcing: &Forcing,
    ) -> Result<(Self, Scales)> {
        geometry.validate()?;
        medium.validate()?;
        forcing.validate()?;
        let l = geometry.length_l;
        let scales = if forcing.gravity_g > 0.0 {
            nondimensionalize(geometry, medium, forcing)
        } else {
            Scales::kinematic(l, medium.viscosity_mu)
        };
        let dphi = forcing.delta_phi;
        let scaled = Self {
            slip_drive: scales.to_scaled(medium.delta_beta() * dphi / l, Dimension::Velocity),
            force_x: scales.to_scaled(forcing.shear_coeff_b * dphi, Dimension::Force),
            force_z: scales.to_scaled(geometry.mass_m * forcing.gravity_g, Dimension::Force),
            torque: scales.to_scaled(forcing.torque_coeff_a * dphi, Dimension::Torque),
        };
        Ok((scaled, scales))
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.force_x, self.force_z, self.torque]
    }
}

/// Linear response of the gap at one configuration.
///
/// Column `j` of `matrix` is the scaled wrench `(f_x, f_z, τ)` for a unit value
/// of rate `j` in `(V, U, α̇)`; `slip` is the wrench per unit slip drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub matrix: [[f64; 3]; 3],
    pub slip: [f64; 3],
}

impl Response {
    /// Scaled wrench of `rates` under slip drive `slip_drive`.
    pub fn wrench(&self, rates: [f64; 3], slip_drive: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.matrix[i][j] * rates[j]).sum::<f64>() + self.slip[i] * slip_drive;
        }
        out
    }

    /// Rates `(V, U, α̇)` that balance `forcing`.
    pub fn solve(&self, forcing: &ScaledForcing) -> Result<[f64; 3]> {
        let ext = forcing.as_array();
        let b = [
            ext[0] - self.slip[0] * forcing.slip_drive,
            ext[1] - self.slip[1] * forcing.slip_drive,
            ext[2] - self.slip[2] * forcing.slip_drive,
        ];
        let r = solve3(self.matrix, b).ok_or(PhysicsError::Singular("rate response matrix"))?;
        if r.iter().all(|v| v.is_finite()) {
            Ok(r)
        } else {
            Err(PhysicsError::NonFinite)
        }
    }
}

/// Reusable rate solver for a body of fixed aspect ratio.
#[derive(Debug, Clone)]
pub struct RateSolver {
    basis: PressureBasis,
    width: f64,
}

impl RateSolver {
    /// `width` is `w / l`.
    pub fn new(width: f64, n_modes: usize, y_modes: usize) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(PhysicsError::InvalidParameter("aspect ratio must be positive"));
        }
        Ok(Self {
            basis: PressureBasis::new(n_modes, y_modes)?,
            width,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn basis(&self) -> &PressureBasis {
        &self.basis
    }

    /// Unit responses at scaled gap `(h_center, alpha)`; one factorisation
    /// serves all three rate solves.
    pub fn response(&self, h_center: f64, alpha: f64) -> Result<Response> {
        let system = self.basis.assemble(h_center, alpha, self.width)?;
        let mut matrix = [[0.0; 3]; 3];
        let (sv0, sv1) = shear_moments(&self.basis, h_center, alpha, self.width, |_| 1.0);
        for j in 0..3 {
            let mut unit = [0.0; 3];
            unit[j] = 1.0;
            let coeffs = system.solve_rates(Rates::new(unit[0], unit[1], unit[2]));
            let p = system.mean(&coeffs);
            let xp = system.first_moment(&coeffs);
            let (s0, s1) = if j == 0 { (sv0, sv1) } else { (0.0, 0.0) };
            matrix[0][j] = alpha / 2.0 * p + s0;
            matrix[1][j] = p + alpha * s0;
            matrix[2][j] = xp + alpha * s1;
        }
        let (e0, e1) = shear_moments(&self.basis, h_center, alpha, self.width, |x| {
            unit_field(h_center, alpha, x)
        });
        let slip = [e0, alpha * e0, alpha * e1];
        if matrix.iter().flatten().chain(&slip).any(|v| !v.is_finite()) {
            return Err(PhysicsError::NonFinite);
        }
        Ok(Response { matrix, slip })
    }

    /// Scaled rates `(V, U, α̇)` at `(h_center, alpha)`.
    pub fn rates(&self, h_center: f64, alpha: f64, forcing: &ScaledForcing) -> Result<[f64; 3]> {
        self.response(h_center, alpha)?.solve(forcing)
    }
}

/// Body rates `(V, U, α̇)` at which the gap forces balance the external load
/// `(b Δφ, m g, a Δφ)`.
pub fn solve_rates(
    gap: GapState,
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    forcing: &Forcing,
) -> Result<Rates> {
    let (scaled, scales) = ScaledForcing::from_physical(geometry, medium, forcing)?;
    let l = geometry.length_l;
    gap.validate(l)?;
    let solver = RateSolver::new(geometry.aspect_ratio(), DEFAULT_MODES, DEFAULT_Y_MODES)?;
    let [v, u, ad] = solver.rates(gap.h_center / l, gap.alpha, &scaled)?;
    Ok(Rates::new(
        scales.to_physical(v, Dimension::Velocity),
        scales.to_physical(u, Dimension::Velocity),
        scales.to_physical(ad, Dimension::Rate),
    ))
}
