use super::{FluidMedium, Forcing, RobotGeometry};

/// Physical dimension of a quantity crossing the scaled/physical boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Velocity,
    Force,
    Time,
    /// Force per area.
    Pressure,
    /// Force times length.
    Torque,
    /// Inverse time (tilt rates).
    Rate,
}

/// Characteristic scales of the model.
///
/// Velocities are scaled by `m g / (μ l)`, the settling speed of the body
/// under its own weight; time is then `μ l² / (m g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub length: f64,
    pub velocity: f64,
    pub force: f64,
    pub time: f64,
}

impl Scales {
    pub fn from_parts(length: f64, force: f64, viscosity: f64) -> Self {
        let velocity = force / (viscosity * length);
        Self {
            length,
            velocity,
            force,
            time: length / velocity,
        }
    }

    /// Scales with a velocity unit of 1 m/s, for linear solves that do not
    /// involve the weight.
    pub fn kinematic(length: f64, viscosity: f64) -> Self {
        Self::from_parts(length, viscosity * length, viscosity)
    }

    pub fn of(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Length => self.length,
            Dimension::Velocity => self.velocity,
            Dimension::Force => self.force,
            Dimension::Time => self.time,
            Dimension::Pressure => self.force / (self.length * self.length),
            Dimension::Torque => self.force * self.length,
            Dimension::Rate => 1.0 / self.time,
        }
    }

    pub fn to_scaled(&self, value: f64, dim: Dimension) -> f64 {
        value / self.of(dim)
    }

    pub fn to_physical(&self, value: f64, dim: Dimension) -> f64 {
        value * self.of(dim)
    }
}

/// Scale set of a robot in a medium under gravity.
pub fn nondimensionalize(geometry: &RobotGeometry, medium: &FluidMedium, forcing: &Forcing) -> Scales {
    Scales::from_parts(
        geometry.length_l,
        geometry.mass_m * forcing.gravity_g,
        medium.viscosity_mu,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_inputs_give_unit_scales() {
        let geometry = RobotGeometry {
            length_l: 1.0,
            width_w: 1.0,
            mass_m: 1.0,
            electrode_side_a: 0.5,
            electrode_separation: 1.0,
        };
        let medium = FluidMedium {
            viscosity_mu: 1.0,
            ..FluidMedium::reference()
        };
        let forcing = Forcing {
            gravity_g: 1.0,
            ..Forcing::reference(1.0)
        };
        let s = nondimensionalize(&geometry, &medium, &forcing);
        assert_eq!((s.length, s.velocity, s.force, s.time), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn weight_scales_to_one() {
        let g = RobotGeometry::reference();
        let f = Forcing::reference(1.0);
        let s = nondimensionalize(&g, &FluidMedium::reference(), &f);
        assert_eq!(s.to_scaled(g.mass_m * f.gravity_g, Dimension::Force), 1.0);
    }

    #[test]
    fn round_trip_is_identity() {
        let s = nondimensionalize(
            &RobotGeometry::reference(),
            &FluidMedium::reference(),
            &Forcing::reference(1.0),
        );
        let dims = [
            Dimension::Length,
            Dimension::Velocity,
            Dimension::Force,
            Dimension::Time,
            Dimension::Pressure,
            Dimension::Torque,
            Dimension::Rate,
        ];
        for d in dims {
            for v in [1.234e-6, -3.0, 7.5e3] {
                let back = s.to_physical(s.to_scaled(v, d), d);
                assert!((back - v).abs() <= 2.0 * f64::EPSILON * v.abs(), "{d:?}");
            }
        }
    }
}
