use alloc::vec::Vec;

use super::equilibrium::{steady_from_scaled, EquilibriumOptions, ScaledEquilibrium, ScaledSteady};
use super::rates::ScaledForcing;
use super::scales::Dimension;
use super::{FluidMedium, Forcing, PhysicsError, Result, RobotGeometry, SteadyState};

/// Scaled `(h, α)` used to start a sweep: a gap of 1% of the body length with
/// a slight tilt opening towards the direction of travel.
pub const SCALED_START: [f64; 2] = [0.01, 0.001];

/// [`SCALED_START`] mirrored to match the sign of the slip drive (negative
/// drive moves the body towards +x).
pub fn default_start(slip_drive: f64) -> [f64; 2] {
    if slip_drive > 0.0 {
        [SCALED_START[0], -SCALED_START[1]]
    } else {
        SCALED_START
    }
}

/// One point of a speed-versus-potential sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta_phi: f64,
    /// Field estimate `Δφ / electrode_separation` (V/m).
    pub field: f64,
    pub steady: Result<SteadyState>,
}

/// Scaled steady states along `slip_drives`, each point warm-started from the
/// last one that converged.
pub fn scaled_steady_curve(
    eq: &ScaledEquilibrium,
    torque_coeff: f64,
    shear_coeff: f64,
    slip_drives: &[f64],
    opts: &EquilibriumOptions,
) -> Vec<Result<ScaledSteady>> {
    let mut guess = None;
    slip_drives
        .iter()
        .map(|&eps| {
            let forcing = ScaledForcing::from_coefficients(eps, torque_coeff, shear_coeff);
            let start = default_start(eps);
            let out = eq.solve(&forcing, guess.unwrap_or(start), start, opts);
            if let Ok(s) = &out {
                guess = Some([s.h_center, s.alpha]);
            }
            out
        })
        .collect()
}

/// Steady glide for each potential drop in `delta_phis` (ascending, positive),
/// with the remaining forcing taken from `template`.
///
/// Per-point failures are reported in their row and do not stop the sweep.
pub fn steady_curve(
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    template: &Forcing,
    delta_phis: &[f64],
) -> Result<Vec<SweepRow>> {
    steady_curve_with_options(geometry, medium, template, delta_phis, &EquilibriumOptions::default())
}

pub fn steady_curve_with_options(
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    template: &Forcing,
    delta_phis: &[f64],
    opts: &EquilibriumOptions,
) -> Result<Vec<SweepRow>> {
    geometry.validate()?;
    medium.validate()?;
    template.validate()?;
    if !(template.gravity_g > 0.0) {
        return Err(PhysicsError::InvalidParameter("equilibrium requires gravity"));
    }
    if delta_phis.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(PhysicsError::InvalidParameter("potential drops must be positive"));
    }
    if delta_phis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PhysicsError::InvalidParameter("potential drops must ascend"));
    }
    let eq = ScaledEquilibrium::new(geometry.aspect_ratio(), opts.n_modes, opts.y_modes)?;
    let mut guess = None;
    let rows = delta_phis
        .iter()
        .map(|&dphi| {
            let forcing = template.with_delta_phi(dphi);
            let steady = ScaledForcing::from_physical(geometry, medium, &forcing).and_then(|(scaled, scales)| {
                let start = default_start(scaled.slip_drive);
                let s = eq.solve(&scaled, guess.unwrap_or(start), start, opts)?;
                guess = Some([s.h_center, s.alpha]);
                Ok(steady_from_scaled(&s, geometry.length_l, scales.of(Dimension::Velocity)))
            });
            SweepRow {
                delta_phi: dphi,
                field: dphi / geometry.electrode_separation,
                steady,
            }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sweep_is_monotone_and_linear_at_low_field() {
        let dphis: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
        let rows = steady_curve(
            &RobotGeometry::reference(),
            &FluidMedium::reference(),
            &Forcing::reference(1.0),
            &dphis,
        )
        .unwrap();
        let states: Vec<SteadyState> = rows.iter().map(|r| r.steady.clone().unwrap()).collect();
        for w in states.windows(2) {
            assert!(w[1].speed_v > w[0].speed_v);
            assert!(w[1].alpha_eq >= w[0].alpha_eq);
            assert!(w[1].gap_eq >= w[0].gap_eq);
        }
        let half = &rows[..4];
        let last = half.last().unwrap();
        let secant = last.steady.as_ref().unwrap().speed_v / last.field;
        for r in half {
            let v = r.steady.as_ref().unwrap().speed_v;
            assert!((v / r.field - secant).abs() <= 0.02 * secant, "{v} at {}", r.field);
        }
    }

    #[test]
    fn rejects_unsorted_or_non_positive_input() {
        let g = RobotGeometry::reference();
        let m = FluidMedium::reference();
        let f = Forcing::reference(1.0);
        assert!(steady_curve(&g, &m, &f, &[0.2, 0.1]).is_err());
        assert!(steady_curve(&g, &m, &f, &[0.0, 0.1]).is_err());
    }

    #[test]
    fn failures_stay_in_their_row() {
        // A negative torque coefficient tips the body onto its trailing edge.
        let forcing = Forcing {
            torque_coeff_a: -Forcing::reference(1.0).torque_coeff_a,
            ..Forcing::reference(1.0)
        };
        let rows = steady_curve(
            &RobotGeometry::reference(),
            &FluidMedium::reference(),
            &forcing,
            &vec![0.5, 1.0],
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.steady.is_err()));
    }
}
