use alloc::vec;
use alloc::vec::Vec;

use super::ode::{rosenbrock23, Flow, OdeError, OdeOptions};
use super::rates::{RateSolver, ScaledForcing};
use super::scales::Dimension;
use super::{
    FluidMedium, Forcing, GapState, PhysicsError, Result, RobotGeometry, COLLAPSE_FRACTION,
    DEFAULT_MODES, DEFAULT_Y_MODES,
};
use crate::linalg::solve3;

/// Gaps above this many body lengths count as lift-off.
const LIFT_OFF_HEIGHT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    /// Stop once `|U|` and `|α̇|` (scaled) drop below this, relative to the
    /// current scaled gap.
    pub tolerance: f64,
    pub max_steps: usize,
    pub n_modes: usize,
    pub y_modes: usize,
    /// Keep every accepted integrator state (for collapse diagnostics).
    pub record_trajectory: bool,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_steps: 20_000,
            n_modes: DEFAULT_MODES,
            y_modes: DEFAULT_Y_MODES,
            record_trajectory: true,
        }
    }
}

/// One accepted state along an equilibrium trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapSample {
    pub time: f64,
    pub h_center: f64,
    pub alpha: f64,
}

/// Steady glide of the robot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteadyState {
    /// Speed V (m/s).
    pub speed_v: f64,
    /// Angle of attack (rad).
    pub alpha_eq: f64,
    /// Gap height at the body centre (m).
    pub gap_eq: f64,
    /// Scaled force/torque imbalance (f_x, f_z, τ).
    pub residuals: [f64; 3],
}

/// Scaled fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSteady {
    pub h_center: f64,
    pub alpha: f64,
    pub speed: f64,
    /// Normal and tilt rates left at the returned state.
    pub normal_rate: f64,
    pub tilt_rate: f64,
    pub residuals: [f64; 3],
    pub steps: usize,
}

/// Equilibrium search on scaled variables (`l = μ = m g = 1`).
#[derive(Debug, Clone)]
pub struct ScaledEquilibrium {
    solver: RateSolver,
}

impl ScaledEquilibrium {
    pub fn new(width: f64, n_modes: usize, y_modes: usize) -> Result<Self> {
        Ok(Self {
            solver: RateSolver::new(width, n_modes, y_modes)?,
        })
    }

    pub fn solver(&self) -> &RateSolver {
        &self.solver
    }

    fn rates(&self, state: &[f64], forcing: &ScaledForcing) -> Result<[f64; 3]> {
        let (h, a) = (state[0], state[1]);
        if !(h - a.abs() / 2.0 > 0.0) || !h.is_finite() || !a.is_finite() {
            return Err(PhysicsError::GapCollapse {
                h_minus: h - a.abs() / 2.0,
                trajectory: Vec::new(),
            });
        }
        self.solver.rates(h, a, forcing)
    }

    fn finish(&self, h: f64, alpha: f64, forcing: &ScaledForcing, steps: usize) -> Result<ScaledSteady> {
        let resp = self.solver.response(h, alpha)?;
        let [v, u, ad] = resp.solve(forcing)?;
        let w = resp.wrench([v, 0.0, 0.0], forcing.slip_drive);
        let ext = forcing.as_array();
        Ok(ScaledSteady {
            h_center: h,
            alpha,
            speed: v,
            normal_rate: u,
            tilt_rate: ad,
            residuals: [w[0] - ext[0], w[1] - ext[1], w[2] - ext[2]],
            steps,
        })
    }

    /// Integrates `ḣ = U`, `α̇` from `start = (h, α)` until the gap settles,
    /// then polishes the fixed point with Newton.
    pub fn integrate(
        &self,
        forcing: &ScaledForcing,
        start: [f64; 2],
        opts: &EquilibriumOptions,
    ) -> Result<ScaledSteady> {
        if !(opts.tolerance > 0.0) {
            return Err(PhysicsError::InvalidParameter("tolerance must be positive"));
        }
        let mut trajectory: Vec<GapSample> = Vec::new();
        let ode = OdeOptions {
            rtol: 1e-6,
            atol: 1e-12,
            initial_step: 1e-3,
            max_step: f64::INFINITY,
            t_end: f64::INFINITY,
            max_steps: opts.max_steps,
        };
        let outcome = rosenbrock23(
            |y| self.rates(y, forcing).map(|r| vec![r[1], r[2]]),
            &start,
            &ode,
            |t, y, dy| {
                let (h, a) = (y[0], y[1]);
                if opts.record_trajectory {
                    trajectory.push(GapSample {
                        time: t,
                        h_center: h,
                        alpha: a,
                    });
                }
                let h_minus = h - a.abs() / 2.0;
                if h_minus < COLLAPSE_FRACTION {
                    return Err(PhysicsError::GapCollapse {
                        h_minus,
                        trajectory: Vec::new(),
                    });
                }
                if h > LIFT_OFF_HEIGHT {
                    return Err(PhysicsError::LiftOff { h_center: h });
                }
                let settled = dy[0].abs().max(dy[1].abs()) < opts.tolerance * h;
                Ok(if settled { Flow::Stop } else { Flow::Continue })
            },
        );
        let sol = match outcome {
            Ok(sol) => sol,
            Err(OdeError::Aborted(PhysicsError::GapCollapse { h_minus, .. })) => {
                return Err(PhysicsError::GapCollapse {
                    h_minus,
                    trajectory,
                })
            }
            Err(OdeError::Aborted(e)) => return Err(e),
            Err(OdeError::StepBudget { .. }) | Err(OdeError::StepUnderflow { .. }) => {
                return Err(PhysicsError::NotConverged {
                    steps: trajectory.len().max(opts.max_steps),
                })
            }
        };
        let polished = self.polish(forcing, [sol.y[0], sol.y[1]], opts.tolerance)?;
        Ok(ScaledSteady {
            steps: sol.steps + polished.steps,
            ..polished
        })
    }

    /// Newton iteration on `(U, α̇) = 0` from `guess`.
    pub fn polish(&self, forcing: &ScaledForcing, guess: [f64; 2], tolerance: f64) -> Result<ScaledSteady> {
        let mut x = guess;
        let mut f = self.rates(&x, forcing)?;
        let norm = |f: &[f64; 3], h: f64| f[1].abs().max(f[2].abs()) / h;
        let mut iters = 0;
        while iters < 60 {
            if norm(&f, x[0]) < 1e-14 {
                break;
            }
            iters += 1;
            let steps = [1e-7 * x[0], 1e-7 * x[1].abs().max(1e-3 * x[0])];
            let mut jac = [[0.0; 3]; 3];
            jac[2][2] = 1.0;
            for j in 0..2 {
                let mut xp = x;
                xp[j] += steps[j];
                let mut xm = x;
                xm[j] -= steps[j];
                let fp = self.rates(&xp, forcing)?;
                let fm = self.rates(&xm, forcing)?;
                jac[0][j] = (fp[1] - fm[1]) / (2.0 * steps[j]);
                jac[1][j] = (fp[2] - fm[2]) / (2.0 * steps[j]);
            }
            let delta = solve3(jac, [-f[1], -f[2], 0.0]).ok_or(PhysicsError::Singular("equilibrium Jacobian"))?;
            let mut lambda = 1.0;
            let before = norm(&f, x[0]);
            loop {
                let trial = [x[0] + lambda * delta[0], x[1] + lambda * delta[1]];
                let ok = trial[0] - trial[1].abs() / 2.0 > COLLAPSE_FRACTION * 0.1;
                if ok {
                    if let Ok(ft) = self.rates(&trial, forcing) {
                        if norm(&ft, trial[0]) < before || lambda < 1e-3 {
                            x = trial;
                            f = ft;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
                if lambda < 1e-6 {
                    return Err(PhysicsError::NotConverged { steps: iters });
                }
            }
            let small = (lambda * delta[0]).abs() < 1e-14 * x[0]
                && (lambda * delta[1]).abs() < 1e-14 * x[0];
            if small {
                break;
            }
        }
        if !(norm(&f, x[0]) < tolerance) {
            return Err(PhysicsError::NotConverged { steps: iters });
        }
        self.finish(x[0], x[1], forcing, iters)
    }

    /// Newton from `guess`, falling back to integration from `guess` and then
    /// from `fallback`.
    pub fn solve(
        &self,
        forcing: &ScaledForcing,
        guess: [f64; 2],
        fallback: [f64; 2],
        opts: &EquilibriumOptions,
    ) -> Result<ScaledSteady> {
        if let Ok(s) = self.polish(forcing, guess, opts.tolerance) {
            return Ok(s);
        }
        let quiet = EquilibriumOptions {
            record_trajectory: false,
            ..*opts
        };
        match self.integrate(forcing, guess, &quiet) {
            Ok(s) => Ok(s),
            Err(_) if guess != fallback => self.integrate(forcing, fallback, opts),
            Err(e) => Err(e),
        }
    }
}

/// Steady state reached from `initial` under `forcing`.
///
/// `tolerance` bounds the scaled `|U|` and `|α̇|` at the returned state.
pub fn integrate_to_equilibrium(
    initial: GapState,
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    forcing: &Forcing,
    tolerance: f64,
) -> Result<SteadyState> {
    let opts = EquilibriumOptions {
        tolerance,
        ..Default::default()
    };
    integrate_with_options(initial, geometry, medium, forcing, &opts)
}

/// [`integrate_to_equilibrium`] with full control over the solver.
pub fn integrate_with_options(
    initial: GapState,
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    forcing: &Forcing,
    opts: &EquilibriumOptions,
) -> Result<SteadyState> {
    if !(forcing.gravity_g > 0.0) {
        return Err(PhysicsError::InvalidParameter("equilibrium requires gravity"));
    }
    let (scaled, scales) = ScaledForcing::from_physical(geometry, medium, forcing)?;
    let l = geometry.length_l;
    initial.validate(l)?;
    let eq = ScaledEquilibrium::new(geometry.aspect_ratio(), opts.n_modes, opts.y_modes)?;
    let start = [initial.h_center / l, initial.alpha];
    let s = eq.integrate(&scaled, start, opts).map_err(|e| match e {
        PhysicsError::GapCollapse { h_minus, trajectory } => PhysicsError::GapCollapse {
            h_minus: h_minus * l,
            trajectory: trajectory
                .into_iter()
                .map(|p| GapSample {
                    time: scales.to_physical(p.time, Dimension::Time),
                    h_center: p.h_center * l,
                    alpha: p.alpha,
                })
                .collect(),
        },
        PhysicsError::LiftOff { h_center } => PhysicsError::LiftOff {
            h_center: h_center * l,
        },
        other => other,
    })?;
    Ok(steady_from_scaled(&s, l, scales.of(Dimension::Velocity)))
}

pub(crate) fn steady_from_scaled(s: &ScaledSteady, length: f64, velocity: f64) -> SteadyState {
    SteadyState {
        speed_v: s.speed * velocity,
        alpha_eq: s.alpha,
        gap_eq: s.h_center * length,
        residuals: s.residuals,
    }
}
