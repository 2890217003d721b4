//! Per-robot waypoint controllers.
//!
//! `θ` is the signed angle from the robot's heading to the target, positive
//! when the target lies to the left. The motor farther from the target is the
//! right one for `θ > 0`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::geom::{wrap_angle, Point2};
use crate::kinematics::{MotorCommand, RobotPose};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("target coincides with the robot; misalignment is undefined")]
    Coincident,
    #[error("waypoint plan is empty")]
    EmptyPlan,
    #[error("invalid controller parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Signed angle from the heading of `pose` to `target`, in (−π, π].
pub fn misalignment(pose: &RobotPose, target: Point2) -> Result<f64, ControlError> {
    let d = target - pose.position();
    if !(d.norm() > 0.0) {
        return Err(ControlError::Coincident);
    }
    Ok(wrap_angle(d.y.atan2(d.x) - pose.heading))
}

/// Memory a controller carries between frames.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControlState {
    /// Misalignment one frame ago and now.
    pub previous_theta: Option<f64>,
    pub current_theta: Option<f64>,
    pub current_waypoint_index: usize,
    /// Right-motor share minus one half, in [−½, ½]. Stored as an offset so
    /// that mirroring is an exact sign flip.
    pub split_bias: f64,
}

impl ControlState {
    pub fn push_theta(&mut self, theta: f64) {
        self.previous_theta = self.current_theta;
        self.current_theta = Some(theta);
    }

    /// Forget the angle history (a new waypoint was issued).
    pub fn reset_history(&mut self) {
        self.previous_theta = None;
        self.current_theta = None;
    }

    /// `(left, right)` power proportion.
    pub fn power_split(&self) -> (f64, f64) {
        (0.5 - self.split_bias, 0.5 + self.split_bias)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DualParams {
    /// rad
    pub threshold: f64,
    /// Share moved to the far motor per correcting frame.
    pub trim_step: f64,
}

impl Default for DualParams {
    fn default() -> Self {
        Self {
            threshold: 15f64.to_radians(),
            trim_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ProportionalParams {
    /// rad
    pub threshold: f64,
    /// Turning power is `min(|θ|/π, 1)^exponent`.
    pub exponent: f64,
}

impl Default for ProportionalParams {
    fn default() -> Self {
        Self {
            threshold: 7.5f64.to_radians(),
            exponent: 1.0,
        }
    }
}

/// Both motors lit, with power trimmed towards the far motor whenever the
/// misalignment grows or exceeds the threshold.
pub fn controller_dual(state: &mut ControlState, theta: f64, params: &DualParams) -> MotorCommand {
    let growing = state.current_theta.is_some_and(|prev| theta.abs() > prev.abs());
    state.push_theta(theta);
    if (growing || theta.abs() > params.threshold) && theta != 0.0 {
        let step = if theta > 0.0 { params.trim_step } else { -params.trim_step };
        state.split_bias = (state.split_bias + step).clamp(-0.5, 0.5);
    }
    let b = state.split_bias;
    MotorCommand::new((1.0 - 2.0 * b).min(1.0), (1.0 + 2.0 * b).min(1.0))
}

/// Full power on both motors once aligned for two frames; otherwise only the
/// far motor, weighted by the misalignment.
pub fn controller_proportional(state: &mut ControlState, theta: f64, params: &ProportionalParams) -> MotorCommand {
    state.push_theta(theta);
    let aligned = |t: Option<f64>| t.is_some_and(|t| t.abs() < params.threshold);
    if aligned(state.previous_theta) && aligned(state.current_theta) {
        return MotorCommand::new(1.0, 1.0);
    }
    let power = (theta.abs() / PI).min(1.0).powf(params.exponent);
    if theta > 0.0 {
        MotorCommand::new(0.0, power)
    } else {
        MotorCommand::new(power, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ControlLaw {
    Dual(DualParams),
    Proportional(ProportionalParams),
}

impl Default for ControlLaw {
    fn default() -> Self {
        Self::Proportional(ProportionalParams::default())
    }
}

impl ControlLaw {
    pub fn validate(&self) -> Result<(), ControlError> {
        let (threshold, ok) = match self {
            Self::Dual(p) => (p.threshold, p.trim_step.is_finite() && p.trim_step > 0.0 && p.trim_step <= 0.5),
            Self::Proportional(p) => (p.threshold, p.exponent.is_finite() && p.exponent > 0.0),
        };
        if !(threshold.is_finite() && threshold > 0.0 && threshold < PI) {
            return Err(ControlError::InvalidParameter("threshold must lie in (0, π)"));
        }
        if !ok {
            return Err(ControlError::InvalidParameter("trim step or exponent out of range"));
        }
        Ok(())
    }

    pub fn command(&self, state: &mut ControlState, theta: f64) -> MotorCommand {
        match self {
            Self::Dual(p) => controller_dual(state, theta, p),
            Self::Proportional(p) => controller_proportional(state, theta, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WaypointPlan {
    waypoints: Vec<Point2>,
    arrival_radius: f64,
}

impl WaypointPlan {
    pub fn new(waypoints: Vec<Point2>, arrival_radius: f64) -> Result<Self, ControlError> {
        if waypoints.is_empty() {
            return Err(ControlError::EmptyPlan);
        }
        if !(arrival_radius.is_finite() && arrival_radius > 0.0) {
            return Err(ControlError::InvalidParameter("arrival radius must be positive"));
        }
        if waypoints.iter().any(|p| !p.is_finite()) {
            return Err(ControlError::InvalidParameter("waypoints must be finite"));
        }
        Ok(Self {
            waypoints,
            arrival_radius,
        })
    }

    pub fn waypoints(&self) -> &[Point2] {
        &self.waypoints
    }

    pub fn arrival_radius(&self) -> f64 {
        self.arrival_radius
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    /// Waypoint to head for now (equals the plan length once complete).
    pub index: usize,
    pub advanced: bool,
    pub complete: bool,
}

/// Moves past the current waypoint once the robot is strictly inside the
/// arrival radius. At most one waypoint is consumed per call.
pub fn advance_waypoint(plan: &WaypointPlan, index: usize, pose: &RobotPose) -> Progress {
    let n = plan.len();
    if index >= n {
        return Progress {
            index: n,
            advanced: false,
            complete: true,
        };
    }
    if pose.position().dist(plan.waypoints[index]) < plan.arrival_radius {
        Progress {
            index: index + 1,
            advanced: true,
            complete: index + 1 == n,
        }
    } else {
        Progress {
            index,
            advanced: false,
            complete: false,
        }
    }
}
