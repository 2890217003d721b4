//! Two-motor differential drive.
//!
//! The robot carries a left and a right motor `δ` either side of its centre.
//! World frame: x right, y up, heading counter-clockwise from +x. Curvature
//! `κ > 0` turns the robot towards its right motor, i.e. clockwise.

use num_traits::Float;

use crate::geom::{wrap_angle, Point2};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("curvature is undefined when the robot is not moving forward")]
    UndefinedCurvature,
    #[error("invalid drive parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DriveParams {
    /// Half the motor separation δ (m).
    pub half_separation_delta: f64,
    /// Motor speed per unit effective intensity (m/s).
    pub speed_gain_k: f64,
    /// Speed at which a motor saturates (m/s).
    pub v_saturation: f64,
    /// Fraction of one motor's light that reaches the other.
    pub crosstalk_s: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self {
            half_separation_delta: 100e-6,
            speed_gain_k: 100e-6,
            v_saturation: 200e-6,
            crosstalk_s: 0.439,
        }
    }
}

impl DriveParams {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.half_separation_delta.is_finite() && self.half_separation_delta > 0.0) {
            return Err(KinematicsError::InvalidParameter("half separation must be positive"));
        }
        if !(self.speed_gain_k.is_finite() && self.speed_gain_k >= 0.0) {
            return Err(KinematicsError::InvalidParameter("speed gain must be non-negative"));
        }
        if !(self.v_saturation.is_finite() && self.v_saturation > 0.0) {
            return Err(KinematicsError::InvalidParameter("saturation speed must be positive"));
        }
        if !(0.0..1.0).contains(&self.crosstalk_s) {
            return Err(KinematicsError::InvalidParameter("crosstalk must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Observed-over-commanded curvature ratio `(1 − s)/(1 + s)` below saturation.
    pub fn curvature_attenuation(&self) -> f64 {
        (1.0 - self.crosstalk_s) / (1.0 + self.crosstalk_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    /// rad, in (−π, π]
    pub heading: f64,
}

impl RobotPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn direction(&self) -> Point2 {
        Point2::from_angle(self.heading)
    }

    /// Positions of the left and right motors.
    pub fn motor_positions(&self, half_separation: f64) -> (Point2, Point2) {
        let left = Point2::from_angle(self.heading + core::f64::consts::FRAC_PI_2) * half_separation;
        let c = self.position();
        (c + left, c - left)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotorCommand {
    pub intensity_left: f64,
    pub intensity_right: f64,
}

impl MotorCommand {
    pub const OFF: Self = Self {
        intensity_left: 0.0,
        intensity_right: 0.0,
    };

    /// Command with both intensities clamped into [0, 1] (NaN becomes 0).
    pub fn new(left: f64, right: f64) -> Self {
        let clamp = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        Self {
            intensity_left: clamp(left),
            intensity_right: clamp(right),
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self::new(self.intensity_left * k, self.intensity_right * k)
    }

    /// Normalised commanded speed difference `(I_L − I_R)/(I_L + I_R)`.
    pub fn eta(&self) -> Option<f64> {
        let sum = self.intensity_left + self.intensity_right;
        (sum > 0.0).then(|| (self.intensity_left - self.intensity_right) / sum)
    }
}

/// Motor speeds `(V_L, V_R)` after light spill-over and saturation.
pub fn motor_speeds(cmd: MotorCommand, params: &DriveParams) -> (f64, f64) {
    motor_speeds_with(cmd, params.crosstalk_s, |i| {
        (params.speed_gain_k * i).min(params.v_saturation)
    })
}

/// Like [`motor_speeds`] with an arbitrary speed response to effective intensity.
pub fn motor_speeds_with(cmd: MotorCommand, crosstalk: f64, response: impl Fn(f64) -> f64) -> (f64, f64) {
    let left = cmd.intensity_left + crosstalk * cmd.intensity_right;
    let right = cmd.intensity_right + crosstalk * cmd.intensity_left;
    (response(left), response(right))
}

/// Path curvature `κ = (V_L − V_R) / ((V_L + V_R) δ)` (1/m).
pub fn curvature(v_left: f64, v_right: f64, delta: f64) -> Result<f64, KinematicsError> {
    let sum = v_left + v_right;
    if !(sum > 0.0) {
        return Err(KinematicsError::UndefinedCurvature);
    }
    if !(delta > 0.0) {
        return Err(KinematicsError::InvalidParameter("half separation must be positive"));
    }
    Ok((v_left - v_right) / (sum * delta))
}

/// Body speed `(V_L + V_R)/2`.
pub fn body_speed(v_left: f64, v_right: f64) -> f64 {
    0.5 * (v_left + v_right)
}

/// Advances `pose` along a circular arc of curvature `kappa` at speed `speed`
/// for `dt` seconds (negative `dt` runs backwards).
pub fn step_pose(pose: RobotPose, speed: f64, kappa: f64, dt: f64) -> RobotPose {
    let turn = -speed * kappa * dt;
    let h0 = pose.heading;
    if turn.abs() < 1e-9 {
        // second-order midpoint keeps the near-straight branch continuous
        let mid = h0 + 0.5 * turn;
        return RobotPose::new(
            pose.x + speed * dt * mid.cos(),
            pose.y + speed * dt * mid.sin(),
            h0 + turn,
        );
    }
    let h1 = h0 + turn;
    let radius = speed * dt / turn;
    RobotPose::new(
        pose.x + radius * (h1.sin() - h0.sin()),
        pose.y - radius * (h1.cos() - h0.cos()),
        h1,
    )
}

/// Differential-drive step from motor speeds; a stopped robot stays put.
pub fn step_drive(pose: RobotPose, v_left: f64, v_right: f64, delta: f64, dt: f64) -> RobotPose {
    match curvature(v_left, v_right, delta) {
        Ok(k) => step_pose(pose, body_speed(v_left, v_right), k, dt),
        Err(_) => pose,
    }
}

/// Photovoltaic current `I = i_max · intensity` (A).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PvParams {
    pub i_max: f64,
}

pub fn pv_current(intensity: f64, pv: &PvParams) -> f64 {
    pv.i_max * intensity.clamp(0.0, 1.0)
}
