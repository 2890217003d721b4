//! Scenario files: everything needed to start a run.

use std::path::Path;

use microswarm_core::control::ControlLaw;
use microswarm_core::holography::{AffineTransform, DEFAULT_SPOT_SIGMA};
use microswarm_core::kinematics::{DriveParams, RobotPose};
use microswarm_core::physics::{FluidMedium, Forcing, RobotGeometry};
use microswarm_core::swarm::{FollowSpec, GateParams, ShapePreset};
use microswarm_core::Point2;
use serde::{Deserialize, Serialize};

/// Arrival radius used when a program does not give one. It sits above the
/// tightest turn the default drive can make, so every waypoint is reachable.
pub const DEFAULT_ARRIVAL_RADIUS: f64 = 300e-6;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("could not read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    /// m
    pub width: f64,
    /// m
    pub height: f64,
}

impl Arena {
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub pose: RobotPose,
    #[serde(default)]
    pub drive: DriveParams,
    #[serde(default = "RobotGeometry::reference")]
    pub geometry: RobotGeometry,
}

impl RobotSpec {
    pub fn at(x: f64, y: f64, heading: f64) -> Self {
        Self {
            pose: RobotPose::new(x, y, heading),
            drive: DriveParams::default(),
            geometry: RobotGeometry::reference(),
        }
    }
}

fn default_radius() -> f64 {
    DEFAULT_ARRIVAL_RADIUS
}

/// What the robots are asked to do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Program {
    /// No targets; every robot stays dark.
    Idle,
    /// One waypoint list per robot (missing or empty lists mean idle).
    Waypoints {
        plans: Vec<Vec<Point2>>,
        #[serde(default = "default_radius")]
        arrival_radius: f64,
        #[serde(default)]
        gate: Option<GateParams>,
    },
    /// A pool of waypoints shared out by nearest assignment every frame.
    Assign {
        waypoints: Vec<Point2>,
        #[serde(default = "default_radius")]
        arrival_radius: f64,
        #[serde(default)]
        gate: Option<GateParams>,
    },
    /// Like `assign`, with the pool generated from a shape.
    Shape {
        preset: ShapePreset,
        #[serde(default = "default_radius")]
        arrival_radius: f64,
        #[serde(default)]
        gate: Option<GateParams>,
    },
    /// Followers chase a point behind their leader; robots without a leader
    /// run their entry of `plans`. The proximity gate is always on.
    Follow {
        follow: FollowSpec,
        #[serde(default)]
        plans: Vec<Vec<Point2>>,
        #[serde(default = "default_radius")]
        arrival_radius: f64,
        #[serde(default)]
        gate: GateParams,
    },
}

impl Default for Program {
    fn default() -> Self {
        Self::Idle
    }
}

impl Program {
    pub fn arrival_radius(&self) -> f64 {
        match self {
            Self::Idle => DEFAULT_ARRIVAL_RADIUS,
            Self::Waypoints { arrival_radius, .. }
            | Self::Assign { arrival_radius, .. }
            | Self::Shape { arrival_radius, .. }
            | Self::Follow { arrival_radius, .. } => *arrival_radius,
        }
    }

    pub fn gate(&self) -> Option<GateParams> {
        match self {
            Self::Idle => None,
            Self::Waypoints { gate, .. } | Self::Assign { gate, .. } | Self::Shape { gate, .. } => *gate,
            Self::Follow { gate, .. } => Some(*gate),
        }
    }

    pub fn follow(&self) -> Option<&FollowSpec> {
        match self {
            Self::Follow { follow, .. } => Some(follow),
            _ => None,
        }
    }

    /// Checks the program against a robot count and arena.
    pub fn validate(&self, robots: usize, arena: &Arena) -> Result<(), ScenarioError> {
        let r = self.arrival_radius();
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid("arrival radius must be positive"));
        }
        if let Some(g) = self.gate() {
            g.validate().map_err(|e| invalid(e.to_string()))?;
        }
        let check_points = |pts: &[Point2]| -> Result<(), ScenarioError> {
            match pts.iter().find(|p| !(p.is_finite() && arena.contains(**p))) {
                Some(p) => Err(invalid(format!("waypoint ({}, {}) lies outside the arena", p.x, p.y))),
                None => Ok(()),
            }
        };
        match self {
            Self::Idle => {}
            Self::Waypoints { plans, .. } => {
                if plans.len() > robots {
                    return Err(invalid("more waypoint lists than robots"));
                }
                plans.iter().try_for_each(|p| check_points(p))?;
            }
            Self::Assign { waypoints, .. } => check_points(waypoints)?,
            Self::Shape { preset, .. } => check_points(&preset.waypoints())?,
            Self::Follow { follow, plans, .. } => {
                follow.validate(robots).map_err(|e| invalid(e.to_string()))?;
                if plans.len() > robots {
                    return Err(invalid("more waypoint lists than robots"));
                }
                plans.iter().try_for_each(|p| check_points(p))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Detection {
    /// Centroid noise of the robot position (m).
    pub noise_sigma: f64,
    /// Gaussian smoothing applied before speed extraction (frames).
    pub smoothing_sigma: f64,
}

impl Default for Detection {
    fn default() -> Self {
        Self {
            noise_sigma: 1e-6,
            smoothing_sigma: 1.0,
        }
    }
}

/// How motor light turns into motor speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Fidelity {
    /// `v = k · I`, saturating.
    Kinematic,
    /// Steady glide speed looked up from a precomputed sweep of the
    /// lubrication model, with full intensity mapped to `delta_phi_full`.
    Physics {
        /// V
        delta_phi_full: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_forcing")]
        forcing: Forcing,
    },
}

fn default_samples() -> usize {
    16
}

fn default_forcing() -> Forcing {
    Forcing::reference(0.0)
}

impl Default for Fidelity {
    fn default() -> Self {
        Self::Kinematic
    }
}

/// How the requested motor light reaches the arena.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Optics {
    /// Every motor receives exactly its commanded intensity.
    Ideal,
    /// A phase hologram is computed each frame and its far field sampled at
    /// the motors.
    Hologram {
        /// Canvas size in pixels `[width, height]`.
        #[serde(default = "default_canvas")]
        canvas: [usize; 2],
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default = "default_spot_sigma")]
        spot_sigma: f64,
        /// Arena (m) to canvas (px); fitted to the arena when absent.
        #[serde(default)]
        calibration: Option<AffineTransform>,
        /// Blazed-grating shift of the pattern, in pixels.
        #[serde(default)]
        grating: [f64; 2],
    },
}

fn default_canvas() -> [usize; 2] {
    [128, 128]
}

fn default_iterations() -> usize {
    5
}

fn default_spot_sigma() -> f64 {
    DEFAULT_SPOT_SIGMA
}

impl Default for Optics {
    fn default() -> Self {
        Self::Hologram {
            canvas: default_canvas(),
            iterations: default_iterations(),
            spot_sigma: default_spot_sigma(),
            calibration: None,
            grating: [0.0, 0.0],
        }
    }
}

fn default_frame_rate() -> f64 {
    10.0
}

fn default_max_frames() -> u64 {
    3000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub arena: Arena,
    /// Hz
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    pub robots: Vec<RobotSpec>,
    #[serde(default = "FluidMedium::reference")]
    pub medium: FluidMedium,
    #[serde(default)]
    pub controller: ControlLaw,
    #[serde(default)]
    pub program: Program,
    #[serde(default)]
    pub detection: Detection,
    #[serde(default)]
    pub fidelity: Fidelity,
    #[serde(default)]
    pub optics: Optics,
    #[serde(default)]
    pub seed: u64,
    /// Run length cap when the program never completes.
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
}

impl Scenario {
    pub fn new(arena: Arena, robots: Vec<RobotSpec>) -> Self {
        Self {
            arena,
            frame_rate: default_frame_rate(),
            robots,
            medium: FluidMedium::reference(),
            controller: ControlLaw::default(),
            program: Program::Idle,
            detection: Detection::default(),
            fidelity: Fidelity::Kinematic,
            optics: Optics::default(),
            seed: 0,
            max_frames: default_max_frames(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn frame_period(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let a = &self.arena;
        if !(a.width.is_finite() && a.width > 0.0 && a.height.is_finite() && a.height > 0.0) {
            return Err(invalid("arena size must be positive"));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(invalid("frame rate must be positive"));
        }
        if self.robots.is_empty() {
            return Err(invalid("scenario has no robots"));
        }
        for (i, r) in self.robots.iter().enumerate() {
            let p = r.pose;
            if !(p.x.is_finite() && p.y.is_finite() && p.heading.is_finite()) {
                return Err(invalid(format!("robot {i}: pose must be finite")));
            }
            if !a.contains(p.position()) {
                return Err(invalid(format!("robot {i} starts outside the arena")));
            }
            r.drive.validate().map_err(|e| invalid(format!("robot {i}: {e}")))?;
            if matches!(self.fidelity, Fidelity::Physics { .. }) {
                r.geometry.validate().map_err(|e| invalid(format!("robot {i}: {e}")))?;
            }
        }
        self.medium.validate().map_err(|e| invalid(e.to_string()))?;
        self.controller.validate().map_err(|e| invalid(e.to_string()))?;
        self.program.validate(self.robots.len(), a)?;
        let d = &self.detection;
        if !(d.noise_sigma.is_finite() && d.noise_sigma >= 0.0) {
            return Err(invalid("detection noise must be non-negative"));
        }
        if !(d.smoothing_sigma.is_finite() && d.smoothing_sigma >= 0.0) {
            return Err(invalid("smoothing width must be non-negative"));
        }
        if let Fidelity::Physics {
            delta_phi_full,
            samples,
            forcing,
        } = &self.fidelity
        {
            if !(delta_phi_full.is_finite() && *delta_phi_full > 0.0) {
                return Err(invalid("delta_phi_full must be positive"));
            }
            if *samples < 2 {
                return Err(invalid("physics lookup needs at least two samples"));
            }
            forcing.validate().map_err(|e| invalid(e.to_string()))?;
            if !(forcing.gravity_g > 0.0) {
                return Err(invalid("physics fidelity needs gravity"));
            }
            if self.medium.delta_beta() == 0.0 {
                return Err(invalid("slip coefficients are equal; robots cannot move"));
            }
        }
        if let Optics::Hologram {
            canvas,
            iterations,
            spot_sigma,
            grating,
            ..
        } = &self.optics
        {
            if canvas[0] < 8 || canvas[1] < 8 {
                return Err(invalid("hologram canvas must be at least 8 × 8"));
            }
            if *iterations == 0 {
                return Err(invalid("hologram needs at least one iteration"));
            }
            if !(spot_sigma.is_finite() && *spot_sigma > 0.0) {
                return Err(invalid("spot sigma must be positive"));
            }
            if grating.iter().zip(canvas).any(|(g, n)| !(g.is_finite() && g.abs() <= *n as f64 / 2.0)) {
                return Err(invalid("grating shift must be within half the canvas"));
            }
        }
        Ok(())
    }
}

/// Calibration that maps the arena onto the canvas with a 4 px margin,
/// preserving aspect ratio and flipping y so the arena's +y is up.
pub fn fit_arena_to_canvas(arena: &Arena, canvas: [usize; 2]) -> AffineTransform {
    let margin = 4.0;
    let sx = (canvas[0] as f64 - 1.0 - 2.0 * margin) / arena.width;
    let sy = (canvas[1] as f64 - 1.0 - 2.0 * margin) / arena.height;
    let s = sx.min(sy);
    let ox = (canvas[0] as f64 - 1.0 - s * arena.width) / 2.0;
    let oy = (canvas[1] as f64 - 1.0 + s * arena.height) / 2.0;
    AffineTransform::new([s, 0.0, ox, 0.0, -s, oy]).expect("non-degenerate arena")
}
