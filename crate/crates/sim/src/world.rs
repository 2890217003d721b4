//! The closed loop: detect, decide, project light, move.

use microswarm_core::control::{advance_waypoint, misalignment, ControlLaw, ControlState, WaypointPlan};
use microswarm_core::holography::{
    blazed_grating, delivered_intensity, motor_spots, spot_pattern, AffineTransform, GsSolver, PhaseMap,
};
use microswarm_core::kinematics::{
    body_speed, curvature, motor_speeds, motor_speeds_with, step_pose, MotorCommand, RobotPose,
};
use microswarm_core::physics::steady_curve;
use microswarm_core::swarm::{assign_nearest, follow_targets, proximity_gate, FollowSpec, GateParams};
use microswarm_core::Point2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::detect;
use crate::scenario::{fit_arena_to_canvas, Fidelity, Optics, Program, Scenario, ScenarioError};

/// One robot in one frame.
///
/// `pose`, `detected`, `theta`, `command` and `halt` describe the capture at
/// this frame. `delivered` is the light the robot actually received while
/// moving into this pose, which came from the previous frame's hologram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotFrame {
    pub id: usize,
    pub pose: RobotPose,
    pub detected: RobotPose,
    pub theta: Option<f64>,
    pub command: MotorCommand,
    pub delivered: MotorCommand,
    pub halt: bool,
    pub target: Option<Point2>,
    /// Waypoints reached so far.
    pub reached: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u64,
    pub time_s: f64,
    pub robots: Vec<RobotFrame>,
    /// Final error of the hologram computed this frame (none when dark or
    /// optics are ideal).
    pub gs_error: Option<f64>,
}

/// Speed as a function of effective intensity, from a steady glide sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedMap {
    intensity: Vec<f64>,
    speed: Vec<f64>,
}

impl SpeedMap {
    /// Sweeps effective intensity over `(0, 2]` (enough for any crosstalk
    /// below one) with `delta_phi_full` volts per unit intensity.
    pub fn from_physics(
        spec: &crate::scenario::RobotSpec,
        medium: &microswarm_core::physics::FluidMedium,
        forcing: &microswarm_core::physics::Forcing,
        delta_phi_full: f64,
        samples: usize,
    ) -> Result<Self, ScenarioError> {
        let intensity: Vec<f64> = (1..=samples).map(|i| 2.0 * i as f64 / samples as f64).collect();
        let dphis: Vec<f64> = intensity.iter().map(|i| i * delta_phi_full).collect();
        let rows = steady_curve(&spec.geometry, medium, forcing, &dphis)
            .map_err(|e| ScenarioError::Invalid(format!("physics lookup: {e}")))?;
        let mut speed = vec![0.0];
        for r in rows {
            let s = r
                .steady
                .map_err(|e| ScenarioError::Invalid(format!("physics lookup at {} V: {e}", r.delta_phi)))?;
            speed.push(s.speed_v.abs());
        }
        let mut xs = vec![0.0];
        xs.extend(intensity);
        Ok(Self { intensity: xs, speed })
    }

    /// Piecewise-linear lookup, clamped at both ends.
    pub fn speed(&self, i: f64) -> f64 {
        let xs = &self.intensity;
        if !(i > 0.0) {
            return 0.0;
        }
        if i >= xs[xs.len() - 1] {
            return self.speed[xs.len() - 1];
        }
        let k = xs.partition_point(|&x| x <= i);
        let (x0, x1) = (xs[k - 1], xs[k]);
        let t = (i - x0) / (x1 - x0);
        self.speed[k - 1] * (1.0 - t) + self.speed[k] * t
    }
}

struct Hologram {
    solver: GsSolver,
    iterations: usize,
    sigma: f64,
    calibration: AffineTransform,
    grating: [f64; 2],
    phase: Option<PhaseMap>,
}

impl Hologram {
    /// Computes this frame's hologram from the detected poses and returns
    /// the light it delivers at the true motor positions.
    fn illuminate(
        &mut self,
        detected: &[RobotPose],
        truth: &[RobotPose],
        deltas: &[f64],
        commands: &[MotorCommand],
        seed: u64,
    ) -> (Vec<MotorCommand>, Option<f64>) {
        let (w, h) = self.solver.size();
        let spots: Vec<_> = detected
            .iter()
            .zip(deltas)
            .zip(commands)
            .flat_map(|((p, d), c)| motor_spots(std::slice::from_ref(p), *d, std::slice::from_ref(c)))
            .collect();
        let pattern = spot_pattern(&spots, &self.calibration, w, h, self.sigma);
        if pattern.target.is_dark() {
            return (vec![MotorCommand::OFF; truth.len()], None);
        }
        let outcome = match &self.phase {
            Some(prev) => self.solver.run_from(&pattern.target, self.iterations, prev),
            None => self.solver.run(&pattern.target, self.iterations, seed),
        }
        .expect("canvas sizes match and target is lit");
        let steered = blazed_grating(&outcome.phase, self.grating[0], self.grating[1]).expect("grating validated");
        let far = self.solver.far_field(&steered).expect("canvas sizes match");
        let power = pattern.target.power();
        let sample = |p: Point2| {
            let c = self.calibration.apply(p);
            let at = Point2::new(
                (c.x + self.grating[0]).rem_euclid(w as f64),
                (c.y + self.grating[1]).rem_euclid(h as f64),
            );
            delivered_intensity(&far, power, at, self.sigma)
        };
        let delivered = truth
            .iter()
            .zip(deltas)
            .map(|(pose, d)| {
                let (l, r) = pose.motor_positions(*d);
                MotorCommand::new(sample(l), sample(r))
            })
            .collect();
        let error = outcome.errors.last().copied();
        self.phase = Some(outcome.phase);
        (delivered, error)
    }
}

/// Per-robot targets derived from the active program.
#[derive(Debug, Clone, PartialEq)]
enum Targets {
    Idle,
    /// Fixed per-robot plans; the cursor lives in the control state.
    Plans(Vec<Option<WaypointPlan>>),
    /// Shared pool; `claimed[w]` is set once a robot has arrived at `w`.
    Pool {
        waypoints: Vec<Point2>,
        claimed: Vec<bool>,
        assigned: Vec<Option<usize>>,
    },
    Follow {
        spec: FollowSpec,
        plans: Vec<Option<WaypointPlan>>,
    },
}

fn build_plans(plans: &[Vec<Point2>], robots: usize, radius: f64) -> Vec<Option<WaypointPlan>> {
    (0..robots)
        .map(|i| {
            plans
                .get(i)
                .filter(|p| !p.is_empty())
                .map(|p| WaypointPlan::new(p.clone(), radius).expect("validated plan"))
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Robot {
    pose: RobotPose,
    control: ControlState,
    /// Left the arena; stays halted for the rest of the run.
    escaped: bool,
    halted: bool,
    done: bool,
    reached: usize,
    arrivals: Vec<f64>,
    delivered: MotorCommand,
    last_target: Option<Point2>,
}

/// Live simulation state. The tick loop is its only writer.
pub struct World {
    scenario: Scenario,
    frame: u64,
    robots: Vec<Robot>,
    targets: Targets,
    program: Program,
    gate: Option<GateParams>,
    rng: ChaCha8Rng,
    hologram: Option<Hologram>,
    speed_maps: Vec<Option<SpeedMap>>,
    intensity_scale: f64,
    /// Test hook: when set, every robot's command is replaced by this.
    forced: Option<MotorCommand>,
}

impl World {
    pub fn new(scenario: Scenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let hologram = match scenario.optics {
            Optics::Ideal => None,
            Optics::Hologram {
                canvas,
                iterations,
                spot_sigma,
                calibration,
                grating,
            } => Some(Hologram {
                solver: GsSolver::new(canvas[0], canvas[1]),
                iterations,
                sigma: spot_sigma,
                calibration: calibration.unwrap_or_else(|| fit_arena_to_canvas(&scenario.arena, canvas)),
                grating,
                phase: None,
            }),
        };
        let speed_maps = match scenario.fidelity {
            Fidelity::Kinematic => vec![None; scenario.robots.len()],
            Fidelity::Physics {
                delta_phi_full,
                samples,
                forcing,
            } => {
                let mut maps: Vec<Option<SpeedMap>> = Vec::new();
                for (i, r) in scenario.robots.iter().enumerate() {
                    // robots sharing a body share a lookup
                    let same = scenario.robots[..i].iter().position(|o| o.geometry == r.geometry);
                    maps.push(Some(match same {
                        Some(j) => maps[j].clone().expect("built above"),
                        None => SpeedMap::from_physics(r, &scenario.medium, &forcing, delta_phi_full, samples)?,
                    }));
                }
                maps
            }
        };
        let robots = scenario
            .robots
            .iter()
            .map(|r| Robot {
                pose: r.pose,
                control: ControlState::default(),
                escaped: false,
                halted: false,
                done: false,
                reached: 0,
                arrivals: Vec::new(),
                delivered: MotorCommand::OFF,
                last_target: None,
            })
            .collect();
        let mut world = Self {
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            frame: 0,
            robots,
            targets: Targets::Idle,
            program: Program::Idle,
            gate: None,
            hologram,
            speed_maps,
            intensity_scale: 1.0,
            forced: None,
            scenario,
        };
        let program = world.scenario.program.clone();
        world.set_program(program).expect("validated with the scenario");
        Ok(world)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn frame(&self) -> u64 {
        self.frame
    }

    pub fn time(&self) -> f64 {
        self.frame as f64 / self.scenario.frame_rate
    }

    pub fn poses(&self) -> Vec<RobotPose> {
        self.robots.iter().map(|r| r.pose).collect()
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Arrival times (s) of every robot, in order.
    pub fn arrivals(&self) -> Vec<Vec<f64>> {
        self.robots.iter().map(|r| r.arrivals.clone()).collect()
    }

    pub fn intensity_scale(&self) -> f64 {
        self.intensity_scale
    }

    pub fn set_intensity_scale(&mut self, scale: f64) -> Result<(), ScenarioError> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(ScenarioError::Invalid("intensity scale must be non-negative".into()));
        }
        self.intensity_scale = scale;
        Ok(())
    }

    pub fn set_controller(&mut self, law: ControlLaw) -> Result<(), ScenarioError> {
        law.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.scenario.controller = law;
        Ok(())
    }

    /// Replaces every robot's command (`None` restores the controllers).
    pub fn force_commands(&mut self, cmd: Option<MotorCommand>) {
        self.forced = cmd;
    }

    /// Switches program; progress and controller memory start afresh.
    pub fn set_program(&mut self, program: Program) -> Result<(), ScenarioError> {
        program.validate(self.robots.len(), &self.scenario.arena)?;
        let n = self.robots.len();
        let radius = program.arrival_radius();
        self.targets = match &program {
            Program::Idle => Targets::Idle,
            Program::Waypoints { plans, .. } => Targets::Plans(build_plans(plans, n, radius)),
            Program::Assign { waypoints, .. } => Targets::Pool {
                claimed: vec![false; waypoints.len()],
                waypoints: waypoints.clone(),
                assigned: vec![None; n],
            },
            Program::Shape { preset, .. } => {
                let waypoints = preset.waypoints();
                Targets::Pool {
                    claimed: vec![false; waypoints.len()],
                    waypoints,
                    assigned: vec![None; n],
                }
            }
            Program::Follow { follow, plans, .. } => Targets::Follow {
                spec: follow.clone(),
                plans: build_plans(plans, n, radius),
            },
        };
        self.gate = program.gate();
        for r in &mut self.robots {
            r.control = ControlState::default();
            r.done = false;
            r.reached = 0;
            r.last_target = None;
        }
        self.program = program;
        Ok(())
    }

    /// Appends waypoints to one robot's plan, turning the program into
    /// per-robot plans if it was not already.
    pub fn append_waypoints(&mut self, robot: usize, points: &[Point2]) -> Result<(), ScenarioError> {
        if robot >= self.robots.len() {
            return Err(ScenarioError::Invalid(format!("no robot {robot}")));
        }
        let radius = self.program.arrival_radius();
        let mut plans: Vec<Vec<Point2>> = match &self.program {
            Program::Waypoints { plans, .. } => plans.clone(),
            _ => Vec::new(),
        };
        plans.resize(self.robots.len(), Vec::new());
        let cursor: Vec<usize> = self.robots.iter().map(|r| r.control.current_waypoint_index).collect();
        // drop what has been reached so cursors restart at zero
        let keep_progress = matches!(self.program, Program::Waypoints { .. });
        for (i, p) in plans.iter_mut().enumerate() {
            if keep_progress {
                p.drain(..cursor[i].min(p.len()));
            }
        }
        plans[robot].extend_from_slice(points);
        let gate = self.gate;
        let reached: Vec<usize> = self.robots.iter().map(|r| r.reached).collect();
        let arrivals: Vec<Vec<f64>> = self.robots.iter().map(|r| r.arrivals.clone()).collect();
        self.set_program(Program::Waypoints {
            plans,
            arrival_radius: radius,
            gate,
        })?;
        for (r, (n, a)) in self.robots.iter_mut().zip(reached.into_iter().zip(arrivals)) {
            r.reached = n;
            r.arrivals = a;
        }
        Ok(())
    }

    /// All targets reached (never true for idle or follower-only programs).
    pub fn is_complete(&self) -> bool {
        match &self.targets {
            Targets::Idle => false,
            Targets::Plans(plans) | Targets::Follow { plans, .. } => {
                plans.iter().any(Option::is_some)
                    && plans
                        .iter()
                        .zip(&self.robots)
                        .all(|(p, r)| p.is_none() || r.done || r.escaped)
            }
            Targets::Pool { claimed, .. } => {
                let free = self.robots.iter().filter(|r| !r.done && !r.escaped).count();
                claimed.iter().all(|&c| c) || free == 0
            }
        }
    }

    /// Current goal of each robot given the detections, updating plan and
    /// assignment progress.
    fn goals(&mut self, detected: &[RobotPose]) -> Vec<Option<Point2>> {
        let time = self.time();
        let n = self.robots.len();
        let radius = self.program.arrival_radius();
        match &mut self.targets {
            Targets::Idle => vec![None; n],
            Targets::Plans(plans) => plan_goals(plans, &mut self.robots, detected, time),
            Targets::Follow { spec, plans } => {
                let follow = follow_targets(detected, spec);
                let mut goals = plan_goals(plans, &mut self.robots, detected, time);
                for (i, f) in follow.into_iter().enumerate() {
                    if let Some(t) = f {
                        // followers hold once they sit on their mark
                        goals[i] = (detected[i].position().dist(t) >= radius).then_some(t);
                    }
                }
                goals
            }
            Targets::Pool {
                waypoints,
                claimed,
                assigned,
            } => {
                // robots that reached their waypoint claim it for good
                for (i, r) in self.robots.iter_mut().enumerate() {
                    if let Some(w) = assigned[i] {
                        if !r.done && detected[i].position().dist(waypoints[w]) < radius {
                            claimed[w] = true;
                            r.done = true;
                            r.reached += 1;
                            r.arrivals.push(time);
                        }
                    }
                }
                let free_r: Vec<usize> = (0..n).filter(|&i| !self.robots[i].done && !self.robots[i].escaped).collect();
                let free_w: Vec<usize> = (0..waypoints.len()).filter(|&w| !claimed[w]).collect();
                let a = assign_nearest(
                    &free_r.iter().map(|&i| detected[i].position()).collect::<Vec<_>>(),
                    &free_w.iter().map(|&w| waypoints[w]).collect::<Vec<_>>(),
                );
                for (i, slot) in assigned.iter_mut().enumerate() {
                    if !self.robots[i].done {
                        *slot = None;
                    }
                }
                for (ri, wi) in a.pairs {
                    assigned[free_r[ri]] = Some(free_w[wi]);
                }
                assigned
                    .iter()
                    .zip(&self.robots)
                    .map(|(a, r)| if r.done { None } else { a.map(|w| waypoints[w]) })
                    .collect()
            }
        }
    }

    /// Advances one frame and returns its record.
    pub fn tick(&mut self) -> FrameRecord {
        let n = self.robots.len();
        let dt = self.scenario.frame_period();
        let truth = self.poses();
        let deltas: Vec<f64> = self.scenario.robots.iter().map(|r| r.drive.half_separation_delta).collect();
        let detected = detect(&truth, &deltas, self.scenario.detection.noise_sigma, &mut self.rng);

        let goals = self.goals(&detected);
        let law = self.scenario.controller;
        let radius = self.program.arrival_radius();
        let mut thetas = vec![None; n];
        let mut commands = vec![MotorCommand::OFF; n];
        for i in 0..n {
            let r = &mut self.robots[i];
            // a moving mark (follow) is the same goal; a jump is a new one
            let fresh = match (goals[i], r.last_target) {
                (Some(a), Some(b)) => a.dist(b) > radius,
                (a, b) => a.is_some() != b.is_some(),
            };
            if fresh {
                r.control.reset_history();
            }
            r.last_target = goals[i];
            if let Some(g) = goals[i] {
                if let Ok(theta) = misalignment(&detected[i], g) {
                    thetas[i] = Some(theta);
                    commands[i] = law.command(&mut r.control, theta);
                }
            }
        }

        if let Some(gate) = &self.gate {
            let before: Vec<bool> = self.robots.iter().map(|r| r.halted).collect();
            let halted = proximity_gate(&detected, gate, self.program.follow(), &before);
            for (r, h) in self.robots.iter_mut().zip(halted) {
                r.halted = h;
            }
        } else {
            self.robots.iter_mut().for_each(|r| r.halted = false);
        }
        for (i, r) in self.robots.iter().enumerate() {
            if r.halted || r.escaped {
                commands[i] = MotorCommand::OFF;
            }
        }
        if let Some(f) = self.forced {
            commands = vec![f; n];
        }
        let lit: Vec<MotorCommand> = commands.iter().map(|c| c.scaled(self.intensity_scale)).collect();

        // light computed now acts over the coming interval
        let seed = self.scenario.seed ^ self.frame;
        let (delivered, gs_error) = match &mut self.hologram {
            Some(h) => h.illuminate(&detected, &truth, &deltas, &lit, seed),
            None => (lit.clone(), None),
        };

        let record = FrameRecord {
            frame: self.frame,
            time_s: self.time(),
            robots: (0..n)
                .map(|i| RobotFrame {
                    id: i,
                    pose: truth[i],
                    detected: detected[i],
                    theta: thetas[i],
                    command: commands[i],
                    delivered: self.robots[i].delivered,
                    halt: self.robots[i].halted || self.robots[i].escaped,
                    target: goals[i],
                    reached: self.robots[i].reached,
                })
                .collect(),
            gs_error,
        };

        for i in 0..n {
            let r = &mut self.robots[i];
            r.delivered = delivered[i];
            if r.escaped {
                continue;
            }
            let spec = &self.scenario.robots[i];
            let (vl, vr) = match &self.speed_maps[i] {
                Some(map) => motor_speeds_with(delivered[i], spec.drive.crosstalk_s, |e| {
                    map.speed(e).min(spec.drive.v_saturation)
                }),
                None => motor_speeds(delivered[i], &spec.drive),
            };
            if let Ok(k) = curvature(vl, vr, spec.drive.half_separation_delta) {
                let next = step_pose(r.pose, body_speed(vl, vr), k, dt);
                if self.scenario.arena.contains(next.position()) {
                    r.pose = next;
                } else {
                    r.escaped = true;
                }
            }
        }
        self.frame += 1;
        record
    }
}

fn plan_goals(
    plans: &[Option<WaypointPlan>],
    robots: &mut [Robot],
    detected: &[RobotPose],
    time: f64,
) -> Vec<Option<Point2>> {
    plans
        .iter()
        .zip(robots.iter_mut())
        .zip(detected)
        .map(|((plan, r), pose)| {
            let plan = plan.as_ref()?;
            if r.done {
                return None;
            }
            let p = advance_waypoint(plan, r.control.current_waypoint_index, pose);
            if p.advanced {
                r.reached += 1;
                r.arrivals.push(time);
            }
            r.control.current_waypoint_index = p.index;
            if p.complete {
                r.done = true;
                return None;
            }
            Some(plan.waypoints()[p.index])
        })
        .collect()
}

/// Runs until the program completes or `max_frames` frames have been
/// recorded; the completing frame is included.
pub fn run(world: &mut World, max_frames: u64) -> Vec<FrameRecord> {
    let mut out = Vec::new();
    while (out.len() as u64) < max_frames {
        out.push(world.tick());
        if world.is_complete() {
            break;
        }
    }
    out
}
