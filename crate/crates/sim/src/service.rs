//! HTTP control surface for a live run.
//!
//! The tick loop owns the [`World`]. Handlers only read the last published
//! snapshot and queue commands, which the loop drains at the next tick
//! boundary.

use std::convert::Infallible;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use microswarm_core::control::ControlLaw;
use microswarm_core::Point2;
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, mpsc};

use crate::scenario::{Arena, Program};
use crate::world::{FrameRecord, RobotFrame, World};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub frame: u64,
    pub time_s: f64,
    pub paused: bool,
    pub complete: bool,
    pub arena: Arena,
    pub robots: Vec<RobotFrame>,
    pub gs_error: Option<f64>,
    pub program: Program,
}

impl Snapshot {
    fn new(world: &World, record: Option<&FrameRecord>, paused: bool) -> Self {
        let robots = match record {
            Some(r) => r.robots.clone(),
            None => world
                .poses()
                .into_iter()
                .enumerate()
                .map(|(id, pose)| RobotFrame {
                    id,
                    pose,
                    detected: pose,
                    theta: None,
                    command: Default::default(),
                    delivered: Default::default(),
                    halt: false,
                    target: None,
                    reached: 0,
                })
                .collect(),
        };
        Self {
            frame: record.map_or(0, |r| r.frame),
            time_s: record.map_or(0.0, |r| r.time_s),
            paused,
            complete: world.is_complete(),
            arena: world.scenario().arena,
            robots,
            gs_error: record.and_then(|r| r.gs_error),
            program: world.program().clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointRequest {
    /// Append to this robot's plan; without it the points become a shared
    /// pool handed out by nearest assignment.
    #[serde(default)]
    pub robot_id: Option<usize>,
    pub points: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ParamsRequest {
    /// Misalignment threshold of the active controller (rad).
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub intensity_scale: Option<f64>,
    /// Replaces the controller outright (applied before `threshold`).
    #[serde(default)]
    pub controller: Option<ControlLaw>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Waypoints(WaypointRequest),
    Program(Program),
    Params(ParamsRequest),
    Pause,
    Resume,
}

struct Shared {
    snapshot: RwLock<Arc<Snapshot>>,
    commands: mpsc::UnboundedSender<Command>,
    frames: broadcast::Sender<Arc<str>>,
    robots: usize,
    arena: Arena,
    controller: ControlLaw,
}

/// Handle given to the HTTP layer.
#[derive(Clone)]
pub struct ServiceState(Arc<Shared>);

/// The loop side: owns the world and applies queued commands.
pub struct Engine {
    world: World,
    commands: mpsc::UnboundedReceiver<Command>,
    shared: Arc<Shared>,
    paused: bool,
    last: Option<FrameRecord>,
}

pub fn engine(world: World) -> (Engine, ServiceState) {
    let (tx, rx) = mpsc::unbounded_channel();
    let (frames, _) = broadcast::channel(64);
    let shared = Arc::new(Shared {
        snapshot: RwLock::new(Arc::new(Snapshot::new(&world, None, false))),
        commands: tx,
        frames,
        robots: world.scenario().robots.len(),
        arena: world.scenario().arena,
        controller: world.scenario().controller,
    });
    let engine = Engine {
        world,
        commands: rx,
        shared: shared.clone(),
        paused: false,
        last: None,
    };
    (engine, ServiceState(shared))
}

fn with_threshold(law: ControlLaw, threshold: f64) -> ControlLaw {
    match law {
        ControlLaw::Dual(mut p) => {
            p.threshold = threshold;
            ControlLaw::Dual(p)
        }
        ControlLaw::Proportional(mut p) => {
            p.threshold = threshold;
            ControlLaw::Proportional(p)
        }
    }
}

impl Engine {
    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    fn apply(&mut self, cmd: Command) {
        // requests were validated on arrival; anything still rejected here
        // (e.g. a race with another request) is dropped
        let _ = match cmd {
            Command::Pause => {
                self.paused = true;
                Ok(())
            }
            Command::Resume => {
                self.paused = false;
                Ok(())
            }
            Command::Program(p) => self.world.set_program(p),
            Command::Waypoints(req) => match req.robot_id {
                Some(id) => self.world.append_waypoints(id, &req.points),
                None => {
                    let radius = self.world.program().arrival_radius();
                    self.world.set_program(Program::Assign {
                        waypoints: req.points,
                        arrival_radius: radius,
                        gate: self.world.program().gate(),
                    })
                }
            },
            Command::Params(p) => {
                let mut law = p.controller.unwrap_or(self.world.scenario().controller);
                if let Some(t) = p.threshold {
                    law = with_threshold(law, t);
                }
                self.world
                    .set_controller(law)
                    .and_then(|_| p.intensity_scale.map_or(Ok(()), |s| self.world.set_intensity_scale(s)))
            }
        };
    }

    /// Drains the command queue, ticks unless paused and publishes the
    /// snapshot. Returns the new record, if a tick ran.
    pub fn step(&mut self) -> Option<FrameRecord> {
        while let Ok(cmd) = self.commands.try_recv() {
            self.apply(cmd);
        }
        let record = (!self.paused).then(|| self.world.tick());
        if record.is_some() {
            self.last = record.clone();
        }
        let snap = Arc::new(Snapshot::new(&self.world, self.last.as_ref(), self.paused));
        let json: Arc<str> = serde_json::to_string(&*snap).expect("snapshot serialises").into();
        *self.shared.snapshot.write().expect("snapshot lock") = snap;
        // nobody listening is fine
        let _ = self.shared.frames.send(json);
        record
    }

    /// Ticks in real time at the scenario frame rate until the process ends.
    pub fn run_realtime(mut self) {
        let period = Duration::from_secs_f64(self.world.scenario().frame_period());
        let mut next = Instant::now();
        loop {
            self.step();
            next += period;
            match next.checked_duration_since(Instant::now()) {
                Some(wait) => std::thread::sleep(wait),
                None => next = Instant::now(),
            }
        }
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

impl ServiceState {
    fn enqueue(&self, cmd: Command) -> Result<impl IntoResponse, ApiError> {
        self.0
            .commands
            .send(cmd)
            .map_err(|_| ApiError(StatusCode::SERVICE_UNAVAILABLE, "simulation has stopped".into()))?;
        let frame = self.0.snapshot.read().expect("snapshot lock").frame;
        Ok((
            StatusCode::ACCEPTED,
            Json(serde_json::json!({ "queued": true, "after_frame": frame })),
        ))
    }
}

async fn get_state(State(s): State<ServiceState>) -> Json<Snapshot> {
    Json((*s.0.snapshot.read().expect("snapshot lock").clone()).clone())
}

async fn get_stream(State(s): State<ServiceState>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = s.0.frames.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(json) => return Some((Ok(Event::default().event("frame").data(&*json)), rx)),
                // a slow client skips frames rather than stalling the loop
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

async fn post_waypoints(
    State(s): State<ServiceState>,
    Json(req): Json<WaypointRequest>,
) -> Result<impl IntoResponse, ApiError> {
    if req.points.is_empty() {
        return Err(bad("no points given"));
    }
    if let Some(id) = req.robot_id {
        if id >= s.0.robots {
            return Err(bad(format!("no robot {id}")));
        }
    }
    if let Some(p) = req.points.iter().find(|p| !(p.is_finite() && s.0.arena.contains(**p))) {
        return Err(bad(format!("point ({}, {}) lies outside the arena", p.x, p.y)));
    }
    s.enqueue(Command::Waypoints(req))
}

async fn post_program(State(s): State<ServiceState>, Json(p): Json<Program>) -> Result<impl IntoResponse, ApiError> {
    p.validate(s.0.robots, &s.0.arena).map_err(|e| bad(e.to_string()))?;
    s.enqueue(Command::Program(p))
}

async fn post_params(
    State(s): State<ServiceState>,
    Json(p): Json<ParamsRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let mut law = p.controller.unwrap_or(s.0.controller);
    if let Some(t) = p.threshold {
        law = with_threshold(law, t);
    }
    law.validate().map_err(|e| bad(e.to_string()))?;
    if let Some(k) = p.intensity_scale {
        if !(k.is_finite() && k >= 0.0) {
            return Err(bad("intensity scale must be non-negative"));
        }
    }
    s.enqueue(Command::Params(p))
}

async fn post_pause(State(s): State<ServiceState>) -> Result<impl IntoResponse, ApiError> {
    s.enqueue(Command::Pause)
}

async fn post_resume(State(s): State<ServiceState>) -> Result<impl IntoResponse, ApiError> {
    s.enqueue(Command::Resume)
}

pub fn router(state: ServiceState) -> Router {
    Router::new()
        .route("/state", get(get_state))
        .route("/stream", get(get_stream))
        .route("/waypoints", post(post_waypoints))
        .route("/program", post(post_program))
        .route("/params", post(post_params))
        .route("/pause", post(post_pause))
        .route("/resume", post(post_resume))
        .with_state(state)
}

/// Serves `world` on `addr` with the loop running on its own thread.
pub async fn serve(world: World, addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let (engine, state) = engine(world);
    std::thread::spawn(move || engine.run_realtime());
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
