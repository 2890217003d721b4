//! Closed-loop simulation runtime around `microswarm-core`: scenario files,
//! the per-frame loop, output formats and the HTTP service.

pub mod analysis;
pub mod formats;
pub mod scenario;
pub mod service;
pub mod world;

pub use scenario::{Arena, Program, RobotSpec, Scenario, ScenarioError};
pub use world::{run, FrameRecord, RobotFrame, World};

/// Runs `scenario` to completion or `max_frames` and returns the trajectory
/// CSV and summary JSON.
pub fn simulate(scenario: Scenario, max_frames: u64) -> anyhow::Result<(Vec<u8>, formats::Summary)> {
    let period = scenario.frame_period();
    let smoothing = scenario.detection.smoothing_sigma;
    let mut world = World::new(scenario)?;
    let records = run(&mut world, max_frames);
    let mut csv = Vec::new();
    formats::write_trajectory(&mut csv, &records)?;
    let summary = formats::summarize(&records, period, smoothing, &world.arrivals(), world.is_complete());
    Ok((csv, summary))
}
