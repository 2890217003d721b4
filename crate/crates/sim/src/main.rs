use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use microswarm::formats::{read_observations, write_steady, Pgm};
use microswarm::scenario::{Arena, RobotSpec, Scenario};
use microswarm::{simulate, World};
use microswarm_core::fitting::{fit_model, FitConfig, ObservationSet};
use microswarm_core::holography::{gerchberg_saxton, PhaseMap, TargetImage};
use microswarm_core::physics::{steady_curve, FluidMedium, Forcing, RobotGeometry};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "microswarm", version, about = "Light-driven microrobot swarm simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write trajectory.csv and summary.json.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Frame cap (defaults to the scenario's max_frames).
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit field scale and torque/shear coefficients to a field,speed,alpha,gap table.
    Fit {
        observations: PathBuf,
        /// JSON with optional `geometry`, `medium` and `gravity_g`.
        #[arg(long)]
        geometry: Option<PathBuf>,
    },
    /// Compute a phase hologram for a target image.
    Hologram {
        target: PathBuf,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        #[arg(long, default_value = "phase.pgm")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Steady glide sweep over potential drops, as CSV on stdout.
    Steady {
        /// JSON with optional `geometry`, `medium` and `forcing`.
        params: PathBuf,
        /// `lo:hi:n` in volts.
        #[arg(long, value_parser = parse_range)]
        dphi_range: (f64, f64, usize),
    },
    /// Serve a live run over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err("expected lo:hi:n".into());
    };
    let lo: f64 = lo.parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("hi: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("n: {e}"))?;
    if n == 0 || !(lo > 0.0) || (n > 1 && !(hi > lo)) {
        return Err("need 0 < lo < hi and n ≥ 1".into());
    }
    Ok((lo, hi, n))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PhysicsFile {
    geometry: Option<RobotGeometry>,
    medium: Option<FluidMedium>,
    forcing: Option<Forcing>,
    gravity_g: Option<f64>,
}

fn read_physics(path: Option<&PathBuf>) -> Result<PhysicsFile> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => Ok(PhysicsFile::default()),
    }
}

fn demo_scenario() -> Scenario {
    let robots = (0..4)
        .map(|i| RobotSpec::at(1e-3 + 0.7e-3 * i as f64, 1e-3, std::f64::consts::FRAC_PI_2))
        .collect();
    Scenario::new(
        Arena {
            width: 4e-3,
            height: 4e-3,
        },
        robots,
    )
}

#[tokio::main]
async fn main() -> Result<()> {
    match Cli::parse().command {
        Cmd::Simulate {
            scenario,
            out,
            frames,
            seed,
        } => {
            let mut s = Scenario::load(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let frames = frames.unwrap_or(s.max_frames);
            let (csv, summary) = tokio::task::spawn_blocking(move || simulate(s, frames)).await??;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("trajectory.csv"), csv)?;
            std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
            eprintln!(
                "{} frames, complete: {}, written to {}",
                summary.frames,
                summary.complete,
                out.display()
            );
        }
        Cmd::Fit { observations, geometry } => {
            let file = read_physics(geometry.as_ref())?;
            let rows = read_observations(std::fs::File::open(&observations)?)?;
            let set = ObservationSet::new(rows)?;
            let config = FitConfig {
                gravity_g: file.gravity_g.unwrap_or(9.81),
                ..Default::default()
            };
            let fit = fit_model(
                &set,
                &file.geometry.unwrap_or_else(RobotGeometry::reference),
                &file.medium.unwrap_or_else(FluidMedium::reference),
                &config,
            )?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
        }
        Cmd::Hologram {
            target,
            iters,
            out,
            seed,
        } => {
            let img = Pgm::load(&target)?;
            let t = TargetImage::from_levels(img.width, img.height, &img.pixels)?;
            if t.is_dark() {
                bail!("target image is completely dark");
            }
            let outcome = gerchberg_saxton(&t, iters, seed)?;
            let phase: &PhaseMap = &outcome.phase;
            Pgm {
                width: phase.width(),
                height: phase.height(),
                pixels: phase.to_levels(),
            }
            .save(&out)?;
            println!(
                "{}",
                serde_json::json!({ "iterations": iters, "errors": outcome.errors, "out": out })
            );
        }
        Cmd::Steady { params, dphi_range } => {
            let file = read_physics(Some(&params))?;
            let (lo, hi, n) = dphi_range;
            let dphis: Vec<f64> = (0..n)
                .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                .collect();
            let rows = steady_curve(
                &file.geometry.unwrap_or_else(RobotGeometry::reference),
                &file.medium.unwrap_or_else(FluidMedium::reference),
                &file.forcing.unwrap_or_else(|| Forcing::reference(lo)),
                &dphis,
            )?;
            for r in &rows {
                if let Err(e) = &r.steady {
                    eprintln!("Δφ = {} V: {e}", r.delta_phi);
                }
            }
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_steady(&mut lock, &rows)?;
            lock.flush()?;
        }
        Cmd::Serve { port, scenario } => {
            let s = match scenario {
                Some(p) => Scenario::load(p)?,
                None => demo_scenario(),
            };
            let world = World::new(s)?;
            microswarm::service::serve(world, ([127, 0, 0, 1], port).into()).await?;
        }
    }
    Ok(())
}
