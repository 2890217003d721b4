//! On-disk formats: trajectory and sweep CSVs, run summaries, observation
//! tables, binary PGM images and calibration transforms.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use microswarm_core::fitting::Observation;
use microswarm_core::holography::AffineTransform;
use microswarm_core::physics::SweepRow;
use serde::{Deserialize, Serialize};

use crate::analysis::{extract_speed, smooth_positions};
use crate::world::FrameRecord;

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "frame",
    "time_s",
    "robot_id",
    "x_m",
    "y_m",
    "heading_rad",
    "theta_rad",
    "i_left",
    "i_right",
    "halt",
];

pub const STEADY_HEADER: [&str; 8] = [
    "delta_phi_V",
    "field_V_per_m",
    "speed_m_per_s",
    "alpha_rad",
    "gap_m",
    "residual_fx",
    "residual_fz",
    "residual_tau",
];

/// One row per robot per frame: true pose, misalignment (blank when the
/// robot has no target) and commanded intensities.
pub fn write_trajectory<W: Write>(out: W, records: &[FrameRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for rec in records {
        for r in &rec.robots {
            w.write_record(&[
                rec.frame.to_string(),
                rec.time_s.to_string(),
                r.id.to_string(),
                r.pose.x.to_string(),
                r.pose.y.to_string(),
                r.pose.heading.to_string(),
                r.theta.map(|t| t.to_string()).unwrap_or_default(),
                r.command.intensity_left.to_string(),
                r.command.intensity_right.to_string(),
                u8::from(r.halt).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Misalignment threshold the summary reports against (15°).
pub const THETA_REPORT_THRESHOLD: f64 = 15.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSummary {
    pub id: usize,
    /// Mean of per-frame speeds of the smoothed detected track (m/s).
    pub mean_speed_m_per_s: Option<f64>,
    pub arrival_times_s: Vec<f64>,
    /// Share of frames with a target in which |θ| was under 15°.
    pub theta_under_threshold_fraction: Option<f64>,
    pub halted_frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsStats {
    pub frames: usize,
    pub mean: f64,
    pub max: f64,
    pub last: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub frames: usize,
    pub duration_s: f64,
    pub complete: bool,
    pub theta_threshold_rad: f64,
    pub robots: Vec<RobotSummary>,
    /// Smallest centre-to-centre distance between any two robots over the run (m).
    pub min_pairwise_distance_m: Option<f64>,
    pub gs_error: Option<GsStats>,
}

/// Smallest distance between two robots in one frame.
pub fn min_pairwise(rec: &FrameRecord) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (i, a) in rec.robots.iter().enumerate() {
        for b in &rec.robots[i + 1..] {
            let d = a.pose.position().dist(b.pose.position());
            best = Some(best.map_or(d, |m: f64| m.min(d)));
        }
    }
    best
}

pub fn summarize(
    records: &[FrameRecord],
    frame_period: f64,
    smoothing_sigma: f64,
    arrivals: &[Vec<f64>],
    complete: bool,
) -> Summary {
    let n = records.first().map_or(0, |r| r.robots.len());
    let robots = (0..n)
        .map(|i| {
            let track: Vec<_> = records.iter().map(|r| r.robots[i].detected.position()).collect();
            let smooth = smooth_positions(&track, smoothing_sigma);
            let thetas: Vec<f64> = records.iter().filter_map(|r| r.robots[i].theta).collect();
            let under = thetas.iter().filter(|t| t.abs() < THETA_REPORT_THRESHOLD).count();
            RobotSummary {
                id: i,
                mean_speed_m_per_s: extract_speed(&smooth, frame_period).ok(),
                arrival_times_s: arrivals.get(i).cloned().unwrap_or_default(),
                theta_under_threshold_fraction: (!thetas.is_empty()).then(|| under as f64 / thetas.len() as f64),
                halted_frames: records.iter().filter(|r| r.robots[i].halt).count(),
            }
        })
        .collect();
    let errors: Vec<f64> = records.iter().filter_map(|r| r.gs_error).collect();
    let gs_error = (!errors.is_empty()).then(|| GsStats {
        frames: errors.len(),
        mean: errors.iter().sum::<f64>() / errors.len() as f64,
        max: errors.iter().copied().fold(f64::MIN, f64::max),
        last: *errors.last().expect("non-empty"),
    });
    Summary {
        frames: records.len(),
        duration_s: records.len() as f64 * frame_period,
        complete,
        theta_threshold_rad: THETA_REPORT_THRESHOLD,
        robots,
        min_pairwise_distance_m: records.iter().filter_map(min_pairwise).reduce(f64::min),
        gs_error,
    }
}

/// Sweep table; failed points keep their input columns and leave the rest blank.
pub fn write_steady<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STEADY_HEADER)?;
    for r in rows {
        let mut rec = vec![r.delta_phi.to_string(), r.field.to_string()];
        match &r.steady {
            Ok(s) => {
                rec.extend([s.speed_v, s.alpha_eq, s.gap_eq].map(|v| v.to_string()));
                rec.extend(s.residuals.map(|v| v.to_string()));
            }
            Err(_) => rec.extend(std::iter::repeat_n(String::new(), 6)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ObservationRow {
    field: f64,
    speed: Option<f64>,
    alpha: Option<f64>,
    gap: Option<f64>,
}

/// Reads a `field,speed,alpha,gap` table; blank cells are missing channels.
pub fn read_observations<R: Read>(input: R) -> Result<Vec<Observation>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    ensure!(
        headers.iter().collect::<Vec<_>>() == ["field", "speed", "alpha", "gap"],
        "observation header must be field,speed,alpha,gap"
    );
    r.deserialize::<ObservationRow>()
        .enumerate()
        .map(|(i, row)| {
            let row = row.with_context(|| format!("observation row {}", i + 1))?;
            Ok(Observation::new(row.field, row.speed, row.alpha, row.gap))
        })
        .collect()
}

/// Binary greyscale image with 8-bit samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

fn pgm_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = String::new();
    loop {
        let mut b = [0u8];
        if r.read(&mut b)? == 0 {
            break;
        }
        match b[0] {
            b'#' if tok.is_empty() => {
                let mut skip = Vec::new();
                r.read_until(b'\n', &mut skip)?;
            }
            c if c.is_ascii_whitespace() => {
                if !tok.is_empty() {
                    break;
                }
            }
            c => tok.push(c as char),
        }
    }
    ensure!(!tok.is_empty(), "truncated PGM header");
    Ok(tok)
}

impl Pgm {
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut r = BufReader::new(input);
        let magic = pgm_token(&mut r)?;
        if magic != "P5" {
            bail!("expected a binary PGM (P5), found {magic:?}");
        }
        let width: usize = pgm_token(&mut r)?.parse().context("PGM width")?;
        let height: usize = pgm_token(&mut r)?.parse().context("PGM height")?;
        let maxval: u32 = pgm_token(&mut r)?.parse().context("PGM maxval")?;
        ensure!(width > 0 && height > 0, "PGM has no pixels");
        ensure!(maxval == 255, "only 8-bit PGM (maxval 255) is supported, got {maxval}");
        let mut pixels = vec![0u8; width * height];
        r.read_exact(&mut pixels).context("PGM pixel data is short")?;
        Ok(Self { width, height, pixels })
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        ensure!(self.pixels.len() == self.width * self.height, "pixel count mismatch");
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read(std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref())?;
        self.write(std::io::BufWriter::new(f))
    }
}

/// Calibration stored as a JSON array `[a, b, c, d, e, f]`.
pub fn read_affine(text: &str) -> Result<AffineTransform> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_affine(t: &AffineTransform) -> String {
    serde_json::to_string(t).expect("six numbers serialise")
}
