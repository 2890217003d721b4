//! Emulated detection and trajectory post-processing.

use microswarm_core::kinematics::RobotPose;
use microswarm_core::Point2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("speed needs at least two frames, got {0}")]
    TooFewFrames(usize),
    #[error("frame period must be positive")]
    BadPeriod,
}

/// Detected poses: each motor centroid is perturbed independently, the
/// position is their midpoint and the heading is read off the motor axis.
///
/// Per-motor noise is `σ√2` so the detected position carries exactly `σ`.
pub fn detect(truth: &[RobotPose], half_separations: &[f64], sigma: f64, rng: &mut impl Rng) -> Vec<RobotPose> {
    if !(sigma > 0.0) {
        return truth.to_vec();
    }
    let normal = Normal::new(0.0, sigma * std::f64::consts::SQRT_2).expect("finite sigma");
    truth
        .iter()
        .zip(half_separations)
        .map(|(pose, &delta)| {
            let (l, r) = pose.motor_positions(delta);
            let mut jitter = || Point2::new(normal.sample(rng), normal.sample(rng));
            let (l, r) = (l + jitter(), r + jitter());
            let c = (l + r) * 0.5;
            // left sits at heading + 90°
            let axis = l - r;
            RobotPose::new(c.x, c.y, axis.y.atan2(axis.x) - std::f64::consts::FRAC_PI_2)
        })
        .collect()
}

/// Discrete Gaussian of width `sigma` frames, truncated at 4σ and normalised.
fn kernel(sigma: f64) -> Vec<f64> {
    let reach = (4.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * reach)
        .map(|i| {
            let d = i as f64 - reach as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Mirror index into `0..n` (`… c b a | a b c …`).
fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    i = i.rem_euclid(period);
    if i >= n {
        i = period - 1 - i;
    }
    i as usize
}

/// Per-coordinate Gaussian smoothing with reflective ends.
pub fn smooth_positions(trajectory: &[Point2], sigma: f64) -> Vec<Point2> {
    if !(sigma > 0.0) || trajectory.len() < 2 {
        return trajectory.to_vec();
    }
    let k = kernel(sigma);
    let reach = (k.len() / 2) as isize;
    let n = trajectory.len();
    (0..n as isize)
        .map(|t| {
            k.iter().enumerate().fold(Point2::new(0.0, 0.0), |acc, (j, w)| {
                acc + trajectory[reflect(t + j as isize - reach, n)] * *w
            })
        })
        .collect()
}

/// Mean of the per-frame speeds `|Δx| / Δt`.
pub fn extract_speed(trajectory: &[Point2], period: f64) -> Result<f64, AnalysisError> {
    if trajectory.len() < 2 {
        return Err(AnalysisError::TooFewFrames(trajectory.len()));
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(AnalysisError::BadPeriod);
    }
    let total: f64 = trajectory.windows(2).map(|w| w[1].dist(w[0]) / period).sum();
    Ok(total / (trajectory.len() - 1) as f64)
}
