use alloc::vec::Vec;

use num_traits::Float;

use super::affine::AffineTransform;
use super::image::{IntensityImage, TargetImage};
use crate::geom::Point2;
use crate::kinematics::{MotorCommand, RobotPose};

/// Gaussian σ of a rendered spot, in canvas pixels.
pub const DEFAULT_SPOT_SIGMA: f64 = 2.0;

/// Light requested on one motor, in arena coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorSpot {
    pub position: Point2,
    /// Normalised [0, 1].
    pub intensity: f64,
}

/// Two spots per robot, left motor first.
pub fn motor_spots(poses: &[RobotPose], half_separation: f64, commands: &[MotorCommand]) -> Vec<MotorSpot> {
    poses
        .iter()
        .zip(commands)
        .flat_map(|(pose, cmd)| {
            let (l, r) = pose.motor_positions(half_separation);
            [
                MotorSpot {
                    position: l,
                    intensity: cmd.intensity_left,
                },
                MotorSpot {
                    position: r,
                    intensity: cmd.intensity_right,
                },
            ]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpotPattern {
    pub target: TargetImage,
    /// Canvas position of every requested spot, rendered or not.
    pub canvas_positions: Vec<Point2>,
    /// Indices of spots whose centre fell outside the canvas; they are not drawn.
    pub outside: Vec<usize>,
}

/// Renders one Gaussian spot of amplitude `intensity` per lit motor at its
/// calibrated canvas position.
pub fn spot_pattern(
    spots: &[MotorSpot],
    calibration: &AffineTransform,
    width: usize,
    height: usize,
    sigma: f64,
) -> SpotPattern {
    let mut target = TargetImage::zeros(width.max(1), height.max(1));
    let mut canvas_positions = Vec::with_capacity(spots.len());
    let mut outside = Vec::new();
    let reach = (4.0 * sigma).ceil() as i64;
    let inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (i, spot) in spots.iter().enumerate() {
        let c = calibration.apply(spot.position);
        canvas_positions.push(c);
        let inside = c.is_finite()
            && c.x >= 0.0
            && c.y >= 0.0
            && c.x <= (width as f64 - 1.0)
            && c.y <= (height as f64 - 1.0);
        if !inside {
            outside.push(i);
            continue;
        }
        if !(spot.intensity > 0.0) {
            continue;
        }
        let (cx, cy) = (c.x.round() as i64, c.y.round() as i64);
        let amps = target.amplitudes_mut();
        for y in (cy - reach).max(0)..=(cy + reach).min(height as i64 - 1) {
            for x in (cx - reach).max(0)..=(cx + reach).min(width as i64 - 1) {
                let r2 = (x as f64 - c.x).powi(2) + (y as f64 - c.y).powi(2);
                amps[y as usize * width + x as usize] += spot.intensity * (-r2 * inv2s2).exp();
            }
        }
    }
    SpotPattern {
        target,
        canvas_positions,
        outside,
    }
}

/// Intensity delivered to a motor at canvas point `at`, on the commanded scale.
///
/// Compares the 3×3 mean of the normalised far field with what a perfect
/// reconstruction of a unit spot of width `sigma` would give, so a perfect
/// hologram returns exactly the commanded intensity.
pub fn delivered_intensity(far_field: &IntensityImage, target_power: f64, at: Point2, sigma: f64) -> f64 {
    if !(target_power > 0.0) || !at.is_finite() {
        return 0.0;
    }
    let (px, py) = (at.x.round(), at.y.round());
    let mut unit = 0.0;
    for dy in -1..=1 {
        for dx in -1..=1 {
            let r2 = (px + dx as f64 - at.x).powi(2) + (py + dy as f64 - at.y).powi(2);
            unit += (-r2 / (sigma * sigma)).exp();
        }
    }
    unit /= 9.0;
    let measured = far_field.window_mean(at.x, at.y, 1);
    (measured * target_power / unit).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn centroid(t: &TargetImage) -> Point2 {
        let (mut sx, mut sy, mut s) = (0.0, 0.0, 0.0);
        for y in 0..t.height() {
            for x in 0..t.width() {
                let a = t.get(x, y);
                sx += a * x as f64;
                sy += a * y as f64;
                s += a;
            }
        }
        Point2::new(sx / s, sy / s)
    }

    #[test]
    fn no_robots_gives_a_dark_image() {
        let p = spot_pattern(&[], &AffineTransform::IDENTITY, 32, 32, 2.0);
        assert!(p.target.is_dark());
    }

    #[test]
    fn one_lit_motor_gives_one_spot_at_its_position() {
        let pose = RobotPose::new(20.0, 16.0, 0.0);
        let spots = motor_spots(&[pose], 5.0, &[MotorCommand::new(1.0, 0.0)]);
        let p = spot_pattern(&spots, &AffineTransform::IDENTITY, 48, 40, 2.0);
        let c = centroid(&p.target);
        assert!((c - Point2::new(20.0, 21.0)).norm() < 0.5, "{c:?}");
        assert!(p.target.get(20, 11) == 0.0);
        assert!(p.outside.is_empty());
    }

    #[test]
    fn calibrated_centroid_is_subpixel_exact() {
        let cal = AffineTransform::similarity(2.5, 0.3, 10.0, 4.0).unwrap();
        let spot = MotorSpot {
            position: Point2::new(11.3, 7.9),
            intensity: 0.7,
        };
        let p = spot_pattern(&[spot], &cal, 96, 80, 2.0);
        let want = cal.apply(spot.position);
        assert!((centroid(&p.target) - want).norm() < 0.5);
    }

    #[test]
    fn off_canvas_spots_are_reported_not_drawn() {
        let spots = vec![
            MotorSpot {
                position: Point2::new(-3.0, 5.0),
                intensity: 1.0,
            },
            MotorSpot {
                position: Point2::new(5.0, 5.0),
                intensity: 1.0,
            },
        ];
        let p = spot_pattern(&spots, &AffineTransform::IDENTITY, 16, 16, 1.0);
        assert_eq!(p.outside, vec![0]);
        assert!(p.target.get(5, 5) > 0.99);
    }

    #[test]
    fn perfect_far_field_delivers_the_commanded_intensity() {
        let spots = vec![
            MotorSpot {
                position: Point2::new(10.2, 12.0),
                intensity: 0.6,
            },
            MotorSpot {
                position: Point2::new(40.0, 30.7),
                intensity: 0.3,
            },
        ];
        let p = spot_pattern(&spots, &AffineTransform::IDENTITY, 64, 48, 2.0);
        let power = p.target.power();
        let ff = IntensityImage::from_raw(64, 48, p.target.amplitudes().iter().map(|a| a * a / power).collect());
        for s in &spots {
            let got = delivered_intensity(&ff, power, s.position, 2.0);
            assert!((got - s.intensity).abs() < 1e-9, "{got}");
        }
    }
}
