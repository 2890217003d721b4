//! Phase-only hologram synthesis and the far-field forward model.
//!
//! Far-field pixel `(u, v)` is DFT bin `(u, v)`: the zero order sits at
//! `(0, 0)` and the plane is periodic.

mod affine;
pub mod fft;
mod gs;
mod image;
mod spots;

pub use affine::{fit_affine, AffineTransform};
pub use gs::{blazed_grating, far_field_intensity, gerchberg_saxton, GsOutcome, GsSolver};
pub use image::{IntensityImage, PhaseMap, TargetImage, PHASE_LEVELS, SLM_HEIGHT, SLM_WIDTH};
pub use spots::{
    delivered_intensity, motor_spots, spot_pattern, MotorSpot, SpotPattern, DEFAULT_SPOT_SIGMA,
};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum HologramError {
    #[error("target image has no light in it")]
    EmptyTarget,
    #[error("at least one iteration is required")]
    NoIterations,
    #[error("image dimensions must be positive and match the pixel buffer")]
    BadDimensions,
    #[error("pixel values must be finite and non-negative")]
    BadPixel,
    #[error("image size {got:?} does not match the solver size {want:?}")]
    SizeMismatch {
        got: (usize, usize),
        want: (usize, usize),
    },
    #[error("grating shift must stay within half the grid")]
    ShiftTooLarge,
    #[error("point lists differ in length")]
    MismatchedPoints,
    #[error("at least three point pairs are required")]
    TooFewPoints,
    #[error("calibration points are collinear")]
    Collinear,
    #[error("affine linear part is singular")]
    Singular,
}
