use num_traits::Float;

use super::HologramError;
use crate::geom::Point2;
use crate::linalg::least_squares;

/// `(x, y) ↦ (a x + b y + c, d x + e y + f)`, stored row-major as `[a, b, c, d, e, f]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "[f64; 6]", into = "[f64; 6]"))]
pub struct AffineTransform {
    m: [f64; 6],
}

impl TryFrom<[f64; 6]> for AffineTransform {
    type Error = HologramError;
    fn try_from(m: [f64; 6]) -> Result<Self, HologramError> {
        Self::new(m)
    }
}

impl From<AffineTransform> for [f64; 6] {
    fn from(t: AffineTransform) -> Self {
        t.m
    }
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl AffineTransform {
    pub const IDENTITY: Self = Self {
        m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    };

    pub fn new(m: [f64; 6]) -> Result<Self, HologramError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(HologramError::Singular);
        }
        let t = Self { m };
        let scale = m[0].abs().max(m[1].abs()).max(m[3].abs()).max(m[4].abs());
        if !(t.det().abs() > 1e-14 * scale * scale) {
            return Err(HologramError::Singular);
        }
        Ok(t)
    }

    /// Uniform scale, rotation (rad, counter-clockwise), then translation.
    pub fn similarity(scale: f64, rotation: f64, tx: f64, ty: f64) -> Result<Self, HologramError> {
        let (s, c) = rotation.sin_cos();
        Self::new([scale * c, -scale * s, tx, scale * s, scale * c, ty])
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self {
            m: [1.0, 0.0, tx, 0.0, 1.0, ty],
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.m
    }

    fn det(&self) -> f64 {
        self.m[0] * self.m[4] - self.m[1] * self.m[3]
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let m = &self.m;
        Point2::new(m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5])
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        let d = self.det();
        let (a, b, dd, e) = (m[4] / d, -m[1] / d, -m[3] / d, m[0] / d);
        Self {
            m: [a, b, -(a * m[2] + b * m[5]), dd, e, -(dd * m[2] + e * m[5])],
        }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &Self) -> Self {
        let (a, b) = (&self.m, &first.m);
        Self {
            m: [
                a[0] * b[0] + a[1] * b[3],
                a[0] * b[1] + a[1] * b[4],
                a[0] * b[2] + a[1] * b[5] + a[2],
                a[3] * b[0] + a[4] * b[3],
                a[3] * b[1] + a[4] * b[4],
                a[3] * b[2] + a[4] * b[5] + a[5],
            ],
        }
    }

    /// Root-mean-square distance between mapped `from` points and `to`.
    pub fn rms_residual(&self, from: &[Point2], to: &[Point2]) -> f64 {
        let n = from.len().min(to.len());
        if n == 0 {
            return 0.0;
        }
        let ss: f64 = from.iter().zip(to).map(|(p, q)| (self.apply(*p) - *q).norm().powi(2)).sum();
        (ss / n as f64).sqrt()
    }
}

/// Least-squares affine map taking `from` (SLM) onto `to` (camera).
pub fn fit_affine(from: &[Point2], to: &[Point2]) -> Result<AffineTransform, HologramError> {
    if from.len() != to.len() {
        return Err(HologramError::MismatchedPoints);
    }
    let n = from.len();
    if n < 3 {
        return Err(HologramError::TooFewPoints);
    }
    if from.iter().chain(to).any(|p| !p.is_finite()) {
        return Err(HologramError::Collinear);
    }
    // centre and scale the source points for conditioning
    let mean = from.iter().fold(Point2::default(), |s, p| s + *p) * (1.0 / n as f64);
    let spread = from.iter().map(|p| (*p - mean).norm()).fold(0.0, f64::max);
    if !(spread > 0.0) {
        return Err(HologramError::Collinear);
    }
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let mut rows = alloc::vec::Vec::with_capacity(3 * n);
    for p in from {
        let q = (*p - mean) * (1.0 / spread);
        sxx += q.x * q.x;
        sxy += q.x * q.y;
        syy += q.y * q.y;
        rows.extend_from_slice(&[q.x, q.y, 1.0]);
    }
    // smallest eigenvalue of the scatter matrix relative to the largest
    let tr = sxx + syy;
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    if (tr - disc) <= 1e-10 * (tr + disc) {
        return Err(HologramError::Collinear);
    }
    let xs: alloc::vec::Vec<f64> = to.iter().map(|p| p.x).collect();
    let ys: alloc::vec::Vec<f64> = to.iter().map(|p| p.y).collect();
    let cx = least_squares(&rows, n, 3, &xs).ok_or(HologramError::Collinear)?;
    let cy = least_squares(&rows, n, 3, &ys).ok_or(HologramError::Collinear)?;
    let normalise = AffineTransform {
        m: [1.0 / spread, 0.0, -mean.x / spread, 0.0, 1.0 / spread, -mean.y / spread],
    };
    let fitted = AffineTransform {
        m: [cx[0], cx[1], cx[2], cy[0], cy[1], cy[2]],
    };
    AffineTransform::new(fitted.compose(&normalise).m)
}
