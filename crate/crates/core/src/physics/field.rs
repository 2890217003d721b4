use alloc::vec::Vec;

use super::{atanh_ratio, ln1p_ratio, GapState, PhysicsError, Result, RobotGeometry};

/// Electric potential and field in the wedge-shaped gap.
///
/// Current conservation in the gap gives `∂x(h ∂x φ) = 0`, so `h E_x` is
/// constant along the body and the potential is logarithmic in `h`. The
/// potential is gauged to vanish at the body centre and falls by `Δφ` from
/// the trailing (x = −l/2) to the leading (x = +l/2) edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapField {
    pub delta_phi: f64,
    pub length: f64,
    pub gap: GapState,
}

impl GapField {
    /// Potential φ(x) (V).
    pub fn phi(&self, x: f64) -> f64 {
        let l = self.length;
        -self.delta_phi * (x / l) * unit_potential_shape(self.gap.h_center / l, self.gap.alpha, x / l)
    }

    /// Axial field E_x(x) = −∂φ/∂x (V/m).
    pub fn e_x(&self, x: f64) -> f64 {
        let l = self.length;
        self.delta_phi / l * unit_field(self.gap.h_center / l, self.gap.alpha, x / l)
    }

    /// Potential and field sampled on `n ≥ 2` evenly spaced points spanning the body.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64, f64)> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let x = self.length * (i as f64 / (n - 1) as f64 - 0.5);
                (x, self.phi(x), self.e_x(x))
            })
            .collect()
    }
}

/// Field profile for gap `gap` and potential drop `delta_phi` across the body.
pub fn gap_potential(gap: GapState, geometry: &RobotGeometry, delta_phi: f64) -> Result<GapField> {
    let l = geometry.length_l;
    if !(l.is_finite() && l > 0.0) {
        return Err(PhysicsError::InvalidParameter("body length must be positive"));
    }
    if !delta_phi.is_finite() {
        return Err(PhysicsError::NonFinite);
    }
    gap.validate(l)?;
    Ok(GapField {
        delta_phi,
        length: l,
        gap,
    })
}

/// `E_x l / Δφ` in length-scaled coordinates (`l = 1`). Integrates to one over
/// [−1/2, 1/2] and tends to one as α → 0.
pub(crate) fn unit_field(h_center: f64, alpha: f64, x: f64) -> f64 {
    let r = alpha / (2.0 * h_center);
    let rel = 1.0 + alpha * x / h_center;
    1.0 / (rel * atanh_ratio(r))
}

/// d/dx of [`unit_field`].
pub(crate) fn unit_field_slope(h_center: f64, alpha: f64, x: f64) -> f64 {
    -alpha * unit_field(h_center, alpha, x) / (h_center + alpha * x)
}

/// `−φ l / (Δφ x)`; tends to one as α → 0.
fn unit_potential_shape(h_center: f64, alpha: f64, x: f64) -> f64 {
    let r = alpha / (2.0 * h_center);
    let u = alpha * x / h_center;
    ln1p_ratio(u) / atanh_ratio(r)
}
