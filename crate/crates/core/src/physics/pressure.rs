//! Ritz solution of the Reynolds equation under the robot body.
//!
//! In scaled units (`l = μ = 1`) the rigid-body pressure satisfies
//!
//! ```text
//! ∇·(h³ ∇p) / 12 = U + α̇ x / (1 + α²) − V α / 2 =: −S(x)
//! ```
//!
//! with `p = 0` on the body edge, and therefore minimises
//! `⟨h³ |∇p|² / 24 − p S⟩`. The trial space is
//!
//! ```text
//! p(x, y) = Σₙ Σₖ a_{n,k} (y² − W²) (y/W)^{2k} Xₙ(x),   W = w/2
//! ```
//!
//! which vanishes on the edge by construction. The x-modes are the bubbles
//! `(1/4 − x²)` and `x (1/4 − x²)` followed by `sin(nπ(x + 1/2))`, n = 1..N.
//! Sines alone converge like N⁻³ because the exact profile has a non-zero
//! slope at the ends; the bubbles carry that slope. `k = 0` alone is the
//! classic two-term Taylor profile across the width; extra `k` terms let
//! wide bodies flatten the profile. Integrals along x use Gauss-Legendre; the y integrals
//! are polynomial and evaluated exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use super::field::{unit_field, unit_field_slope};
use super::scales::{Dimension, Scales};
use super::{
    FluidMedium, GapState, PhysicsError, Rates, Result, RobotGeometry, COLLAPSE_FRACTION,
    DEFAULT_Y_MODES,
};
use crate::linalg::Lu;
use crate::quadrature::GaussLegendre;

/// Polynomial x-modes ahead of the sines.
pub const BUBBLES: usize = 2;

/// Value and slope of x-mode `n` on the scaled body `x ∈ [−1/2, 1/2]`.
fn x_mode(n: usize, x: f64) -> (f64, f64) {
    let b = 0.25 - x * x;
    match n {
        0 => (b, -2.0 * x),
        1 => (x * b, 0.25 - 3.0 * x * x),
        _ => {
            let k = (n + 1 - BUBBLES) as f64 * PI;
            let (s, c) = (k * (x + 0.5)).sin_cos();
            (s, k * c)
        }
    }
}

/// Mode shapes and their quadrature tables, independent of the gap.
#[derive(Debug, Clone)]
pub struct PressureBasis {
    n_modes: usize,
    y_modes: usize,
    pub(crate) nodes: Vec<f64>,
    pub(crate) weights: Vec<f64>,
    /// x-mode values at each node, row-major [mode][node].
    sin: Vec<f64>,
    /// x-derivative of `sin`.
    dsin: Vec<f64>,
    int_s: Vec<f64>,
    int_xs: Vec<f64>,
    /// ∫ q_k q_j dη, with q_k = (η² − 1) η^{2k} on η ∈ [−1, 1].
    y_mass: Vec<f64>,
    /// ∫ q_k' q_j' dη.
    y_stiff: Vec<f64>,
    /// ∫ q_k dη.
    y_mean: Vec<f64>,
}

impl PressureBasis {
    pub fn new(n_modes: usize, y_modes: usize) -> Result<Self> {
        if n_modes == 0 || y_modes == 0 {
            return Err(PhysicsError::InvalidParameter("mode counts must be at least 1"));
        }
        let nq = (8 * n_modes).max(64);
        let (nodes, weights) = GaussLegendre::new(nq).on_interval(-0.5, 0.5);
        let nx = n_modes + BUBBLES;
        let mut sin = vec![0.0; nx * nq];
        let mut dsin = vec![0.0; nx * nq];
        let mut int_s = vec![0.0; nx];
        let mut int_xs = vec![0.0; nx];
        for n in 0..nx {
            for (q, (&x, &w)) in nodes.iter().zip(&weights).enumerate() {
                let (s, d) = x_mode(n, x);
                sin[n * nq + q] = s;
                dsin[n * nq + q] = d;
                int_s[n] += w * s;
                int_xs[n] += w * x * s;
            }
        }

        let yq = GaussLegendre::new(2 * y_modes + 4);
        let mut y_mass = vec![0.0; y_modes * y_modes];
        let mut y_stiff = vec![0.0; y_modes * y_modes];
        let mut y_mean = vec![0.0; y_modes];
        for (&eta, &w) in yq.nodes.iter().zip(&yq.weights) {
            let q: Vec<f64> = (0..y_modes).map(|k| (eta * eta - 1.0) * eta.powi(2 * k as i32)).collect();
            let dq: Vec<f64> = (0..y_modes)
                .map(|k| {
                    let k = k as i32;
                    let lead = (2 * k + 2) as f64 * eta.powi(2 * k + 1);
                    if k == 0 {
                        lead
                    } else {
                        lead - (2 * k) as f64 * eta.powi(2 * k - 1)
                    }
                })
                .collect();
            for i in 0..y_modes {
                y_mean[i] += w * q[i];
                for j in 0..y_modes {
                    y_mass[i * y_modes + j] += w * q[i] * q[j];
                    y_stiff[i * y_modes + j] += w * dq[i] * dq[j];
                }
            }
        }

        Ok(Self {
            n_modes,
            y_modes,
            nodes,
            weights,
            sin,
            dsin,
            int_s,
            int_xs,
            y_mass,
            y_stiff,
            y_mean,
        })
    }

    /// Sine modes N (the x basis also carries [`BUBBLES`] polynomial modes).
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn y_modes(&self) -> usize {
        self.y_modes
    }

    /// x-modes in total, bubbles included.
    pub fn x_modes(&self) -> usize {
        self.n_modes + BUBBLES
    }

    pub fn unknowns(&self) -> usize {
        self.x_modes() * self.y_modes
    }

    /// Assembles and factors the Ritz system for a scaled gap (`l = 1`).
    pub fn assemble(&self, h_center: f64, alpha: f64, width: f64) -> Result<PressureSystem<'_>> {
        let h_minus = h_center - alpha.abs() / 2.0;
        if !(h_minus > 0.0) || !h_center.is_finite() || !alpha.is_finite() {
            return Err(PhysicsError::GapCollapse {
                h_minus,
                trajectory: Vec::new(),
            });
        }
        let (nm, km) = (self.x_modes(), self.y_modes);
        let nq = self.nodes.len();
        let h3w: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (h_center + alpha * x).powi(3) * w)
            .collect();

        let mut ax = vec![0.0; nm * nm];
        let mut bx = vec![0.0; nm * nm];
        for n in 0..nm {
            for m in n..nm {
                let (mut a, mut b) = (0.0, 0.0);
                for q in 0..nq {
                    a += h3w[q] * self.dsin[n * nq + q] * self.dsin[m * nq + q];
                    b += h3w[q] * self.sin[n * nq + q] * self.sin[m * nq + q];
                }
                ax[n * nm + m] = a;
                ax[m * nm + n] = a;
                bx[n * nm + m] = b;
                bx[m * nm + n] = b;
            }
        }

        let half = width / 2.0;
        // ∫ φ_k φ_j dy = W⁵ G, ∫ φ_k' φ_j' dy = W³ D, ∫ φ_k dy = W³ m
        let (w3, w5) = (half.powi(3), half.powi(5));
        let dim = nm * km;
        let mut k = vec![0.0; dim * dim];
        for n in 0..nm {
            for m in 0..nm {
                for i in 0..km {
                    for j in 0..km {
                        let v = (ax[n * nm + m] * w5 * self.y_mass[i * km + j]
                            + bx[n * nm + m] * w3 * self.y_stiff[i * km + j])
                            / 12.0;
                        k[(n * km + i) * dim + m * km + j] = v;
                    }
                }
            }
        }
        let lu = Lu::factor(k, dim).ok_or(PhysicsError::GapCollapse {
            h_minus,
            trajectory: Vec::new(),
        })?;
        Ok(PressureSystem {
            basis: self,
            lu,
            alpha,
            width,
        })
    }
}

/// Factored Ritz system for one gap configuration.
#[derive(Debug, Clone)]
pub struct PressureSystem<'a> {
    basis: &'a PressureBasis,
    lu: Lu,
    pub(crate) alpha: f64,
    pub(crate) width: f64,
}

impl PressureSystem<'_> {
    pub fn basis(&self) -> &PressureBasis {
        self.basis
    }

    /// Coefficients for the source `S(x_q)` given at every quadrature node.
    pub fn solve_source(&self, source: impl Fn(f64) -> f64) -> Vec<f64> {
        let b = self.basis;
        let (nm, km) = (b.x_modes(), b.y_modes);
        let nq = b.nodes.len();
        let sw: Vec<f64> = b
            .nodes
            .iter()
            .zip(&b.weights)
            .map(|(&x, &w)| w * source(x))
            .collect();
        let w3 = (self.width / 2.0).powi(3);
        let mut rhs = vec![0.0; nm * km];
        for n in 0..nm {
            let proj: f64 = (0..nq).map(|q| b.sin[n * nq + q] * sw[q]).sum();
            for i in 0..km {
                rhs[n * km + i] = w3 * b.y_mean[i] * proj;
            }
        }
        self.lu.solve(&rhs)
    }

    /// Coefficients for rigid-body rates (scaled).
    pub fn solve_rates(&self, rates: Rates) -> Vec<f64> {
        let (alpha, tilt) = (self.alpha, 1.0 / (1.0 + self.alpha * self.alpha));
        self.solve_source(|x| {
            rates.speed_v * alpha / 2.0 - rates.normal_u - rates.alpha_rate * x * tilt
        })
    }

    /// ⟨p⟩ of a coefficient vector.
    pub fn mean(&self, coeffs: &[f64]) -> f64 {
        self.project(coeffs, &self.basis.int_s)
    }

    /// ⟨x p⟩ of a coefficient vector.
    pub fn first_moment(&self, coeffs: &[f64]) -> f64 {
        self.project(coeffs, &self.basis.int_xs)
    }

    fn project(&self, coeffs: &[f64], along_x: &[f64]) -> f64 {
        let b = self.basis;
        let km = b.y_modes;
        let w3 = (self.width / 2.0).powi(3);
        let mut total = 0.0;
        for (n, ix) in along_x.iter().enumerate() {
            for i in 0..km {
                total += coeffs[n * km + i] * b.y_mean[i] * ix;
            }
        }
        total * w3
    }
}

/// Pressure under the robot body.
///
/// `p(x, y) = (y² − (w/2)²) Σₙ Σₖ aₙₖ (2y/w)^{2k} Xₙ(x/l)` with the x-modes of
/// [`PressureBasis`]; the stored coefficients are in Pa/m².
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    coefficients: Vec<f64>,
    n_modes: usize,
    y_modes: usize,
    length: f64,
    width: f64,
    mean: f64,
    first_moment: f64,
    /// Gap the field was solved for.
    pub gap: GapState,
    /// Body rates the field was solved for.
    pub rates: Rates,
}

impl PressureField {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn y_modes(&self) -> usize {
        self.y_modes
    }

    /// Coefficients `a_{n,k}` (Pa/m²) laid out as `n * y_modes + k`, the
    /// [`BUBBLES`] polynomial x-modes first.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Pressure (Pa) at body coordinates `(x, y)`; zero outside the body.
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let half = self.width / 2.0;
        if x.abs() > self.length / 2.0 || y.abs() > half {
            return 0.0;
        }
        let edge = y * y - half * half;
        let eta2 = (y / half).powi(2);
        let mut total = 0.0;
        for n in 0..self.n_modes + BUBBLES {
            let s = x_mode(n, x / self.length).0;
            let mut prof = 1.0;
            for k in 0..self.y_modes {
                total += self.coefficients[n * self.y_modes + k] * prof * s;
                prof *= eta2;
            }
        }
        edge * total
    }

    /// Lift from pressure, ⟨p⟩ (N).
    pub fn mean_force(&self) -> f64 {
        self.mean
    }

    /// Pressure moment about the body centre, ⟨x p⟩ (N·m).
    pub fn first_moment(&self) -> f64 {
        self.first_moment
    }
}

/// Pressure generated by rigid-body motion of the robot.
pub fn solve_pressure(
    gap: GapState,
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    rates: Rates,
    mode_count: usize,
) -> Result<PressureField> {
    solve_pressure_with_slip(gap, geometry, medium, rates, None, mode_count)
}

/// Like [`solve_pressure`], optionally adding the Reynolds source generated by
/// electrokinetic slip on both surfaces for a potential drop `slip_delta_phi`.
///
/// The slip source is `½ (β₊ + β₋) ∂x(h E_x)` plus the normal-slip terms, which
/// cancel because the body is insulating; with `h E_x` constant the whole
/// source is zero up to rounding.
pub fn solve_pressure_with_slip(
    gap: GapState,
    geometry: &RobotGeometry,
    medium: &FluidMedium,
    rates: Rates,
    slip_delta_phi: Option<f64>,
    mode_count: usize,
) -> Result<PressureField> {
    geometry.validate()?;
    medium.validate()?;
    let l = geometry.length_l;
    gap.validate(l)?;
    if gap.h_minus(l) < COLLAPSE_FRACTION * l * 1e-3 {
        return Err(PhysicsError::GapCollapse {
            h_minus: gap.h_minus(l),
            trajectory: Vec::new(),
        });
    }
    let scales = Scales::kinematic(l, medium.viscosity_mu);
    let basis = PressureBasis::new(mode_count, DEFAULT_Y_MODES)?;
    let hc = gap.h_center / l;
    let alpha = gap.alpha;
    let system = basis.assemble(hc, alpha, geometry.aspect_ratio())?;
    let scaled = Rates::new(
        scales.to_scaled(rates.speed_v, Dimension::Velocity),
        scales.to_scaled(rates.normal_u, Dimension::Velocity),
        scales.to_scaled(rates.alpha_rate, Dimension::Rate),
    );
    let slip_sum = match slip_delta_phi {
        // (β₊ + β₋)/2 · Δφ/l in scaled velocity units
        Some(dphi) => {
            (medium.slip_upper + medium.slip_lower) / 2.0 * dphi / l
                / scales.of(Dimension::Velocity)
        }
        None => 0.0,
    };
    let tilt = 1.0 / (1.0 + alpha * alpha);
    let coeffs = system.solve_source(|x| {
        let mech = scaled.speed_v * alpha / 2.0 - scaled.normal_u - scaled.alpha_rate * x * tilt;
        let slip = if slip_sum != 0.0 {
            let h = hc + alpha * x;
            let e = unit_field(hc, alpha, x);
            let de = unit_field_slope(hc, alpha, x);
            // ∂x(h E) plus the normal-slip pair β₊E_z − β₊ α E_x with E_z = α E_x
            -slip_sum * (alpha * e + h * de)
        } else {
            0.0
        };
        mech + slip
    });
    let mean = scales.to_physical(system.mean(&coeffs), Dimension::Force);
    let first_moment = scales.to_physical(system.first_moment(&coeffs), Dimension::Torque);
    let p_scale = scales.of(Dimension::Pressure) / (l * l);
    Ok(PressureField {
        coefficients: coeffs.iter().map(|a| a * p_scale).collect(),
        n_modes: mode_count,
        y_modes: DEFAULT_Y_MODES,
        length: l,
        width: geometry.width_w,
        mean,
        first_moment,
        gap,
        rates,
    })
}
