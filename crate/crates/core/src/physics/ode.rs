//! Adaptive linearly-implicit Rosenbrock integrator (the second-order
//! W-method with embedded third-order error estimate used by MATLAB's
//! `ode23s`) for small autonomous stiff systems.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::Lu;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub t_end: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-12,
            initial_step: 1e-3,
            max_step: f64::INFINITY,
            t_end: f64::INFINITY,
            max_steps: 100_000,
        }
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError<E> {
    /// The step budget was exhausted before the observer stopped the run.
    StepBudget { t: f64, y: Vec<f64> },
    /// The step size underflowed, usually after repeated right-hand-side failures.
    StepUnderflow { t: f64, y: Vec<f64> },
    /// The observer aborted with an error.
    Aborted(E),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub t: f64,
    pub y: Vec<f64>,
    pub dydt: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    /// `true` when the observer stopped the run, `false` when `t_end` was reached.
    pub stopped: bool,
}

/// Integrates `y' = f(y)` from `y0`.
///
/// `rhs` may fail (for instance outside the physical domain); failures during
/// a trial step shrink the step. `observe` sees every accepted state and
/// decides whether to continue or abort.
pub fn rosenbrock23<E>(
    mut rhs: impl FnMut(&[f64]) -> core::result::Result<Vec<f64>, E>,
    y0: &[f64],
    opts: &OdeOptions,
    mut observe: impl FnMut(f64, &[f64], &[f64]) -> core::result::Result<Flow, E>,
) -> core::result::Result<OdeSolution, OdeError<E>> {
    let n = y0.len();
    let d = 1.0 / (2.0 + core::f64::consts::SQRT_2);
    let e32 = 6.0 + core::f64::consts::SQRT_2;

    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut f0 = match rhs(&y) {
        Ok(f) => f,
        Err(e) => return Err(OdeError::Aborted(e)),
    };
    match observe(t, &y, &f0) {
        Ok(Flow::Stop) => {
            return Ok(OdeSolution {
                t,
                y,
                dydt: f0,
                steps: 0,
                rejected: 0,
                stopped: true,
            })
        }
        Ok(Flow::Continue) => {}
        Err(e) => return Err(OdeError::Aborted(e)),
    }

    let mut h = opts.initial_step.min(opts.max_step);
    let (mut steps, mut rejected) = (0usize, 0usize);
    let h_floor = 1e-14;

    while steps < opts.max_steps {
        if t >= opts.t_end {
            return Ok(OdeSolution {
                t,
                y,
                dydt: f0,
                steps,
                rejected,
                stopped: false,
            });
        }
        h = h.min(opts.t_end - t).min(opts.max_step);

        // Finite-difference Jacobian.
        let mut jac = vec![0.0; n * n];
        let mut jac_ok = true;
        for j in 0..n {
            let dy = 1e-7 * y[j].abs().max(1e-7);
            let mut yp = y.clone();
            yp[j] += dy;
            match rhs(&yp) {
                Ok(fp) => {
                    for i in 0..n {
                        jac[i * n + j] = (fp[i] - f0[i]) / dy;
                    }
                }
                Err(_) => {
                    jac_ok = false;
                    break;
                }
            }
        }
        if !jac_ok {
            // Jacobian probe left the domain; use the explicit limit.
            jac.iter_mut().for_each(|v| *v = 0.0);
        }

        let attempt = (|| {
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    w[i * n + j] = if i == j { 1.0 } else { 0.0 } - h * d * jac[i * n + j];
                }
            }
            let lu = Lu::factor(w, n)?;
            let k1 = lu.solve(&f0);
            let ymid: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
            let f1 = rhs(&ymid).ok()?;
            let r2: Vec<f64> = (0..n).map(|i| f1[i] - k1[i]).collect();
            let k2: Vec<f64> = lu.solve(&r2).iter().zip(&k1).map(|(a, b)| a + b).collect();
            let ynew: Vec<f64> = (0..n).map(|i| y[i] + h * k2[i]).collect();
            let f2 = rhs(&ynew).ok()?;
            let r3: Vec<f64> = (0..n)
                .map(|i| f2[i] - e32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i]))
                .collect();
            let k3 = lu.solve(&r3);
            let mut err = 0.0_f64;
            for i in 0..n {
                let e = h / 6.0 * (k1[i] - 2.0 * k2[i] + k3[i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                err = err.max((e / sc).abs());
            }
            Some((ynew, f2, err))
        })();

        match attempt {
            Some((ynew, f2, err)) if err.is_finite() && err <= 1.0 => {
                t += h;
                y = ynew;
                f0 = f2;
                steps += 1;
                match observe(t, &y, &f0) {
                    Ok(Flow::Continue) => {}
                    Ok(Flow::Stop) => {
                        return Ok(OdeSolution {
                            t,
                            y,
                            dydt: f0,
                            steps,
                            rejected,
                            stopped: true,
                        })
                    }
                    Err(e) => return Err(OdeError::Aborted(e)),
                }
                let grow = if err > 0.0 { 0.8 * (1.0 / err).powf(1.0 / 3.0) } else { 5.0 };
                h *= grow.clamp(0.2, 5.0);
            }
            Some((_, _, err)) if err.is_finite() => {
                rejected += 1;
                h *= (0.8 * (1.0 / err).powf(1.0 / 3.0)).clamp(0.1, 0.5);
            }
            _ => {
                rejected += 1;
                h *= 0.25;
            }
        }
        if h < h_floor * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, y });
        }
    }
    Err(OdeError::StepBudget { t, y })
}
