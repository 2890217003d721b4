use alloc::vec;
use alloc::vec::Vec;

use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NelderMeadOptions {
    /// Spread of objective values across the simplex.
    pub value_tol: f64,
    /// Largest coordinate distance of any vertex from the best one.
    pub diameter_tol: f64,
    pub max_iters: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            value_tol: 1e-8,
            diameter_tol: 1e-6,
            max_iters: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Both the value spread and the simplex diameter fell below tolerance.
    pub converged: bool,
    /// Best value after every iteration.
    pub history: Vec<f64>,
}

/// Minimises `objective` with the Nelder-Mead simplex method.
///
/// The initial simplex perturbs each coordinate of `start` by 10% (0.1 when it
/// is zero). Non-finite objective values count as `+∞`, so the simplex
/// contracts or shrinks away from them.
pub fn nelder_mead(
    mut objective: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    opts: &NelderMeadOptions,
) -> Result<Minimum, FitError> {
    let k = start.len();
    if k == 0 {
        return Err(FitError::InvalidInput("empty start point"));
    }
    if start.iter().any(|v| !v.is_finite()) {
        return Err(FitError::NonFiniteStart);
    }
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let f0 = eval(start);
    if !f0.is_finite() {
        return Err(FitError::NonFiniteStart);
    }

    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut values = vec![f0];
    for i in 0..k {
        let mut v = start.to_vec();
        v[i] = if v[i] != 0.0 { v[i] * 1.1 } else { 0.1 };
        values.push(eval(&v));
        simplex.push(v);
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=k).collect();

    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[k];
        let second = order[k - 1];
        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        if spread <= opts.value_tol && diameter <= opts.diameter_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; k];
        for &i in &order[..k] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / k as f64;
            }
        }
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = toward(alpha);
        let fr = eval(&xr);
        if fr < values[best] {
            let xe = toward(gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            let (xc, fc) = if fr < values[worst] {
                let xc = toward(rho * alpha);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = toward(-rho);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                let anchor = simplex[best].clone();
                for &i in &order[1..] {
                    for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                        *x = a + sigma * (*x - a);
                    }
                    values[i] = eval(&simplex[i]);
                }
            }
        }
        let best_now = values.iter().copied().fold(f64::INFINITY, f64::min);
        history.push(best_now);
    }

    let best = (0..=k).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Ok(Minimum {
        argmin: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
        history,
    })
}
