//! Levenberg-Marquardt least squares with analytic Jacobians and box bounds.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the relative decrease of chi^2 falls below this.
    pub ftol: f64,
    /// Stop when the relative parameter step falls below this.
    pub xtol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iter: 500, ftol: 1e-15, xtol: 1e-14, lambda0: 1e-3 }
    }
}

#[derive(Clone, Debug)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// `(J^T W J)^{-1}` scaled by the reduced chi^2.
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl LmFit {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.params.len()).map(|i| self.covariance[(i, i)].max(0.0).sqrt()).collect()
    }
}

/// A model `y(x; p)` that also writes `dy/dp` into `grad`.
pub trait Model {
    fn n_params(&self) -> usize;
    fn eval(&self, p: &[f64], x: f64, grad: &mut [f64]) -> f64;
}

fn chi2<M: Model>(m: &M, p: &[f64], xs: &[f64], ys: &[f64], w: &[f64]) -> f64 {
    let mut g = vec![0.0; m.n_params()];
    xs.iter().zip(ys).zip(w).map(|((&x, &y), &w)| w * (y - m.eval(p, x, &mut g)).powi(2)).sum()
}

fn clamp(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Minimizes `sum w_i (y_i - model(x_i))^2` from `init`, keeping parameters
/// inside `bounds` by projection.
pub fn levenberg_marquardt<M: Model>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    weights: &[f64],
    init: &[f64],
    bounds: &[(f64, f64)],
    opts: LmOptions,
) -> Result<LmFit> {
    let np = model.n_params();
    if init.len() != np || bounds.len() != np {
        return Err(Error::InvalidParams(format!("expected {np} parameters and bounds")));
    }
    if xs.len() != ys.len() || xs.len() != weights.len() {
        return Err(Error::InvalidParams("data and weights differ in length".into()));
    }
    if xs.len() < np {
        return Err(Error::InsufficientData(format!("{} points for {np} parameters", xs.len())));
    }
    if ys.iter().chain(xs).chain(weights).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite data".into()));
    }
    let mut p = init.to_vec();
    clamp(&mut p, bounds);
    let mut lambda = opts.lambda0;
    let mut cost = chi2(model, &p, xs, ys, weights);
    let mut grad = vec![0.0; np];
    let mut converged = false;
    let mut iterations = 0;
    let mut jtj = DMatrix::zeros(np, np);
    for it in 0..opts.max_iter {
        iterations = it + 1;
        jtj.fill(0.0);
        let mut jtr = DVector::zeros(np);
        for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
            let r = y - model.eval(&p, x, &mut grad);
            for i in 0..np {
                jtr[i] += w * grad[i] * r;
                for j in 0..np {
                    jtj[(i, j)] += w * grad[i] * grad[j];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..np {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp(&mut trial, bounds);
            let trial_cost = chi2(model, &trial, xs, ys, weights);
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel_step = p
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
                    .fold(0.0, f64::max);
                let rel_cost = (cost - trial_cost) / cost.max(1e-300);
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if rel_cost < opts.ftol || rel_step < opts.xtol || cost < 1e-300 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No downhill step at any damping: a (local) minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }
    let dof = xs.len().saturating_sub(np).max(1);
    let cov = jtj
        .clone()
        .try_inverse()
        .or_else(|| jtj.pseudo_inverse(1e-14).ok())
        .ok_or_else(|| Error::FitFailure("singular Jacobian".into()))?;
    let covariance = cov * (cost / dof as f64);
    Ok(LmFit { params: p, covariance, chi2: cost, dof, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;
    impl Model for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, p: &[f64], x: f64, g: &mut [f64]) -> f64 {
            g[0] = 1.0;
            g[1] = x;
            p[0] + p[1] * x
        }
    }

    #[test]
    fn fits_a_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let w = vec![1.0; xs.len()];
        let inf = (f64::NEG_INFINITY, f64::INFINITY);
        let fit = levenberg_marquardt(&Line, &xs, &ys, &w, &[0.0, 0.0], &[inf, inf], LmOptions::default()).unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-10 && (fit.params[1] + 0.5).abs() < 1e-10);
        assert!(fit.converged);
    }

    #[test]
    fn respects_bounds() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.0, -1.0, -2.0, -3.0];
        let w = [1.0; 4];
        let inf = (f64::NEG_INFINITY, f64::INFINITY);
        let fit = levenberg_marquardt(&Line, &xs, &ys, &w, &[0.0, 1.0], &[inf, (0.0, 10.0)], LmOptions::default())
            .unwrap();
        assert!(fit.params[1] >= 0.0);
    }
}
