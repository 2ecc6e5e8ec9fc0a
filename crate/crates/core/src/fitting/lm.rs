//! Damped least squares with Marquardt diagonal scaling and box bounds.

use nalgebra::{DMatrix, DVector};

use super::models::{eval, FitModel};
use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub lambda0: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_iter: usize,
    /// Tolerance on max_i |J_iᵀ r| / (‖J_i‖ ‖r‖).
    pub gtol: f64,
    /// Relative step size below which the iteration stops.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            lambda0: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            max_iter: 200,
            gtol: 1e-10,
            xtol: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub theta: Vec<f64>,
    /// Covariance of the free parameters scaled by the residual variance;
    /// rows of pinned parameters are zero.
    pub covariance: DMatrix<f64>,
    pub residual_norm: f64,
    pub gradient_cos: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Problem<'a> {
    model: FitModel,
    u: &'a [f64],
    y: &'a [f64],
    /// Parameters held constant.
    fixed: &'a [bool],
}

impl Problem<'_> {
    fn residual_jacobian(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.u.len();
        let k = theta.len();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, k);
        let mut row = vec![0.0; k];
        for i in 0..n {
            let f = eval(self.model, theta, self.u[i], &mut row);
            r[i] = self.y[i] - f;
            for c in 0..k {
                j[(i, c)] = if self.fixed[c] { 0.0 } else { row[c] };
            }
        }
        (r, j)
    }

    fn cost(&self, theta: &[f64]) -> f64 {
        let mut row = vec![0.0; theta.len()];
        self.u
            .iter()
            .zip(self.y)
            .map(|(&u, &y)| {
                let d = y - eval(self.model, theta, u, &mut row);
                d * d
            })
            .sum()
    }
}

fn project(theta: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in theta.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Parameters that are fixed, have no influence at the current point, or sit
/// on a bound with the gradient pushing outward.
fn pinned(theta: &[f64], j: &DMatrix<f64>, g: &DVector<f64>, bounds: &[(f64, f64)], fixed: &[bool]) -> Vec<bool> {
    theta
        .iter()
        .zip(bounds)
        .enumerate()
        .map(|(i, (&v, &(lo, hi)))| {
            fixed[i] || j.column(i).iter().all(|&x| x == 0.0) || (v <= lo && g[i] < 0.0) || (v >= hi && g[i] > 0.0)
        })
        .collect()
}

/// Zero when the residual is already at rounding level, since the cosine of
/// pure rounding noise carries no information.
fn gradient_cos(j: &DMatrix<f64>, r: &DVector<f64>, g: &DVector<f64>, pin: &[bool], y_norm: f64) -> f64 {
    let rn = r.norm();
    if rn <= 1e-13 * y_norm.max(f64::MIN_POSITIVE) {
        return 0.0;
    }
    (0..j.ncols())
        .filter(|&c| !pin[c])
        .map(|c| {
            let cn = j.column(c).norm();
            if cn == 0.0 {
                0.0
            } else {
                g[c].abs() / (cn * rn)
            }
        })
        .fold(0.0, f64::max)
}

/// Minimise ½‖y − f(u; θ)‖² from `theta0`.
pub fn levenberg_marquardt(
    model: FitModel,
    u: &[f64],
    y: &[f64],
    theta0: &[f64],
    fixed: &[bool],
    opts: &LmOptions,
) -> Result<LmOutcome, FitError> {
    let bounds = model.bounds();
    let prob = Problem { model, u, y, fixed };
    let k = theta0.len();
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut theta = theta0.to_vec();
    project(&mut theta, &bounds);
    let mut cost = prob.cost(&theta);
    if !cost.is_finite() {
        return Err(FitError::InvalidInput("non-finite residual at initial guess".into()));
    }
    let mut lambda = opts.lambda0;
    let (mut r, mut j) = prob.residual_jacobian(&theta);
    let mut converged = false;
    let mut iterations = 0;
    let mut gcos = f64::INFINITY;
    while iterations < opts.max_iter {
        let g = j.transpose() * &r;
        let pin = pinned(&theta, &j, &g, &bounds, fixed);
        gcos = gradient_cos(&j, &r, &g, &pin, y_norm);
        if gcos <= opts.gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let jtj = j.transpose() * &j;
        let mut a = jtj.clone();
        let mut rhs = g.clone();
        for c in 0..k {
            if pin[c] {
                a.row_mut(c).fill(0.0);
                a.column_mut(c).fill(0.0);
                a[(c, c)] = 1.0;
                rhs[c] = 0.0;
            } else {
                a[(c, c)] += lambda * jtj[(c, c)].max(f64::MIN_POSITIVE);
            }
        }
        let step = match a.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => {
                lambda *= opts.lambda_up;
                if lambda > 1e20 {
                    return Err(FitError::RankDeficient);
                }
                continue;
            }
        };
        let mut trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        project(&mut trial, &bounds);
        let trial_cost = prob.cost(&trial);
        if trial_cost.is_finite() && trial_cost < cost {
            let rel = trial
                .iter()
                .zip(&theta)
                .map(|(a, b)| (a - b).abs() / (b.abs() + 1e-30))
                .fold(0.0, f64::max);
            theta = trial;
            cost = trial_cost;
            lambda = (lambda / opts.lambda_down).max(1e-15);
            (r, j) = prob.residual_jacobian(&theta);
            if rel <= opts.xtol {
                let g = j.transpose() * &r;
                let pin = pinned(&theta, &j, &g, &bounds, fixed);
                gcos = gradient_cos(&j, &r, &g, &pin, y_norm);
                converged = gcos <= opts.gtol;
                break;
            }
        } else {
            lambda *= opts.lambda_up;
            if lambda > 1e16 {
                // no downhill step left at machine precision
                converged = gcos <= opts.gtol;
                break;
            }
        }
    }
    if iterations >= opts.max_iter && !converged {
        return Err(FitError::FitDiverged { iterations });
    }
    let n = u.len();
    let g = j.transpose() * &r;
    let pin = pinned(&theta, &j, &g, &bounds, fixed);
    let free: Vec<usize> = (0..k).filter(|&c| !pin[c]).collect();
    let dof = n.saturating_sub(free.len()).max(1) as f64;
    let s2 = cost / dof;
    let mut cov = DMatrix::zeros(k, k);
    if !free.is_empty() {
        let jf = j.select_columns(&free);
        let jtj = jf.transpose() * jf;
        let inv = jtj.clone().cholesky().map(|c| c.inverse()).ok_or(FitError::RankDeficient)?;
        for (a, &ca) in free.iter().enumerate() {
            for (b, &cb) in free.iter().enumerate() {
                cov[(ca, cb)] = s2 * inv[(a, b)];
            }
        }
    }
    Ok(LmOutcome {
        theta,
        covariance: cov,
        residual_norm: cost.sqrt(),
        gradient_cos: gcos,
        converged,
        iterations,
    })
}
