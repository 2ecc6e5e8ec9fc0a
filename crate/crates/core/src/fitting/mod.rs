//! Nonlinear least-squares fits for decays, oscillations, RB curves, Fermi
//! steps and resonance lines.

pub mod guess;
pub mod lm;
pub mod models;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};
pub use models::FitModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("fit did not converge within {iterations} iterations")]
    FitDiverged { iterations: usize },
    #[error("fit is rank deficient (data carry no information on some parameter)")]
    RankDeficient,
    #[error("invalid fit input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    pub stderr: BTreeMap<String, f64>,
    /// Parameters whose reported value is only a lower bound.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lower_bound: Vec<String>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_cos: f64,
}

impl FitResult {
    pub fn get(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn err(&self, name: &str) -> f64 {
        self.stderr[name]
    }

    pub fn is_lower_bound(&self, name: &str) -> bool {
        self.lower_bound.iter().any(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitOptions {
    pub lm: LmOptions,
    /// Hold the offset `B` at this value.
    pub fixed_b: Option<f64>,
}

/// Abscissa transform `u = (t − shift) / scale`.
#[derive(Debug, Clone, Copy)]
struct Axis {
    shift: f64,
    scale: f64,
}

impl Axis {
    fn for_model(model: FitModel, t: &[f64]) -> Axis {
        let (lo, hi) = guess::range(t);
        match model {
            FitModel::Rb => Axis { shift: 0.0, scale: 1.0 },
            FitModel::Fermi | FitModel::Resonance => {
                let half = 0.5 * (hi - lo);
                Axis {
                    shift: 0.5 * (hi + lo),
                    scale: if half > 0.0 { half } else { 1.0 },
                }
            }
            _ => {
                let m = lo.abs().max(hi.abs());
                Axis {
                    shift: 0.0,
                    scale: if m > 0.0 { m } else { 1.0 },
                }
            }
        }
    }
}

/// Convert between physical and internal parameter vectors.
fn to_internal(model: FitModel, ax: Axis, phys: &[f64]) -> Vec<f64> {
    let mut v = phys.to_vec();
    match model {
        FitModel::Ramsey | FitModel::Cz => {
            v[1] *= ax.scale;
            v[3] *= ax.scale;
        }
        FitModel::Rabi => {
            v[1] *= ax.scale;
            v[2] *= ax.scale;
        }
        FitModel::Decay => v[1] *= ax.scale,
        FitModel::Rb => {}
        FitModel::Fermi | FitModel::Resonance => {
            v[1] = (v[1] - ax.shift) / ax.scale;
            v[2] /= ax.scale;
        }
    }
    v
}

/// Multipliers d(phys)/d(internal) for each parameter.
fn jac_scale(model: FitModel, ax: Axis) -> Vec<f64> {
    let mut s = vec![1.0; model.n_params()];
    match model {
        FitModel::Ramsey | FitModel::Cz => {
            s[1] = 1.0 / ax.scale;
            s[3] = 1.0 / ax.scale;
        }
        FitModel::Rabi => {
            s[1] = 1.0 / ax.scale;
            s[2] = 1.0 / ax.scale;
        }
        FitModel::Decay => s[1] = 1.0 / ax.scale,
        FitModel::Rb => {}
        FitModel::Fermi | FitModel::Resonance => {
            s[1] = ax.scale;
            s[2] = ax.scale;
        }
    }
    s
}

fn to_physical(model: FitModel, ax: Axis, internal: &[f64]) -> Vec<f64> {
    let s = jac_scale(model, ax);
    let mut v: Vec<f64> = internal.iter().zip(&s).map(|(a, b)| a * b).collect();
    if matches!(model, FitModel::Fermi | FitModel::Resonance) {
        v[1] += ax.shift;
    }
    v
}

/// Starting points in internal units. Several are returned when the shape
/// parameter is ambiguous.
fn auto_init(model: FitModel, u: &[f64], y: &[f64], fixed_b: Option<f64>) -> Vec<Vec<f64>> {
    let (lo, hi) = guess::range(y);
    let (ulo, uhi) = guess::range(u);
    let span = (uhi - ulo).max(f64::MIN_POSITIVE);
    match model {
        FitModel::Ramsey | FitModel::Cz | FitModel::Rabi => {
            let b = fixed_b.unwrap_or_else(|| guess::mean(y));
            let a = 0.5 * (hi - lo);
            let f = guess::fft_peak_frequency(u, y);
            let phi = guess::phase_at(u, y, b, f);
            let window = if f > 0.0 { 1.0 / f } else { span / 4.0 };
            let g = guess::envelope_rate(u, y, b, window)
                .filter(|g| g.is_finite() && *g > 0.0)
                .unwrap_or(0.5 / uhi.max(f64::MIN_POSITIVE));
            if model == FitModel::Rabi {
                vec![vec![a, g, f, phi, b]]
            } else {
                vec![vec![a, g, 1.0, f, phi, b], vec![a, g, 2.0, f, phi, b]]
            }
        }
        FitModel::Decay => {
            let b = fixed_b.unwrap_or_else(|| guess::tail_mean(y, 0.2));
            let a = y[0] - b;
            let (xs, ls): (Vec<f64>, Vec<f64>) = u
                .iter()
                .zip(y)
                .filter(|(_, v)| a != 0.0 && ((*v - b) / a) > 0.05)
                .map(|(t, v)| (*t, ((v - b) / a).ln()))
                .unzip();
            let g = guess::linear_regression(&xs, &ls)
                .map(|(s, _)| -s)
                .filter(|g| g.is_finite() && *g > 0.0)
                .unwrap_or(1.0 / uhi.max(f64::MIN_POSITIVE));
            vec![vec![a, g, 1.0, b], vec![a, g, 2.0, b]]
        }
        FitModel::Rb => {
            let b = fixed_b.unwrap_or_else(|| guess::tail_mean(y, 0.2));
            let a = y[0] - b;
            let (xs, ls): (Vec<f64>, Vec<f64>) = u
                .iter()
                .zip(y)
                .filter(|(_, v)| a != 0.0 && ((*v - b) / a) > 0.05)
                .map(|(m, v)| (*m, ((v - b) / a).ln()))
                .unzip();
            let r = guess::linear_regression(&xs, &ls)
                .map(|(s, _)| s.exp())
                .filter(|r| r.is_finite() && *r > 0.0 && *r <= 1.0)
                .unwrap_or(0.99);
            vec![vec![a, r, b]]
        }
        FitModel::Fermi => {
            // sign of the step from the ends
            let falling = y[0] > y[y.len() - 1];
            let a = if falling { hi - lo } else { lo - hi };
            let b = fixed_b.unwrap_or(if falling { lo } else { hi });
            let mid = 0.5 * (hi + lo);
            let i = y
                .iter()
                .enumerate()
                .min_by(|p, q| (p.1 - mid).abs().total_cmp(&(q.1 - mid).abs()))
                .map_or(0, |(i, _)| i);
            vec![vec![a, u[i], span / 10.0, b]]
        }
        FitModel::Resonance => {
            let mut sorted = y.to_vec();
            sorted.sort_by(f64::total_cmp);
            let b = fixed_b.unwrap_or(sorted[sorted.len() / 2]);
            let (i, _) = y
                .iter()
                .enumerate()
                .max_by(|p, q| (p.1 - b).abs().total_cmp(&(q.1 - b).abs()))
                .unwrap_or((0, &b));
            let a = y[i] - b;
            let above = y.iter().filter(|v| ((*v - b) / a) > 0.5).count();
            let w = (0.5 * above as f64 * span / u.len() as f64).max(span / (2.0 * u.len() as f64));
            vec![vec![a, u[i], w, b]]
        }
    }
}

fn b_index(model: FitModel) -> usize {
    model.n_params() - 1
}

/// Fit with default options; `init` is a physical-unit starting vector in
/// the order of [`FitModel::param_names`].
pub fn fit_decay_oscillation(t: &[f64], y: &[f64], model: FitModel, init: Option<&[f64]>) -> Result<FitResult, FitError> {
    fit_with_options(t, y, model, init, &FitOptions::default())
}

pub fn fit_with_options(
    t: &[f64],
    y: &[f64],
    model: FitModel,
    init: Option<&[f64]>,
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    let k = model.n_params();
    let n_free = k - opts.fixed_b.is_some() as usize;
    if t.len() != y.len() {
        return Err(FitError::InvalidInput(format!("len(t) = {} but len(y) = {}", t.len(), y.len())));
    }
    if t.len() < n_free + 2 {
        return Err(FitError::InvalidInput(format!(
            "{} points for {} parameters",
            t.len(),
            n_free
        )));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::InvalidInput("non-finite data".into()));
    }
    if let Some(init) = init {
        if init.len() != k {
            return Err(FitError::InvalidInput(format!("init has {} values, model needs {k}", init.len())));
        }
    }
    // canonical order makes the result independent of input permutation
    let mut pairs: Vec<(f64, f64)> = t.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let ax = Axis::for_model(model, t);
    let u: Vec<f64> = pairs.iter().map(|p| (p.0 - ax.shift) / ax.scale).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (lo, hi) = guess::range(&ys);
    if hi - lo <= 1e-12 * (1.0 + hi.abs().max(lo.abs())) {
        return Err(FitError::RankDeficient);
    }

    let mut fixed = vec![false; k];
    let mut starts = match init {
        Some(p) => vec![to_internal(model, ax, p)],
        None => auto_init(model, &u, &ys, opts.fixed_b),
    };
    if let Some(b) = opts.fixed_b {
        fixed[b_index(model)] = true;
        for s in &mut starts {
            s[b_index(model)] = b;
        }
    }

    let mut best: Option<LmOutcome> = None;
    let mut last_err = None;
    for s in &starts {
        match levenberg_marquardt(model, &u, &ys, s, &fixed, &opts.lm) {
            Ok(out) => {
                let better = best.as_ref().is_none_or(|b| {
                    out.residual_norm.partial_cmp(&b.residual_norm) == Some(Ordering::Less)
                });
                if better {
                    best = Some(out);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let out = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap_or(FitError::RankDeficient)),
    };
    Ok(finish(model, ax, &out, pairs.last().map_or(0.0, |p| p.0)))
}

fn finish(model: FitModel, ax: Axis, out: &LmOutcome, t_max: f64) -> FitResult {
    let names = model.param_names();
    let phys = to_physical(model, ax, &out.theta);
    let scale = jac_scale(model, ax);
    let mut params = BTreeMap::new();
    let mut stderr = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        params.insert(name.to_string(), phys[i]);
        let var = out.covariance[(i, i)].max(0.0);
        stderr.insert(name.to_string(), var.sqrt() * scale[i].abs());
    }
    let mut lower_bound = Vec::new();
    if let Some(&gamma) = params.get("gamma") {
        let sg = stderr["gamma"];
        let t = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
        if t > t_max {
            params.insert("T".into(), t_max);
            stderr.insert("T".into(), 0.0);
            lower_bound.push("T".into());
        } else {
            params.insert("T".into(), t);
            stderr.insert("T".into(), sg / (gamma * gamma));
        }
    }
    if model == FitModel::Rb {
        let r = params["r"];
        params.insert("F".into(), 0.5 * (1.0 + r));
        stderr.insert("F".into(), 0.5 * stderr["r"]);
    }
    FitResult {
        model,
        params,
        stderr,
        lower_bound,
        residual_norm: out.residual_norm,
        converged: out.converged,
        iterations: out.iterations,
        gradient_cos: out.gradient_cos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, t_max: f64) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn recovers_gaussian_ramsey() {
        let t = grid(121, 6e-6);
        let y: Vec<f64> = t
            .iter()
            .map(|&t| 0.45 * (-(t / 2.25e-6f64).powi(2)).exp() * (2.0 * PI * 5e5 * t).cos() + 0.5)
            .collect();
        let fit = fit_decay_oscillation(&t, &y, FitModel::Ramsey, None).unwrap();
        assert!(fit.converged);
        assert!((fit.get("T") / 2.25e-6 - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.get("f") / 5e5 - 1.0).abs() < 1e-6);
        assert!((fit.get("p") - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rb_exact_inversion() {
        let m: Vec<f64> = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512].map(|v| v as f64).to_vec();
        let y: Vec<f64> = m.iter().map(|&m| 0.5 * 0.99f64.powf(m) + 0.5).collect();
        let fit = fit_decay_oscillation(&m, &y, FitModel::Rb, None).unwrap();
        assert!((fit.get("r") - 0.99).abs() < 1e-6);
        assert!((fit.get("F") - 0.995).abs() < 1e-6);
    }

    #[test]
    fn constant_data_is_rank_deficient() {
        let t = grid(30, 1.0);
        let y = vec![0.3; 30];
        for m in [FitModel::Ramsey, FitModel::Rabi, FitModel::Cz] {
            assert_eq!(fit_decay_oscillation(&t, &y, m, None), Err(FitError::RankDeficient));
        }
    }

    #[test]
    fn undamped_oscillation_reports_lower_bound() {
        let t = grid(80, 4e-6);
        let y: Vec<f64> = t.iter().map(|&t| 0.5 + 0.5 * (2.0 * PI * 1e6 * t).cos()).collect();
        let fit = fit_decay_oscillation(&t, &y, FitModel::Ramsey, None).unwrap();
        assert!(fit.is_lower_bound("T"));
        assert_eq!(fit.get("T"), 4e-6);
    }

    #[test]
    fn fermi_width() {
        let x: Vec<f64> = (0..81).map(|i| -4e-3 + 1e-4 * i as f64 + 0.2).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&x| crate::thermal::fermi_occupation(x - 0.2003, 0.2, 0.85))
            .collect();
        let fit = fit_decay_oscillation(&x, &y, FitModel::Fermi, None).unwrap();
        let w = crate::thermal::K_B_EV * 0.85 / 0.2;
        assert!((fit.get("w") / w - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.get("x0") - 0.2003).abs() < 1e-9);
    }

    #[test]
    fn lorentzian_centre() {
        let f: Vec<f64> = (0..101).map(|i| 13.9e9 - 2e6 + 4e4 * i as f64).collect();
        let y: Vec<f64> = f
            .iter()
            .map(|&f| 0.1 + 0.8 * (3e5f64).powi(2) / ((f - 13.9004e9).powi(2) + (3e5f64).powi(2)))
            .collect();
        let fit = fit_decay_oscillation(&f, &y, FitModel::Resonance, None).unwrap();
        assert!((fit.get("x0") - 13.9004e9).abs() < 1.0, "{fit:?}");
    }
}
