//! Model functions and their analytic Jacobians.
//!
//! All models work on a normalised abscissa `u = t / t_scale`; rates and
//! frequencies here are therefore dimensionless and converted back by the
//! caller.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitModel {
    /// `A·exp(−(γt)^p)·cos(2πft + φ) + B`
    Ramsey,
    /// Same form as `Ramsey`, used for exchange oscillations.
    Cz,
    /// `A·exp(−γt)·cos(2πft + φ) + B`
    Rabi,
    /// `A·exp(−(γt)^p) + B`
    Decay,
    /// `A·r^m + B`
    Rb,
    /// `A / (1 + exp((x − x0)/w)) + B`
    Fermi,
    /// `A·w² / ((x − x0)² + w²) + B`
    Resonance,
}

impl FitModel {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Ramsey | FitModel::Cz => &["A", "gamma", "p", "f", "phi", "B"],
            FitModel::Rabi => &["A", "gamma", "f", "phi", "B"],
            FitModel::Decay => &["A", "gamma", "p", "B"],
            FitModel::Rb => &["A", "r", "B"],
            FitModel::Fermi => &["A", "x0", "w", "B"],
            FitModel::Resonance => &["A", "x0", "w", "B"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    /// Whether the abscissa is rescaled to [0, 1]-ish before fitting.
    pub fn normalises_axis(self) -> bool {
        !matches!(self, FitModel::Rb)
    }

    /// Lower and upper bound per parameter (internal units).
    pub fn bounds(self) -> Vec<(f64, f64)> {
        let free = (f64::NEG_INFINITY, f64::INFINITY);
        let nonneg = (0.0, f64::INFINITY);
        let p = (1.0, 3.0);
        match self {
            FitModel::Ramsey | FitModel::Cz => vec![free, nonneg, p, nonneg, free, free],
            FitModel::Rabi => vec![free, nonneg, nonneg, free, free],
            FitModel::Decay => vec![free, nonneg, p, free],
            FitModel::Rb => vec![free, (0.0, 2.0), free],
            FitModel::Fermi => vec![free, free, (1e-300, f64::INFINITY), free],
            FitModel::Resonance => vec![free, free, (1e-300, f64::INFINITY), free],
        }
    }
}

/// exp(−(g u)^p) and the derivatives of (g u)^p with respect to g and p.
fn stretched(g: f64, p: f64, u: f64) -> (f64, f64, f64) {
    let x = g * u;
    if x <= 0.0 {
        // d/dg of x^p is p x^(p-1) u, which is u at p = 1 and 0 above
        let dg = if p == 1.0 { u } else { 0.0 };
        return (1.0, dg, 0.0);
    }
    let xp = x.powf(p);
    (
        (-xp).exp(),
        p * x.powf(p - 1.0) * u,
        xp * x.ln(),
    )
}

/// Model value and gradient at abscissa `u`. `jac` has one slot per
/// parameter.
pub fn eval(model: FitModel, theta: &[f64], u: f64, jac: &mut [f64]) -> f64 {
    match model {
        FitModel::Ramsey | FitModel::Cz => {
            let [a, g, p, f, phi, b] = theta[..] else {
                unreachable!()
            };
            let (e, dxg, dxp) = stretched(g, p, u);
            let arg = 2.0 * PI * f * u + phi;
            let (s, c) = arg.sin_cos();
            jac[0] = e * c;
            jac[1] = -a * e * c * dxg;
            jac[2] = -a * e * c * dxp;
            jac[3] = -a * e * s * 2.0 * PI * u;
            jac[4] = -a * e * s;
            jac[5] = 1.0;
            a * e * c + b
        }
        FitModel::Rabi => {
            let [a, g, f, phi, b] = theta[..] else {
                unreachable!()
            };
            let e = (-g * u).exp();
            let arg = 2.0 * PI * f * u + phi;
            let (s, c) = arg.sin_cos();
            jac[0] = e * c;
            jac[1] = -a * e * c * u;
            jac[2] = -a * e * s * 2.0 * PI * u;
            jac[3] = -a * e * s;
            jac[4] = 1.0;
            a * e * c + b
        }
        FitModel::Decay => {
            let [a, g, p, b] = theta[..] else {
                unreachable!()
            };
            let (e, dxg, dxp) = stretched(g, p, u);
            jac[0] = e;
            jac[1] = -a * e * dxg;
            jac[2] = -a * e * dxp;
            jac[3] = 1.0;
            a * e + b
        }
        FitModel::Rb => {
            let [a, r, b] = theta[..] else {
                unreachable!()
            };
            let rm = r.powf(u);
            jac[0] = rm;
            jac[1] = if u == 0.0 { 0.0 } else { a * u * r.powf(u - 1.0) };
            jac[2] = 1.0;
            a * rm + b
        }
        FitModel::Fermi => {
            let [a, x0, w, b] = theta[..] else {
                unreachable!()
            };
            let z = (u - x0) / w;
            let sig = if z >= 0.0 {
                let e = (-z).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + z.exp())
            };
            let ds = sig * (1.0 - sig);
            jac[0] = sig;
            jac[1] = a * ds / w;
            jac[2] = a * ds * z / w;
            jac[3] = 1.0;
            a * sig + b
        }
        FitModel::Resonance => {
            let [a, x0, w, b] = theta[..] else {
                unreachable!()
            };
            let d = u - x0;
            let den = d * d + w * w;
            let l = w * w / den;
            jac[0] = l;
            jac[1] = a * 2.0 * d * w * w / (den * den);
            jac[2] = a * 2.0 * w * d * d / (den * den);
            jac[3] = 1.0;
            a * l + b
        }
    }
}

pub fn value(model: FitModel, theta: &[f64], u: f64) -> f64 {
    let mut scratch = [0.0; 6];
    eval(model, theta, u, &mut scratch[..model.n_params()])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central differences against the analytic gradient.
    fn check_model(model: FitModel, theta: &[f64], us: &[f64]) {
        let n = model.n_params();
        for &u in us {
            let mut jac = vec![0.0; n];
            eval(model, theta, u, &mut jac);
            for k in 0..n {
                let h = 1e-6 * theta[k].abs().max(1e-3);
                let mut tp = theta.to_vec();
                let mut tm = theta.to_vec();
                tp[k] += h;
                tm[k] -= h;
                let fd = (value(model, &tp, u) - value(model, &tm, u)) / (2.0 * h);
                let scale = jac[k].abs().max(1e-8);
                assert!(
                    (fd - jac[k]).abs() / scale < 1e-6,
                    "{model:?} param {k} at u={u}: analytic {} fd {fd}",
                    jac[k]
                );
            }
        }
    }

    const US: [f64; 5] = [0.05, 0.2, 0.45, 0.7, 0.95];

    #[test]
    fn jacobians_match_finite_differences() {
        check_model(FitModel::Ramsey, &[0.4, 1.3, 1.7, 3.2, 0.4, 0.5], &US);
        check_model(FitModel::Rabi, &[0.4, 0.8, 2.7, -0.3, 0.5], &US);
        check_model(FitModel::Decay, &[0.45, 1.1, 2.2, 0.5], &US);
        check_model(FitModel::Rb, &[0.5, 0.99, 0.5], &[1.0, 5.0, 20.0, 100.0]);
        check_model(FitModel::Fermi, &[0.9, 0.4, 0.07, 0.05], &US);
        check_model(FitModel::Resonance, &[0.8, 0.5, 0.1, 0.1], &US);
    }
}
