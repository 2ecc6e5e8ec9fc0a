//! Device and noise parameters.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spam {
    pub f_prep: f64,
    /// Probability that a singlet-like (unblocked) outcome is read correctly.
    pub f_read_s: f64,
    /// Probability that a blocked outcome is read correctly.
    pub f_read_t: f64,
}

impl Default for Spam {
    fn default() -> Self {
        Spam {
            f_prep: 0.99,
            f_read_s: 0.95,
            f_read_t: 0.95,
        }
    }
}

impl Spam {
    pub const IDEAL: Spam = Spam {
        f_prep: 1.0,
        f_read_s: 1.0,
        f_read_t: 1.0,
    };

    /// Observed blocked probability for an ideal blocked probability `p`.
    pub fn apply(&self, p: f64) -> f64 {
        self.f_read_t * p + (1.0 - self.f_read_s) * (1.0 - p)
    }

    /// Inverse of [`Spam::apply`]; not clamped.
    pub fn invert(&self, observed: f64) -> f64 {
        (observed - (1.0 - self.f_read_s)) / (self.f_read_t + self.f_read_s - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSystemParams {
    /// Static field, tesla. Informational only.
    pub b0: f64,
    pub f1_0: f64,
    pub f2_0: f64,
    /// Exchange-gate voltage at which `f1_0`, `f2_0` apply.
    pub v_ref: f64,
    /// Stark coefficients, Hz/V.
    pub alpha1: f64,
    pub alpha2: f64,
    pub j0: f64,
    pub vj_on: f64,
    pub vj_scale: f64,
    /// Rabi frequency per volt of drive amplitude, Hz/V.
    pub rabi_per_volt: f64,
    /// Relaxation time toward |↓↓⟩, seconds. `None` disables damping.
    #[serde(default)]
    pub t1: Option<f64>,
    pub spam: Spam,
}

impl Default for SpinSystemParams {
    fn default() -> Self {
        SpinSystemParams {
            b0: 0.5,
            f1_0: 13.94e9,
            f2_0: 13.90e9,
            v_ref: 1.20,
            alpha1: 10e6,
            alpha2: 100e6,
            j0: 1e5,
            vj_on: 1.37,
            vj_scale: 0.02,
            rabi_per_volt: 2.418e6,
            t1: None,
            spam: Spam::default(),
        }
    }
}

impl SpinSystemParams {
    pub fn f1(&self, v_j: f64) -> f64 {
        self.f1_0 + self.alpha1 * (v_j - self.v_ref)
    }

    pub fn f2(&self, v_j: f64) -> f64 {
        self.f2_0 + self.alpha2 * (v_j - self.v_ref)
    }

    pub fn qubit_frequency(&self, qubit: u8, v_j: f64) -> f64 {
        if qubit == 1 {
            self.f1(v_j)
        } else {
            self.f2(v_j)
        }
    }

    /// Exchange coupling in hertz.
    ///
    /// Pure exponential above `vj_on`; below it the exponent gains a
    /// `-x²/2` term, so the curve and its slope are continuous at the onset
    /// and J falls off as a Gaussian tail deep in the barrier-up regime.
    pub fn exchange(&self, v_j: f64) -> f64 {
        let x = (v_j - self.vj_on) / self.vj_scale;
        if x >= 0.0 {
            self.j0 * x.exp()
        } else {
            self.j0 * (x - 0.5 * x * x).exp()
        }
    }

    /// Voltage at which the exchange curve reaches `j` (above onset only).
    pub fn exchange_voltage(&self, j: f64) -> f64 {
        self.vj_on + self.vj_scale * (j / self.j0).ln()
    }

    pub fn rabi_frequency(&self, amp: f64) -> f64 {
        self.rabi_per_volt * amp
    }

    /// Drive amplitude giving Rabi frequency `omega`.
    pub fn amp_for_rabi(&self, omega: f64) -> f64 {
        omega / self.rabi_per_volt
    }

    pub fn validate(&self) -> Result<(), String> {
        let nonneg = [
            ("spin.f1_0", self.f1_0),
            ("spin.f2_0", self.f2_0),
            ("spin.j0", self.j0),
            ("spin.rabi_per_volt", self.rabi_per_volt),
        ];
        for (k, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{k} must be finite and non-negative"));
            }
        }
        if !(self.vj_scale > 0.0) {
            return Err("spin.vj_scale must be positive".into());
        }
        if let Some(t1) = self.t1 {
            if !(t1 > 0.0) {
                return Err("spin.t1 must be positive".into());
            }
        }
        for (k, p) in [
            ("spin.spam.f_prep", self.spam.f_prep),
            ("spin.spam.f_read_s", self.spam.f_read_s),
            ("spin.spam.f_read_t", self.spam.f_read_t),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{k} must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Quasi-static frequency spread per shot, Hz (standard deviation).
    pub sigma_f1: f64,
    pub sigma_f2: f64,
    /// Quasi-static fractional exchange spread per shot.
    pub sigma_j_frac: f64,
    /// Two-sided white frequency-noise PSD at `t_ref`, Hz²/Hz.
    pub s_white_0: f64,
    /// Two-sided white PSD of δJ/J at `t_ref`, 1/Hz.
    #[serde(default)]
    pub s_white_jfrac_0: f64,
    pub temp_exponent: f64,
    pub rng_seed: u64,
    /// Multiplier applied to both white PSDs by thermal scaling.
    #[serde(skip, default = "one")]
    pub white_scale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            sigma_f1: 15e3,
            sigma_f2: 15e3,
            sigma_j_frac: 0.02,
            s_white_0: 185.0,
            s_white_jfrac_0: 1e-8,
            temp_exponent: 1.0,
            rng_seed: 0,
            white_scale: 1.0,
        }
    }
}

impl NoiseModel {
    pub fn off() -> Self {
        NoiseModel {
            sigma_f1: 0.0,
            sigma_f2: 0.0,
            sigma_j_frac: 0.0,
            s_white_0: 0.0,
            s_white_jfrac_0: 0.0,
            ..Default::default()
        }
    }

    pub fn s_white(&self) -> f64 {
        self.s_white_0 * self.white_scale
    }

    pub fn s_white_jfrac(&self) -> f64 {
        self.s_white_jfrac_0 * self.white_scale
    }

    pub fn is_quasi_static_free(&self) -> bool {
        self.sigma_f1 == 0.0 && self.sigma_f2 == 0.0 && self.sigma_j_frac == 0.0
    }

    pub fn validate(&self) -> Result<(), String> {
        for (k, v) in [
            ("noise.sigma_f1", self.sigma_f1),
            ("noise.sigma_f2", self.sigma_f2),
            ("noise.sigma_j_frac", self.sigma_j_frac),
            ("noise.s_white_0", self.s_white_0),
            ("noise.s_white_jfrac_0", self.s_white_jfrac_0),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{k} must be finite and non-negative"));
            }
        }
        if !self.temp_exponent.is_finite() {
            return Err("noise.temp_exponent must be finite".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exchange_anchor_points() {
        let p = SpinSystemParams::default();
        assert!((p.exchange(p.vj_on) - p.j0).abs() < 1e-9);
        let v2 = p.vj_on + p.vj_scale * std::f64::consts::LN_2;
        assert!((p.exchange(v2) / p.j0 - 2.0).abs() < 1e-12);
        assert!((p.exchange(p.exchange_voltage(1e6)) - 1e6).abs() < 1e-6);
    }

    #[test]
    fn exchange_negligible_when_separated() {
        let p = SpinSystemParams::default();
        assert!(p.exchange(1.20) < 1e-10);
        assert!(p.exchange(1.30) < 10.0);
    }

    #[test]
    fn spam_map_inverts() {
        let s = Spam {
            f_prep: 1.0,
            f_read_s: 0.93,
            f_read_t: 0.97,
        };
        for p in [0.0, 0.3, 1.0] {
            assert!((s.invert(s.apply(p)) - p).abs() < 1e-15);
        }
        assert!((Spam::default().apply(0.75) - 0.725).abs() < 1e-15);
    }
}
