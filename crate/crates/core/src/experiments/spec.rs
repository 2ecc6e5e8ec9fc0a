//! Experiment descriptions as they appear in the config file.

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::physics::{NoiseModel, SpinSystemParams};
use crate::thermal::ThermalState;

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    RabiChevron,
    Ramsey,
    Hahn,
    CpmgPsd,
    #[serde(rename = "RB_1Q")]
    Rb1q,
    CzFid,
    Dcz,
    GlobalRabi,
    StarkCal,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::RabiChevron,
        ExperimentKind::Ramsey,
        ExperimentKind::Hahn,
        ExperimentKind::CpmgPsd,
        ExperimentKind::Rb1q,
        ExperimentKind::CzFid,
        ExperimentKind::Dcz,
        ExperimentKind::GlobalRabi,
        ExperimentKind::StarkCal,
    ];

    /// Subcommand / config key.
    pub fn command(self) -> &'static str {
        match self {
            ExperimentKind::RabiChevron => "rabi",
            ExperimentKind::Ramsey => "ramsey",
            ExperimentKind::Hahn => "hahn",
            ExperimentKind::CpmgPsd => "cpmg-psd",
            ExperimentKind::Rb1q => "rb",
            ExperimentKind::CzFid => "cz",
            ExperimentKind::Dcz => "dcz",
            ExperimentKind::GlobalRabi => "global-rabi",
            ExperimentKind::StarkCal => "stark-cal",
        }
    }

    pub fn from_command(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.command() == s)
    }

    /// Axis names in grid order (outer first).
    pub fn axis_names(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::RabiChevron => &["f_mw", "t_mw"],
            ExperimentKind::Ramsey => &["t_wait"],
            ExperimentKind::Hahn => &["t_total"],
            ExperimentKind::CpmgPsd => &["t_total"],
            ExperimentKind::Rb1q => &[],
            ExperimentKind::CzFid | ExperimentKind::Dcz => &["t_exchange"],
            ExperimentKind::GlobalRabi => &["f_mw", "t_pulse"],
            ExperimentKind::StarkCal => &["v_j", "f_mw"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ControlPath {
    /// Ideal room-temperature schedule.
    #[default]
    Rt,
    /// Exchange-gate levels come from the emulated controller.
    CryoCmos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    /// Explicit points; when empty the range fields are used.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Geometric spacing.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub log: bool,
}

impl SweepAxis {
    pub fn linear(name: &str, start: f64, stop: f64, points: usize) -> Self {
        SweepAxis {
            name: name.into(),
            start: Some(start),
            stop: Some(stop),
            points: Some(points),
            ..Default::default()
        }
    }

    pub fn geometric(name: &str, start: f64, stop: f64, points: usize) -> Self {
        SweepAxis {
            log: true,
            ..Self::linear(name, start, stop, points)
        }
    }

    pub fn explicit(name: &str, values: Vec<f64>) -> Self {
        SweepAxis {
            name: name.into(),
            values,
            ..Default::default()
        }
    }

    pub fn values(&self) -> Result<Vec<f64>, ExperimentError> {
        if !self.values.is_empty() {
            return Ok(self.values.clone());
        }
        let bad = |m: &str| ExperimentError::InvalidSpec(format!("axis {}: {m}", self.name));
        let (a, b, n) = match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) => (a, b, n),
            _ => return Err(bad("needs `values` or `start`, `stop` and `points`")),
        };
        if n == 0 {
            return Err(bad("points must be >= 1"));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        if self.log && !(a > 0.0 && b > 0.0) {
            return Err(bad("log spacing needs positive bounds"));
        }
        let step = |i: usize| i as f64 / (n - 1) as f64;
        Ok((0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else if self.log {
                    a * (b / a).powf(step(i))
                } else {
                    a + (b - a) * step(i)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub axes: Vec<SweepAxis>,
    pub shots: u32,
    pub control_path: ControlPath,
    /// Defaults to `noise.rng_seed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Driven / measured qubit for single-qubit protocols; target for CZ.
    pub qubit: u8,
    /// Rabi frequency of driven pulses, Hz.
    pub rabi_frequency: f64,
    /// Deliberate Ramsey detuning, Hz.
    pub detuning: f64,
    /// Frame (and drive) frequency; defaults to the addressed qubit at the
    /// active level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_mw: Option<f64>,
    /// Exchange-gate level during initialisation and readout.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_base: Option<f64>,
    /// Exchange-gate level during the body of the sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_active: Option<f64>,
    /// Exchange strength used to pick the CZ level when `v_active` is unset.
    pub exchange_j: f64,
    pub cpmg_n: Vec<u32>,
    pub rb_lengths: Vec<u32>,
    pub rb_randomizations: u32,
    /// Depolarizing probability injected after each Clifford.
    pub depolarizing: f64,
    /// Echo pulses as driven segments instead of ideal rotations.
    pub finite_echo: bool,
    /// Off-resonant hold before and after the global pulse, seconds.
    pub t_hold: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: ExperimentKind::Ramsey,
            axes: Vec::new(),
            shots: 100,
            control_path: ControlPath::Rt,
            seed: None,
            qubit: 2,
            rabi_frequency: 1e6,
            detuning: 0.0,
            f_mw: None,
            v_base: None,
            v_active: None,
            exchange_j: 1e6,
            cpmg_n: vec![1, 2, 4, 8, 16],
            rb_lengths: vec![1, 2, 5, 10, 20, 50, 100, 200, 400],
            rb_randomizations: 10,
            depolarizing: 0.0,
            finite_echo: false,
            t_hold: 1e-6,
        }
    }
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentSpec {
            kind,
            ..Default::default()
        }
    }

    pub fn with_axis(mut self, axis: SweepAxis) -> Self {
        self.axes.retain(|a| a.name != axis.name);
        self.axes.push(axis);
        self
    }

    pub fn axis(&self, name: &str) -> Result<Vec<f64>, ExperimentError> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| ExperimentError::InvalidSpec(format!("{:?} needs axis `{name}`", self.kind)))?
            .values()
    }

    /// Optional axis; `None` when absent.
    pub fn axis_opt(&self, name: &str) -> Result<Option<Vec<f64>>, ExperimentError> {
        match self.axes.iter().find(|a| a.name == name) {
            Some(a) => a.values().map(Some),
            None => Ok(None),
        }
    }

    pub fn effective_seed(&self, noise: &NoiseModel) -> u64 {
        self.seed.unwrap_or(noise.rng_seed)
    }

    /// (base, active) exchange-gate levels.
    pub fn levels(&self, spin: &SpinSystemParams) -> (f64, f64) {
        let (base, active) = match self.kind {
            ExperimentKind::CzFid | ExperimentKind::Dcz => (1.20, spin.exchange_voltage(self.exchange_j)),
            ExperimentKind::GlobalRabi => (1.20, 1.30),
            _ => (1.30, 1.20),
        };
        (self.v_base.unwrap_or(base), self.v_active.unwrap_or(active))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidSpec(m));
        if self.shots == 0 {
            return bad("shots must be >= 1".into());
        }
        if !matches!(self.qubit, 1 | 2) {
            return bad(format!("qubit must be 1 or 2, got {}", self.qubit));
        }
        if !(self.rabi_frequency > 0.0) {
            return bad("rabi_frequency must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.depolarizing) {
            return bad("depolarizing must lie in [0, 1]".into());
        }
        if !(self.t_hold > 0.0) {
            return bad("t_hold must be positive".into());
        }
        for name in self.kind.axis_names() {
            let v = self.axis(name)?;
            if name.starts_with("t_") && v.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return bad(format!("axis {name} must be non-negative"));
            }
        }
        if self.kind == ExperimentKind::Rb1q && (self.rb_lengths.is_empty() || self.rb_randomizations == 0) {
            return bad("rb needs rb_lengths and rb_randomizations >= 1".into());
        }
        if self.kind == ExperimentKind::CpmgPsd && (self.cpmg_n.is_empty() || self.cpmg_n.contains(&0)) {
            return bad("cpmg_n must list pulse counts >= 1".into());
        }
        if self.kind == ExperimentKind::StarkCal && self.control_path == ControlPath::CryoCmos {
            return bad("STARK_CAL sweeps arbitrary levels and runs on the RT path only".into());
        }
        Ok(())
    }
}

/// Everything an experiment needs besides its own spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub spin: SpinSystemParams,
    /// Already scaled to the operating temperature.
    pub noise: NoiseModel,
    pub controller: ControllerConfig,
    pub thermal: Option<ThermalState>,
    pub config_hash: String,
}

impl Setup {
    pub fn new(spin: SpinSystemParams, noise: NoiseModel) -> Self {
        Setup {
            spin,
            noise,
            controller: ControllerConfig::default(),
            thermal: None,
            config_hash: String::new(),
        }
    }
}
