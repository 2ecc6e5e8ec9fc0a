//! The single JSON configuration file shared by every subcommand.
//!
//! Unknown keys anywhere are rejected. The config hash is the SHA-256 of
//! the canonical serialisation (struct fields in declaration order, maps
//! sorted by key), so formatting and key order in the file do not matter.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::controller::ControllerConfig;
use crate::experiments::{ExperimentKind, ExperimentSpec, FeedbackSpec, SweepAxis};
use crate::physics::{NoiseModel, SpinSystemParams};
use crate::thermal::ThermalConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Schema or value violation; `key` is the dotted path of the culprit.
    #[error("{key}: {message}")]
    Schema { key: String, message: String },
}

impl ConfigError {
    fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Schema {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSweep {
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
    pub log: bool,
    pub feedback: FeedbackSpec,
}

impl Default for ThermalSweep {
    fn default() -> Self {
        ThermalSweep {
            p_min: 1e-7,
            p_max: 1e-2,
            points: 51,
            log: true,
            feedback: FeedbackSpec::default(),
        }
    }
}

impl ThermalSweep {
    pub fn powers(&self) -> Vec<f64> {
        let axis = if self.log {
            SweepAxis::geometric("power", self.p_min, self.p_max, self.points)
        } else {
            SweepAxis::linear("power", self.p_min, self.p_max, self.points)
        };
        axis.values().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub spin: SpinSystemParams,
    pub noise: NoiseModel,
    pub thermal: ThermalConfig,
    pub controller: ControllerConfig,
    /// Experiment specs keyed by subcommand name.
    pub experiments: BTreeMap<String, ExperimentSpec>,
    pub thermal_sweep: ThermalSweep,
}

fn spec(kind: ExperimentKind, shots: u32, axes: Vec<SweepAxis>) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        shots,
        axes,
        ..Default::default()
    }
}

/// Odd-length grid centred exactly on `centre`.
fn centred(name: &str, centre: f64, half_span: f64, half_points: usize) -> SweepAxis {
    SweepAxis::linear(name, centre - half_span, centre + half_span, 2 * half_points + 1)
}

impl Default for Config {
    fn default() -> Self {
        use ExperimentKind::*;
        let spin = SpinSystemParams::default();
        let mut experiments = BTreeMap::new();
        let mut put = |s: ExperimentSpec| {
            experiments.insert(s.kind.command().to_string(), s);
        };
        put(spec(
            RabiChevron,
            100,
            vec![
                centred("f_mw", spin.f2(1.20), 3e6, 15),
                SweepAxis::linear("t_mw", 0.0, 2e-6, 41),
            ],
        ));
        put(ExperimentSpec {
            detuning: 200e3,
            ..spec(Ramsey, 200, vec![SweepAxis::linear("t_wait", 0.0, 30e-6, 151)])
        });
        put(spec(Hahn, 200, vec![SweepAxis::linear("t_total", 0.0, 400e-6, 81)]));
        put(spec(CpmgPsd, 200, vec![SweepAxis::geometric("t_total", 10e-6, 2e-3, 31)]));
        put(spec(Rb1q, 100, vec![]));
        put(spec(CzFid, 200, vec![SweepAxis::linear("t_exchange", 0.0, 30e-6, 201)]));
        put(spec(Dcz, 200, vec![SweepAxis::linear("t_exchange", 0.0, 100e-6, 401)]));
        put(ExperimentSpec {
            rabi_frequency: 241.8e3,
            ..spec(
                GlobalRabi,
                200,
                vec![
                    centred("f_mw", spin.f2(1.30), 1e6, 10),
                    SweepAxis::linear("t_pulse", 0.0, 4e-6, 81),
                ],
            )
        });
        put(spec(
            StarkCal,
            200,
            vec![
                SweepAxis::linear("v_j", 1.20, 1.30, 6),
                SweepAxis::linear("f_mw", spin.f2(1.20) - 3e6, spin.f2(1.30) + 3e6, 161),
            ],
        ));
        Config {
            spin,
            noise: NoiseModel::default(),
            thermal: ThermalConfig::default(),
            controller: ControllerConfig::default(),
            experiments,
            thermal_sweep: ThermalSweep::default(),
        }
    }
}

/// Dotted key for a serde error: the path plus, for a missing field, the
/// field itself.
fn error_key(path: &str, message: &str) -> String {
    let missing = message
        .strip_prefix("missing field `")
        .and_then(|m| m.split('`').next());
    match (path, missing) {
        (".", Some(f)) | ("", Some(f)) => f.to_string(),
        (p, Some(f)) => format!("{p}.{f}"),
        (p, None) => p.to_string(),
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().to_string();
            ConfigError::schema(error_key(&path, &message), message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the canonical compact serialisation, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let split = |m: String| match m.split_once(' ') {
            Some((k, rest)) if k.contains('.') => ConfigError::schema(k, rest),
            _ => ConfigError::schema("", m),
        };
        self.spin.validate().map_err(split)?;
        self.noise.validate().map_err(split)?;
        self.thermal.validate().map_err(split)?;
        self.controller
            .validate()
            .map_err(|m| ConfigError::schema("controller", m))?;
        for (key, s) in &self.experiments {
            let at = format!("experiments.{key}");
            if let Some(kind) = ExperimentKind::from_command(key) {
                if kind != s.kind {
                    return Err(ConfigError::schema(
                        format!("{at}.kind"),
                        format!("entry `{key}` must have kind {:?}", kind),
                    ));
                }
            }
            s.validate().map_err(|e| ConfigError::schema(&at, e.to_string()))?;
        }
        let ts = &self.thermal_sweep;
        if !(ts.p_min >= 0.0 && ts.p_max >= ts.p_min && ts.points >= 1) || (ts.log && !(ts.p_min > 0.0)) {
            return Err(ConfigError::schema(
                "thermal_sweep",
                "needs 0 <= p_min <= p_max, points >= 1, and p_min > 0 for a log sweep",
            ));
        }
        for e in &ts.feedback.experiments {
            if !self.experiments.contains_key(e) {
                return Err(ConfigError::schema(
                    "thermal_sweep.feedback.experiments",
                    format!("no experiment entry named `{e}`"),
                ));
            }
        }
        Ok(())
    }

    pub fn experiment(&self, command: &str) -> Result<&ExperimentSpec, ConfigError> {
        self.experiments
            .get(command)
            .ok_or_else(|| ConfigError::schema(format!("experiments.{command}"), "missing experiment entry"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_hash_is_stable() {
        let c = Config::default();
        let back = Config::from_json(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn shipped_file_matches_default() {
        let text = include_str!("../../../configs/default.json");
        let c = Config::from_json(text).unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn missing_key_is_named() {
        let mut v: serde_json::Value = serde_json::from_str(&Config::default().to_json_pretty()).unwrap();
        v["spin"].as_object_mut().unwrap().remove("vj_scale");
        match Config::from_json(&v.to_string()) {
            Err(ConfigError::Schema { key, .. }) => assert_eq!(key, "spin.vj_scale"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&Config::default().to_json_pretty()).unwrap();
        v["thermal"]["fridge"]["bogus"] = 1.into();
        match Config::from_json(&v.to_string()) {
            Err(ConfigError::Schema { key, message }) => {
                assert!(key.starts_with("thermal.fridge"), "{key}");
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn value_errors_carry_the_key() {
        let mut c = Config::default();
        c.spin.vj_scale = -1.0;
        match c.validate() {
            Err(ConfigError::Schema { key, .. }) => assert_eq!(key, "spin.vj_scale"),
            other => panic!("{other:?}"),
        }
    }
}
