//! Experiments re-run under controller-induced heating.
//!
//! Each condition programs a controller, turns its dissipation into device
//! and electron temperatures, rescales the white noise, and reruns the
//! inner experiments with the same seeds.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::controller::{
    controller_power, oscillator_frequency, Command, ControllerConfig, ControllerState, Input, OscSettings,
    OscillatorConfig, TriggerSource,
};
use crate::thermal::{scale_noise, thermal_state, ThermalConfig, ThermalState};

use super::result::{ExperimentResult, VERSION};
use super::spec::{ExperimentSpec, Setup};
use super::{run_experiment, ExperimentError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackCondition {
    pub name: String,
    /// When false the chip dissipates nothing.
    #[serde(default = "yes")]
    pub powered: bool,
    /// Oscillator register; `None` leaves it disabled.
    #[serde(default)]
    pub oscillator: Option<OscSettings>,
    /// Cells locked and armed, starting from cell 0.
    #[serde(default)]
    pub armed_cells: u8,
    /// Toggle rate of each armed cell, Hz.
    #[serde(default)]
    pub pulse_rate: f64,
    #[serde(default)]
    pub artificial_power: f64,
}

fn yes() -> bool {
    true
}

impl FeedbackCondition {
    pub fn idle(name: &str) -> Self {
        FeedbackCondition {
            name: name.into(),
            powered: true,
            oscillator: None,
            armed_cells: 0,
            pulse_rate: 0.0,
            artificial_power: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackSpec {
    pub conditions: Vec<FeedbackCondition>,
    /// Config keys of the inner experiments.
    pub experiments: Vec<String>,
}

impl Default for FeedbackSpec {
    /// CMOS off, locked idle, pulsing, oscillator at maximum.
    fn default() -> Self {
        FeedbackSpec {
            conditions: vec![
                FeedbackCondition {
                    powered: false,
                    ..FeedbackCondition::idle("cmos_off")
                },
                FeedbackCondition {
                    armed_cells: 2,
                    ..FeedbackCondition::idle("locked_idle")
                },
                FeedbackCondition {
                    armed_cells: 2,
                    pulse_rate: 1e6,
                    ..FeedbackCondition::idle("pulsing")
                },
                FeedbackCondition {
                    armed_cells: 2,
                    oscillator: Some(OscillatorConfig::max_settings()),
                    ..FeedbackCondition::idle("oscillator_max")
                },
            ],
            experiments: vec!["cz".into(), "rb".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOutcome {
    pub condition: FeedbackCondition,
    pub osc_hz: Option<f64>,
    pub thermal: ThermalState,
    pub white_scale: f64,
    pub results: Vec<(String, ExperimentResult)>,
}

impl ConditionOutcome {
    pub fn result(&self, key: &str) -> Option<&ExperimentResult> {
        self.results.iter().find(|(k, _)| k == key).map(|(_, r)| r)
    }
}

/// Controller programmed for one condition.
pub fn condition_state(cfg: &ControllerConfig, cond: &FeedbackCondition) -> Result<ControllerState, ExperimentError> {
    let err = |e: String| ExperimentError::Controller(format!("condition {}: {e}", cond.name));
    let mut st = cfg.new_state();
    let push = |st: &mut ControllerState, c: Result<Command, crate::controller::FrameError>| {
        let c = c.map_err(|e| err(e.to_string()))?;
        st.step(Input::Command(c), 0.0).map(|_| ()).map_err(|e| err(e.to_string()))
    };
    if let Some(osc) = cond.oscillator {
        push(&mut st, Command::osc_config(osc))?;
    }
    for c in 0..cond.armed_cells {
        push(&mut st, Command::lock(c))?;
    }
    for c in 0..cond.armed_cells {
        push(&mut st, Command::arm(c, TriggerSource::External))?;
    }
    if cond.artificial_power > 0.0 {
        push(&mut st, Command::artificial_power(cond.artificial_power))?;
    }
    Ok(st)
}

pub fn condition_power(cfg: &ControllerConfig, cond: &FeedbackCondition) -> Result<(f64, Option<f64>), ExperimentError> {
    if !cond.powered {
        return Ok((0.0, None));
    }
    let st = condition_state(cfg, cond)?;
    Ok((
        controller_power(&st, cond.pulse_rate, &cfg.power),
        oscillator_frequency(&st.osc).ok(),
    ))
}

/// Run `inner` (config key, spec) under each condition.
pub fn run_with_thermal_feedback(
    spec: &FeedbackSpec,
    inner: &[(String, ExperimentSpec)],
    setup: &Setup,
    thermal: &ThermalConfig,
) -> Result<Vec<ConditionOutcome>, ExperimentError> {
    let mut out = Vec::new();
    for cond in &spec.conditions {
        let (power, osc_hz) = condition_power(&setup.controller, cond)?;
        let ts = thermal_state(thermal, power);
        let noise = scale_noise(&setup.noise, ts.t_e, thermal.t_ref);
        let local = Setup {
            noise,
            thermal: Some(ts),
            ..setup.clone()
        };
        let mut results = Vec::new();
        for (key, s) in inner {
            results.push((key.clone(), run_experiment(s, &local)?));
        }
        out.push(ConditionOutcome {
            condition: cond.clone(),
            osc_hz,
            thermal: ts,
            white_scale: noise.white_scale,
            results,
        });
    }
    Ok(out)
}

/// Long-form table, one row per (condition, experiment, fitted quantity).
pub fn write_feedback_csv<W: Write>(mut w: W, rows: &[ConditionOutcome], config_hash: &str, seed: u64) -> io::Result<()> {
    writeln!(w, "# cryospin {VERSION}")?;
    writeln!(w, "# config_hash={config_hash}")?;
    writeln!(w, "# seed={seed}")?;
    writeln!(
        w,
        "condition,osc_hz,armed_cells,power_w,t_mxc_k,t_device_k,t_e_k,white_scale,experiment,quantity,value,stderr,lower_bound"
    )?;
    for r in rows {
        for (key, res) in &r.results {
            for (q, v) in &res.fit {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.condition.name,
                    r.osc_hz.unwrap_or(0.0),
                    r.condition.armed_cells,
                    r.thermal.p_total,
                    r.thermal.t_mxc,
                    r.thermal.t_device,
                    r.thermal.t_e,
                    r.white_scale,
                    key,
                    q,
                    v.value,
                    v.stderr,
                    v.lower_bound
                )?;
            }
        }
    }
    Ok(())
}
