//! Ring oscillator with a tapped inverter chain, trim and 8-bit divider.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::command::OscSettings;

/// Effective stage count for each of the eight taps (odd, at most 81).
pub const TAP_STAGES: [u32; 8] = [11, 21, 31, 41, 51, 61, 71, 81];

/// Trim code giving the nominal per-stage delay.
pub const NOMINAL_TRIM: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OscillatorError {
    #[error("oscillator is disabled")]
    OscillatorDisabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub tap_select: u8,
    pub trim_bits: u8,
    pub divider: u8,
    /// Nominal single-inverter delay, seconds.
    pub t_inverter: f64,
    pub enabled: bool,
}

impl Default for OscillatorConfig {
    /// Full 81-stage chain at nominal trim with `t_inverter` set so the tap
    /// runs at 30 MHz; disabled.
    fn default() -> Self {
        OscillatorConfig {
            tap_select: 7,
            trim_bits: NOMINAL_TRIM,
            divider: 1,
            t_inverter: 1.0 / (2.0 * 81.0 * 30e6),
            enabled: false,
        }
    }
}

impl OscillatorConfig {
    pub fn apply(&mut self, s: OscSettings) {
        self.enabled = s.enabled;
        self.tap_select = s.tap_select & 0x7;
        self.trim_bits = s.trim_bits & 0xF;
        self.divider = s.divider;
    }

    pub fn settings(&self) -> OscSettings {
        OscSettings {
            enabled: self.enabled,
            tap_select: self.tap_select,
            trim_bits: self.trim_bits,
            divider: self.divider,
        }
    }

    pub fn n_stages(&self) -> u32 {
        TAP_STAGES[(self.tap_select & 0x7) as usize]
    }

    /// Per-stage delay after trim: 0.5x at code 0, 1x at code 8, 1.4375x at 15.
    pub fn stage_delay(&self) -> f64 {
        let trim = (self.trim_bits & 0xF) as f64;
        self.t_inverter * (1.0 + (trim - NOMINAL_TRIM as f64) / 16.0)
    }

    /// Undivided ring frequency, independent of `enabled`.
    pub fn tap_frequency(&self) -> f64 {
        1.0 / (2.0 * self.n_stages() as f64 * self.stage_delay())
    }

    /// Fastest setting reachable with this inverter delay.
    pub fn max_settings() -> OscSettings {
        OscSettings {
            enabled: true,
            tap_select: 0,
            trim_bits: 0,
            divider: 1,
        }
    }
}

/// Divided output frequency passed to the state machine.
pub fn oscillator_frequency(osc: &OscillatorConfig) -> Result<f64, OscillatorError> {
    if !osc.enabled {
        return Err(OscillatorError::OscillatorDisabled);
    }
    Ok(osc.tap_frequency() / osc.divider.max(1) as f64)
}
