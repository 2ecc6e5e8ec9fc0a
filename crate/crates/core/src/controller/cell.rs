//! Charge-lock fast-gate (CLFG) cell.
//!
//! While unlocked the gate simply follows the external hold source. Locking
//! opens the switch and traps the hold voltage on the gate capacitor; from
//! then on the output only moves by leakage decay and by the capacitive
//! divider step when the upper plate toggles between `v_low` and `v_high`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PulseLevel {
    #[default]
    Low,
    High,
}

impl PulseLevel {
    pub fn toggled(self) -> Self {
        match self {
            PulseLevel::Low => PulseLevel::High,
            PulseLevel::High => PulseLevel::Low,
        }
    }
}

/// Capacitances and leakage shared by every cell on the die.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellParams {
    /// Pulse (coupling) capacitance, farads.
    pub c_pulse: f64,
    /// Parasitic gate capacitance, farads.
    pub c_parasitic: f64,
    /// Leakage time constant of the locked node, seconds.
    pub tau_leak: f64,
}

impl Default for CellParams {
    fn default() -> Self {
        CellParams {
            c_pulse: 100e-15,
            c_parasitic: 900e-15,
            tau_leak: 1e7,
        }
    }
}

impl CellParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.c_pulse > 0.0) {
            return Err("c_pulse must be > 0".into());
        }
        if !(self.c_parasitic >= 0.0) {
            return Err("c_parasitic must be >= 0".into());
        }
        if !(self.tau_leak > 0.0) {
            return Err("tau_leak must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClfgCell {
    pub v_hold: f64,
    /// Voltage trapped at the moment of locking.
    pub v_locked: f64,
    pub locked: bool,
    pub armed: bool,
    pub c_pulse: f64,
    pub c_parasitic: f64,
    pub v_high: f64,
    pub v_low: f64,
    pub pulse_level: PulseLevel,
    pub tau_leak: f64,
    pub t_locked_at: f64,
}

impl ClfgCell {
    pub fn new(params: CellParams) -> Self {
        ClfgCell {
            v_hold: 0.0,
            v_locked: 0.0,
            locked: false,
            armed: false,
            c_pulse: params.c_pulse,
            c_parasitic: params.c_parasitic,
            v_high: 0.0,
            v_low: 0.0,
            pulse_level: PulseLevel::Low,
            tau_leak: params.tau_leak,
            t_locked_at: 0.0,
        }
    }

    /// Output step produced by toggling the upper plate from low to high.
    pub fn pulse_amplitude(&self) -> f64 {
        pulse_amplitude(self.c_pulse, self.c_parasitic, self.v_high, self.v_low)
    }

    pub fn lock(&mut self, now: f64) {
        self.locked = true;
        self.v_locked = self.v_hold;
        self.t_locked_at = now;
        self.pulse_level = PulseLevel::Low;
    }

    pub fn unlock(&mut self) {
        self.locked = false;
        self.armed = false;
        self.pulse_level = PulseLevel::Low;
    }

    /// Gate voltage at `now`.
    pub fn output(&self, now: f64) -> f64 {
        cell_output(self, now)
    }
}

/// Capacitive-divider step `C_pulse / (C_p + C_pulse) * (V_high - V_low)`.
pub fn pulse_amplitude(c_pulse: f64, c_parasitic: f64, v_high: f64, v_low: f64) -> f64 {
    c_pulse / (c_parasitic + c_pulse) * (v_high - v_low)
}

pub fn cell_output(cell: &ClfgCell, now: f64) -> f64 {
    if !cell.locked {
        return cell.v_hold;
    }
    let elapsed = (now - cell.t_locked_at).max(0.0);
    let held = cell.v_locked * (-elapsed / cell.tau_leak).exp();
    match cell.pulse_level {
        PulseLevel::High => held + cell.pulse_amplitude(),
        PulseLevel::Low => held,
    }
}
