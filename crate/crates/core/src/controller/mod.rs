//! Emulation of the cryo-CMOS controller chip.
//!
//! Commands arrive as 4-byte frames, drive a small state machine, and set up
//! 32 charge-lock fast-gate (CLFG) cells. Each locked cell holds a floating
//! gate voltage and, once armed, toggles by a capacitive-divider step on every
//! trigger edge.

pub mod cell;
pub mod command;
pub mod fsm;
pub mod oscillator;
pub mod power;
pub mod script;
pub mod waveform;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

pub use cell::{cell_output, pulse_amplitude, CellParams, ClfgCell, PulseLevel};
pub use command::{encode, parse_frame, Command, FrameError, Opcode, OscSettings, Payload, TriggerSource};
pub use fsm::{fsm_step, ControllerState, Event, FsmError, FsmState, Input};
pub use oscillator::{oscillator_frequency, OscillatorConfig, OscillatorError};
pub use power::{controller_power, PowerModel};
pub use script::{parse_binary_stream, parse_text_script, ScriptError, TimedInput};
pub use waveform::{emit_waveform, write_waveform_csv, GateTrace, Segment};

pub const NUM_CELLS: usize = 32;

/// Gate name to cell wiring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateWiring {
    pub gate: String,
    pub cell: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub cell: CellParams,
    pub oscillator: OscillatorConfig,
    pub power: PowerModel,
    pub gates: Vec<GateWiring>,
    /// Spacing of frames in a binary command stream, seconds.
    pub spi_frame_period: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            cell: CellParams::default(),
            oscillator: OscillatorConfig::default(),
            power: PowerModel::default(),
            gates: vec![
                GateWiring {
                    gate: "J".into(),
                    cell: 0,
                },
                GateWiring {
                    gate: "B".into(),
                    cell: 1,
                },
            ],
            // 32 bits at 10 MHz
            spi_frame_period: 3.2e-6,
        }
    }
}

impl ControllerConfig {
    pub fn new_state(&self) -> ControllerState {
        ControllerState::new(self.cell, self.oscillator)
    }

    pub fn gate_cells(&self) -> Vec<(String, usize)> {
        self.gates
            .iter()
            .map(|g| (g.gate.clone(), g.cell as usize))
            .collect()
    }

    pub fn cell_for_gate(&self, gate: &str) -> Option<usize> {
        self.gates
            .iter()
            .find(|g| g.gate == gate)
            .map(|g| g.cell as usize)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.cell.validate()?;
        if !(self.oscillator.t_inverter > 0.0) {
            return Err("oscillator.t_inverter must be positive".into());
        }
        if self.oscillator.divider == 0 {
            return Err("oscillator.divider must be in 1..=255".into());
        }
        if self.oscillator.tap_select > 7 || self.oscillator.trim_bits > 15 {
            return Err("oscillator.tap_select/trim_bits out of range".into());
        }
        if !(self.spi_frame_period > 0.0) {
            return Err("spi_frame_period must be positive".into());
        }
        if let Some(g) = self.gates.iter().find(|g| g.cell as usize >= NUM_CELLS) {
            return Err(format!("gates: cell {} of gate {} out of range", g.cell, g.gate));
        }
        Ok(())
    }
}

/// Feed a timeline into a fresh controller. Rejected inputs stay in the
/// event log and do not stop the replay; time reversal does.
pub fn replay(config: &ControllerConfig, inputs: &[TimedInput]) -> Result<ControllerState, FsmError> {
    let mut state = config.new_state();
    for ti in inputs {
        match state.step(ti.input, ti.t) {
            Ok(_) | Err(FsmError::IllegalTransition { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(state)
}

/// Event log as JSON lines, optionally preceded by one metadata object.
pub fn write_event_log<W: Write>(mut w: W, log: &[Event], meta: Option<&serde_json::Value>) -> io::Result<()> {
    if let Some(m) = meta {
        serde_json::to_writer(&mut w, m)?;
        writeln!(w)?;
    }
    for e in log {
        serde_json::to_writer(&mut w, e)?;
        writeln!(w)?;
    }
    Ok(())
}
