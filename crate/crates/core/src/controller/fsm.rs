//! On-chip finite state machine.
//!
//! Edges:
//!
//! ```text
//! IDLE        --SET_HOLD/SET_LEVELS/OSC_CONFIG/ARTIFICIAL_POWER--> PROGRAMMING
//! IDLE|PROG   --LOCK-->          LOCKED
//! LOCKED      --ARM-->           ARMED
//! ARMED       --trigger/tick-->  PULSING
//! PULSING     --trigger/tick-->  PULSING
//! any         --UNLOCK-->        ARMED|PULSING, LOCKED or PROGRAMMING,
//!                                whichever the remaining cells support
//! ```
//!
//! Rejected inputs are logged with `accepted = false` and leave the state
//! untouched.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cell::{CellParams, ClfgCell};
use super::command::{Command, Opcode, Payload, TriggerSource};
use super::oscillator::{oscillator_frequency, OscillatorConfig};
use super::NUM_CELLS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FsmState {
    Idle,
    Programming,
    Locked,
    Armed,
    Pulsing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Input {
    Command(Command),
    TriggerEdge,
    ClockTick,
}

impl From<Command> for Input {
    fn from(c: Command) -> Self {
        Input::Command(c)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FsmError {
    #[error("illegal transition: {input} in state {state:?} ({reason})")]
    IllegalTransition {
        state: FsmState,
        input: String,
        reason: &'static str,
    },
    #[error("input at t={now} precedes last event at t={last}")]
    TimeReversal { now: f64, last: f64 },
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<u16>,
    pub from: FsmState,
    pub to: FsmState,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub fsm_state: FsmState,
    pub cells: Vec<ClfgCell>,
    pub osc: OscillatorConfig,
    pub trigger_source: TriggerSource,
    /// Heater power programmed through `ARTIFICIAL_POWER`, watts.
    pub artificial_power: f64,
    pub event_log: Vec<Event>,
    /// Per-cell snapshots `(time, cell)` taken after every accepted change.
    pub(crate) history: Vec<Vec<(f64, ClfgCell)>>,
}

impl ControllerState {
    pub fn new(cell_params: CellParams, osc: OscillatorConfig) -> Self {
        let cell = ClfgCell::new(cell_params);
        ControllerState {
            fsm_state: FsmState::Idle,
            cells: vec![cell; NUM_CELLS],
            osc,
            trigger_source: TriggerSource::External,
            artificial_power: 0.0,
            event_log: Vec::new(),
            history: vec![vec![(0.0, cell)]; NUM_CELLS],
        }
    }

    fn last_time(&self) -> f64 {
        self.event_log.last().map_or(f64::NEG_INFINITY, |e| e.t)
    }

    pub fn armed_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.armed)
            .map(|(i, _)| i)
    }

    pub fn history(&self, cell: usize) -> &[(f64, ClfgCell)] {
        &self.history[cell]
    }

    /// Apply one input at time `now`.
    ///
    /// On rejection the event is still logged (unless time ran backwards) and
    /// the error is returned.
    pub fn step(&mut self, input: Input, now: f64) -> Result<FsmState, FsmError> {
        let last = self.last_time();
        if now < last {
            return Err(FsmError::TimeReversal { now, last });
        }
        let from = self.fsm_state;
        let (name, cell, payload) = describe(&input);
        match self.transition(input, now) {
            Ok(Some(detail)) => {
                self.event_log.push(Event {
                    t: now,
                    event: name,
                    cell,
                    payload,
                    from,
                    to: self.fsm_state,
                    accepted: true,
                    detail,
                });
                Ok(self.fsm_state)
            }
            Ok(None) => Ok(self.fsm_state),
            Err(reason) => {
                self.event_log.push(Event {
                    t: now,
                    event: name.clone(),
                    cell,
                    payload,
                    from,
                    to: from,
                    accepted: false,
                    detail: Some(reason.to_string()),
                });
                Err(FsmError::IllegalTransition {
                    state: from,
                    input: name,
                    reason,
                })
            }
        }
    }

    fn snapshot(&mut self, cell: usize, now: f64) {
        self.history[cell].push((now, self.cells[cell]));
    }

    fn settle_state(&mut self) {
        let any_armed = self.cells.iter().any(|c| c.armed);
        let any_locked = self.cells.iter().any(|c| c.locked);
        self.fsm_state = match self.fsm_state {
            s @ (FsmState::Armed | FsmState::Pulsing) if any_armed => s,
            _ if any_locked => FsmState::Locked,
            _ => FsmState::Programming,
        };
    }

    fn toggle_armed(&mut self, now: f64) {
        let armed: Vec<usize> = self.armed_cells().collect();
        for i in armed {
            self.cells[i].pulse_level = self.cells[i].pulse_level.toggled();
            self.snapshot(i, now);
        }
        self.fsm_state = FsmState::Pulsing;
    }

    /// `Ok(Some(detail))` for an accepted transition, `Ok(None)` for an input
    /// that is legal but has no effect.
    fn transition(&mut self, input: Input, now: f64) -> Result<Option<Option<String>>, &'static str> {
        use FsmState::*;
        let state = self.fsm_state;
        match input {
            Input::TriggerEdge => {
                if !matches!(state, Armed | Pulsing) {
                    return Err("trigger edge while not armed");
                }
                if self.trigger_source != TriggerSource::External {
                    return Err("external trigger while internal source selected");
                }
                self.toggle_armed(now);
                Ok(Some(None))
            }
            Input::ClockTick => {
                let ticking = matches!(state, Armed | Pulsing)
                    && self.trigger_source == TriggerSource::Internal
                    && self.osc.enabled;
                if !ticking {
                    return Ok(None);
                }
                self.toggle_armed(now);
                Ok(Some(None))
            }
            Input::Command(cmd) => self.apply_command(cmd, now),
        }
    }

    fn apply_command(&mut self, cmd: Command, now: f64) -> Result<Option<Option<String>>, &'static str> {
        use FsmState::*;
        let state = self.fsm_state;
        let i = cmd.cell();
        match (cmd.opcode(), cmd.payload()) {
            (Opcode::SetHold, Payload::HoldVolts(v)) => {
                self.cells[i].v_hold = v;
                self.snapshot(i, now);
                if state == Idle {
                    self.fsm_state = Programming;
                }
                Ok(Some(Some(format!("v_hold={v}"))))
            }
            (Opcode::SetLevels, Payload::Levels { v_high, v_low }) => {
                if self.cells[i].armed {
                    return Err("levels cannot change while the cell is armed");
                }
                self.cells[i].v_high = v_high;
                self.cells[i].v_low = v_low;
                self.snapshot(i, now);
                if state == Idle {
                    self.fsm_state = Programming;
                }
                Ok(Some(Some(format!("v_high={v_high} v_low={v_low}"))))
            }
            (Opcode::OscConfig, Payload::Oscillator(s)) => {
                self.osc.apply(s);
                if state == Idle {
                    self.fsm_state = Programming;
                }
                let f = oscillator_frequency(&self.osc).ok();
                Ok(Some(Some(match f {
                    Some(f) => format!("f_out={f}"),
                    None => "disabled".to_string(),
                })))
            }
            (Opcode::ArtificialPower, Payload::Watts(w)) => {
                self.artificial_power = w;
                if state == Idle {
                    self.fsm_state = Programming;
                }
                Ok(Some(Some(format!("watts={w}"))))
            }
            (Opcode::Lock, _) => {
                if self.cells[i].locked {
                    return Err("cell already locked");
                }
                self.cells[i].lock(now);
                self.snapshot(i, now);
                if matches!(state, Idle | Programming) {
                    self.fsm_state = Locked;
                }
                Ok(Some(Some(format!("v_locked={}", self.cells[i].v_locked))))
            }
            (Opcode::Unlock, _) => {
                if !self.cells[i].locked {
                    return Err("cell not locked");
                }
                self.cells[i].unlock();
                self.snapshot(i, now);
                self.settle_state();
                Ok(Some(None))
            }
            (Opcode::Arm, Payload::Trigger(source)) => {
                if !matches!(state, Locked | Armed | Pulsing) {
                    return Err("arm requires a locked cell");
                }
                if !self.cells[i].locked {
                    return Err("cell not locked");
                }
                if self.cells[i].armed {
                    return Err("cell already armed");
                }
                if self.armed_cells().next().is_some() && source != self.trigger_source {
                    return Err("trigger source differs from already armed cells");
                }
                self.trigger_source = source;
                self.cells[i].armed = true;
                self.snapshot(i, now);
                if state == Locked {
                    self.fsm_state = Armed;
                }
                Ok(Some(Some(format!("{source:?}").to_uppercase())))
            }
            (Opcode::Query, _) => {
                let c = &self.cells[i];
                Ok(Some(Some(format!(
                    "locked={} armed={} level={:?} v_out={}",
                    c.locked,
                    c.armed,
                    c.pulse_level,
                    c.output(now)
                ))))
            }
            _ => Err("payload does not match opcode"),
        }
    }
}

fn describe(input: &Input) -> (String, Option<u8>, Option<u16>) {
    match input {
        Input::TriggerEdge => ("TRIGGER".into(), None, None),
        Input::ClockTick => ("TICK".into(), None, None),
        Input::Command(c) => (
            c.opcode().name().into(),
            Some(c.cell_addr()),
            Some(c.raw_payload()),
        ),
    }
}

/// Free-function form of [`ControllerState::step`].
pub fn fsm_step(state: &mut ControllerState, input: Input, now: f64) -> Result<FsmState, FsmError> {
    state.step(input, now)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::cell::PulseLevel;

    fn fresh() -> ControllerState {
        ControllerState::new(CellParams::default(), OscillatorConfig::default())
    }

    fn locked() -> ControllerState {
        let mut s = fresh();
        s.step(Command::set_hold(0, 1.2).unwrap().into(), 0.0).unwrap();
        s.step(Command::set_levels(0, 1.0, 0.0).unwrap().into(), 0.0)
            .unwrap();
        s.step(Command::lock(0).unwrap().into(), 1e-6).unwrap();
        s
    }

    #[test]
    fn locked_to_armed() {
        let mut s = locked();
        assert_eq!(s.fsm_state, FsmState::Locked);
        let next = s
            .step(Command::arm(0, TriggerSource::External).unwrap().into(), 2e-6)
            .unwrap();
        assert_eq!(next, FsmState::Armed);
    }

    #[test]
    fn trigger_in_armed_goes_high() {
        let mut s = locked();
        s.step(Command::arm(0, TriggerSource::External).unwrap().into(), 2e-6)
            .unwrap();
        assert_eq!(s.cells[0].pulse_level, PulseLevel::Low);
        assert_eq!(s.step(Input::TriggerEdge, 3e-6).unwrap(), FsmState::Pulsing);
        assert_eq!(s.cells[0].pulse_level, PulseLevel::High);
    }

    #[test]
    fn trigger_in_idle_is_rejected_and_logged() {
        let mut s = fresh();
        let before = s.clone();
        let err = s.step(Input::TriggerEdge, 0.0).unwrap_err();
        assert!(matches!(err, FsmError::IllegalTransition { state: FsmState::Idle, .. }));
        assert_eq!(s.fsm_state, before.fsm_state);
        assert_eq!(s.cells, before.cells);
        assert_eq!(s.event_log.len(), 1);
        assert!(!s.event_log[0].accepted);
    }

    #[test]
    fn time_cannot_run_backwards() {
        let mut s = locked();
        let n = s.event_log.len();
        assert!(matches!(
            s.step(Input::TriggerEdge, 0.0),
            Err(FsmError::TimeReversal { .. })
        ));
        assert_eq!(s.event_log.len(), n);
    }

    #[test]
    fn unlock_returns_to_programming() {
        let mut s = locked();
        s.step(Command::arm(0, TriggerSource::External).unwrap().into(), 2e-6)
            .unwrap();
        s.step(Input::TriggerEdge, 3e-6).unwrap();
        s.step(Command::unlock(0).unwrap().into(), 4e-6).unwrap();
        assert_eq!(s.fsm_state, FsmState::Programming);
        assert_eq!(s.cells[0].pulse_level, PulseLevel::Low);
        assert!(!s.cells[0].armed);
    }

    #[test]
    fn arm_unlocked_cell_rejected() {
        let mut s = locked();
        assert!(s
            .step(Command::arm(3, TriggerSource::External).unwrap().into(), 2e-6)
            .is_err());
        assert_eq!(s.fsm_state, FsmState::Locked);
    }

    #[test]
    fn clock_ticks_toggle_only_with_internal_source() {
        let mut s = locked();
        s.step(Command::arm(0, TriggerSource::Internal).unwrap().into(), 2e-6)
            .unwrap();
        // oscillator still disabled: tick is a no-op
        let n = s.event_log.len();
        s.step(Input::ClockTick, 3e-6).unwrap();
        assert_eq!(s.event_log.len(), n);
        s.osc.enabled = true;
        s.step(Input::ClockTick, 4e-6).unwrap();
        assert_eq!(s.cells[0].pulse_level, PulseLevel::High);
        assert!(s.step(Input::TriggerEdge, 5e-6).is_err());
    }

    #[test]
    fn levels_locked_out_while_armed() {
        let mut s = locked();
        s.step(Command::arm(0, TriggerSource::External).unwrap().into(), 2e-6)
            .unwrap();
        assert!(s
            .step(Command::set_levels(0, 2.0, 0.0).unwrap().into(), 3e-6)
            .is_err());
    }
}
