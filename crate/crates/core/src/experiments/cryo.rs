//! Exchange-gate levels produced by the charge-lock controller.
//!
//! The J cell is held at the level of the first segment, locked, and armed;
//! its divider span is set so that one trigger edge reaches the other level.
//! Trigger edges are placed at every level change and the schedule is then
//! rebuilt from the emitted waveform.

use crate::controller::{emit_waveform, Command, ControllerConfig, ControllerState, FsmError, Input, TriggerSource};
use crate::physics::{PulseSchedule, Step};

use super::ExperimentError;

#[derive(Debug, Clone)]
pub struct Realized {
    pub schedule: PulseSchedule,
    pub controller: ControllerState,
    /// Emitted (low, high) levels.
    pub levels: (f64, f64),
}

fn ctl<T>(r: Result<T, impl std::fmt::Display>) -> Result<T, ExperimentError> {
    r.map_err(|e| ExperimentError::Controller(e.to_string()))
}

fn step(state: &mut ControllerState, input: Input, t: f64) -> Result<(), ExperimentError> {
    match state.step(input, t) {
        Ok(_) => Ok(()),
        Err(e @ (FsmError::IllegalTransition { .. } | FsmError::TimeReversal { .. })) => {
            Err(ExperimentError::Controller(e.to_string()))
        }
    }
}

/// Program the J cell for a base level and a second level, returning the
/// armed controller (no trigger edges yet).
pub fn program(cfg: &ControllerConfig, base: f64, other: f64) -> Result<(ControllerState, u8), ExperimentError> {
    let cell = cfg
        .cell_for_gate("J")
        .ok_or_else(|| ExperimentError::Controller("no controller cell wired to gate J".into()))? as u8;
    let gain = (cfg.cell.c_parasitic + cfg.cell.c_pulse) / cfg.cell.c_pulse;
    let span = (other - base) * gain;
    let (v_high, v_low) = if span >= 0.0 { (span, 0.0) } else { (0.0, -span) };
    let mut st = cfg.new_state();
    step(&mut st, ctl(Command::set_hold(cell, base))?.into(), 0.0)?;
    step(&mut st, ctl(Command::set_levels(cell, v_high, v_low))?.into(), 0.0)?;
    step(&mut st, ctl(Command::lock(cell))?.into(), 0.0)?;
    step(&mut st, ctl(Command::arm(cell, TriggerSource::External))?.into(), 0.0)?;
    Ok((st, cell))
}

pub fn realize(schedule: &PulseSchedule, cfg: &ControllerConfig) -> Result<Realized, ExperimentError> {
    let levels = schedule.vj_levels();
    if levels.len() > 2 {
        return Err(ExperimentError::TwoLevelViolation { levels });
    }
    let base = levels.first().copied().unwrap_or(0.0);
    let other = levels.get(1).copied().unwrap_or(base);
    let (mut st, cell) = program(cfg, base, other)?;
    let starts = schedule.start_times();
    let mut high = false;
    for (step_ix, s) in schedule.steps.iter().enumerate() {
        if let Step::Segment(seg) = s {
            let want_high = seg.v_j != base;
            if want_high != high {
                self::step(&mut st, Input::TriggerEdge, starts[step_ix])?;
                high = want_high;
            }
        }
    }
    let horizon = schedule.total_duration();
    let traces = emit_waveform(&st, &[("J".to_string(), cell as usize)], horizon, horizon.max(1e-12));
    let trace = &traces[0];
    let at = |t: f64| -> f64 {
        let i = trace.segments.partition_point(|s| s.start <= t);
        trace.segments[i.saturating_sub(1)].volts
    };
    let mut out = schedule.clone();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (step_ix, s) in out.steps.iter_mut().enumerate() {
        if let Step::Segment(seg) = s {
            seg.v_j = at(starts[step_ix]);
            lo = lo.min(seg.v_j);
            hi = hi.max(seg.v_j);
        }
    }
    Ok(Realized {
        schedule: out,
        controller: st,
        levels: (lo, hi),
    })
}

/// Levels the controller emits for a nominal (base, other) pair, evaluated
/// right after locking.
pub fn emitted_levels(cfg: &ControllerConfig, base: f64, other: f64) -> Result<(f64, f64), ExperimentError> {
    let (mut st, cell) = program(cfg, base, other)?;
    let v0 = st.cells[cell as usize].output(0.0);
    step(&mut st, Input::TriggerEdge, 0.0)?;
    let v1 = st.cells[cell as usize].output(0.0);
    Ok((v0, v1))
}
