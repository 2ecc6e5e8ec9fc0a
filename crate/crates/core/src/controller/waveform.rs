//! Gate-voltage traces reconstructed from the per-cell history.

use std::io::{self, Write};

use super::cell::{cell_output, ClfgCell};
use super::fsm::ControllerState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub volts: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateTrace {
    pub gate: String,
    pub cell: usize,
    /// Sample times and voltages, strictly increasing in time.
    pub samples: Vec<(f64, f64)>,
    /// Times at which the output function changes.
    pub boundaries: Vec<f64>,
    /// Piecewise-constant view: value at each segment start.
    pub segments: Vec<Segment>,
}

impl GateTrace {
    /// Exact integral of the piecewise-constant trace over its sample span.
    pub fn integral(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].1 * (w[1].0 - w[0].0))
            .sum()
    }
}

/// State of `cell` in effect at `t` (the last snapshot at or before `t`).
fn cell_at(history: &[(f64, ClfgCell)], t: f64) -> &ClfgCell {
    let idx = history.partition_point(|(ts, _)| *ts <= t);
    &history[idx.saturating_sub(1)].1
}

/// Times in `(0, horizon]` at which the cell's output actually changes.
fn output_boundaries(history: &[(f64, ClfgCell)], horizon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i < history.len() {
        let t = history[i].0;
        let before = &history[i - 1].1;
        // collapse simultaneous snapshots
        while i + 1 < history.len() && history[i + 1].0 == t {
            i += 1;
        }
        let after = &history[i].1;
        if t > 0.0 && t <= horizon && cell_output(before, t) != cell_output(after, t) {
            out.push(t);
        }
        i += 1;
    }
    out
}

pub fn emit_waveform(
    state: &ControllerState,
    gates: &[(String, usize)],
    horizon: f64,
    dt: f64,
) -> Vec<GateTrace> {
    assert!(dt > 0.0, "dt must be positive");
    gates
        .iter()
        .map(|(gate, cell)| {
            let history = state.history(*cell);
            let boundaries = output_boundaries(history, horizon);
            let n = (horizon / dt).floor() as usize;
            let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
            times.extend_from_slice(&boundaries);
            if times.last().is_some_and(|&t| t < horizon) {
                times.push(horizon);
            }
            times.sort_by(f64::total_cmp);
            times.dedup();
            let samples: Vec<(f64, f64)> = times
                .iter()
                .map(|&t| (t, cell_output(cell_at(history, t), t)))
                .collect();
            let mut edges = vec![0.0];
            edges.extend(boundaries.iter().copied().filter(|&b| b < horizon));
            edges.push(horizon);
            let segments = edges
                .windows(2)
                .filter(|w| w[1] > w[0])
                .map(|w| Segment {
                    start: w[0],
                    end: w[1],
                    volts: cell_output(cell_at(history, w[0]), w[0]),
                })
                .collect();
            GateTrace {
                gate: gate.clone(),
                cell: *cell,
                samples,
                boundaries,
                segments,
            }
        })
        .collect()
}

/// Write traces as `time_s,gate,volts` rows after the given comment lines.
pub fn write_waveform_csv<W: Write>(mut w: W, traces: &[GateTrace], comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "time_s,gate,volts")?;
    for tr in traces {
        for (t, v) in &tr.samples {
            writeln!(w, "{t:e},{},{v:.12e}", tr.gate)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{CellParams, Command, Input, OscillatorConfig, TriggerSource};

    fn gates() -> Vec<(String, usize)> {
        vec![("J".to_string(), 0)]
    }

    fn pulsed(t1: f64, t2: f64) -> ControllerState {
        let mut s = ControllerState::new(CellParams::default(), OscillatorConfig::default());
        s.step(Command::set_hold(0, 1.2).unwrap().into(), 0.0).unwrap();
        s.step(Command::set_levels(0, 1.0, 0.0).unwrap().into(), 0.0)
            .unwrap();
        s.step(Command::lock(0).unwrap().into(), 0.0).unwrap();
        s.step(Command::arm(0, TriggerSource::External).unwrap().into(), 0.0)
            .unwrap();
        s.step(Input::TriggerEdge, t1).unwrap();
        s.step(Input::TriggerEdge, t2).unwrap();
        s
    }

    #[test]
    fn two_edges_three_segments() {
        let s = pulsed(1e-6, 2e-6);
        let tr = &emit_waveform(&s, &gates(), 3e-6, 1e-7)[0];
        assert_eq!(tr.boundaries, vec![1e-6, 2e-6]);
        assert_eq!(tr.segments.len(), 3);
        let lo = tr.segments[0].volts;
        assert!((tr.segments[1].volts - lo - 0.1).abs() < 1e-12);
        assert!((tr.segments[2].volts - lo).abs() < 1e-12);
    }

    #[test]
    fn unlocked_hold_ramp() {
        let mut s = ControllerState::new(CellParams::default(), OscillatorConfig::default());
        s.step(Command::set_hold(0, 0.5).unwrap().into(), 1e-6).unwrap();
        s.step(Command::set_hold(0, 0.9).unwrap().into(), 2e-6).unwrap();
        let tr = &emit_waveform(&s, &gates(), 3e-6, 1e-6)[0];
        assert_eq!(tr.boundaries, vec![1e-6, 2e-6]);
        // initial 0 V, then the two programmed values
        assert_eq!(tr.segments.len(), 3);
        assert_eq!(tr.segments[0].volts, 0.0);
    }

    #[test]
    fn samples_match_cell_output() {
        let s = pulsed(0.35e-6, 1.7e-6);
        let tr = &emit_waveform(&s, &gates(), 2e-6, 0.1e-6)[0];
        for &(t, v) in &tr.samples {
            let expect = cell_output(cell_at(s.history(0), t), t);
            assert_eq!(v, expect);
        }
        assert!(tr.samples.iter().any(|&(t, _)| t == 0.35e-6));
    }

    #[test]
    fn high_window_integral() {
        let s = pulsed(1e-6, 2e-6);
        let tr = &emit_waveform(&s, &gates(), 3e-6, 0.25e-6)[0];
        let base = tr.segments[0].volts;
        let excess: f64 = tr
            .samples
            .windows(2)
            .map(|w| (w[0].1 - base) * (w[1].0 - w[0].0))
            .sum();
        assert!((excess / 1e-7 - 1.0).abs() < 1e-9);
    }
}
