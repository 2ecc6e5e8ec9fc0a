//! Exchange oscillations: CZ free induction and the decoupled (echoed) CZ.
//!
//! Sequence: T− → X on the control → X/2 on the target → exchange block →
//! virtual Z on the target → X/2 on the target → parity readout.
//!
//! The virtual Z removes the relative phase the target picks up in the
//! control-↓ branch of the noiseless block, which leaves the phase of the
//! populated control-↑ branch advancing at exactly the conditional rate.

use std::f64::consts::PI;

use crate::fitting::{fit_with_options, FitModel, FitOptions};
use crate::physics::gates::{rotation, rx_on, rz_on, xx};
use crate::physics::linalg::on_qubit;
use crate::physics::{
    schedule_unitary, EpsilonStage, Mat4, Offsets, PrepKind, PulseSchedule, Segment, SpinSystemParams, Step,
};

use super::runner::{assemble, axis, run_grid, Job, T_STAGE};
use super::spec::{ControlPath, ExperimentKind, ExperimentSpec, Setup};
use super::single::record_fit;
use super::{cryo, ExperimentError, ExperimentResult};

fn basis_index(q1_down: bool, q2_down: bool) -> usize {
    2 * q1_down as usize + q2_down as usize
}

/// Relative phase arg⟨t↑|U|t↑⟩ − arg⟨t↓|U|t↓⟩ of the target with the
/// control down.
pub fn control_down_phase(u: &Mat4, target: u8) -> f64 {
    let (up, down) = if target == 2 {
        (basis_index(true, false), basis_index(true, true))
    } else {
        (basis_index(false, true), basis_index(true, true))
    };
    u[(up, up)].arg() - u[(down, down)].arg()
}

/// Exchange block for one exchange time.
fn block(spec: &ExperimentSpec, spin: &SpinSystemParams, t: f64, v_base: f64, v_ex: f64, f_frame: f64) -> PulseSchedule {
    let mut b = PulseSchedule::new();
    let exchange = |b: &mut PulseSchedule, d: f64| {
        if d > 0.0 {
            b.segment(Segment::idle(d, v_ex, f_frame));
        }
    };
    match spec.kind {
        ExperimentKind::Dcz => {
            for _ in 0..2 {
                exchange(&mut b, t / 2.0);
                echo(&mut b, spec, spin, v_base);
            }
        }
        _ => exchange(&mut b, t),
    }
    b
}

fn echo(b: &mut PulseSchedule, spec: &ExperimentSpec, spin: &SpinSystemParams, v_base: f64) {
    if !spec.finite_echo {
        b.gate(xx());
        return;
    }
    let amp = spin.amp_for_rabi(spec.rabi_frequency);
    let d = 1.0 / (2.0 * spec.rabi_frequency);
    for q in [1, 2] {
        b.segment(Segment::driven(d, v_base, spin.qubit_frequency(q, v_base), 0.0, amp));
    }
}

/// Full schedule with the frame correction computed from the (possibly
/// controller-realised) block.
pub fn schedule(spec: &ExperimentSpec, setup: &Setup, t: f64, v_base: f64, v_ex: f64) -> Result<PulseSchedule, ExperimentError> {
    let spin = &setup.spin;
    let target = spec.qubit;
    let control = 3 - target;
    let f_frame = spec.f_mw.unwrap_or_else(|| spin.qubit_frequency(target, v_base));
    let half = on_qubit(target, &rotation(0.0, PI / 2.0));
    let mut s = PulseSchedule::new();
    s.segment(Segment::idle(T_STAGE, v_base, f_frame).at_stage(EpsilonStage::Init04));
    s.gate(rx_on(control, PI));
    s.gate(half);
    let start = s.steps.len();
    s.extend(&block(spec, spin, t, v_base, v_ex, f_frame));
    let end = s.steps.len();
    s.gate(Mat4::identity());
    s.gate(half);
    s.segment(Segment::idle(T_STAGE, v_base, f_frame).at_stage(EpsilonStage::ReadPsb));
    if spec.control_path == ControlPath::CryoCmos {
        s = cryo::realize(&s, &setup.controller)?.schedule;
    }
    let blk = PulseSchedule {
        steps: s.steps[start..end].to_vec(),
    };
    let u = schedule_unitary(spin, &blk, &Offsets::NONE);
    s.steps[end] = Step::Gate(rz_on(target, control_down_phase(&u, target)));
    Ok(s)
}

pub fn run_exchange(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let ts = spec.axis("t_exchange")?;
    let (v_base, v_default) = spec.levels(&setup.spin);
    let vjs = spec.axis_opt("v_j")?;
    let rows = vjs.clone().unwrap_or_else(|| vec![v_default]);
    let n_t = ts.len();
    let points = run_grid(setup, spec, rows.len() * n_t, |i| {
        Ok(Job {
            prep: PrepKind::TMinus,
            schedule: schedule(spec, setup, ts[i % n_t], v_base, rows[i / n_t])?,
        })
    })?;
    let axes = match &vjs {
        Some(v) => vec![axis("v_j", v), axis("t_exchange", &ts)],
        None => vec![axis("t_exchange", &ts)],
    };
    let mut res = assemble(spec, setup, axes, &points);
    for r in 0..rows.len() {
        let prefix = if vjs.is_some() { format!("row{r}") } else { String::new() };
        let y = res.row(r).to_vec();
        let fit = fit_with_options(&ts, &y, FitModel::Cz, None, &FitOptions::default());
        record_fit(&mut res, &prefix, "exchange", fit);
    }
    Ok(res)
}
