//! Piecewise-constant density-matrix evolution.

use std::collections::HashMap;

use super::hamiltonian::{hamiltonian_with, MwDrive, Offsets};
use super::linalg::{propagator, Mat4};
use super::noise::{amplitude_damping, depolarize, sample_offsets, white_dephasing};
use super::params::{NoiseModel, SpinSystemParams};
use super::schedule::{EpsilonStage, PulseSchedule, Segment, Step};
use super::state::{PhysicsError, TwoSpinState};

pub fn segment_drive(seg: &Segment) -> MwDrive {
    MwDrive {
        on: seg.mw_on,
        f_mw: seg.f_mw,
        amp: seg.mw_amp,
        phase: seg.phase,
    }
}

pub fn segment_propagator(params: &SpinSystemParams, seg: &Segment, off: &Offsets) -> Mat4 {
    let h = hamiltonian_with(params, seg.v_j, &segment_drive(seg), off);
    propagator(&h, seg.duration)
}

type SegKey = [u64; 6];

fn key(seg: &Segment) -> SegKey {
    [
        seg.duration.to_bits(),
        seg.v_j.to_bits(),
        seg.mw_on as u64,
        seg.f_mw.to_bits(),
        seg.phase.to_bits(),
        seg.mw_amp.to_bits(),
    ]
}

/// Evolves states for one fixed set of per-shot offsets, caching segment
/// propagators so repeated pulses are exponentiated once.
pub struct Evolver<'a> {
    params: &'a SpinSystemParams,
    offsets: Offsets,
    s_freq: f64,
    s_jfrac: f64,
    cache: HashMap<SegKey, Mat4>,
}

impl<'a> Evolver<'a> {
    pub fn new(params: &'a SpinSystemParams, noise: &NoiseModel, offsets: Offsets) -> Self {
        Evolver {
            params,
            offsets,
            s_freq: noise.s_white(),
            s_jfrac: noise.s_white_jfrac(),
            cache: HashMap::new(),
        }
    }

    /// Noise-free evolver.
    pub fn ideal(params: &'a SpinSystemParams) -> Self {
        Self::new(params, &NoiseModel::off(), Offsets::NONE)
    }

    pub fn propagator(&mut self, seg: &Segment) -> Mat4 {
        let (params, off) = (self.params, self.offsets);
        *self
            .cache
            .entry(key(seg))
            .or_insert_with(|| segment_propagator(params, seg, &off))
    }

    pub fn run(&mut self, state: &TwoSpinState, schedule: &PulseSchedule) -> Result<TwoSpinState, PhysicsError> {
        state.check_cheap()?;
        let mut rho = state.rho;
        for step in &schedule.steps {
            match step {
                Step::Segment(seg) => {
                    if seg.stage != EpsilonStage::Sep13 {
                        continue;
                    }
                    let u = self.propagator(seg);
                    rho = u * rho * u.adjoint();
                    let j = self.params.exchange(seg.v_j) * self.offsets.j_mult;
                    white_dephasing(&mut rho, self.s_freq, self.s_jfrac * j * j, seg.duration);
                    if let Some(t1) = self.params.t1 {
                        let gamma = -(-seg.duration / t1).exp_m1();
                        rho = amplitude_damping(&amplitude_damping(&rho, 1, gamma), 2, gamma);
                    }
                }
                Step::Gate(u) => rho = u * rho * u.adjoint(),
                Step::Depolarize { qubit, p } => rho = depolarize(&rho, *qubit, *p),
            }
            TwoSpinState { rho }.check_cheap()?;
        }
        let out = TwoSpinState { rho };
        out.check()?;
        Ok(out)
    }
}

/// Evolve one shot: quasi-static offsets are drawn from
/// `(noise.rng_seed, shot_index)`.
pub fn evolve(
    state: &TwoSpinState,
    schedule: &PulseSchedule,
    params: &SpinSystemParams,
    noise: &NoiseModel,
    shot_index: u64,
) -> Result<TwoSpinState, PhysicsError> {
    let off = sample_offsets(noise, noise.rng_seed, shot_index);
    Evolver::new(params, noise, off).run(state, schedule)
}

/// Product of the unitary steps of a schedule (channels are skipped).
pub fn schedule_unitary(params: &SpinSystemParams, schedule: &PulseSchedule, off: &Offsets) -> Mat4 {
    let mut u = Mat4::identity();
    for step in &schedule.steps {
        match step {
            Step::Segment(seg) if seg.stage == EpsilonStage::Sep13 => {
                u = segment_propagator(params, seg, off) * u;
            }
            Step::Gate(g) => u = g * u,
            _ => {}
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::state::{prepare, PrepKind};
    use crate::physics::Spam;

    #[test]
    fn empty_schedule_is_identity() {
        let p = SpinSystemParams::default();
        let s = prepare(PrepKind::Singlet, &Spam::IDEAL);
        let out = evolve(&s, &PulseSchedule::new(), &p, &NoiseModel::default(), 0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn init_and_read_segments_are_not_evolved() {
        let p = SpinSystemParams::default();
        let s = prepare(PrepKind::Singlet, &Spam::IDEAL);
        let mut sch = PulseSchedule::new();
        sch.segment(Segment::driven(1e-6, 1.2, p.f2(1.2), 0.0, 0.1).at_stage(EpsilonStage::Init04));
        let out = evolve(&s, &sch, &p, &NoiseModel::off(), 0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn rejects_bad_input_state() {
        let p = SpinSystemParams::default();
        let mut s = prepare(PrepKind::Singlet, &Spam::IDEAL);
        s.rho = s.rho.scale(2.0);
        assert!(evolve(&s, &PulseSchedule::new(), &p, &NoiseModel::off(), 0).is_err());
    }

    #[test]
    fn t1_damps_toward_ground() {
        let p = SpinSystemParams {
            t1: Some(1e-6),
            ..Default::default()
        };
        let s = prepare(PrepKind::Singlet, &Spam::IDEAL);
        let mut sch = PulseSchedule::new();
        sch.segment(Segment::idle(50e-6, 1.2, p.f2(1.2)));
        let out = evolve(&s, &sch, &p, &NoiseModel::off(), 0).unwrap();
        assert!(out.population(3) > 1.0 - 1e-12);
    }
}
