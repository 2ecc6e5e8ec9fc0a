//! Shot loop shared by every protocol.

use rayon::prelude::*;

use crate::physics::noise::stream;
use crate::physics::{
    prepare, rng_for, sample_offsets, sample_shot, Evolver, Offsets, PrepKind, PulseSchedule, Readout, Segment,
};

use super::cryo;
use super::result::{Axis, ExperimentResult, Metadata, VERSION};
use super::spec::{ControlPath, ExperimentSpec, Setup};
use super::ExperimentError;

/// Duration of the (unevolved) initialisation and readout stages.
pub const T_STAGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOutcome {
    /// Shot-averaged probability before sampling.
    pub p_mean: f64,
    pub blocked: u64,
    pub shots: u64,
}

impl PointOutcome {
    pub fn p_blocked(&self) -> f64 {
        self.blocked as f64 / self.shots as f64
    }
}

/// A schedule and its preparation, ready to simulate.
#[derive(Debug, Clone)]
pub struct Job {
    pub prep: PrepKind,
    pub schedule: PulseSchedule,
}

/// Wrap a body in unevolved INIT and READ stages at `v_base`.
pub fn with_stages(body: &PulseSchedule, v_base: f64, f_mw: f64) -> PulseSchedule {
    use crate::physics::EpsilonStage::{Init04, ReadPsb};
    let mut s = PulseSchedule::new();
    s.segment(Segment::idle(T_STAGE, v_base, f_mw).at_stage(Init04));
    s.extend(body);
    s.segment(Segment::idle(T_STAGE, v_base, f_mw).at_stage(ReadPsb));
    s
}

/// Apply the control path: the CRYO_CMOS path replaces every exchange
/// level by what the programmed controller actually emits.
pub fn realize(spec: &ExperimentSpec, setup: &Setup, schedule: PulseSchedule) -> Result<PulseSchedule, ExperimentError> {
    match spec.control_path {
        ControlPath::Rt => Ok(schedule),
        ControlPath::CryoCmos => cryo::realize(&schedule, &setup.controller).map(|r| r.schedule),
    }
}

/// Simulate `shots` single-shot outcomes of one job.
///
/// Shot `s` uses the quasi-static offsets of `(seed, s)`, so every grid
/// point sees the same noise realisations; readout draws come from a stream
/// keyed by `point`.
pub fn simulate(setup: &Setup, seed: u64, point: &[u64], job: &Job, shots: u32) -> Result<PointOutcome, ExperimentError> {
    job.schedule.validate()?;
    let spin = &setup.spin;
    let noise = &setup.noise;
    let state0 = prepare(job.prep, &spin.spam);
    let mut keys = vec![stream::READOUT];
    keys.extend_from_slice(point);
    let mut rng = rng_for(seed, &keys);
    let mut blocked = 0u64;
    let mut p_sum = 0.0;
    if noise.is_quasi_static_free() {
        let out = Evolver::new(spin, noise, Offsets::NONE).run(&state0, &job.schedule)?;
        let p = Readout::Parity.measure(&out, &spin.spam);
        for _ in 0..shots {
            blocked += sample_shot(p, &mut rng) as u64;
        }
        p_sum = p * shots as f64;
    } else {
        for s in 0..shots as u64 {
            let off = sample_offsets(noise, seed, s);
            let out = Evolver::new(spin, noise, off).run(&state0, &job.schedule)?;
            let p = Readout::Parity.measure(&out, &spin.spam);
            p_sum += p;
            blocked += sample_shot(p, &mut rng) as u64;
        }
    }
    Ok(PointOutcome {
        p_mean: p_sum / shots as f64,
        blocked,
        shots: shots as u64,
    })
}

/// Build and simulate every grid point in parallel; results come back in
/// index order.
pub fn run_grid<F>(setup: &Setup, spec: &ExperimentSpec, n: usize, build: F) -> Result<Vec<PointOutcome>, ExperimentError>
where
    F: Fn(usize) -> Result<Job, ExperimentError> + Sync,
{
    let seed = spec.effective_seed(&setup.noise);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let job = build(i)?;
            simulate(setup, seed, &[i as u64], &job, spec.shots)
        })
        .collect()
}

pub fn assemble(spec: &ExperimentSpec, setup: &Setup, axes: Vec<Axis>, points: &[PointOutcome]) -> ExperimentResult {
    ExperimentResult {
        axes,
        p_blocked: points.iter().map(PointOutcome::p_blocked).collect(),
        blocked: points.iter().map(|p| p.blocked).collect(),
        shot_counts: points.iter().map(|p| p.shots).collect(),
        fit: Default::default(),
        psd: Vec::new(),
        warnings: Vec::new(),
        metadata: Metadata {
            version: VERSION.into(),
            kind: spec.kind,
            control_path: spec.control_path,
            config_hash: setup.config_hash.clone(),
            seed: spec.effective_seed(&setup.noise),
            shots: spec.shots,
            thermal: setup.thermal,
            white_scale: setup.noise.white_scale,
        },
    }
}

pub fn axis(name: &str, values: &[f64]) -> Axis {
    Axis {
        name: name.into(),
        values: values.to_vec(),
    }
}
