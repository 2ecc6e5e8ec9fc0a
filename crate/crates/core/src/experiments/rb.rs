//! Single-qubit randomized benchmarking with physical driven pulses.

use rand::Rng;
use rayon::prelude::*;

use crate::fitting::{fit_with_options, FitModel, FitOptions};
use crate::physics::noise::stream;
use crate::physics::{rng_for, PrepKind, PulseSchedule, Segment};

use super::clifford::CliffordGroup;
use super::result::FitValue;
use super::runner::{assemble, axis, realize, simulate, with_stages, Job, PointOutcome};
use super::single::{frame, record_fit};
use super::spec::{ExperimentSpec, Setup};
use super::{ExperimentError, ExperimentResult};

/// Random Clifford indices for one (length, randomization) pair, followed by
/// the recovery element.
pub fn sequence(seed: u64, m: u32, randomization: u32) -> Vec<usize> {
    let g = CliffordGroup::get();
    let mut rng = rng_for(seed, &[stream::SEQUENCE, m as u64, randomization as u64]);
    let mut seq: Vec<usize> = (0..m).map(|_| rng.random_range(0..g.len())).collect();
    seq.push(g.recovery(&seq));
    seq
}

/// Compile Clifford indices into driven segments on the addressed qubit,
/// with an optional depolarizing channel after each Clifford.
pub fn compile(seq: &[usize], spec: &ExperimentSpec, setup: &Setup, v: f64, f_frame: f64) -> PulseSchedule {
    let g = CliffordGroup::get();
    let amp = setup.spin.amp_for_rabi(spec.rabi_frequency);
    let mut s = PulseSchedule::new();
    for &c in seq {
        for gen in &g.elements[c].word {
            let t = gen.angle() / (2.0 * std::f64::consts::PI * spec.rabi_frequency);
            s.segment(Segment::driven(t, v, f_frame, gen.phase(), amp));
        }
        if spec.depolarizing > 0.0 {
            s.depolarize(spec.qubit, spec.depolarizing);
        }
    }
    s
}

/// Survival (1 − p_blocked) is fitted to A·r^m + B with B held at the value
/// a fully depolarized qubit reads out as. F = (1 + r)/2.
pub fn run_rb_1q(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let lengths = spec.rb_lengths.clone();
    let (v_base, v_active) = spec.levels(&setup.spin);
    let f_frame = frame(spec, setup, v_active);
    let seed = spec.effective_seed(&setup.noise);
    let n_r = spec.rb_randomizations as usize;
    let jobs: Vec<(usize, usize)> = (0..lengths.len())
        .flat_map(|i| (0..n_r).map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<PointOutcome> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let seq = sequence(seed, lengths[i], r as u32);
            let body = compile(&seq, spec, setup, v_active, f_frame);
            let job = Job {
                prep: PrepKind::Singlet,
                schedule: realize(spec, setup, with_stages(&body, v_base, f_frame))?,
            };
            simulate(setup, seed, &[i as u64, r as u64], &job, spec.shots)
        })
        .collect::<Result<_, _>>()?;
    let points: Vec<PointOutcome> = outcomes
        .chunks(n_r)
        .map(|c| PointOutcome {
            p_mean: c.iter().map(|p| p.p_mean).sum::<f64>() / c.len() as f64,
            blocked: c.iter().map(|p| p.blocked).sum(),
            shots: c.iter().map(|p| p.shots).sum(),
        })
        .collect();
    let m: Vec<f64> = lengths.iter().map(|&m| m as f64).collect();
    let mut res = assemble(spec, setup, vec![axis("m", &m)], &points);
    let survival: Vec<f64> = res.p_blocked.iter().map(|p| 1.0 - p).collect();
    let opts = FitOptions {
        fixed_b: Some(1.0 - setup.spin.spam.apply(0.5)),
        ..Default::default()
    };
    let fit = fit_with_options(&m, &survival, FitModel::Rb, None, &opts);
    if let Some(f) = record_fit(&mut res, "", "rb", fit) {
        res.fit.insert(
            "r_per_clifford_error".into(),
            FitValue {
                value: 1.0 - f.get("r"),
                stderr: f.err("r"),
                lower_bound: false,
            },
        );
    }
    Ok(res)
}
