mod common;

use std::f64::consts::PI;

use common::*;
use cryospin::controller::{CellParams, ControllerConfig, OscSettings};
use cryospin::experiments::cryo::{emitted_levels, realize};
use cryospin::experiments::feedback::{condition_power, write_feedback_csv};
use cryospin::experiments::global::global_schedule;
use cryospin::experiments::runner::{simulate, with_stages, Job};
use cryospin::experiments::{
    run_experiment, run_with_thermal_feedback, ControlPath, ExperimentError, ExperimentKind, ExperimentSpec,
    FeedbackCondition, FeedbackSpec, Setup, SweepAxis,
};
use cryospin::physics::{NoiseModel, PrepKind, PulseSchedule, Segment};
use cryospin::thermal::{thermal_state, ThermalConfig};

fn ramsey_spec(points: usize, t_max: f64, shots: u32) -> ExperimentSpec {
    ExperimentSpec {
        shots,
        detuning: 500e3,
        ..ExperimentSpec::new(ExperimentKind::Ramsey).with_axis(SweepAxis::linear("t_wait", 0.0, t_max, points))
    }
}

fn noiseless() -> Setup {
    Setup::new(ideal_spin(), NoiseModel::off())
}

#[test]
fn rt_and_cryo_paths_agree_bit_for_bit() {
    let mut ctl = ControllerConfig::default();
    ctl.cell = CellParams {
        tau_leak: f64::INFINITY,
        ..ctl.cell
    };
    let spin = cryospin::physics::SpinSystemParams::default();
    let (v0, v1) = emitted_levels(&ctl, 1.30, 1.20).unwrap();
    let setup = Setup {
        controller: ctl,
        ..Setup::new(spin, NoiseModel::default())
    };
    let rt = ExperimentSpec {
        v_base: Some(v0),
        v_active: Some(v1),
        f_mw: Some(spin.f2(1.20)),
        seed: Some(4),
        ..ramsey_spec(41, 6e-6, 50)
    };
    let cryo = ExperimentSpec {
        control_path: ControlPath::CryoCmos,
        ..rt.clone()
    };
    let a = run_experiment(&rt, &setup).unwrap();
    let b = run_experiment(&cryo, &setup).unwrap();
    assert_eq!(a.p_blocked, b.p_blocked);
    assert_eq!(a.blocked, b.blocked);
    assert_eq!(a.fit, b.fit);
}

#[test]
fn three_levels_cannot_be_realised() {
    let mut s = PulseSchedule::new();
    for v in [1.2, 1.3, 1.4] {
        s.segment(Segment::idle(1e-6, v, 13.9e9));
    }
    match realize(&s, &ControllerConfig::default()) {
        Err(ExperimentError::TwoLevelViolation { levels }) => assert_eq!(levels.len(), 3),
        other => panic!("{other:?}"),
    }
    // two levels are fine
    s.steps.pop();
    assert!(realize(&s, &ControllerConfig::default()).is_ok());
}

#[test]
fn shot_counts_are_binomial_across_seeds() {
    // a quarter-period Rabi pulse leaves p = 0.5 with everything ideal
    let setup = noiseless();
    let spin = &setup.spin;
    let mut body = PulseSchedule::new();
    body.segment(Segment::driven(0.25e-6, 1.2, spin.f2(1.2), 0.0, spin.amp_for_rabi(1e6)));
    let job = Job {
        prep: PrepKind::Singlet,
        schedule: with_stages(&body, 1.3, spin.f2(1.2)),
    };
    let shots = 400;
    let n_seeds = 400;
    let ps: Vec<f64> = (0..n_seeds)
        .map(|s| simulate(&setup, s, &[0], &job, shots).unwrap().p_blocked())
        .collect();
    let p = simulate(&setup, 0, &[0], &job, 1).unwrap().p_mean;
    assert!((p - 0.5).abs() < 1e-3, "{p}");
    let mean = ps.iter().sum::<f64>() / n_seeds as f64;
    let var = ps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_seeds - 1) as f64;
    let expect = p * (1.0 - p) / shots as f64;
    assert!((mean - p).abs() < 4.0 * (expect / n_seeds as f64).sqrt());
    assert!((var / expect - 1.0).abs() < 0.2, "var ratio {}", var / expect);
}

#[test]
fn results_serialise_reproducibly() {
    let setup = Setup::new(cryospin::physics::SpinSystemParams::default(), NoiseModel::default());
    let spec = ExperimentSpec {
        seed: Some(9),
        ..ramsey_spec(31, 6e-6, 40)
    };
    let bytes = |s: &ExperimentSpec| {
        let mut v = Vec::new();
        run_experiment(s, &setup).unwrap().write_json(&mut v).unwrap();
        v
    };
    assert_eq!(bytes(&spec), bytes(&spec));
    let other = ExperimentSpec {
        seed: Some(10),
        ..spec.clone()
    };
    assert_ne!(bytes(&spec), bytes(&other));
}

/// Two-level Rabi formula for the flip probability.
fn chevron(omega: f64, delta: f64, t: f64) -> f64 {
    let w = (omega * omega + delta * delta).sqrt();
    omega * omega / (w * w) * (PI * w * t).sin().powi(2)
}

#[test]
fn chevron_follows_the_rabi_formula() {
    let setup = noiseless();
    let spin = &setup.spin;
    let omega = 0.5e6;
    let amp = spin.amp_for_rabi(omega);
    let f0 = spin.f2(1.2);
    // From T− only the target can move, so the flip probability is
    // 1 − p_blocked. (From a singlet the spectator's small off-resonant
    // amplitude interferes with the target's and shifts detuned points by
    // about 2Ω/Δ₁ times the flip amplitude.)
    let p_at = |delta: f64, t: f64| {
        let mut body = PulseSchedule::new();
        body.segment(Segment::driven(t, 1.2, f0 + delta, 0.0, amp));
        let job = Job {
            prep: PrepKind::TMinus,
            schedule: with_stages(&body, 1.3, f0 + delta),
        };
        1.0 - simulate(&setup, 0, &[0], &job, 1).unwrap().p_mean
    };
    // resonant π pulse
    assert!((p_at(0.0, 1.0 / (2.0 * omega)) - 1.0).abs() < 1e-3);
    // Δ = Ω peaks at one half
    let t_peak = 1.0 / (2.0 * 2f64.sqrt() * omega);
    assert!((p_at(omega, t_peak) - 0.5).abs() < 1e-3);
    for &(d, t) in &[(0.3e6, 0.7e-6), (1.1e6, 0.4e-6), (2.0e6, 1.3e-6)] {
        let (plus, minus) = (p_at(d, t), p_at(-d, t));
        assert!((plus - chevron(omega, d, t)).abs() < 1e-3, "{d} {t}");
        assert!((plus - minus).abs() < 1e-3);
    }
}

#[test]
fn chevron_grid_shape() {
    let spin = ideal_spin();
    let spec = ExperimentSpec {
        shots: 20,
        ..ExperimentSpec::new(ExperimentKind::RabiChevron)
            .with_axis(SweepAxis::linear("f_mw", spin.f2(1.2) - 2e6, spin.f2(1.2) + 2e6, 9))
            .with_axis(SweepAxis::linear("t_mw", 0.0, 2e-6, 21))
    };
    let res = run_experiment(&spec, &noiseless()).unwrap();
    assert_eq!(res.shape(), vec![9, 21]);
    assert_eq!(res.p_blocked.len(), 9 * 21);
    assert!(res.p_blocked.iter().all(|p| (0.0..=1.0).contains(p)));
    let f_row = res.fit_value("f_mw_fit_row").unwrap();
    assert!((f_row - spin.f2(1.2)).abs() < 1.0);
    let mut csv = Vec::new();
    res.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.lines().any(|l| l == "f_mw,t_mw,p_blocked,blocked,shots"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9 * 21);
}

#[test]
fn noiseless_ramsey_is_a_lower_bound() {
    let res = run_experiment(&ramsey_spec(81, 10e-6, 200), &noiseless()).unwrap();
    let t = res.fit.get("T").unwrap();
    assert!(t.lower_bound, "{:?}", res.fit);
    assert_eq!(t.value, 10e-6);
}

#[test]
fn dephasing_time_scales_inversely_with_spread() {
    let t2 = |sigma: f64| {
        let noise = NoiseModel {
            sigma_f1: sigma,
            sigma_f2: sigma,
            sigma_j_frac: 0.0,
            ..NoiseModel::off()
        };
        let setup = Setup::new(ideal_spin(), noise);
        let spec = ExperimentSpec {
            seed: Some(3),
            ..ramsey_spec(121, 3.0 / sigma, 2000)
        };
        run_experiment(&spec, &setup).unwrap().fit_value("T").unwrap()
    };
    let (a, b) = (t2(50e3), t2(100e3));
    let theory = |s: f64| 1.0 / (2f64.sqrt() * PI * s);
    assert!(rel(a, theory(50e3)) < 0.05, "{a}");
    assert!(rel(b, theory(100e3)) < 0.05, "{b}");
    assert!(rel(a / b, 2.0) < 0.05, "{}", a / b);
}

#[test]
fn cpmg_without_noise_has_no_spectrum() {
    let spec = ExperimentSpec {
        shots: 50,
        cpmg_n: vec![1, 2],
        ..ExperimentSpec::new(ExperimentKind::CpmgPsd).with_axis(SweepAxis::geometric("t_total", 1e-5, 1e-3, 8))
    };
    assert_eq!(
        run_experiment(&spec, &noiseless()).unwrap_err(),
        ExperimentError::InsufficientDecay
    );
}

#[test]
fn exchange_below_onset_does_nothing() {
    for kind in [ExperimentKind::CzFid, ExperimentKind::Dcz] {
        let spec = ExperimentSpec {
            shots: 100,
            v_active: Some(1.20),
            ..ExperimentSpec::new(kind).with_axis(SweepAxis::linear("t_exchange", 0.0, 20e-6, 21))
        };
        let res = run_experiment(&spec, &noiseless()).unwrap();
        let first = res.p_blocked[0];
        assert!(res.p_blocked.iter().all(|&p| p == first), "{kind:?}: {:?}", res.p_blocked);
    }
}

#[test]
fn global_drive_without_pulse_barely_rotates() {
    let setup = noiseless();
    let spec = ExperimentSpec {
        rabi_frequency: 241.8e3,
        ..ExperimentSpec::new(ExperimentKind::GlobalRabi)
    };
    let f = setup.spin.f2(1.30);
    let job = Job {
        prep: PrepKind::TMinus,
        schedule: global_schedule(&spec, &setup, f, 0.0),
    };
    // T− reads blocked; any rotation would lower it
    let p = simulate(&setup, 0, &[0], &job, 1).unwrap().p_mean;
    assert!(p > 0.998, "{p}");
    let job = Job {
        schedule: global_schedule(&spec, &setup, f, 1.0 / (2.0 * 241.8e3)),
        ..job
    };
    let p = simulate(&setup, 0, &[0], &job, 1).unwrap().p_mean;
    assert!(p < 0.01, "{p}");
}

#[test]
fn rb_residuals_have_random_signs() {
    let noise = NoiseModel::off();
    let setup = Setup::new(cryospin::physics::SpinSystemParams::default(), noise);
    let lengths: Vec<u32> = (0..40).map(|k| 1 + 15 * k).collect();
    let spec = ExperimentSpec {
        shots: 200,
        rb_lengths: lengths.clone(),
        rb_randomizations: 5,
        depolarizing: 0.004,
        seed: Some(21),
        ..ExperimentSpec::new(ExperimentKind::Rb1q)
    };
    let res = run_experiment(&spec, &setup).unwrap();
    let a = res.fit_value("A").unwrap();
    let r = res.fit_value("r").unwrap();
    let b = 1.0 - setup.spin.spam.apply(0.5);
    let signs: Vec<bool> = lengths
        .iter()
        .zip(&res.p_blocked)
        .map(|(&m, p)| (1.0 - p) - (a * r.powf(m as f64) + b) > 0.0)
        .collect();
    let n1 = signs.iter().filter(|s| **s).count() as f64;
    let n2 = signs.len() as f64 - n1;
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let mu = 2.0 * n1 * n2 / (n1 + n2) + 1.0;
    let var = (mu - 1.0) * (mu - 2.0) / (n1 + n2 - 1.0);
    let z = (runs as f64 - mu) / var.sqrt();
    assert!(z.abs() < 3.0, "runs {runs}, expected {mu:.1}, z {z:.2}");
    assert!(r > 0.98 && r < 1.0, "{r}");
}

#[test]
fn heating_grows_with_oscillator_frequency() {
    let ctl = ControllerConfig::default();
    let thermal = ThermalConfig::default();
    let mut last = (0.0, 0.0);
    for divider in [255u8, 64, 16, 4, 1] {
        let cond = FeedbackCondition {
            oscillator: Some(OscSettings {
                enabled: true,
                tap_select: 0,
                trim_bits: 0,
                divider,
            }),
            armed_cells: 2,
            ..FeedbackCondition::idle("osc")
        };
        let (p, f) = condition_power(&ctl, &cond).unwrap();
        let t_e = thermal_state(&thermal, p).t_e;
        assert!(f.unwrap() > 0.0);
        assert!(p > last.0 && t_e > last.1, "divider {divider}");
        last = (p, t_e);
    }
}

#[test]
fn feedback_table_shape() {
    let setup = Setup::new(cryospin::physics::SpinSystemParams::default(), NoiseModel::default());
    let fb = FeedbackSpec {
        conditions: vec![
            FeedbackCondition {
                powered: false,
                ..FeedbackCondition::idle("off")
            },
            FeedbackCondition {
                artificial_power: 200e-6,
                ..FeedbackCondition::idle("hot")
            },
        ],
        experiments: vec!["ramsey".into()],
    };
    let inner = vec![("ramsey".to_string(), ramsey_spec(41, 6e-6, 40))];
    let rows = run_with_thermal_feedback(&fb, &inner, &setup, &ThermalConfig::default()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].thermal.t_e > rows[0].thermal.t_e);
    assert!(rows[1].white_scale > rows[0].white_scale);
    for r in &rows {
        let res = r.result("ramsey").unwrap();
        assert!(res.p_blocked.iter().all(|p| (0.0..=1.0).contains(p)));
        assert_eq!(res.metadata.thermal, Some(r.thermal));
    }
    let mut out = Vec::new();
    write_feedback_csv(&mut out, &rows, "abc", 7).unwrap();
    let text = String::from_utf8(out).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    let n_cols = body[0].split(',').count();
    assert_eq!(n_cols, 13);
    assert!(body.iter().all(|l| l.split(',').count() == n_cols));
    let fits: usize = rows.iter().map(|r| r.results[0].1.fit.len()).sum();
    assert_eq!(body.len(), 1 + fits);
    assert!(text.contains("# config_hash=abc"));
}
