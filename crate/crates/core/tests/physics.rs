mod common;

use std::f64::consts::PI;

use common::*;
use cryospin::physics::gates::{rx_on, rz_on, xx};
use cryospin::physics::readout::blocked_parity;
use cryospin::physics::{
    hamiltonian, hamiltonian_with, measure_psb, prepare, sample_offsets, sample_shot, segment_propagator, Evolver,
    Mat4, MwDrive, NoiseModel, Offsets, PrepKind, PulseSchedule, Segment, Spam, SpinSystemParams, TwoSpinState, C64,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unitarity_defect(u: &Mat4) -> f64 {
    max_abs_diff(&(u * u.adjoint()), &Mat4::identity())
}

#[derive(Debug, Clone)]
enum Piece {
    Idle(f64, f64),
    Drive(f64, f64, f64, f64),
    Rx(u8, f64),
    Rz(u8, f64),
    Depol(u8, f64),
}

fn piece() -> impl Strategy<Value = Piece> {
    prop_oneof![
        (0.0f64..5e-6, 1.1f64..1.45).prop_map(|(d, v)| Piece::Idle(d, v)),
        (0.0f64..2e-6, 1.15f64..1.35, -3e6f64..3e6, 0.0f64..1.0).prop_map(|(d, v, df, a)| Piece::Drive(d, v, df, a)),
        (1u8..=2, -PI..PI).prop_map(|(q, a)| Piece::Rx(q, a)),
        (1u8..=2, -PI..PI).prop_map(|(q, a)| Piece::Rz(q, a)),
        (1u8..=2, 0.0f64..1.0).prop_map(|(q, p)| Piece::Depol(q, p)),
    ]
}

fn build(pieces: &[Piece], spin: &SpinSystemParams) -> PulseSchedule {
    let mut s = PulseSchedule::new();
    let f = spin.f2(1.2);
    for p in pieces {
        match *p {
            Piece::Idle(d, v) => {
                s.segment(Segment::idle(d, v, f));
            }
            Piece::Drive(d, v, df, a) => {
                s.segment(Segment::driven(d, v, f + df, 0.3, a));
            }
            Piece::Rx(q, a) => {
                s.gate(rx_on(q, a));
            }
            Piece::Rz(q, a) => {
                s.gate(rz_on(q, a));
            }
            Piece::Depol(q, p) => {
                s.depolarize(q, p);
            }
        }
    }
    s
}

#[test]
fn mixed_state_readout() {
    let spam = Spam::default();
    let p = measure_psb(&TwoSpinState::maximally_mixed(), &spam);
    assert!((p - 0.725).abs() < 1e-12, "{p}");
}

#[test]
fn imperfect_singlet_preparation() {
    let st = prepare(
        PrepKind::Singlet,
        &Spam {
            f_prep: 0.9,
            ..Spam::IDEAL
        },
    );
    let mut ev: Vec<f64> = st.eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for (got, want) in ev.iter().zip([0.025, 0.025, 0.025, 0.925]) {
        assert!((got - want).abs() < 1e-12, "{ev:?}");
    }
}

#[test]
fn pi_pulse_selectivity() {
    let spin = ideal_spin();
    let v = 1.20;
    let amp = spin.amp_for_rabi(1e6);
    let seg = Segment::driven(0.5e-6, v, spin.f2(v), 0.0, amp);
    let mut s = PulseSchedule::new();
    s.segment(seg);
    let out = Evolver::ideal(&spin).run(&prepare(PrepKind::TMinus, &Spam::IDEAL), &s).unwrap();
    // target flipped into |↓↑⟩; spectator flips land in |↑↓⟩ or |↑↑⟩
    assert!(out.population(2) > 0.999);
    let spectator = out.population(0) + out.population(1);
    assert!(spectator < 1e-3, "{spectator:e}");
}

#[test]
fn odd_parity_block_matches_two_level_formula() {
    let spin = SpinSystemParams::default();
    for v in [1.30, 1.40, 1.45] {
        let f = 13.9e9;
        let t = 3.7e-6;
        let u = segment_propagator(&spin, &Segment::idle(t, v, f), &Offsets::NONE);
        let dz = 0.5 * (spin.f1(v) - spin.f2(v));
        let j = spin.exchange(v);
        // H_odd = -J/2 I + dz σz + J/2 σx
        let a = -j / 2.0;
        let (bz, bx) = (dz, j / 2.0);
        let b = (bz * bz + bx * bx).sqrt();
        let th = 2.0 * PI * b * t;
        let ph = C64::from_polar(1.0, -2.0 * PI * a * t);
        let i = C64::i();
        let u11 = ph * (C64::from(th.cos()) - i * (bz / b) * th.sin());
        let u22 = ph * (C64::from(th.cos()) + i * (bz / b) * th.sin());
        let u12 = ph * (-i * (bx / b) * th.sin());
        for (got, want) in [(u[(1, 1)], u11), (u[(2, 2)], u22), (u[(1, 2)], u12), (u[(2, 1)], u12)] {
            assert!((got - want).norm() < 1e-9, "v={v}: {got} vs {want}");
        }
        // parity is conserved without drive
        for (r, cidx) in [(0, 1), (0, 2), (3, 1), (3, 2), (0, 3)] {
            assert!(u[(r, cidx)].norm() < 1e-12);
        }
    }
}

#[test]
fn hamiltonian_examples() {
    let spin = SpinSystemParams::default();
    let h = hamiltonian(&spin, 1.20, &MwDrive::off(spin.f2(1.20)));
    // |↓↓⟩ sits at -(d1 + d2)/2 with d2 = 0
    let d1 = spin.f1(1.20) - spin.f2(1.20);
    assert!((h[(3, 3)].re + d1 / 2.0).abs() < 1e-3);
    assert!((h[(0, 0)].re - d1 / 2.0).abs() < 1e-3);
    assert_eq!(h, h.adjoint());
}

#[test]
fn shot_sampling_is_binomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [0.0, 0.03, 0.5, 0.97, 1.0] {
        let n = 20_000;
        let k: u32 = (0..n).map(|_| sample_shot(p, &mut rng) as u32).sum();
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((k as f64 - n as f64 * p).abs() <= 5.0 * sd + 1e-9, "p={p} k={k}");
    }
}

#[test]
fn offsets_depend_only_on_seed_and_shot() {
    let noise = NoiseModel::default();
    assert_eq!(sample_offsets(&noise, 3, 10), sample_offsets(&noise, 3, 10));
    assert_ne!(sample_offsets(&noise, 3, 10), sample_offsets(&noise, 3, 11));
    assert_ne!(sample_offsets(&noise, 3, 10), sample_offsets(&noise, 4, 10));
    // white noise settings do not change the quasi-static draw
    let mut louder = noise;
    louder.s_white_0 *= 10.0;
    assert_eq!(sample_offsets(&noise, 3, 10), sample_offsets(&louder, 3, 10));
    assert_eq!(sample_offsets(&NoiseModel::off(), 3, 10), Offsets::NONE);
}

/// Mean transverse coherence of the target after X/2 and `body`, over shots.
fn coherence(spin: &SpinSystemParams, noise: &NoiseModel, body: &PulseSchedule, shots: u64) -> f64 {
    let mut s = PulseSchedule::new();
    s.gate(rx_on(2, PI / 2.0));
    s.extend(body);
    let mut acc = C64::from(0.0);
    for shot in 0..shots {
        let off = sample_offsets(noise, 1, shot);
        let out = Evolver::new(spin, noise, off)
            .run(&prepare(PrepKind::TMinus, &Spam::IDEAL), &s)
            .unwrap();
        // control may be flipped by the echo, so sum both control branches
        acc += out.rho[(2, 3)] + out.rho[(0, 1)];
    }
    2.0 * acc.norm() / shots as f64
}

#[test]
fn echo_refocuses_quasi_static_detuning() {
    let spin = ideal_spin();
    let noise = NoiseModel {
        sigma_f1: 100e3,
        sigma_f2: 100e3,
        sigma_j_frac: 0.0,
        ..NoiseModel::off()
    };
    let v = 1.20;
    let f = spin.f2(v);
    let t = 10e-6;
    let mut fid = PulseSchedule::new();
    fid.segment(Segment::idle(t, v, f));
    let mut echo = PulseSchedule::new();
    echo.segment(Segment::idle(t / 2.0, v, f));
    echo.gate(xx());
    echo.segment(Segment::idle(t / 2.0, v, f));
    let c_fid = coherence(&spin, &noise, &fid, 400);
    let c_echo = coherence(&spin, &noise, &echo, 400);
    assert!(c_fid < 0.1, "{c_fid}");
    assert!(c_echo >= 0.99, "{c_echo}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_matches_oracle_and_is_unitary(
        v in 1.0f64..1.5,
        df in -5e6f64..5e6,
        amp in 0.0f64..2.0,
        phase in -PI..PI,
        t in 0.0f64..5e-6,
        df1 in -1e5f64..1e5,
        jm in 0.9f64..1.1,
    ) {
        let spin = SpinSystemParams::default();
        let seg = Segment::driven(t, v, spin.f2(v) + df, phase, amp);
        let off = Offsets { df1, df2: 0.0, j_mult: jm };
        let u = segment_propagator(&spin, &seg, &off);
        prop_assert!(unitarity_defect(&u) < 1e-10);
        let mw = MwDrive { on: true, f_mw: seg.f_mw, amp, phase };
        let h = hamiltonian_with(&spin, v, &mw, &off);
        let h_ref = oracle_hamiltonian(&spin, v, &mw, &off);
        prop_assert!(max_abs_diff(&h, &h_ref) < 1e-6);
        prop_assert!(max_abs_diff(&u, &oracle_propagator(&h_ref, t)) < 1e-8);
    }

    /// Every schedule keeps the state a density matrix.
    #[test]
    fn random_schedules_stay_physical(
        pieces in proptest::collection::vec(piece(), 0..12),
        shot in 0u64..1000,
        prep in prop_oneof![Just(PrepKind::Singlet), Just(PrepKind::TMinus), Just(PrepKind::UpDown)],
    ) {
        let spin = SpinSystemParams { t1: Some(50e-6), ..Default::default() };
        let noise = NoiseModel { s_white_0: 5e3, s_white_jfrac_0: 1e-6, ..Default::default() };
        let sched = build(&pieces, &spin);
        let off = sample_offsets(&noise, 9, shot);
        let out = Evolver::new(&spin, &noise, off).run(&prepare(prep, &spin.spam), &sched).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(max_abs_diff(&out.rho, &out.rho.adjoint()) < 1e-10);
        prop_assert!(out.eigenvalues().min() > -1e-10);
        let p = blocked_parity(&out);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&p));
    }
}
