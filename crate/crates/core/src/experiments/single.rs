//! Single-qubit protocols on separated spins: Rabi chevron, Ramsey, Hahn
//! echo and CPMG noise spectroscopy.
//!
//! All of them start from a singlet and use the parity readout, so the
//! blocked probability is the flip probability of the addressed qubit.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::fitting::{fit_with_options, FitError, FitModel, FitOptions, FitResult};
use crate::physics::gates::rotation;
use crate::physics::linalg::on_qubit;
use crate::physics::{PrepKind, PulseSchedule, Segment};

use super::result::{ExperimentResult, FitValue, PsdPoint};
use super::runner::{assemble, axis, realize, run_grid, with_stages, Job};
use super::spec::{ExperimentSpec, Setup};
use super::ExperimentError;

/// Coherence window used for spectrum estimates.
pub const CHI_WINDOW: (f64, f64) = (0.1, 0.9);

pub(crate) fn frame(spec: &ExperimentSpec, setup: &Setup, v_active: f64) -> f64 {
    spec.f_mw
        .unwrap_or_else(|| setup.spin.qubit_frequency(spec.qubit, v_active))
}

/// Store a fit or, when it fails, a warning.
pub(crate) fn record_fit(res: &mut ExperimentResult, prefix: &str, label: &str, fit: Result<FitResult, FitError>) -> Option<FitResult> {
    match fit {
        Ok(f) => {
            res.insert_fit(prefix, &f);
            if !f.converged {
                res.warnings.push(format!(
                    "{label}: fit stalled with gradient cosine {:.1e} above tolerance",
                    f.gradient_cos
                ));
            }
            Some(f)
        }
        Err(e) => {
            res.warnings.push(format!("{label}: {e}"));
            None
        }
    }
}

/// Decay fit with the fully dephased asymptote held fixed. Data without any
/// resolvable decay is reported as a lower bound at the longest time.
pub(crate) fn fit_decay(res: &mut ExperimentResult, prefix: &str, t: &[f64], y: &[f64], b: f64) {
    let opts = FitOptions {
        fixed_b: Some(b),
        ..Default::default()
    };
    match fit_with_options(t, y, FitModel::Decay, None, &opts) {
        Err(FitError::RankDeficient) => {
            let key = if prefix.is_empty() { "T".to_string() } else { format!("{prefix}.T") };
            res.fit.insert(
                key,
                FitValue {
                    value: t.iter().cloned().fold(0.0, f64::max),
                    stderr: 0.0,
                    lower_bound: true,
                },
            );
            res.warnings.push(format!("{prefix}: no resolvable decay, T reported as lower bound"));
        }
        other => {
            record_fit(res, prefix, "decay", other);
        }
    }
}

pub fn run_rabi_chevron(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let fs = spec.axis("f_mw")?;
    let ts = spec.axis("t_mw")?;
    let (v_base, v_active) = spec.levels(&setup.spin);
    let amp = setup.spin.amp_for_rabi(spec.rabi_frequency);
    let n_t = ts.len();
    let points = run_grid(setup, spec, fs.len() * n_t, |i| {
        let (f, t) = (fs[i / n_t], ts[i % n_t]);
        let mut body = PulseSchedule::new();
        if t > 0.0 {
            body.segment(Segment::driven(t, v_active, f, 0.0, amp));
        }
        Ok(Job {
            prep: PrepKind::Singlet,
            schedule: realize(spec, setup, with_stages(&body, v_base, f))?,
        })
    })?;
    let mut res = assemble(spec, setup, vec![axis("f_mw", &fs), axis("t_mw", &ts)], &points);
    // Rabi fit on the row with the largest swing
    let best = (0..fs.len())
        .max_by(|&a, &b| swing(res.row(a)).total_cmp(&swing(res.row(b))))
        .unwrap_or(0);
    let row = res.row(best).to_vec();
    let fit = fit_with_options(&ts, &row, FitModel::Rabi, None, &FitOptions::default());
    if record_fit(&mut res, "", "rabi", fit).is_some() {
        res.fit.insert(
            "f_mw_fit_row".into(),
            FitValue {
                value: fs[best],
                stderr: 0.0,
                lower_bound: false,
            },
        );
    }
    Ok(res)
}

fn swing(row: &[f64]) -> f64 {
    let (lo, hi) = row
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    hi - lo
}

fn x2(q: u8) -> crate::physics::Mat4 {
    on_qubit(q, &rotation(0.0, FRAC_PI_2))
}

pub fn run_ramsey(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let ts = spec.axis("t_wait")?;
    let (v_base, v_active) = spec.levels(&setup.spin);
    let f_frame = frame(spec, setup, v_active) - spec.detuning;
    let q = spec.qubit;
    let points = run_grid(setup, spec, ts.len(), |i| {
        let mut body = PulseSchedule::new();
        body.gate(x2(q));
        if ts[i] > 0.0 {
            body.segment(Segment::idle(ts[i], v_active, f_frame));
        }
        body.gate(x2(q));
        Ok(Job {
            prep: PrepKind::Singlet,
            schedule: realize(spec, setup, with_stages(&body, v_base, f_frame))?,
        })
    })?;
    let mut res = assemble(spec, setup, vec![axis("t_wait", &ts)], &points);
    let fit = fit_with_options(&ts, &res.p_blocked.clone(), FitModel::Ramsey, None, &FitOptions::default());
    record_fit(&mut res, "", "ramsey", fit);
    Ok(res)
}

/// X/2, then (τ/2N, Y, τ/N, Y, …, τ/2N), then X/2 on the addressed qubit.
pub(crate) fn cpmg_body(q: u8, n: u32, t: f64, v: f64, f_frame: f64) -> PulseSchedule {
    let y = on_qubit(q, &rotation(FRAC_PI_2, PI));
    let mut body = PulseSchedule::new();
    body.gate(x2(q));
    let edge = t / (2.0 * n as f64);
    for k in 0..n {
        let gap = if k == 0 { edge } else { 2.0 * edge };
        if gap > 0.0 {
            body.segment(Segment::idle(gap, v, f_frame));
        }
        body.gate(y);
    }
    if edge > 0.0 {
        body.segment(Segment::idle(edge, v, f_frame));
    }
    body.gate(x2(q));
    body
}

pub fn run_hahn(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let ts = spec.axis("t_total")?;
    let (v_base, v_active) = spec.levels(&setup.spin);
    let f_frame = frame(spec, setup, v_active);
    let points = run_grid(setup, spec, ts.len(), |i| {
        let body = cpmg_body(spec.qubit, 1, ts[i], v_active, f_frame);
        Ok(Job {
            prep: PrepKind::Singlet,
            schedule: realize(spec, setup, with_stages(&body, v_base, f_frame))?,
        })
    })?;
    let mut res = assemble(spec, setup, vec![axis("t_total", &ts)], &points);
    let b = setup.spin.spam.apply(0.5);
    let y = res.p_blocked.clone();
    fit_decay(&mut res, "", &ts, &y, b);
    Ok(res)
}

/// CPMG decays for each pulse count and the white-noise spectrum they imply.
///
/// A flip probability p maps to coherence c = 2p − 1 after SPAM inversion;
/// with χ = −ln c inside the window, S(f) = χ / (2π² t) at f = N / (2t).
pub fn run_cpmg_psd(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let ts = spec.axis("t_total")?;
    let ns: Vec<u32> = spec.cpmg_n.clone();
    let (v_base, v_active) = spec.levels(&setup.spin);
    let f_frame = frame(spec, setup, v_active);
    let n_t = ts.len();
    let points = run_grid(setup, spec, ns.len() * n_t, |i| {
        let body = cpmg_body(spec.qubit, ns[i / n_t], ts[i % n_t], v_active, f_frame);
        Ok(Job {
            prep: PrepKind::Singlet,
            schedule: realize(spec, setup, with_stages(&body, v_base, f_frame))?,
        })
    })?;
    let n_axis: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut res = assemble(spec, setup, vec![axis("n_pulses", &n_axis), axis("t_total", &ts)], &points);
    let spam = setup.spin.spam;
    let b = spam.apply(0.5);
    let mut psd = Vec::new();
    for (r, &n) in ns.iter().enumerate() {
        let row = res.row(r).to_vec();
        fit_decay(&mut res, &format!("n{n}"), &ts, &row, b);
        for (k, &t) in ts.iter().enumerate() {
            let c = 2.0 * spam.invert(row[k]) - 1.0;
            if t > 0.0 && c > CHI_WINDOW.0 && c < CHI_WINDOW.1 {
                let chi = -c.ln();
                psd.push(PsdPoint {
                    f_hz: n as f64 / (2.0 * t),
                    s: chi / (2.0 * PI * PI * t),
                    n_pulses: n,
                    t_total: t,
                    chi,
                });
            }
        }
    }
    if psd.is_empty() {
        return Err(ExperimentError::InsufficientDecay);
    }
    psd.sort_by(|a, b| a.f_hz.total_cmp(&b.f_hz).then(a.n_pulses.cmp(&b.n_pulses)));
    res.psd = psd;
    Ok(res)
}
