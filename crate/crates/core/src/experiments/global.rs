//! Global-drive control and Stark-shift calibration.
//!
//! A continuous tone sits off resonance while the exchange gate is at its
//! base level; pulsing the gate Stark-shifts the addressed qubit into
//! resonance for the pulse duration only.

use crate::fitting::{fit_with_options, guess::linear_regression, FitModel, FitOptions};
use crate::physics::{PrepKind, PulseSchedule, Segment};

use super::result::FitValue;
use super::runner::{assemble, axis, realize, run_grid, with_stages, Job};
use super::single::record_fit;
use super::spec::{ExperimentSpec, Setup};
use super::{ExperimentError, ExperimentResult};

pub fn global_schedule(spec: &ExperimentSpec, setup: &Setup, f_mw: f64, t_pulse: f64) -> PulseSchedule {
    let (v_base, v_active) = spec.levels(&setup.spin);
    let amp = setup.spin.amp_for_rabi(spec.rabi_frequency);
    let mut body = PulseSchedule::new();
    body.segment(Segment::driven(spec.t_hold, v_base, f_mw, 0.0, amp));
    if t_pulse > 0.0 {
        body.segment(Segment::driven(t_pulse, v_active, f_mw, 0.0, amp));
    }
    body.segment(Segment::driven(spec.t_hold, v_base, f_mw, 0.0, amp));
    with_stages(&body, v_base, f_mw)
}

/// Chevron in (f_mw, t_pulse) from T−. The Rabi fit on the row with the
/// largest swing gives Ω and the π/2 time 1/(4Ω).
pub fn run_global_rabi(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let fs = spec.axis("f_mw")?;
    let ts = spec.axis("t_pulse")?;
    let n_t = ts.len();
    let points = run_grid(setup, spec, fs.len() * n_t, |i| {
        Ok(Job {
            prep: PrepKind::TMinus,
            schedule: realize(spec, setup, global_schedule(spec, setup, fs[i / n_t], ts[i % n_t]))?,
        })
    })?;
    let mut res = assemble(spec, setup, vec![axis("f_mw", &fs), axis("t_pulse", &ts)], &points);
    let swing = |r: &[f64]| {
        let (lo, hi) = crate::fitting::guess::range(r);
        hi - lo
    };
    let best = (0..fs.len())
        .max_by(|&a, &b| swing(res.row(a)).total_cmp(&swing(res.row(b))))
        .unwrap_or(0);
    let row = res.row(best).to_vec();
    let fit = fit_with_options(&ts, &row, FitModel::Rabi, None, &FitOptions::default());
    if let Some(f) = record_fit(&mut res, "", "global rabi", fit) {
        let om = f.get("f");
        let put = |res: &mut ExperimentResult, k: &str, value: f64, stderr: f64| {
            res.fit.insert(
                k.into(),
                FitValue {
                    value,
                    stderr,
                    lower_bound: false,
                },
            );
        };
        put(&mut res, "t_pi2", 1.0 / (4.0 * om), f.err("f") / (4.0 * om * om));
        put(&mut res, "f_mw_fit_row", fs[best], 0.0);
    }
    Ok(res)
}

/// π-pulse spectroscopy at each exchange-gate level. Each row's line centre
/// comes from a Lorentzian fit; the slope of centre against level is the
/// Stark coefficient of the addressed qubit.
pub fn run_stark_cal(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    let vs = spec.axis("v_j")?;
    let fs = spec.axis("f_mw")?;
    let (v_base, _) = spec.levels(&setup.spin);
    let amp = setup.spin.amp_for_rabi(spec.rabi_frequency);
    let t_pi = 1.0 / (2.0 * spec.rabi_frequency);
    let n_f = fs.len();
    let points = run_grid(setup, spec, vs.len() * n_f, |i| {
        let (v, f) = (vs[i / n_f], fs[i % n_f]);
        let mut body = PulseSchedule::new();
        body.segment(Segment::driven(t_pi, v, f, 0.0, amp));
        Ok(Job {
            prep: PrepKind::Singlet,
            schedule: with_stages(&body, v_base, f),
        })
    })?;
    let mut res = assemble(spec, setup, vec![axis("v_j", &vs), axis("f_mw", &fs)], &points);
    let mut xs = Vec::new();
    let mut centres = Vec::new();
    for (r, &v) in vs.iter().enumerate() {
        let row = res.row(r).to_vec();
        let fit = fit_with_options(&fs, &row, FitModel::Resonance, None, &FitOptions::default());
        if let Some(f) = record_fit(&mut res, &format!("row{r}"), "stark line", fit) {
            xs.push(v);
            centres.push(f.get("x0"));
        }
    }
    match linear_regression(&xs, &centres) {
        Some((slope, icpt)) if xs.len() >= 2 => {
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let ssr: f64 = xs
                .iter()
                .zip(&centres)
                .map(|(x, y)| (y - (icpt + slope * x)).powi(2))
                .sum();
            let se = if xs.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { 0.0 };
            let key = format!("alpha{}", spec.qubit);
            res.fit.insert(
                key,
                FitValue {
                    value: slope,
                    stderr: se,
                    lower_bound: false,
                },
            );
            res.fit.insert(
                "f_at_zero_volts".into(),
                FitValue {
                    value: icpt,
                    stderr: 0.0,
                    lower_bound: false,
                },
            );
        }
        _ => res.warnings.push("stark slope: fewer than two line centres".into()),
    }
    Ok(res)
}
