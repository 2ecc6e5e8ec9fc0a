//! Automatic starting points. Inputs are sorted by abscissa and already
//! normalised where the model expects it.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

pub fn range(y: &[f64]) -> (f64, f64) {
    y.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Mean of the last `frac` of the points (at least two).
pub fn tail_mean(y: &[f64], frac: f64) -> f64 {
    let n = ((y.len() as f64 * frac).ceil() as usize).clamp(2.min(y.len()), y.len());
    mean(&y[y.len() - n..])
}

/// Ordinary least-squares slope and intercept.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Linear interpolation of sorted samples at `t`.
fn interp(u: &[f64], y: &[f64], t: f64) -> f64 {
    let i = u.partition_point(|&v| v <= t);
    if i == 0 {
        return y[0];
    }
    if i >= u.len() {
        return y[y.len() - 1];
    }
    let (u0, u1) = (u[i - 1], u[i]);
    if u1 == u0 {
        return y[i];
    }
    y[i - 1] + (y[i] - y[i - 1]) * (t - u0) / (u1 - u0)
}

/// Dominant non-zero frequency from a zero-padded FFT of the mean-removed
/// signal, resampled to a uniform grid first. Returns cycles per unit `u`.
pub fn fft_peak_frequency(u: &[f64], y: &[f64]) -> f64 {
    let n = u.len();
    let (u0, u1) = (u[0], u[n - 1]);
    let span = u1 - u0;
    if n < 3 || span <= 0.0 {
        return 0.0;
    }
    let m = mean(y);
    let dt = span / (n - 1) as f64;
    let len = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|k| {
            if k < n {
                Complex::new(interp(u, y, u0 + k as f64 * dt) - m, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let (k_best, _) = buf[1..len / 2]
        .iter()
        .enumerate()
        .map(|(k, z)| (k + 1, z.norm_sqr()))
        .fold((1, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    k_best as f64 / (len as f64 * dt)
}

/// Phase φ of `cos(2πfu + φ)` by projecting onto the complex exponential.
pub fn phase_at(u: &[f64], y: &[f64], offset: f64, f: f64) -> f64 {
    let (re, im) = u.iter().zip(y).fold((0.0, 0.0), |(re, im), (&t, &v)| {
        let (s, c) = (2.0 * PI * f * t).sin_cos();
        (re + (v - offset) * c, im + (v - offset) * s)
    });
    // Σ (A/2)(e^{i(θ+φ)} + e^{-i(θ+φ)}) e^{-iθ} ≈ (nA/2) e^{iφ}
    (-im).atan2(re)
}

/// Decay rate from a log-linear fit to the running envelope of `|y − offset|`.
pub fn envelope_rate(u: &[f64], y: &[f64], offset: f64, window: f64) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ls = Vec::new();
    let (u0, u1) = (u[0], u[u.len() - 1]);
    let mut start = u0;
    while start < u1 {
        let end = start + window;
        let best = u
            .iter()
            .zip(y)
            .filter(|(t, _)| **t >= start && **t < end)
            .map(|(t, v)| (*t, (v - offset).abs()))
            .fold(None, |acc: Option<(f64, f64)>, cur| match acc {
                Some(a) if a.1 >= cur.1 => Some(a),
                _ => Some(cur),
            });
        if let Some((t, a)) = best {
            if a > 0.0 {
                xs.push(t);
                ls.push(a.ln());
            }
        }
        start = end;
    }
    let (slope, _) = linear_regression(&xs, &ls)?;
    Some(-slope)
}
