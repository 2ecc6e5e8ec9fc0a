//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use cryospin::physics::{Mat2, Mat4, MwDrive, NoiseModel, Offsets, Spam, SpinSystemParams, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn sx() -> Mat2 {
    Mat2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
}

pub fn sy() -> Mat2 {
    Mat2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.))
}

pub fn sz() -> Mat2 {
    Mat2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
}

pub fn id2() -> Mat2 {
    Mat2::identity()
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Rotating-frame Hamiltonian in hertz written straight from its textbook
/// form with Kronecker products.
pub fn oracle_hamiltonian(p: &SpinSystemParams, v_j: f64, mw: &MwDrive, off: &Offsets) -> Mat4 {
    let d1 = p.f1_0 + p.alpha1 * (v_j - p.v_ref) + off.df1 - mw.f_mw;
    let d2 = p.f2_0 + p.alpha2 * (v_j - p.v_ref) + off.df2 - mw.f_mw;
    let j = p.exchange(v_j) * off.j_mult;
    let half = C64::from(0.5);
    let mut h = kron(&sz(), &id2()) * (half * d1) + kron(&id2(), &sz()) * (half * d2);
    let ss = kron(&sx(), &sx()) + kron(&sy(), &sy()) + kron(&sz(), &sz()) - Mat4::identity();
    h += ss * C64::from(j / 4.0);
    if mw.on {
        let om = p.rabi_per_volt * mw.amp;
        let single = (sx() * C64::from(mw.phase.cos()) + sy() * C64::from(mw.phase.sin())) * C64::from(om / 2.0);
        h += kron(&single, &id2()) + kron(&id2(), &single);
    }
    h
}

fn norm1(m: &Mat4) -> f64 {
    (0..4)
        .map(|j| (0..4).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// exp(a) by scaling and squaring around a plain Taylor series.
pub fn taylor_expm(a: &Mat4) -> Mat4 {
    let mut s = 0;
    while norm1(a) / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = a * C64::from(0.5f64.powi(s));
    let mut term = Mat4::identity();
    let mut sum = Mat4::identity();
    for k in 1..40 {
        term = term * a * C64::from(1.0 / k as f64);
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// exp(−i 2π H t) via the Taylor oracle.
pub fn oracle_propagator(h: &Mat4, t: f64) -> Mat4 {
    taylor_expm(&(h * c(0.0, -2.0 * std::f64::consts::PI * t)))
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn ideal_spin() -> SpinSystemParams {
    SpinSystemParams {
        spam: Spam {
            f_prep: 1.0,
            f_read_s: 1.0,
            f_read_t: 1.0,
        },
        ..Default::default()
    }
}

/// Default quasi-static spreads with both white channels off.
pub fn quasi_static_only() -> NoiseModel {
    NoiseModel {
        s_white_0: 0.0,
        s_white_jfrac_0: 0.0,
        ..Default::default()
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
