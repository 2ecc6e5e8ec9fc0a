//! Two-spin Hamiltonian in the frame rotating at the drive frequency.
//!
//! Basis order is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ with qubit 1 first; σz|↑⟩ = +|↑⟩,
//! so |↓↓⟩ is the ground state (T−).

use serde::{Deserialize, Serialize};

use super::linalg::{c, kron, on_qubit, pauli_x, pauli_y, pauli_z, Mat2, Mat4};
use super::params::SpinSystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwDrive {
    pub on: bool,
    pub f_mw: f64,
    pub amp: f64,
    pub phase: f64,
}

impl MwDrive {
    pub fn off(f_mw: f64) -> Self {
        MwDrive {
            on: false,
            f_mw,
            amp: 0.0,
            phase: 0.0,
        }
    }
}

/// Per-shot offsets added to the nominal parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offsets {
    pub df1: f64,
    pub df2: f64,
    pub j_mult: f64,
}

impl Offsets {
    pub const NONE: Offsets = Offsets {
        df1: 0.0,
        df2: 0.0,
        j_mult: 1.0,
    };
}

/// (σx⊗σx + σy⊗σy + σz⊗σz − I)/4: −1 on the singlet, 0 on triplets.
pub fn exchange_operator() -> Mat4 {
    (kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y()) + kron(&pauli_z(), &pauli_z()) - Mat4::identity())
        .scale(0.25)
}

pub fn hamiltonian(params: &SpinSystemParams, v_j: f64, mw: &MwDrive) -> Mat4 {
    hamiltonian_with(params, v_j, mw, &Offsets::NONE)
}

pub fn hamiltonian_with(params: &SpinSystemParams, v_j: f64, mw: &MwDrive, off: &Offsets) -> Mat4 {
    let d1 = params.f1(v_j) + off.df1 - mw.f_mw;
    let d2 = params.f2(v_j) + off.df2 - mw.f_mw;
    let j = params.exchange(v_j) * off.j_mult;
    let mut h = Mat4::zeros();
    // diagonal Zeeman terms written out to keep the matrix exactly Hermitian
    let z = [0.5 * (d1 + d2), 0.5 * (d1 - d2), 0.5 * (-d1 + d2), -0.5 * (d1 + d2)];
    for k in 0..4 {
        h[(k, k)] = c(z[k], 0.0);
    }
    if j != 0.0 {
        h += exchange_operator().scale(j);
    }
    if mw.on && mw.amp != 0.0 {
        let omega = params.rabi_frequency(mw.amp);
        let (s, co) = mw.phase.sin_cos();
        let single: Mat2 = (pauli_x().scale(co) + pauli_y().scale(s)).scale(0.5 * omega);
        h += on_qubit(1, &single) + on_qubit(2, &single);
    }
    h
}
