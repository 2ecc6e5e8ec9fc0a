//! Ideal instantaneous rotations.
//!
//! `rotation(φ, θ)` is exp(−iθ/2·(cosφ σx + sinφ σy)), the same operator a
//! resonant drive of phase φ produces after accumulating angle θ = 2πΩt.

use super::linalg::{c, kron, on_qubit, pauli_x, pauli_y, pauli_z, Mat2, Mat4, I};

pub fn rotation(phase: f64, angle: f64) -> Mat2 {
    let (s, co) = phase.sin_cos();
    let n = pauli_x().scale(co) + pauli_y().scale(s);
    Mat2::identity().scale((angle / 2.0).cos()) - n * (I * (angle / 2.0).sin())
}

pub fn rz(angle: f64) -> Mat2 {
    Mat2::identity().scale((angle / 2.0).cos()) - pauli_z() * (I * (angle / 2.0).sin())
}

pub fn rx_on(q: u8, angle: f64) -> Mat4 {
    on_qubit(q, &rotation(0.0, angle))
}

pub fn ry_on(q: u8, angle: f64) -> Mat4 {
    on_qubit(q, &rotation(std::f64::consts::FRAC_PI_2, angle))
}

pub fn rz_on(q: u8, angle: f64) -> Mat4 {
    on_qubit(q, &rz(angle))
}

/// π about x on both spins.
pub fn xx() -> Mat4 {
    let x = rotation(0.0, std::f64::consts::PI);
    kron(&x, &x)
}

/// Global-phase-insensitive distance: 1 − |Tr(A†B)|/d.
pub fn phase_distance2(a: &Mat2, b: &Mat2) -> f64 {
    1.0 - (a.adjoint() * b).trace().norm() / 2.0
}

pub fn identity_like2(m: &Mat2) -> bool {
    phase_distance2(m, &Mat2::identity()) < 1e-12
}

/// |↑⟩⟨↑|, |↓⟩⟨↓|
pub fn projector(up: bool) -> Mat2 {
    if up {
        Mat2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.))
    } else {
        Mat2::new(c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn x_pi_flips() {
        let x = rotation(0.0, PI);
        assert!(x[(0, 0)].norm() < 1e-15);
        assert!((x[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_halves_make_a_whole() {
        let h = rotation(0.3, PI / 2.0);
        assert!(phase_distance2(&(h * h), &rotation(0.3, PI)) < 1e-15);
    }

    #[test]
    fn full_turn_is_minus_identity() {
        let r = rotation(1.1, 2.0 * PI);
        assert!(identity_like2(&r));
        assert!((r[(0, 0)].re + 1.0).abs() < 1e-15);
    }
}
