//! Two-spin density matrices.

use nalgebra::{SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::linalg::{c, Mat4, C64};
use super::params::Spam;

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("non-physical state: {0}")]
    NonPhysicalState(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PrepKind {
    Singlet,
    TMinus,
    UpDown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinState {
    pub rho: Mat4,
}

pub fn singlet_vector() -> Vector4<C64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(c(0.0, 0.0), c(a, 0.0), c(-a, 0.0), c(0.0, 0.0))
}

fn basis(k: usize) -> Vector4<C64> {
    let mut v = Vector4::zeros();
    v[k] = c(1.0, 0.0);
    v
}

impl TwoSpinState {
    pub fn pure(psi: &Vector4<C64>) -> Self {
        TwoSpinState { rho: psi * psi.adjoint() }
    }

    pub fn maximally_mixed() -> Self {
        TwoSpinState {
            rho: Mat4::identity().scale(0.25),
        }
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Population of basis state `k` (0 = ↑↑ … 3 = ↓↓).
    pub fn population(&self, k: usize) -> f64 {
        self.rho[(k, k)].re
    }

    pub fn eigenvalues(&self) -> Vector4<f64> {
        SymmetricEigen::new(self.rho).eigenvalues
    }

    /// Trace and Hermiticity to [`TRACE_TOL`].
    pub fn check_cheap(&self) -> Result<(), PhysicsError> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(PhysicsError::NonPhysicalState(format!("trace = {tr}")));
        }
        let herm = (self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > TRACE_TOL {
            return Err(PhysicsError::NonPhysicalState(format!("Hermiticity defect {herm:e}")));
        }
        Ok(())
    }

    /// Full check including positivity.
    pub fn check(&self) -> Result<(), PhysicsError> {
        self.check_cheap()?;
        let min = self.eigenvalues().min();
        if min < -PSD_TOL {
            return Err(PhysicsError::NonPhysicalState(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }
}

pub fn ideal_state(kind: PrepKind) -> TwoSpinState {
    match kind {
        PrepKind::Singlet => TwoSpinState::pure(&singlet_vector()),
        PrepKind::TMinus => TwoSpinState::pure(&basis(3)),
        PrepKind::UpDown => TwoSpinState::pure(&basis(1)),
    }
}

/// Target state mixed with the maximally mixed state by `1 - f_prep`.
pub fn prepare(kind: PrepKind, spam: &Spam) -> TwoSpinState {
    let f = spam.f_prep;
    TwoSpinState {
        rho: ideal_state(kind).rho.scale(f) + Mat4::identity().scale(0.25 * (1.0 - f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spam(f_prep: f64) -> Spam {
        Spam {
            f_prep,
            ..Spam::IDEAL
        }
    }

    #[test]
    fn t_minus_is_down_down() {
        let s = prepare(PrepKind::TMinus, &spam(1.0));
        assert_eq!(s.population(3), 1.0);
    }

    #[test]
    fn mixed_singlet_spectrum() {
        let s = prepare(PrepKind::Singlet, &spam(0.9));
        s.check().unwrap();
        let mut ev: Vec<f64> = s.eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.025, 0.025, 0.025, 0.925]) {
            assert!((got - want).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn detects_negative_eigenvalue() {
        let mut s = TwoSpinState::maximally_mixed();
        s.rho[(0, 0)] = c(-0.1, 0.0);
        s.rho[(1, 1)] = c(0.6, 0.0);
        assert!(s.check_cheap().is_ok());
        assert!(matches!(s.check(), Err(PhysicsError::NonPhysicalState(_))));
    }
}
