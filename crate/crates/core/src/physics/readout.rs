//! Pauli-spin-blockade readout statistics.

use rand::Rng;

use super::linalg::Mat4;
use super::params::Spam;
use super::state::{singlet_vector, TwoSpinState};

/// Ideal blocked probability Tr(ρ Π_T) with Π_T = I − |S⟩⟨S|.
pub fn blocked_singlet_projector(state: &TwoSpinState) -> f64 {
    let s = singlet_vector();
    let ps = (s.adjoint() * state.rho * s)[(0, 0)].re;
    1.0 - ps
}

/// SPAM-corrected blocked probability with the singlet-projector readout.
pub fn measure_psb(state: &TwoSpinState, spam: &Spam) -> f64 {
    spam.apply(blocked_singlet_projector(state)).clamp(0.0, 1.0)
}

/// Ideal blocked probability for a parity readout: even-parity states block.
///
/// With a Zeeman difference much larger than the tunnel coupling, |↑↓⟩ and
/// |↓↑⟩ both load into the singlet branch while |↑↑⟩ and |↓↓⟩ stay blocked.
pub fn blocked_parity(state: &TwoSpinState) -> f64 {
    state.population(0) + state.population(3)
}

pub fn measure_parity(state: &TwoSpinState, spam: &Spam) -> f64 {
    spam.apply(blocked_parity(state)).clamp(0.0, 1.0)
}

/// Readout convention used by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    SingletProjector,
    Parity,
}

impl Readout {
    pub fn measure(self, state: &TwoSpinState, spam: &Spam) -> f64 {
        match self {
            Readout::SingletProjector => measure_psb(state, spam),
            Readout::Parity => measure_parity(state, spam),
        }
    }
}

/// Bernoulli draw: 1 with probability `p`.
pub fn sample_shot<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u8 {
    (rng.random::<f64>() < p) as u8
}

/// Helper for tests and diagnostics: expectation of an observable.
pub fn expectation(state: &TwoSpinState, op: &Mat4) -> f64 {
    (state.rho * op).trace().re
}
