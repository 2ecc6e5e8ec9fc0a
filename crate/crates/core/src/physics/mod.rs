//! Two-spin dynamics: Hamiltonian, unitary evolution with noise, readout.

pub mod evolve;
pub mod gates;
pub mod hamiltonian;
pub mod linalg;
pub mod noise;
pub mod params;
pub mod readout;
pub mod schedule;
pub mod state;

pub use evolve::{evolve, schedule_unitary, segment_propagator, Evolver};
pub use hamiltonian::{exchange_operator, hamiltonian, hamiltonian_with, MwDrive, Offsets};
pub use linalg::{expm, propagator, Mat2, Mat4, C64};
pub use noise::{derive_seed, rng_for, sample_offsets};
pub use params::{NoiseModel, Spam, SpinSystemParams};
pub use readout::{measure_parity, measure_psb, sample_shot, Readout};
pub use schedule::{EpsilonStage, PulseSchedule, Segment, Step};
pub use state::{prepare, PhysicsError, PrepKind, TwoSpinState};
