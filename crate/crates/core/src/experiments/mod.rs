//! Protocols that combine controller, physics, thermal scaling and fitting.

pub mod clifford;
pub mod cryo;
pub mod exchange;
pub mod feedback;
pub mod global;
pub mod rb;
pub mod result;
pub mod runner;
pub mod single;
pub mod spec;

use thiserror::Error;

use crate::physics::PhysicsError;

pub use exchange::run_exchange;
pub use feedback::{run_with_thermal_feedback, ConditionOutcome, FeedbackCondition, FeedbackSpec};
pub use global::{run_global_rabi, run_stark_cal};
pub use rb::run_rb_1q;
pub use result::{Axis, ExperimentResult, FitValue, Metadata, PsdPoint};
pub use single::{run_cpmg_psd, run_hahn, run_rabi_chevron, run_ramsey};
pub use spec::{ControlPath, ExperimentKind, ExperimentSpec, Setup, SweepAxis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("CRYO_CMOS path needs at most two exchange levels, schedule uses {levels:?}")]
    TwoLevelViolation { levels: Vec<f64> },
    #[error("controller: {0}")]
    Controller(String),
    #[error("coherence never enters the spectrum window")]
    InsufficientDecay,
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

pub fn run_cz_fid(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    run_exchange(spec, setup)
}

pub fn run_dcz(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    run_exchange(spec, setup)
}

/// Dispatch on `spec.kind`.
pub fn run_experiment(spec: &ExperimentSpec, setup: &Setup) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::RabiChevron => run_rabi_chevron(spec, setup),
        ExperimentKind::Ramsey => run_ramsey(spec, setup),
        ExperimentKind::Hahn => run_hahn(spec, setup),
        ExperimentKind::CpmgPsd => run_cpmg_psd(spec, setup),
        ExperimentKind::Rb1q => run_rb_1q(spec, setup),
        ExperimentKind::CzFid => run_cz_fid(spec, setup),
        ExperimentKind::Dcz => run_dcz(spec, setup),
        ExperimentKind::GlobalRabi => run_global_rabi(spec, setup),
        ExperimentKind::StarkCal => run_stark_cal(spec, setup),
    }
}
