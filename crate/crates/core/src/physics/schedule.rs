//! Piecewise-constant pulse schedules.

use serde::{Deserialize, Serialize};

use super::linalg::Mat4;
use super::state::PhysicsError;

/// Abstract position along the P1/P2 detuning axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EpsilonStage {
    #[serde(rename = "INIT_04")]
    Init04,
    #[serde(rename = "SEP_13")]
    Sep13,
    #[serde(rename = "READ_PSB")]
    ReadPsb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub v_j: f64,
    pub mw_on: bool,
    pub f_mw: f64,
    pub phase: f64,
    pub mw_amp: f64,
    pub stage: EpsilonStage,
}

impl Segment {
    /// Undriven separated-spin segment.
    pub fn idle(duration: f64, v_j: f64, f_mw: f64) -> Self {
        Segment {
            duration,
            v_j,
            mw_on: false,
            f_mw,
            phase: 0.0,
            mw_amp: 0.0,
            stage: EpsilonStage::Sep13,
        }
    }

    pub fn driven(duration: f64, v_j: f64, f_mw: f64, phase: f64, mw_amp: f64) -> Self {
        Segment {
            duration,
            v_j,
            mw_on: true,
            f_mw,
            phase,
            mw_amp,
            stage: EpsilonStage::Sep13,
        }
    }

    pub fn at_stage(mut self, stage: EpsilonStage) -> Self {
        self.stage = stage;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Segment(Segment),
    /// Instantaneous ideal unitary.
    Gate(Mat4),
    /// Single-qubit depolarizing channel with probability `p`.
    Depolarize { qubit: u8, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSchedule {
    pub steps: Vec<Step>,
}

impl PulseSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn segment(&mut self, s: Segment) -> &mut Self {
        self.steps.push(Step::Segment(s));
        self
    }

    pub fn gate(&mut self, u: Mat4) -> &mut Self {
        self.steps.push(Step::Gate(u));
        self
    }

    pub fn depolarize(&mut self, qubit: u8, p: f64) -> &mut Self {
        self.steps.push(Step::Depolarize { qubit, p });
        self
    }

    pub fn extend(&mut self, other: &PulseSchedule) -> &mut Self {
        self.steps.extend(other.steps.iter().cloned());
        self
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.steps.iter().filter_map(|s| match s {
            Step::Segment(seg) => Some(seg),
            _ => None,
        })
    }

    pub fn total_duration(&self) -> f64 {
        self.segments().map(|s| s.duration).sum()
    }

    /// Start time of every step, with instantaneous steps taking no time.
    pub fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.steps
            .iter()
            .map(|s| {
                let start = t;
                if let Step::Segment(seg) = s {
                    t += seg.duration;
                }
                start
            })
            .collect()
    }

    /// Distinct exchange-gate voltages in order of first appearance.
    pub fn vj_levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = Vec::new();
        for s in self.segments() {
            if !levels.contains(&s.v_j) {
                levels.push(s.v_j);
            }
        }
        levels
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let mut stage = EpsilonStage::Init04;
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::Segment(s) => {
                    if !(s.duration > 0.0 && s.duration.is_finite()) {
                        return Err(PhysicsError::InvalidSchedule(format!(
                            "step {i}: duration {} must be positive and finite",
                            s.duration
                        )));
                    }
                    if s.stage < stage {
                        return Err(PhysicsError::InvalidSchedule(format!(
                            "step {i}: stage {:?} after {:?}",
                            s.stage, stage
                        )));
                    }
                    stage = s.stage;
                }
                Step::Depolarize { qubit, p } => {
                    if !(0.0..=1.0).contains(p) || !matches!(qubit, 1 | 2) {
                        return Err(PhysicsError::InvalidSchedule(format!(
                            "step {i}: depolarizing qubit {qubit} p {p}"
                        )));
                    }
                }
                Step::Gate(_) => {}
            }
        }
        Ok(())
    }
}
