//! The 24-element single-qubit Clifford group, built by breadth-first search
//! over π and π/2 rotations about x and y.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::physics::gates::{phase_distance2, rotation};
use crate::physics::Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    X2,
    Y2,
    X,
    Y,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::X2, Generator::Y2, Generator::X, Generator::Y];

    /// Drive phase (0 for x, π/2 for y).
    pub fn phase(self) -> f64 {
        match self {
            Generator::X2 | Generator::X => 0.0,
            Generator::Y2 | Generator::Y => FRAC_PI_2,
        }
    }

    pub fn angle(self) -> f64 {
        match self {
            Generator::X2 | Generator::Y2 => FRAC_PI_2,
            Generator::X | Generator::Y => PI,
        }
    }

    pub fn unitary(self) -> Mat2 {
        rotation(self.phase(), self.angle())
    }
}

#[derive(Debug, Clone)]
pub struct Clifford {
    pub unitary: Mat2,
    /// Shortest generator word, applied left to right in time.
    pub word: Vec<Generator>,
}

#[derive(Debug)]
pub struct CliffordGroup {
    pub elements: Vec<Clifford>,
}

impl CliffordGroup {
    fn build() -> Self {
        let mut elements = vec![Clifford {
            unitary: Mat2::identity(),
            word: Vec::new(),
        }];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in Generator::ALL {
                let u = g.unitary() * elements[i].unitary;
                if elements.iter().all(|e| phase_distance2(&e.unitary, &u) > 1e-9) {
                    let mut word = elements[i].word.clone();
                    word.push(g);
                    elements.push(Clifford { unitary: u, word });
                    queue.push_back(elements.len() - 1);
                }
            }
        }
        CliffordGroup { elements }
    }

    pub fn get() -> &'static CliffordGroup {
        static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
        GROUP.get_or_init(CliffordGroup::build)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of the element equal to `u` up to global phase.
    pub fn find(&self, u: &Mat2) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| phase_distance2(&e.unitary, u) < 1e-9)
    }

    /// Index of `a` applied after `b`.
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.find(&(self.elements[a].unitary * self.elements[b].unitary))
            .expect("group is closed")
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.find(&self.elements[a].unitary.adjoint())
            .expect("group is closed")
    }

    /// Element undoing the product of `seq` (applied first to last).
    pub fn recovery(&self, seq: &[usize]) -> usize {
        let total = seq
            .iter()
            .fold(Mat2::identity(), |acc, &i| self.elements[i].unitary * acc);
        self.find(&total.adjoint()).expect("group is closed")
    }

    pub fn mean_word_len(&self) -> f64 {
        self.elements.iter().map(|e| e.word.len() as f64).sum::<f64>() / self.len() as f64
    }
}
