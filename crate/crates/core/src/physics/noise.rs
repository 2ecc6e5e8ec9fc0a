//! Seeded noise sampling and the non-unitary channels used by `evolve`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::hamiltonian::Offsets;
use super::linalg::{on_qubit, pauli_x, pauli_y, pauli_z, Mat2, Mat4, C64};
use super::params::NoiseModel;

/// Stream tags keep independent random draws for the same shot apart.
pub mod stream {
    pub const QUASI_STATIC: u64 = 1;
    pub const READOUT: u64 = 2;
    pub const SEQUENCE: u64 = 3;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with a path of keys into one 64-bit seed.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |h, &k| splitmix64(h ^ splitmix64(k)))
}

pub fn rng_for(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}

/// Quasi-static offsets for one shot. Depends only on `(seed, shot)`.
pub fn sample_offsets(noise: &NoiseModel, seed: u64, shot: u64) -> Offsets {
    if noise.is_quasi_static_free() {
        return Offsets::NONE;
    }
    let mut rng = rng_for(seed, &[stream::QUASI_STATIC, shot]);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let (a, b, j) = (z(), z(), z());
    Offsets {
        df1: noise.sigma_f1 * a,
        df2: noise.sigma_f2 * b,
        j_mult: 1.0 + noise.sigma_j_frac * j,
    }
}

/// Spin projections (s1, s2) of each basis state.
const SPINS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
/// Diagonal of the Ising part of the exchange operator.
const EXCHANGE_DIAG: [f64; 4] = [0.0, -0.5, -0.5, 0.0];

/// Average over Gaussian phase kicks accumulated during one segment.
///
/// Frequency noise of two-sided PSD `s_freq` kicks each spin by a Z phase of
/// variance (2π)²·s_freq·dt. Exchange noise of PSD `s_j` (Hz²/Hz) kicks along
/// the Ising part of the exchange operator; its flip-flop part is dropped
/// because it is far detuned by the Zeeman difference.
pub fn white_dephasing(rho: &mut Mat4, s_freq: f64, s_j: f64, dt: f64) {
    if s_freq == 0.0 && s_j == 0.0 {
        return;
    }
    let tau2 = (2.0 * std::f64::consts::PI).powi(2) * dt;
    let vf = tau2 * s_freq;
    let vj = tau2 * s_j;
    for k in 0..4 {
        for l in 0..4 {
            if k == l {
                continue;
            }
            let (a1, a2) = SPINS[k];
            let (b1, b2) = SPINS[l];
            let dd = EXCHANGE_DIAG[k] - EXCHANGE_DIAG[l];
            let var = vf * ((a1 - b1).powi(2) + (a2 - b2).powi(2)) / 4.0 + vj * dd * dd;
            rho[(k, l)] *= (-0.5 * var).exp();
        }
    }
}

/// Amplitude damping of one spin toward |↓⟩ with decay probability `gamma`.
pub fn amplitude_damping(rho: &Mat4, qubit: u8, gamma: f64) -> Mat4 {
    let k0 = Mat2::new(
        C64::from((1.0 - gamma).sqrt()),
        C64::from(0.0),
        C64::from(0.0),
        C64::from(1.0),
    );
    let k1 = Mat2::new(C64::from(0.0), C64::from(0.0), C64::from(gamma.sqrt()), C64::from(0.0));
    let a = on_qubit(qubit, &k0);
    let b = on_qubit(qubit, &k1);
    a * rho * a.adjoint() + b * rho * b.adjoint()
}

/// ρ → (1−p)ρ + p·(Tr_q ρ ⊗ I/2): Pauli twirl with weight p/4 per Pauli.
pub fn depolarize(rho: &Mat4, qubit: u8, p: f64) -> Mat4 {
    let mut out = rho.scale(1.0 - 0.75 * p);
    for pauli in [pauli_x(), pauli_y(), pauli_z()] {
        let op = on_qubit(qubit, &pauli);
        out += (op * rho * op).scale(p / 4.0);
    }
    out
}
