//! Small fixed-size complex linear algebra.

use nalgebra::{Complex, Matrix2, Matrix4};

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.))
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Lift a single-qubit operator onto qubit 1 or 2.
pub fn on_qubit(q: u8, op: &Mat2) -> Mat4 {
    match q {
        1 => kron(op, &Mat2::identity()),
        2 => kron(&Mat2::identity(), op),
        _ => panic!("qubit index must be 1 or 2, got {q}"),
    }
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn one_norm(m: &Mat4) -> f64 {
    (0..4)
        .map(|j| (0..4).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &Mat4) -> Mat4 {
    const THETA13: f64 = 5.371920351148152;
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(s));
    let id = Mat4::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let b = |k: usize| C64::from(PADE13[k]);
    let u_inner = a6 * (a6 * b(13) + a4 * b(11) + a2 * b(9)) + a6 * b(7) + a4 * b(5) + a2 * b(3) + id * b(1);
    let u = a * u_inner;
    let v = a6 * (a6 * b(12) + a4 * b(10) + a2 * b(8)) + a6 * b(6) + a4 * b(4) + a2 * b(2) + id * b(0);
    let p = v + u;
    let q = v - u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is invertible for scaled input");
    for _ in 0..s {
        r = r * r;
    }
    r
}

/// `exp(-i 2π H t)` for a Hermitian `h` in hertz.
pub fn propagator(h: &Mat4, t: f64) -> Mat4 {
    if t == 0.0 {
        return Mat4::identity();
    }
    let is_diag = (0..4).all(|i| (0..4).all(|j| i == j || h[(i, j)] == C64::from(0.0)));
    if is_diag {
        let mut u = Mat4::zeros();
        for k in 0..4 {
            let phase = -2.0 * std::f64::consts::PI * h[(k, k)].re * t;
            u[(k, k)] = C64::from_polar(1.0, phase);
        }
        return u;
    }
    expm(&(h * (-I * (2.0 * std::f64::consts::PI * t))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        assert_eq!(expm(&Mat4::zeros()), Mat4::identity());
    }

    #[test]
    fn expm_diagonal() {
        let d = Mat4::from_diagonal(&nalgebra::Vector4::new(c(1.0, 0.), c(-2.0, 0.), c(0.0, 3.0), c(0.5, -0.5)));
        let e = expm(&d);
        for k in 0..4 {
            assert!((e[(k, k)] - d[(k, k)].exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn pauli_rotation_closed_form() {
        // exp(-i θ/2 σx) on qubit 2
        let theta = 1.234;
        let h = on_qubit(2, &pauli_x()).scale(0.5);
        let u = propagator(&h, theta / (2.0 * std::f64::consts::PI));
        let expect = Mat4::identity().scale((theta / 2.0).cos()) - on_qubit(2, &pauli_x()) * (I * (theta / 2.0).sin());
        assert!(max_abs(&(u - expect)) < 1e-14);
    }

    #[test]
    fn large_norm_stays_unitary() {
        let h = kron(&pauli_z(), &pauli_x()).scale(4.0e7) + on_qubit(1, &pauli_y()).scale(3.0e5);
        let u = propagator(&h, 7.3e-6);
        assert!(max_abs(&(u.adjoint() * u - Mat4::identity())) < 1e-10);
    }
}
