//! Seeded random generators used by property tests, boundary sampling,
//! lineality probing and Haar averaging.
//!
//! The curvature-operator generator draws a symmetric matrix of
//! independent standard normals, Bianchi-projects it, and optionally
//! projects onto one of the irreducible components; it is the test
//! measure of the whole crate and must stay reproducible.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{decompose, from_traceless_ricci, CurvatureOperator, SymTensor2};

/// One of the three irreducible summands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Identity,
    TracelessRicci,
    Weyl,
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(len: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Gaussian symmetric matrix, Bianchi-projected.
pub fn random_operator(n: usize, rng: &mut impl Rng) -> CurvatureOperator {
    let dim = n * (n - 1) / 2;
    let raw = gaussian_matrix(dim, dim, rng);
    let sym = (&raw + raw.transpose()) * 0.5;
    CurvatureOperator::from_raw_symmetric(n, sym).expect("symmetric by construction")
}

/// Random operator projected onto a single irreducible component.
pub fn random_component(n: usize, component: Component, rng: &mut impl Rng) -> CurvatureOperator {
    match component {
        Component::Identity => {
            let c: f64 = rng.sample(StandardNormal);
            CurvatureOperator::identity(n).expect("valid n").scale(c)
        }
        Component::TracelessRicci => {
            let a0 = random_traceless_sym(n, rng);
            from_traceless_ricci(&a0).expect("traceless by construction")
        }
        Component::Weyl => decompose(&random_operator(n, rng)).r_w,
    }
}

/// Gaussian symmetric n×n tensor with the trace removed.
pub fn random_traceless_sym(n: usize, rng: &mut impl Rng) -> SymTensor2 {
    let raw = gaussian_matrix(n, n, rng);
    let sym = (&raw + raw.transpose()) * 0.5;
    SymTensor2::from_mat(sym).expect("symmetric").traceless()
}

/// Haar-distributed element of O(n).
///
/// QR of a Gaussian matrix with the R-diagonal sign correction gives the
/// Haar measure; conditioning on determinant +1 (composing with a fixed
/// reflection when needed) lands exactly on SO(n), and an independent
/// fair coin re-applies the reflection so both components of O(n) carry
/// equal mass.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let z = gaussian_matrix(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for row in 0..n {
                q[(row, k)] = -q[(row, k)];
            }
        }
    }
    let reflect = |m: &mut DMatrix<f64>| {
        for row in 0..n {
            m[(row, 0)] = -m[(row, 0)];
        }
    };
    if q.determinant() < 0.0 {
        reflect(&mut q);
    }
    if rng.gen::<bool>() {
        reflect(&mut q);
    }
    q
}

/// Orthonormal k-frame in ℝᵐ (uniform on the Stiefel manifold).
pub fn random_frame(m: usize, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    assert!(k <= m);
    let z = gaussian_matrix(m, k, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for col in 0..k {
        if r[(col, col)] < 0.0 {
            for row in 0..m {
                q[(row, col)] = -q[(row, col)];
            }
        }
    }
    q
}
