//! The exterior square of Euclidean space and its Lie-algebra structure.
//!
//! Two-forms are stored in the lexicographic basis `e_i ∧ e_j`, `i < j`
//! (1-based in documentation, 0-based in storage). The inner product is
//! induced from the standard one,
//! `⟨x∧y, z∧t⟩ = ⟨x,z⟩⟨y,t⟩ − ⟨x,t⟩⟨y,z⟩`,
//! which makes that basis orthonormal. The identification with
//! skew-symmetric matrices sends `x∧y` to `u ↦ ⟨x,u⟩y − ⟨y,u⟩x`; the
//! Lie bracket is the matrix commutator pulled back through that map.
//! Every index convention used downstream lives here.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordered basis of the two-forms on ℝⁿ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivectorBasis {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl BivectorBasis {
    /// Basis for Λ²ℝⁿ, n ≥ 2.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "bivector basis needs ambient dimension >= 2, got {n}"
            )));
        }
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        Ok(Self { n, pairs })
    }

    /// Ambient dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Bivector dimension N = n(n−1)/2.
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    /// Lexicographic index of `e_i ∧ e_j` for 0-based `i < j`.
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        // offset of row i: sum_{k<i} (n-1-k) = i(2n-i-1)/2
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// The 0-based pair (i, j), i < j, at basis position `idx`.
    pub fn pair_of(&self, idx: usize) -> (usize, usize) {
        self.pairs[idx]
    }

    /// All pairs in basis order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// An element of Λ²ℝⁿ; doubles as an element of so(n).
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector {
    pub basis: BivectorBasis,
    pub coords: DVector<f64>,
}

impl Bivector {
    pub fn zero(basis: BivectorBasis) -> Self {
        let coords = DVector::zeros(basis.dim());
        Self { basis, coords }
    }

    pub fn from_coords(basis: BivectorBasis, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coordinates, got {}",
                basis.dim(),
                coords.len()
            )));
        }
        Ok(Self { basis, coords })
    }

    /// Basis bivector `e_i ∧ e_j` (0-based, i < j).
    pub fn basis_element(basis: BivectorBasis, i: usize, j: usize) -> Self {
        let mut coords = DVector::zeros(basis.dim());
        coords[basis.index_of(i, j)] = 1.0;
        Self { basis, coords }
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn dot(&self, other: &Bivector) -> f64 {
        self.coords.dot(&other.coords)
    }
}

fn check_same_basis(a: &Bivector, b: &Bivector) -> Result<()> {
    if a.basis != b.basis {
        return Err(Error::DimensionMismatch(format!(
            "bivectors live in different spaces (n = {} vs n = {})",
            a.basis.n(),
            b.basis.n()
        )));
    }
    Ok(())
}

/// Wedge of two vectors: coords[(i,j)] = x_i y_j − x_j y_i.
pub fn wedge(x: &DVector<f64>, y: &DVector<f64>) -> Result<Bivector> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "wedge of vectors with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let basis = BivectorBasis::new(x.len())?;
    let mut coords = DVector::zeros(basis.dim());
    for (idx, &(i, j)) in basis.pairs().iter().enumerate() {
        coords[idx] = x[i] * y[j] - x[j] * y[i];
    }
    Ok(Bivector { basis, coords })
}

/// The skew matrix of a bivector: x∧y acts as u ↦ ⟨x,u⟩y − ⟨y,u⟩x.
///
/// For the basis element e_i∧e_j this is the matrix sending e_i ↦ e_j and
/// e_j ↦ −e_i. The Frobenius norm of the image is √2 times the bivector
/// norm; `skew_to_bivector` inverts the map exactly.
pub fn bivector_to_skew(b: &Bivector) -> DMatrix<f64> {
    let n = b.basis.n();
    let mut m = DMatrix::zeros(n, n);
    for (idx, &(i, j)) in b.basis.pairs().iter().enumerate() {
        let c = b.coords[idx];
        m[(j, i)] = c;
        m[(i, j)] = -c;
    }
    m
}

/// Inverse of [`bivector_to_skew`]; reads the lower triangle.
pub fn skew_to_bivector(m: &DMatrix<f64>) -> Result<Bivector> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "skew matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let basis = BivectorBasis::new(m.nrows())?;
    let mut coords = DVector::zeros(basis.dim());
    for (idx, &(i, j)) in basis.pairs().iter().enumerate() {
        coords[idx] = m[(j, i)];
    }
    Ok(Bivector { basis, coords })
}

/// Lie bracket on Λ²ℝⁿ via the matrix commutator of the skew images.
pub fn bracket(a: &Bivector, b: &Bivector) -> Result<Bivector> {
    check_same_basis(a, b)?;
    let ma = bivector_to_skew(a);
    let mb = bivector_to_skew(b);
    let comm = &ma * &mb - &mb * &ma;
    skew_to_bivector(&comm)
}
