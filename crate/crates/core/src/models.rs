//! Curvature operators of the model geometries: constant-curvature
//! spaces, Riemannian products (including flat augmentations), the
//! sphere-times-hyperbolic-plane family, and complex projective space.
//! Also the Einstein-constant extractor and the block bookkeeping used
//! by the eigenspace-stability checks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bivector::BivectorBasis;
use crate::error::{Error, Result};
use crate::operator::{ricci, CurvatureOperator};

/// How a bivector index sits relative to a two-block splitting ℝⁿ = E ⊕ F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairClass {
    WithinFirst,
    Cross,
    WithinSecond,
}

/// A two-block splitting of ℝⁿ with the induced partition of bivector
/// indices into E∧E, E∧F and F∧F.
#[derive(Debug, Clone)]
pub struct ProductSplitting {
    n: usize,
    first: usize,
    classes: Vec<PairClass>,
}

impl ProductSplitting {
    /// Split ℝⁿ into the first `first` coordinates and the rest.
    pub fn new(n: usize, first: usize) -> Result<Self> {
        if first == 0 || first >= n {
            return Err(Error::InvalidArgument(format!(
                "splitting needs 0 < first < n, got first = {first}, n = {n}"
            )));
        }
        let basis = BivectorBasis::new(n)?;
        let classes = basis
            .pairs()
            .iter()
            .map(|&(i, j)| {
                if j < first {
                    PairClass::WithinFirst
                } else if i >= first {
                    PairClass::WithinSecond
                } else {
                    PairClass::Cross
                }
            })
            .collect();
        Ok(Self { n, first, classes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first_block(&self) -> usize {
        self.first
    }

    pub fn classes(&self) -> &[PairClass] {
        &self.classes
    }

    /// Off-block coupling of `r` relative to the E∧E / E∧F / F∧F
    /// partition; zero iff the three subspaces are invariant.
    pub fn invariant_subspace_residual(&self, r: &CurvatureOperator) -> f64 {
        assert_eq!(r.n(), self.n, "splitting dimension mismatch");
        let m = r.mat();
        let mut off = 0.0;
        for a in 0..self.classes.len() {
            for b in 0..self.classes.len() {
                if self.classes[a] != self.classes[b] {
                    off += m[(a, b)] * m[(a, b)];
                }
            }
        }
        off.sqrt()
    }

    /// Deviation of `r` from being scalar on each of the three
    /// subspaces; zero iff they are genuine eigenspaces.
    pub fn eigenspace_residual(&self, r: &CurvatureOperator) -> f64 {
        assert_eq!(r.n(), self.n, "splitting dimension mismatch");
        let m = r.mat();
        let mut worst = self.invariant_subspace_residual(r);
        for class in [PairClass::WithinFirst, PairClass::Cross, PairClass::WithinSecond] {
            let idx: Vec<usize> = (0..self.classes.len())
                .filter(|&k| self.classes[k] == class)
                .collect();
            if idx.is_empty() {
                continue;
            }
            let mean = idx.iter().map(|&k| m[(k, k)]).sum::<f64>() / idx.len() as f64;
            let mut dev = 0.0f64;
            for &a in &idx {
                for &b in &idx {
                    let target = if a == b { mean } else { 0.0 };
                    dev = dev.max((m[(a, b)] - target).abs());
                }
            }
            worst = worst.max(dev);
        }
        worst
    }
}

/// The space form of constant curvature κ: the operator κ·Id
/// (the unit sphere is Id, since id∧id = Id).
pub fn constant_curvature(n: usize, kappa: f64) -> Result<CurvatureOperator> {
    Ok(CurvatureOperator::identity(n)?.scale(kappa))
}

/// Riemannian product: block direct sum acting by R₁ on E∧E, R₂ on F∧F,
/// and zero on every cross bivector. Blocks are embedded contiguously,
/// the first factor on the leading coordinates.
pub fn product(r1: &CurvatureOperator, r2: &CurvatureOperator) -> Result<CurvatureOperator> {
    let p = r1.n();
    let q = r2.n();
    let n = p + q;
    let basis = BivectorBasis::new(n)?;
    let dim = basis.dim();
    let b1 = r1.basis();
    let b2 = r2.basis();
    let mut mat = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let (i, j) = basis.pair_of(a);
        for bidx in 0..dim {
            let (k, l) = basis.pair_of(bidx);
            mat[(a, bidx)] = if j < p && l < p {
                r1.mat()[(b1.index_of(i, j), b1.index_of(k, l))]
            } else if i >= p && k >= p {
                r2.mat()[(b2.index_of(i - p, j - p), b2.index_of(k - p, l - p))]
            } else {
                0.0
            };
        }
    }
    Ok(CurvatureOperator::from_mat_unchecked(basis, mat))
}

/// Product with a flat ℝᵏ factor appended (k ≥ 1). A one-dimensional
/// block contributes no bivectors of its own, which is exactly the ×ℝ
/// augmentation; k ≥ 2 matches `product` with the zero operator.
pub fn augment_flat(r: &CurvatureOperator, k: usize) -> Result<CurvatureOperator> {
    if k == 0 {
        return Ok(r.clone());
    }
    let p = r.n();
    let n = p + k;
    let basis = BivectorBasis::new(n)?;
    let dim = basis.dim();
    let b1 = r.basis();
    let mut mat = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let (i, j) = basis.pair_of(a);
        if j >= p {
            continue;
        }
        for bidx in 0..dim {
            let (kk, l) = basis.pair_of(bidx);
            if l >= p {
                continue;
            }
            mat[(a, bidx)] = r.mat()[(b1.index_of(i, j), b1.index_of(kk, l))];
        }
    }
    Ok(CurvatureOperator::from_mat_unchecked(basis, mat))
}

/// S^{n−2}(1) × H²(−1): conformally flat with mixed Ricci spectrum; its
/// traceless-Ricci part is the canonical generator used throughout the
/// boundary computations.
pub fn sphere_times_hyperbolic(n: usize) -> Result<CurvatureOperator> {
    if n < 4 {
        return Err(Error::Unsupported(format!(
            "sphere-times-hyperbolic needs n >= 4, got {n}"
        )));
    }
    product(
        &constant_curvature(n - 2, 1.0)?,
        &constant_curvature(2, -1.0)?,
    )
}

/// ℝ^{n−2} × S²(1): the nonnegative operator paired with
/// `sphere_times_hyperbolic` in the Einstein-product construction.
pub fn flat_times_sphere2(n: usize) -> Result<CurvatureOperator> {
    if n < 4 {
        return Err(Error::Unsupported(format!(
            "flat-times-sphere needs n >= 4, got {n}"
        )));
    }
    product(
        &CurvatureOperator::zero(n - 2)?,
        &constant_curvature(2, 1.0)?,
    )
}

/// Complex projective space CP^m on ℝ^{2m}, normalized to holomorphic
/// sectional curvature 4:
///
/// ```text
/// R(x,y,z,t) = ⟨x,z⟩⟨y,t⟩ − ⟨x,t⟩⟨y,z⟩
///            + ⟨Jx,z⟩⟨Jy,t⟩ − ⟨Jx,t⟩⟨Jy,z⟩ + 2⟨Jx,y⟩⟨Jz,t⟩
/// ```
///
/// with J the standard complex structure pairing coordinates (2k, 2k+1).
pub fn fubini_study(m: usize) -> Result<CurvatureOperator> {
    if m < 2 {
        return Err(Error::Unsupported(format!(
            "complex projective space needs m >= 2, got {m}"
        )));
    }
    let n = 2 * m;
    let basis = BivectorBasis::new(n)?;
    let dim = basis.dim();
    // j_vec[a] = the index J e_a points to, j_sign[a] = its sign
    let j_of = |a: usize| -> (usize, f64) {
        if a % 2 == 0 {
            (a + 1, 1.0)
        } else {
            (a - 1, -1.0)
        }
    };
    let jdot = |a: usize, c: usize| -> f64 {
        // ⟨J e_a, e_c⟩
        let (target, sign) = j_of(a);
        if target == c {
            sign
        } else {
            0.0
        }
    };
    let entry = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        d(p, r) * d(q, s) - d(p, s) * d(q, r) + jdot(p, r) * jdot(q, s)
            - jdot(p, s) * jdot(q, r)
            + 2.0 * jdot(p, q) * jdot(r, s)
    };
    let mut mat = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let (p, qq) = basis.pair_of(a);
        for b in 0..dim {
            let (r, s) = basis.pair_of(b);
            mat[(a, b)] = entry(p, qq, r, s);
        }
    }
    let sym = (&mat + mat.transpose()) * 0.5;
    Ok(CurvatureOperator::from_mat_unchecked(basis, sym))
}

/// Best Einstein constant and the relative deviation from Einstein-ness:
/// λ = tr(ric)/n, residual = ‖ric − λ·id‖ / max(1, ‖R‖).
pub fn einstein_constant(r: &CurvatureOperator) -> (f64, f64) {
    let ric = ricci(r);
    let n = r.n();
    let lambda = ric.trace() / n as f64;
    let defect = (ric.mat() - DMatrix::identity(n, n) * lambda).norm();
    (lambda, defect / r.norm().max(1.0))
}

/// Extra parameters accepted by the model registry.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModelParams {
    /// Curvature of constant-curvature factors (default 1).
    pub kappa: Option<f64>,
    /// First-block dimension for `product`.
    pub p: Option<usize>,
    /// Curvature of the second factor for `product` (default 1).
    pub kappa2: Option<f64>,
}

/// Registry names: sphere, hyperbolic, sxh2, rxs2, s2xs2, cpm, product.
pub fn model_by_name(name: &str, n: usize, params: ModelParams) -> Result<CurvatureOperator> {
    match name {
        "sphere" => constant_curvature(n, params.kappa.unwrap_or(1.0)),
        "hyperbolic" => constant_curvature(n, params.kappa.unwrap_or(-1.0)),
        "sxh2" => sphere_times_hyperbolic(n),
        "rxs2" => flat_times_sphere2(n),
        "s2xs2" => {
            if n != 4 {
                return Err(Error::Unsupported(format!(
                    "s2xs2 lives in dimension 4, got {n}"
                )));
            }
            product(&constant_curvature(2, 1.0)?, &constant_curvature(2, 1.0)?)
        }
        "cpm" => {
            if n % 2 != 0 {
                return Err(Error::Unsupported(format!(
                    "cpm needs an even ambient dimension, got {n}"
                )));
            }
            fubini_study(n / 2)
        }
        "product" => {
            let p = params.p.ok_or_else(|| {
                Error::InvalidArgument("product model needs --p for the first block".into())
            })?;
            if p < 2 || p + 2 > n {
                return Err(Error::InvalidArgument(format!(
                    "product blocks need p >= 2 and n-p >= 2, got p = {p}, n = {n}"
                )));
            }
            product(
                &constant_curvature(p, params.kappa.unwrap_or(1.0))?,
                &constant_curvature(n - p, params.kappa2.unwrap_or(1.0))?,
            )
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// All registry names, for CLI help and error messages.
pub const MODEL_NAMES: &[&str] = &[
    "sphere",
    "hyperbolic",
    "sxh2",
    "rxs2",
    "s2xs2",
    "cpm",
    "product",
];
