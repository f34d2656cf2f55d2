//! Algebraic curvature operators: symmetric endomorphisms of Λ²ℝⁿ
//! satisfying the first Bianchi identity, together with the Ricci and
//! scalar traces, the wedge of symmetric tensors, and the splitting into
//! identity, traceless-Ricci and Weyl parts.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bivector::BivectorBasis;
use crate::error::{Error, Result};

/// Relative symmetry tolerance for raw inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative Bianchi tolerance used by the validator.
pub const BIANCHI_TOL: f64 = 1e-10;

/// A symmetric operator on ℝⁿ (Ricci tensors and wedge factors).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    n: usize,
    mat: DMatrix<f64>,
}

impl SymTensor2 {
    pub fn from_mat(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric tensor must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let scale = mat.norm().max(1.0);
        let residual = (&mat - mat.transpose()).norm();
        if residual > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric {
                residual: residual / scale,
            });
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self {
            n: sym.nrows(),
            mat: sym,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// Remove the trace part.
    pub fn traceless(&self) -> SymTensor2 {
        let shift = self.trace() / self.n as f64;
        let mut mat = self.mat.clone();
        for i in 0..self.n {
            mat[(i, i)] -= shift;
        }
        SymTensor2 { n: self.n, mat }
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> DVector<f64> {
        sym_eigenvalues(&self.mat)
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(mat: &DMatrix<f64>) -> DVector<f64> {
    let mut ev: Vec<f64> = mat
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    DVector::from_vec(ev)
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending.
pub fn sym_eigen(mat: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(mat.nrows(), order.len());
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// An algebraic curvature operator in the lexicographic bivector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureOperator {
    basis: BivectorBasis,
    mat: DMatrix<f64>,
}

/// Residuals reported by [`CurvatureOperator::validate`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Validation {
    pub symmetry_residual: f64,
    pub bianchi_residual: f64,
    pub scale: f64,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.symmetry_residual <= SYMMETRY_TOL * self.scale
            && self.bianchi_residual <= BIANCHI_TOL * self.scale
    }
}

impl CurvatureOperator {
    /// Construct from a raw symmetric N×N matrix; always Bianchi-projects.
    pub fn from_raw_symmetric(n: usize, mat: DMatrix<f64>) -> Result<Self> {
        let basis = BivectorBasis::new(n)?;
        if mat.nrows() != basis.dim() || mat.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {0}x{0} matrix for n = {n}, got {1}x{2}",
                basis.dim(),
                mat.nrows(),
                mat.ncols()
            )));
        }
        let scale = mat.norm().max(1.0);
        let asym = (&mat - mat.transpose()).norm();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric {
                residual: asym / scale,
            });
        }
        Ok(project_bianchi_basis(&basis, &mat))
    }

    pub(crate) fn from_mat_unchecked(basis: BivectorBasis, mat: DMatrix<f64>) -> Self {
        debug_assert_eq!(mat.nrows(), basis.dim());
        debug_assert_eq!(mat.ncols(), basis.dim());
        Self { basis, mat }
    }

    pub fn identity(n: usize) -> Result<Self> {
        let basis = BivectorBasis::new(n)?;
        let dim = basis.dim();
        Ok(Self {
            basis,
            mat: DMatrix::identity(dim, dim),
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        let basis = BivectorBasis::new(n)?;
        let dim = basis.dim();
        Ok(Self {
            basis,
            mat: DMatrix::zeros(dim, dim),
        })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &BivectorBasis {
        &self.basis
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// Frobenius pairing ⟨R₁, R₂⟩.
    pub fn dot(&self, other: &CurvatureOperator) -> f64 {
        self.mat.dot(&other.mat)
    }

    pub fn scale(&self, c: f64) -> CurvatureOperator {
        CurvatureOperator {
            basis: self.basis.clone(),
            mat: &self.mat * c,
        }
    }

    pub fn add(&self, other: &CurvatureOperator) -> CurvatureOperator {
        assert_eq!(self.basis, other.basis, "curvature operator basis mismatch");
        CurvatureOperator {
            basis: self.basis.clone(),
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &CurvatureOperator) -> CurvatureOperator {
        assert_eq!(self.basis, other.basis, "curvature operator basis mismatch");
        CurvatureOperator {
            basis: self.basis.clone(),
            mat: &self.mat - &other.mat,
        }
    }

    /// Smallest eigenvalue of the operator on Λ².
    pub fn lambda_min(&self) -> f64 {
        sym_eigenvalues(&self.mat)[0]
    }

    /// Ascending eigenvalues on Λ².
    pub fn eigenvalues(&self) -> DVector<f64> {
        sym_eigenvalues(&self.mat)
    }

    /// The (0,4)-tensor entry ⟨R(e_p∧e_q), e_r∧e_s⟩, indices 0-based.
    pub fn tensor_entry(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        if p == q || r == s {
            return 0.0;
        }
        let (a, sa) = if p < q {
            (self.basis.index_of(p, q), 1.0)
        } else {
            (self.basis.index_of(q, p), -1.0)
        };
        let (b, sb) = if r < s {
            (self.basis.index_of(r, s), 1.0)
        } else {
            (self.basis.index_of(s, r), -1.0)
        };
        sa * sb * self.mat[(a, b)]
    }

    /// Quadratic form ⟨R η, η⟩ on bivector coordinates.
    pub fn quadratic_form(&self, eta: &DVector<f64>) -> f64 {
        eta.dot(&(&self.mat * eta))
    }

    /// Symmetry and Bianchi residuals (absolute, with the scale they are
    /// measured against).
    pub fn validate(&self) -> Validation {
        let scale = self.mat.norm().max(1.0);
        let symmetry_residual = (&self.mat - self.mat.transpose()).norm();
        let bianchi_residual = bianchi_residual(self);
        Validation {
            symmetry_residual,
            bianchi_residual,
            scale,
        }
    }
}

/// Largest cyclic-sum violation of the first Bianchi identity.
pub fn bianchi_residual(r: &CurvatureOperator) -> f64 {
    let n = r.n();
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            for rr in (q + 1)..n {
                for s in 0..n {
                    let cyc = r.tensor_entry(p, q, rr, s)
                        + r.tensor_entry(q, rr, p, s)
                        + r.tensor_entry(rr, p, q, s);
                    worst = worst.max(cyc.abs());
                }
            }
        }
    }
    worst
}

fn project_bianchi_basis(basis: &BivectorBasis, mat: &DMatrix<f64>) -> CurvatureOperator {
    let dim = basis.dim();
    let probe = CurvatureOperator::from_mat_unchecked(basis.clone(), mat.clone());
    let mut out = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let (p, q) = basis.pair_of(a);
        for b in 0..dim {
            let (r, s) = basis.pair_of(b);
            // subtract the totally antisymmetric (four-form) component:
            // P(T) = T - (T(p,q,r,s) + T(q,r,p,s) + T(r,p,q,s)) / 3
            let t0 = probe.tensor_entry(p, q, r, s);
            let t1 = probe.tensor_entry(q, r, p, s);
            let t2 = probe.tensor_entry(r, p, q, s);
            out[(a, b)] = (2.0 * t0 - t1 - t2) / 3.0;
        }
    }
    let sym = (&out + out.transpose()) * 0.5;
    CurvatureOperator::from_mat_unchecked(basis.clone(), sym)
}

/// Orthogonal projection of a symmetric matrix onto the Bianchi subspace.
pub fn project_bianchi(n: usize, mat: &DMatrix<f64>) -> Result<CurvatureOperator> {
    CurvatureOperator::from_raw_symmetric(n, mat.clone())
}

/// Ricci trace: ⟨ρ(R)x, y⟩ = Σᵢ ⟨R(x∧eᵢ), y∧eᵢ⟩.
pub fn ricci(r: &CurvatureOperator) -> SymTensor2 {
    let n = r.n();
    let mut mat = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut sum = 0.0;
            for i in 0..n {
                sum += r.tensor_entry(a, i, b, i);
            }
            mat[(a, b)] = sum;
            mat[(b, a)] = sum;
        }
    }
    SymTensor2 { n, mat }
}

/// Scalar curvature: twice the trace of the operator.
pub fn scalar(r: &CurvatureOperator) -> f64 {
    2.0 * r.trace()
}

/// Wedge of symmetric operators: (A∧B)(x∧y) = ½(Ax∧By + Bx∧Ay).
///
/// Half of the Kulkarni–Nomizu product of the associated quadratic forms.
pub fn wedge_sym(a: &SymTensor2, b: &SymTensor2) -> Result<CurvatureOperator> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(format!(
            "wedge of tensors on different dimensions: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    let n = a.n();
    let basis = BivectorBasis::new(n)?;
    let dim = basis.dim();
    let (am, bm) = (a.mat(), b.mat());
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (i, j) = basis.pair_of(col);
        for row in 0..dim {
            let (k, l) = basis.pair_of(row);
            out[(row, col)] = 0.5
                * (am[(k, i)] * bm[(l, j)] - am[(l, i)] * bm[(k, j)] + bm[(k, i)] * am[(l, j)]
                    - bm[(l, i)] * am[(k, j)]);
        }
    }
    let sym = (&out + out.transpose()) * 0.5;
    Ok(CurvatureOperator::from_mat_unchecked(basis, sym))
}

/// Lift a traceless Ricci tensor into the curvature-operator space:
/// A₀ ↦ (2/(n−2)) A₀ ∧ id. Inverse of `ricci` on the traceless-Ricci summand.
pub fn from_traceless_ricci(a0: &SymTensor2) -> Result<CurvatureOperator> {
    let n = a0.n();
    if n < 3 {
        return Err(Error::Unsupported(format!(
            "the traceless-Ricci summand needs n >= 3, got {n}"
        )));
    }
    let trace = a0.trace().abs();
    if trace > 1e-10 * a0.norm().max(f64::MIN_POSITIVE) && trace > 1e-14 {
        return Err(Error::NotTraceless {
            trace,
            norm: a0.norm(),
        });
    }
    let id = SymTensor2::identity(n);
    let w = wedge_sym(a0, &id)?;
    Ok(w.scale(2.0 / (n as f64 - 2.0)))
}

/// The three irreducible components of a curvature operator.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub r_id: CurvatureOperator,
    pub r_0: CurvatureOperator,
    pub r_w: CurvatureOperator,
}

impl Decomposition {
    pub fn reassemble(&self) -> CurvatureOperator {
        self.r_id.add(&self.r_0).add(&self.r_w)
    }

    /// The "Einstein part" R_Id + R_W used by the dimension-four cone
    /// construction.
    pub fn einstein_part(&self) -> CurvatureOperator {
        self.r_id.add(&self.r_w)
    }
}

/// Split R into identity, traceless-Ricci, and Weyl parts.
pub fn decompose(r: &CurvatureOperator) -> Decomposition {
    let n = r.n();
    let dim = r.dim() as f64;
    let r_id = CurvatureOperator::identity(n)
        .expect("valid n")
        .scale(r.trace() / dim);
    let ric = ricci(r);
    let ric0 = ric.traceless();
    let r_0 = if n >= 3 {
        from_traceless_ricci(&ric0).expect("traceless by construction")
    } else {
        CurvatureOperator::zero(n).expect("valid n")
    };
    let r_w = r.sub(&r_id).sub(&r_0);
    Decomposition { r_id, r_0, r_w }
}

/// The induced orthogonal map on Λ²: column (i,j) holds the coordinates
/// of g·eᵢ ∧ g·eⱼ. Computed once per g; conjugation by it realizes the
/// natural O(n)-action on curvature operators.
pub fn induced_lambda2(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if g.nrows() != g.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "orthogonal matrix must be square, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let basis = BivectorBasis::new(g.nrows())?;
    let dim = basis.dim();
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (i, j) = basis.pair_of(col);
        for row in 0..dim {
            let (k, l) = basis.pair_of(row);
            out[(row, col)] = g[(k, i)] * g[(l, j)] - g[(l, i)] * g[(k, j)];
        }
    }
    Ok(out)
}

/// The action of g ∈ O(n): ⟨(g·R)(x∧y), z∧t⟩ = ⟨R(gx∧gy), gz∧gt⟩.
pub fn act(g: &DMatrix<f64>, r: &CurvatureOperator) -> Result<CurvatureOperator> {
    let lam = induced_lambda2(g)?;
    if lam.nrows() != r.dim() {
        return Err(Error::DimensionMismatch(format!(
            "action of O({}) on an operator with n = {}",
            g.nrows(),
            r.n()
        )));
    }
    let mat = lam.transpose() * r.mat() * &lam;
    let sym = (&mat + mat.transpose()) * 0.5;
    Ok(CurvatureOperator::from_mat_unchecked(
        r.basis().clone(),
        sym,
    ))
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    n: usize,
    mat: Vec<f64>,
}

/// Diagnostics recorded when loading an operator from disk.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LoadDiagnostics {
    /// Asymmetry of the raw upper-triangle reconstruction (always 0 for
    /// files written by this crate).
    pub symmetry_residual: f64,
    /// Bianchi residual of the raw matrix before projection.
    pub bianchi_residual_before: f64,
    /// Norm of the correction applied by the projection.
    pub projection_residual: f64,
}

/// Serialize as `{ "n": …, "mat": [upper triangle, row-major] }`.
pub fn to_json(r: &CurvatureOperator) -> String {
    let dim = r.dim();
    let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
    for row in 0..dim {
        for col in row..dim {
            upper.push(r.mat()[(row, col)]);
        }
    }
    serde_json::to_string_pretty(&OperatorFile { n: r.n(), mat: upper }).expect("serializable")
}

/// Parse the JSON operator format; symmetrizes and Bianchi-projects,
/// recording the residuals in the diagnostics.
pub fn from_json(text: &str) -> Result<(CurvatureOperator, LoadDiagnostics)> {
    let file: OperatorFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("operator file: {e}")))?;
    let basis = BivectorBasis::new(file.n)?;
    let dim = basis.dim();
    let expected = dim * (dim + 1) / 2;
    if file.mat.len() != expected {
        return Err(Error::Parse(format!(
            "operator file for n = {} must carry {} upper-triangle entries, found {}",
            file.n,
            expected,
            file.mat.len()
        )));
    }
    let mut mat = DMatrix::zeros(dim, dim);
    let mut k = 0;
    for row in 0..dim {
        for col in row..dim {
            mat[(row, col)] = file.mat[k];
            mat[(col, row)] = file.mat[k];
            k += 1;
        }
    }
    let raw = CurvatureOperator::from_mat_unchecked(basis.clone(), mat.clone());
    let bianchi_before = bianchi_residual(&raw);
    let projected = project_bianchi_basis(&basis, &mat);
    let diagnostics = LoadDiagnostics {
        symmetry_residual: 0.0,
        bianchi_residual_before: bianchi_before,
        projection_residual: (projected.mat() - &mat).norm(),
    };
    Ok((projected, diagnostics))
}

/// The operator-file payload as a JSON value, for embedding in reports.
pub fn to_json_value(r: &CurvatureOperator) -> serde_json::Value {
    serde_json::from_str(&to_json(r)).expect("well-formed")
}

pub fn write_json_file(r: &CurvatureOperator, path: &std::path::Path) -> Result<()> {
    crate::report::write_atomic(path, to_json(r).as_bytes())
}

pub fn read_json_file(path: &std::path::Path) -> Result<(CurvatureOperator, LoadDiagnostics)> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}

// ---------------------------------------------------------------------------
// SymTensor2 file format (Ricci outputs)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SymTensorFile {
    n: usize,
    mat: Vec<f64>,
}

pub fn sym_tensor_to_json(t: &SymTensor2) -> String {
    let n = t.n();
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for row in 0..n {
        for col in row..n {
            upper.push(t.mat()[(row, col)]);
        }
    }
    serde_json::to_string_pretty(&SymTensorFile { n, mat: upper }).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_operator, random_orthogonal, random_traceless_sym};
    use crate::rng::stream;

    #[test]
    fn identity_is_bianchi_fixed_point() {
        let id = CurvatureOperator::identity(5).unwrap();
        let projected = CurvatureOperator::from_raw_symmetric(5, id.mat().clone()).unwrap();
        assert!((projected.mat() - id.mat()).norm() <= 1e-14);
        assert!(id.validate().is_valid());
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        for k in 0..20 {
            let mut rng = stream(5, "proj-idem", k);
            let n = 4 + (k as usize % 3);
            let basis = BivectorBasis::new(n).unwrap();
            let dim = basis.dim();
            let raw = DMatrix::from_fn(dim, dim, |_, _| {
                rand::Rng::gen::<f64>(&mut rng) * 2.0 - 1.0
            });
            let sym = (&raw + raw.transpose()) * 0.5;
            let p1 = CurvatureOperator::from_raw_symmetric(n, sym.clone()).unwrap();
            let p2 = CurvatureOperator::from_raw_symmetric(n, p1.mat().clone()).unwrap();
            assert!(
                (p2.mat() - p1.mat()).norm() <= 1e-12 * p1.norm().max(1.0),
                "projection not idempotent"
            );
            assert!(p1.validate().is_valid(), "projection output fails Bianchi");
            // orthogonality: the removed part is orthogonal to every projected T
            let removed = &sym - p1.mat();
            let mut rng2 = stream(6, "proj-orth", k);
            let other = random_operator(n, &mut rng2);
            assert!(
                removed.dot(other.mat()).abs() <= 1e-10 * sym.norm().max(1.0) * other.norm().max(1.0),
                "projection not orthogonal"
            );
        }
    }

    #[test]
    fn four_form_direction_projects_to_zero() {
        // n = 4: S(e_p∧e_q, e_r∧e_s) = sign of the permutation (p q r s).
        let basis = BivectorBasis::new(4).unwrap();
        let mut mat = DMatrix::zeros(6, 6);
        let a = basis.index_of(0, 1);
        let b = basis.index_of(2, 3);
        mat[(a, b)] = 1.0;
        mat[(b, a)] = 1.0;
        let c = basis.index_of(0, 2);
        let d = basis.index_of(1, 3);
        mat[(c, d)] = -1.0;
        mat[(d, c)] = -1.0;
        let e = basis.index_of(0, 3);
        let f = basis.index_of(1, 2);
        mat[(e, f)] = 1.0;
        mat[(f, e)] = 1.0;
        let projected = CurvatureOperator::from_raw_symmetric(4, mat).unwrap();
        assert!(projected.norm() <= 1e-14, "volume form should project to zero");
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let basis = BivectorBasis::new(4).unwrap();
        let mut mat = DMatrix::zeros(basis.dim(), basis.dim());
        mat[(0, 1)] = 1.0;
        assert!(matches!(
            CurvatureOperator::from_raw_symmetric(4, mat),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn ricci_of_identity() {
        for n in [3, 4, 5, 7] {
            let id = CurvatureOperator::identity(n).unwrap();
            let ric = ricci(&id);
            let expected = SymTensor2::identity(n).mat() * (n as f64 - 1.0);
            assert!((ric.mat() - expected).norm() <= 1e-12);
        }
    }

    #[test]
    fn ricci_of_weyl_part_vanishes() {
        for k in 0..10 {
            let mut rng = stream(7, "weyl-ricci", k);
            let r = random_operator(5, &mut rng);
            let dec = decompose(&r);
            assert!(
                ricci(&dec.r_w).norm() <= 1e-10 * r.norm().max(1.0),
                "Weyl part must be in the kernel of the Ricci morphism"
            );
        }
    }

    #[test]
    fn scalar_curvature_is_twice_trace() {
        let id = CurvatureOperator::identity(6).unwrap();
        assert_eq!(scalar(&id), (6 * 5) as f64);
        let scaled = id.scale(3.5);
        assert!((scalar(&scaled) - 3.5 * 30.0).abs() <= 1e-12);
        let mut rng = stream(8, "scalar", 0);
        let r = random_operator(5, &mut rng);
        assert!((scalar(&r) - ricci(&r).trace()).abs() <= 1e-11 * r.norm().max(1.0));
    }

    #[test]
    fn wedge_of_identities_is_identity() {
        for n in [3, 4, 6] {
            let id = SymTensor2::identity(n);
            let w = wedge_sym(&id, &id).unwrap();
            let expect = CurvatureOperator::identity(n).unwrap();
            assert!((w.mat() - expect.mat()).norm() <= 1e-14);
        }
    }

    #[test]
    fn wedge_with_identity_has_expected_ricci() {
        // ricci(A ∧ id) = ½((n−2)A + tr(A)·id)
        for k in 0..10 {
            let mut rng = stream(9, "wedge-ricci", k);
            let n = 5;
            let raw = DMatrix::from_fn(n, n, |_, _| rand::Rng::gen::<f64>(&mut rng) - 0.5);
            let a = SymTensor2::from_mat((&raw + raw.transpose()) * 0.5).unwrap();
            let w = wedge_sym(&a, &SymTensor2::identity(n)).unwrap();
            let ric = ricci(&w);
            let expected =
                (a.mat() * (n as f64 - 2.0) + DMatrix::identity(n, n) * a.trace()) * 0.5;
            assert!((ric.mat() - expected).norm() <= 1e-12 * a.norm().max(1.0));
            assert!(w.validate().is_valid(), "wedge output must satisfy Bianchi");
        }
    }

    #[test]
    fn wedge_is_bilinear_and_symmetric() {
        let mut rng = stream(10, "wedge-bilinear", 0);
        let n = 4;
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
            let raw = DMatrix::from_fn(n, n, |_, _| rand::Rng::gen::<f64>(rng) - 0.5);
            SymTensor2::from_mat((&raw + raw.transpose()) * 0.5).unwrap()
        };
        let a = mk(&mut rng);
        let a2 = mk(&mut rng);
        let b = mk(&mut rng);
        let lhs = wedge_sym(
            &SymTensor2::from_mat(a.mat() + a2.mat()).unwrap(),
            &b,
        )
        .unwrap();
        let rhs = wedge_sym(&a, &b).unwrap().add(&wedge_sym(&a2, &b).unwrap());
        assert!((lhs.mat() - rhs.mat()).norm() <= 1e-12);
        let ab = wedge_sym(&a, &b).unwrap();
        let ba = wedge_sym(&b, &a).unwrap();
        assert!((ab.mat() - ba.mat()).norm() <= 1e-14);
    }

    #[test]
    fn decompose_identity() {
        let id = CurvatureOperator::identity(5).unwrap();
        let dec = decompose(&id);
        assert!((dec.r_id.mat() - id.mat()).norm() <= 1e-13);
        assert!(dec.r_0.norm() <= 1e-13);
        assert!(dec.r_w.norm() <= 1e-13);
    }

    #[test]
    fn decompose_pure_traceless_ricci() {
        for k in 0..10 {
            let mut rng = stream(12, "dec-r0", k);
            let a0 = random_traceless_sym(5, &mut rng);
            let r0 = from_traceless_ricci(&a0).unwrap();
            let dec = decompose(&r0);
            assert!(dec.r_id.norm() <= 1e-12 * r0.norm().max(1.0));
            assert!(dec.r_w.norm() <= 1e-10 * r0.norm().max(1.0));
            assert!((dec.r_0.mat() - r0.mat()).norm() <= 1e-10 * r0.norm().max(1.0));
        }
    }

    #[test]
    fn decomposition_invariants_on_random_operators() {
        for k in 0..20 {
            let mut rng = stream(13, "dec-inv", k);
            let n = 4 + (k as usize % 4);
            let r = random_operator(n, &mut rng);
            let dec = decompose(&r);
            let scale = r.norm().max(1.0);
            assert!((dec.reassemble().mat() - r.mat()).norm() <= 1e-12 * scale);
            assert!(dec.r_0.trace().abs() <= 1e-10 * scale);
            assert!(dec.r_w.trace().abs() <= 1e-10 * scale);
            assert!(ricci(&dec.r_w).norm() <= 1e-10 * scale);
            assert!(dec.r_id.dot(&dec.r_0).abs() <= 1e-10 * scale * scale);
            assert!(dec.r_id.dot(&dec.r_w).abs() <= 1e-10 * scale * scale);
            assert!(dec.r_0.dot(&dec.r_w).abs() <= 1e-10 * scale * scale);
        }
    }

    #[test]
    fn from_traceless_ricci_roundtrip() {
        for n in 4..=8 {
            for k in 0..20 {
                let mut rng = stream(14, "ftr-roundtrip", (n * 100 + k) as u64);
                let a0 = random_traceless_sym(n, &mut rng);
                let r0 = from_traceless_ricci(&a0).unwrap();
                let back = ricci(&r0);
                assert!(
                    (back.mat() - a0.mat()).norm() <= 1e-10 * a0.norm().max(1.0),
                    "ricci(from_traceless_ricci(A)) != A at n = {n}"
                );
                assert!(scalar(&r0).abs() <= 1e-12 * a0.norm().max(1.0));
            }
        }
    }

    #[test]
    fn from_traceless_ricci_diagonal_action() {
        // output(e_i∧e_j) = (1/(n−2))(A_ii + A_jj) e_i∧e_j for diagonal A
        let n = 4;
        let a = SymTensor2::from_mat(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0, 1.0, -1.0, -1.0,
        ])))
        .unwrap();
        let r0 = from_traceless_ricci(&a).unwrap();
        let basis = r0.basis().clone();
        for idx in 0..r0.dim() {
            let (i, j) = basis.pair_of(idx);
            let expected = (a.mat()[(i, i)] + a.mat()[(j, j)]) / (n as f64 - 2.0);
            assert!((r0.mat()[(idx, idx)] - expected).abs() <= 1e-14);
        }
    }

    #[test]
    fn from_traceless_ricci_rejects_trace() {
        let a = SymTensor2::identity(4);
        assert!(matches!(
            from_traceless_ricci(&a),
            Err(Error::NotTraceless { .. })
        ));
        let zero = SymTensor2::zero(4);
        assert!(from_traceless_ricci(&zero).unwrap().norm() == 0.0);
    }

    #[test]
    fn dimension_three_has_no_weyl_part() {
        for k in 0..10 {
            let mut rng = stream(15, "n3-weyl", k);
            let r = random_operator(3, &mut rng);
            let dec = decompose(&r);
            assert!(
                dec.r_w.norm() <= 1e-10 * r.norm().max(1.0),
                "W = 0 in dimension three"
            );
        }
    }

    #[test]
    fn decomposition_is_equivariant() {
        for k in 0..10 {
            let mut rng = stream(16, "equivariance", k);
            let n = 4 + (k as usize % 3);
            let r = random_operator(n, &mut rng);
            let g = random_orthogonal(n, &mut rng);
            let gr = act(&g, &r).unwrap();
            let dec_gr = decompose(&gr);
            let dec_r = decompose(&r);
            let scale = r.norm().max(1.0);
            for (lhs, rhs) in [
                (&dec_gr.r_id, &dec_r.r_id),
                (&dec_gr.r_0, &dec_r.r_0),
                (&dec_gr.r_w, &dec_r.r_w),
            ] {
                let moved = act(&g, rhs).unwrap();
                assert!(
                    (lhs.mat() - moved.mat()).norm() <= 1e-10 * scale,
                    "decomposition does not commute with the O(n)-action"
                );
            }
        }
    }

    #[test]
    fn action_is_isometric_and_composes() {
        let mut rng = stream(17, "action", 0);
        let n = 5;
        let r = random_operator(n, &mut rng);
        let g = random_orthogonal(n, &mut rng);
        let gr = act(&g, &r).unwrap();
        assert!((gr.norm() - r.norm()).abs() <= 1e-10 * r.norm().max(1.0));
        assert!(gr.validate().is_valid());
    }

    #[test]
    fn json_roundtrip_preserves_operator() {
        let mut rng = stream(18, "json", 0);
        let r = random_operator(5, &mut rng);
        let text = to_json(&r);
        let (back, diag) = from_json(&text).unwrap();
        assert!((back.mat() - r.mat()).norm() <= 1e-12 * r.norm().max(1.0));
        assert!(diag.bianchi_residual_before <= 1e-10 * r.norm().max(1.0));
        assert!(diag.projection_residual <= 1e-12 * r.norm().max(1.0));
    }

    #[test]
    fn json_parse_errors() {
        assert!(from_json("").is_err());
        assert!(from_json("{\"n\": 4, \"mat\": [1.0]}").is_err());
    }
}
