//! Curvature cones as signed membership margins, plus the convex-geometry
//! probes used by the invariance checker: boundary location along rays
//! from the identity, finite-difference tangent-cone tests, detection of
//! the maximal vector subspace, and Monte-Carlo Haar averaging.
//!
//! Margins are 1-homogeneous: positive strictly inside, zero on the
//! boundary, negative outside, so tolerance thresholds are scale-free.
//! Eigenvalue and trace margins are exact; the isotropic-curvature family
//! is evaluated by multi-start frame descent and always reported as
//! heuristic, with negative verdicts certified by an explicit frame.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bivector::BivectorBasis;
use crate::error::{Error, Result};
use crate::models::augment_flat;
use crate::operator::{act, decompose, ricci, sym_eigen, sym_eigenvalues, CurvatureOperator};
use crate::rng::stream;
use crate::sampling::{
    gaussian_matrix, random_component, random_frame, random_operator, random_orthogonal, Component,
};

/// Tolerance knobs, all configurable; defaults sit an order of magnitude
/// above eigensolver noise at the dimensions this crate targets.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Boundary localization: |margin(R_b)| ≤ boundary·(1+‖R_b‖).
    pub boundary: f64,
    /// Tangent acceptance: slope ≥ −slope·‖V‖.
    pub slope: f64,
    /// Lineality flags: margin(±G) ≥ −lineality for unit generators.
    pub lineality: f64,
    /// Ray parameter cap before declaring a recession direction.
    pub ray_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            boundary: 1e-9,
            slope: 1e-6,
            lineality: 1e-8,
            ray_cap: 1e6,
        }
    }
}

/// Whether a margin value is a certificate or an optimizer's best effort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Exact,
    Heuristic,
}

/// A margin evaluation; PIC-family margins attach the minimizing frame.
#[derive(Debug, Clone)]
pub struct MarginEval {
    pub value: f64,
    pub certainty: Certainty,
    pub witness_frame: Option<DMatrix<f64>>,
}

/// Options for the isotropic-curvature frame minimization.
#[derive(Debug, Clone, Copy)]
pub struct PicOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for PicOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0,
            max_iters: 300,
        }
    }
}

#[derive(Debug, Clone)]
enum ConeKind {
    /// Nonnegative scalar curvature: trace(R)/√N.
    Scal,
    /// Nonnegative curvature operator: λ_min.
    NnOperator,
    /// 2-nonnegative operator: λ₁+λ₂.
    TwoNn,
    /// Nonnegative Ricci: λ_min of ρ(R). Used as a negative control.
    NnRicci,
    /// Nonnegative isotropic curvature of R × ℝ^augment.
    Pic { augment: usize },
    /// Dimension-four construction: base margin of R_Id + R_W.
    Dim4 { base: Box<ConeSpec> },
    /// Synthetic non-invariant fallback: scal intersected with half-spaces
    /// from a fixed orbit sample of a skewed direction. Only approximately
    /// O(n)-invariant; used when the nonnegative-Ricci search finds nothing.
    Synthetic { directions: Vec<DMatrix<f64>>, norm: f64 },
}

/// A named curvature cone with a scale-covariant membership margin.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    name: String,
    n: usize,
    kind: ConeKind,
    pic: PicOptions,
}

impl ConeSpec {
    pub fn scal(n: usize) -> Result<Self> {
        BivectorBasis::new(n)?;
        Ok(Self {
            name: "scal".into(),
            n,
            kind: ConeKind::Scal,
            pic: PicOptions::default(),
        })
    }

    pub fn nn_operator(n: usize) -> Result<Self> {
        BivectorBasis::new(n)?;
        Ok(Self {
            name: "nno".into(),
            n,
            kind: ConeKind::NnOperator,
            pic: PicOptions::default(),
        })
    }

    pub fn two_nn(n: usize) -> Result<Self> {
        BivectorBasis::new(n)?;
        Ok(Self {
            name: "2nn".into(),
            n,
            kind: ConeKind::TwoNn,
            pic: PicOptions::default(),
        })
    }

    pub fn nn_ricci(n: usize) -> Result<Self> {
        BivectorBasis::new(n)?;
        Ok(Self {
            name: "nnricci".into(),
            n,
            kind: ConeKind::NnRicci,
            pic: PicOptions::default(),
        })
    }

    /// Isotropic-curvature cone of R × ℝ^augment; augment 0, 1, 2 give
    /// the pic, pic1, pic2 registry entries.
    pub fn pic(n: usize, augment: usize) -> Result<Self> {
        if augment > 2 {
            return Err(Error::InvalidArgument(format!(
                "flat augmentations beyond 2 are not part of the registry, got {augment}"
            )));
        }
        if augment == 0 && n < 4 {
            return Err(Error::Unsupported(format!(
                "isotropic curvature needs n >= 4, got {n}"
            )));
        }
        if augment > 0 && (n < 3 || n + augment < 4) {
            return Err(Error::Unsupported(format!(
                "augmented isotropic curvature needs n >= 3, got {n}"
            )));
        }
        let name = match augment {
            0 => "pic".to_string(),
            1 => "pic1".to_string(),
            _ => "pic2".to_string(),
        };
        Ok(Self {
            name,
            n,
            kind: ConeKind::Pic { augment },
            pic: PicOptions::default(),
        })
    }

    /// The dimension-four construction over a base cone that contains all
    /// nonnegative operators: margin(R) = base margin of R_Id + R_W.
    pub fn dim4(base: ConeSpec) -> Result<Self> {
        if base.n != 4 {
            return Err(Error::Unsupported(format!(
                "the construction lives in dimension 4, base cone has n = {}",
                base.n
            )));
        }
        let name = format!("dim4:{}", base.name);
        Ok(Self {
            name,
            n: 4,
            kind: ConeKind::Dim4 {
                base: Box::new(base),
            },
            pic: PicOptions::default(),
        })
    }

    /// Deterministic synthetic non-invariant cone (negative-control
    /// fallback): scal intersected with half-spaces ⟨g_k·A, ·⟩ ≥ 0 over a
    /// fixed 64-element orbit sample of A = Id + ½‖·‖-normalized Weyl.
    pub fn synthetic(n: usize) -> Result<Self> {
        let mut rng = stream(0xBAD_C0DE, "synthetic-cone-direction", n as u64);
        let w = random_component(n, Component::Weyl, &mut rng);
        let id = CurvatureOperator::identity(n)?;
        let a = id.add(&w.scale(0.5 / w.norm().max(1e-300)));
        let norm = a.norm();
        let mut directions = Vec::with_capacity(64);
        for k in 0..64u64 {
            let mut grng = stream(0xBAD_C0DE, "synthetic-cone-orbit", k);
            let g = random_orthogonal(n, &mut grng);
            directions.push(act(&g, &a)?.mat().clone());
        }
        Ok(Self {
            name: "synthetic".into(),
            n,
            kind: ConeKind::Synthetic { directions, norm },
            pic: PicOptions::default(),
        })
    }

    /// Registry: scal, nno, 2nn, pic, pic1, pic2, nnricci, dim4:<base>,
    /// synthetic.
    pub fn by_name(name: &str, n: usize) -> Result<Self> {
        match name {
            "scal" => Self::scal(n),
            "nno" => Self::nn_operator(n),
            "2nn" => Self::two_nn(n),
            "pic" => Self::pic(n, 0),
            "pic1" => Self::pic(n, 1),
            "pic2" => Self::pic(n, 2),
            "nnricci" => Self::nn_ricci(n),
            "synthetic" => Self::synthetic(n),
            other => match other.strip_prefix("dim4:") {
                Some(base) => Self::dim4(Self::by_name(base, n)?),
                None => Err(Error::UnknownName(other.to_string())),
            },
        }
    }

    pub fn with_pic_options(mut self, pic: PicOptions) -> Self {
        self.pic = pic;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        match &self.kind {
            ConeKind::Pic { .. } => false,
            ConeKind::Dim4 { base } => base.is_exact(),
            _ => true,
        }
    }

    /// Signed membership margin.
    pub fn margin(&self, r: &CurvatureOperator) -> MarginEval {
        assert_eq!(
            r.n(),
            self.n,
            "cone {} is registered for n = {}, operator has n = {}",
            self.name,
            self.n,
            r.n()
        );
        match &self.kind {
            ConeKind::Scal => MarginEval {
                value: r.trace() / (r.dim() as f64).sqrt(),
                certainty: Certainty::Exact,
                witness_frame: None,
            },
            ConeKind::NnOperator => MarginEval {
                value: r.lambda_min(),
                certainty: Certainty::Exact,
                witness_frame: None,
            },
            ConeKind::TwoNn => {
                let ev = sym_eigenvalues(r.mat());
                MarginEval {
                    value: ev[0] + ev[1],
                    certainty: Certainty::Exact,
                    witness_frame: None,
                }
            }
            ConeKind::NnRicci => MarginEval {
                value: ricci(r).eigenvalues()[0],
                certainty: Certainty::Exact,
                witness_frame: None,
            },
            ConeKind::Pic { augment } => {
                // Chain through the augmentation levels, warm-starting each
                // from the previous witness embedded by a zero coordinate:
                // frames for R × ℝ^(k−1) embed into frames for R × ℝ^k, so
                // the measured margins are monotone in k by construction.
                let mut warm: Vec<DMatrix<f64>> = Vec::new();
                let mut best: Option<(f64, DMatrix<f64>)> = None;
                for level in 0..=*augment {
                    if r.n() + level < 4 {
                        continue;
                    }
                    let aug = augment_flat(r, level).expect("augmentation is valid");
                    let embedded: Vec<DMatrix<f64>> =
                        warm.iter().map(|f| embed_frame(f, aug.n())).collect();
                    let (value, frame) = pic_minimum(&aug, self.pic, &embedded);
                    warm = vec![frame.clone()];
                    best = Some((value, frame));
                }
                let (value, frame) = best.expect("at least one admissible level");
                MarginEval {
                    value,
                    certainty: Certainty::Heuristic,
                    witness_frame: Some(frame),
                }
            }
            ConeKind::Dim4 { base } => base.margin(&decompose(r).einstein_part()),
            ConeKind::Synthetic { directions, norm } => {
                let scal = r.trace() / (r.dim() as f64).sqrt();
                let mut value = scal;
                for d in directions {
                    value = value.min(d.dot(r.mat()) / norm);
                }
                MarginEval {
                    value,
                    certainty: Certainty::Exact,
                    witness_frame: None,
                }
            }
        }
    }

    pub fn margin_value(&self, r: &CurvatureOperator) -> f64 {
        self.margin(r).value
    }

    /// First-order margin change in the direction `v` at a boundary point,
    /// from the active set of the margin (kernel eigenvectors, minimizing
    /// frame, or trace functional). None when no analytic form applies.
    fn analytic_slope(&self, r_b: &CurvatureOperator, v: &CurvatureOperator) -> Option<f64> {
        match &self.kind {
            ConeKind::Scal => Some(v.trace() / (v.dim() as f64).sqrt()),
            ConeKind::NnOperator => {
                let (values, vectors) = sym_eigen(r_b.mat());
                let cut = values[0] + 1e-7 * (1.0 + r_b.norm());
                let active: Vec<usize> = (0..values.len()).filter(|&k| values[k] <= cut).collect();
                let mut block = DMatrix::zeros(active.len(), active.len());
                for (i, &a) in active.iter().enumerate() {
                    for (j, &b) in active.iter().enumerate() {
                        block[(i, j)] =
                            (vectors.column(a).transpose() * v.mat() * vectors.column(b))[(0, 0)];
                    }
                }
                Some(sym_eigenvalues(&block)[0])
            }
            ConeKind::TwoNn => {
                let (_, vectors) = sym_eigen(r_b.mat());
                let u0 = vectors.column(0);
                let u1 = vectors.column(1);
                let s0 = (u0.transpose() * v.mat() * u0)[(0, 0)];
                let s1 = (u1.transpose() * v.mat() * u1)[(0, 0)];
                Some(s0 + s1)
            }
            ConeKind::NnRicci => {
                let (_, vectors) = sym_eigen(ricci(r_b).mat());
                let u = vectors.column(0);
                Some((u.transpose() * ricci(v).mat() * u)[(0, 0)])
            }
            ConeKind::Pic { augment } => {
                let eval = self.margin(r_b);
                let frame = eval.witness_frame?;
                let v_aug = augment_flat(v, *augment).expect("augmentation is valid");
                Some(isotropic_expression(&v_aug, &frame))
            }
            ConeKind::Dim4 { base } => base.analytic_slope(
                &decompose(r_b).einstein_part(),
                &decompose(v).einstein_part(),
            ),
            ConeKind::Synthetic { directions, norm } => {
                let m = self.margin_value(r_b);
                let tol = 1e-9 * (1.0 + r_b.norm());
                let mut slope = f64::INFINITY;
                let scal = r_b.trace() / (r_b.dim() as f64).sqrt();
                if scal <= m + tol {
                    slope = slope.min(v.trace() / (v.dim() as f64).sqrt());
                }
                for d in directions {
                    if d.dot(r_b.mat()) / norm <= m + tol {
                        slope = slope.min(d.dot(v.mat()) / norm);
                    }
                }
                Some(slope)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Isotropic curvature
// ---------------------------------------------------------------------------

fn wedge_into(basis: &BivectorBasis, x: &DVector<f64>, y: &DVector<f64>, out: &mut DVector<f64>) {
    for (idx, &(i, j)) in basis.pairs().iter().enumerate() {
        out[idx] = x[i] * y[j] - x[j] * y[i];
    }
}

fn skew_from_coords(basis: &BivectorBasis, c: &DVector<f64>, out: &mut DMatrix<f64>) {
    out.fill(0.0);
    for (idx, &(i, j)) in basis.pairs().iter().enumerate() {
        out[(i, j)] = c[idx];
        out[(j, i)] = -c[idx];
    }
}

/// The isotropic-curvature expression of `r` on an orthonormal 4-frame
/// (columns of `frame`):
/// R₁₃₁₃ + R₁₄₁₄ + R₂₃₂₃ + R₂₄₂₄ − 2R₁₂₃₄.
pub fn isotropic_expression(r: &CurvatureOperator, frame: &DMatrix<f64>) -> f64 {
    let basis = r.basis();
    let dim = basis.dim();
    let m = r.mat();
    let col = |k: usize| frame.column(k).into_owned();
    let (v1, v2, v3, v4) = (col(0), col(1), col(2), col(3));
    let mut w = DVector::zeros(dim);
    let mut total = 0.0;
    for (x, y) in [(&v1, &v3), (&v1, &v4), (&v2, &v3), (&v2, &v4)] {
        wedge_into(basis, x, y, &mut w);
        total += w.dot(&(m * &w));
    }
    let mut w12 = DVector::zeros(dim);
    let mut w34 = DVector::zeros(dim);
    wedge_into(basis, &v1, &v2, &mut w12);
    wedge_into(basis, &v3, &v4, &mut w34);
    total - 2.0 * w12.dot(&(m * &w34))
}

fn isotropic_gradient(r: &CurvatureOperator, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let basis = r.basis();
    let n = basis.n();
    let dim = basis.dim();
    let m = r.mat();
    let col = |k: usize| frame.column(k).into_owned();
    let vs = [col(0), col(1), col(2), col(3)];
    let mut grad = DMatrix::zeros(n, 4);
    let mut w = DVector::zeros(dim);
    let mut skew = DMatrix::zeros(n, n);
    // plane terms: ∂ (w_abᵀ M w_ab) = 2 S(M w_ab) applied to the partner
    for (a, bb) in [(0usize, 2usize), (0, 3), (1, 2), (1, 3)] {
        wedge_into(basis, &vs[a], &vs[bb], &mut w);
        let mw = m * &w;
        skew_from_coords(basis, &mw, &mut skew);
        let ga = &skew * &vs[bb] * 2.0;
        let gb = &skew * &vs[a] * -2.0;
        for row in 0..n {
            grad[(row, a)] += ga[row];
            grad[(row, bb)] += gb[row];
        }
    }
    // cross term: −2 w12ᵀ M w34
    let mut w12 = DVector::zeros(dim);
    let mut w34 = DVector::zeros(dim);
    wedge_into(basis, &vs[0], &vs[1], &mut w12);
    wedge_into(basis, &vs[2], &vs[3], &mut w34);
    let mw34 = m * &w34;
    skew_from_coords(basis, &mw34, &mut skew);
    let g1 = &skew * &vs[1] * -2.0;
    let g2 = &skew * &vs[0] * 2.0;
    let mw12 = m * &w12;
    skew_from_coords(basis, &mw12, &mut skew);
    let g3 = &skew * &vs[3] * -2.0;
    let g4 = &skew * &vs[2] * 2.0;
    for row in 0..n {
        grad[(row, 0)] += g1[row];
        grad[(row, 1)] += g2[row];
        grad[(row, 2)] += g3[row];
        grad[(row, 3)] += g4[row];
    }
    grad
}

fn retract(v: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = v.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for col in 0..q.ncols() {
        if r[(col, col)] < 0.0 {
            for row in 0..q.nrows() {
                q[(row, col)] = -q[(row, col)];
            }
        }
    }
    q
}

/// Embed a 4-frame of ℝᵐ into ℝᵐ′ (m′ ≥ m) on the leading coordinates.
fn embed_frame(frame: &DMatrix<f64>, m_new: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m_new, frame.ncols());
    for col in 0..frame.ncols() {
        for row in 0..frame.nrows() {
            out[(row, col)] = frame[(row, col)];
        }
    }
    out
}

fn descend(
    r: &CurvatureOperator,
    mut frame: DMatrix<f64>,
    max_iters: usize,
) -> (f64, DMatrix<f64>) {
    let mut value = isotropic_expression(r, &frame);
    let mut eta = 0.1 / r.norm().max(1e-12);
    for _ in 0..max_iters {
        let grad = isotropic_gradient(r, &frame);
        if grad.norm() <= 1e-14 * r.norm().max(1.0) {
            break;
        }
        let mut improved = false;
        for _ in 0..40 {
            let candidate = retract(&(&frame - &grad * eta));
            let cand_val = isotropic_expression(r, &candidate);
            if cand_val < value {
                let gain = value - cand_val;
                frame = candidate;
                value = cand_val;
                eta = (eta * 1.5).min(1e3 / r.norm().max(1e-12));
                improved = gain > 1e-12 * value.abs().max(1.0);
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (value, frame)
}

/// Multi-start orthonormalization-retraction descent of the isotropic
/// expression over 4-frames, with optional warm starts and a jitter
/// refinement around the best basin. Returns the best value found (an
/// upper bound on the true minimum) and its frame, re-validated by
/// direct evaluation.
fn pic_minimum(
    r: &CurvatureOperator,
    opts: PicOptions,
    warm: &[DMatrix<f64>],
) -> (f64, DMatrix<f64>) {
    let m = r.n();
    let mut best_val = f64::INFINITY;
    let mut best_frame = DMatrix::zeros(m, 4);
    let consider = |val: f64, frame: DMatrix<f64>, best_val: &mut f64, best_frame: &mut DMatrix<f64>| {
        if val < *best_val {
            *best_val = val;
            *best_frame = frame;
        }
    };
    for w in warm {
        let (val, frame) = descend(r, w.clone(), opts.max_iters);
        consider(val, frame, &mut best_val, &mut best_frame);
    }
    for start in 0..opts.starts {
        let mut rng = stream(opts.seed, "pic-start", start as u64);
        let frame0 = random_frame(m, 4, &mut rng);
        let (val, frame) = descend(r, frame0, opts.max_iters);
        consider(val, frame, &mut best_val, &mut best_frame);
    }
    // basin refinement: perturb the best frame and re-descend
    for jitter in 0..8u64 {
        let mut rng = stream(opts.seed, "pic-jitter", jitter);
        let noise = gaussian_matrix(m, 4, &mut rng) * 0.05;
        let start = retract(&(&best_frame + noise));
        let (val, frame) = descend(r, start, opts.max_iters);
        consider(val, frame, &mut best_val, &mut best_frame);
    }
    // certify by direct evaluation of the stored frame
    let direct = isotropic_expression(r, &best_frame);
    (direct, best_frame)
}

// ---------------------------------------------------------------------------
// Boundary and tangent probing
// ---------------------------------------------------------------------------

/// Outcome of a boundary search along Id + t(X − Id).
#[derive(Debug, Clone)]
pub enum BoundaryResult {
    /// Boundary point and its ray parameter; the point sits on the inside
    /// bracket end, so its margin is nonnegative and below tolerance.
    Found { r_b: CurvatureOperator, tau: f64 },
    /// The ray stayed inside up to the cap: the direction lies in the
    /// recession cone.
    Recession,
}

/// Locate sup{t : Id + t(X − Id) ∈ C} by geometric bracketing and
/// bisection.
pub fn boundary_point(
    cone: &ConeSpec,
    x: &CurvatureOperator,
    tols: &Tolerances,
) -> Result<BoundaryResult> {
    let id = CurvatureOperator::identity(cone.n())?;
    if cone.margin_value(&id) <= 0.0 {
        return Err(Error::InvalidCone(format!(
            "cone {} does not contain the identity in its interior",
            cone.name()
        )));
    }
    let at = |t: f64| id.add(&x.sub(&id).scale(t));
    let mut t_in = 0.0;
    let mut t_out = 1.0;
    loop {
        let m = cone.margin_value(&at(t_out));
        if m < 0.0 {
            break;
        }
        t_in = t_out;
        t_out *= 2.0;
        if t_out > tols.ray_cap {
            return Ok(BoundaryResult::Recession);
        }
    }
    let mut r_in = at(t_in);
    for _ in 0..256 {
        let m_in = cone.margin_value(&r_in);
        debug_assert!(m_in >= 0.0);
        if m_in <= tols.boundary * (1.0 + r_in.norm()) {
            break;
        }
        let mid = 0.5 * (t_in + t_out);
        if mid <= t_in || mid >= t_out {
            break;
        }
        let r_mid = at(mid);
        if cone.margin_value(&r_mid) >= 0.0 {
            t_in = mid;
            r_in = r_mid;
        } else {
            t_out = mid;
        }
    }
    Ok(BoundaryResult::Found { r_b: r_in, tau: t_in })
}

/// Result of probing one direction against the tangent cone.
#[derive(Debug, Clone, Serialize)]
pub struct TangentProbe {
    /// max over the h-grid of margin(R_b + hV)/h.
    pub slope_margin: f64,
    /// First-order slope from the margin's active set, when available.
    pub analytic_slope: Option<f64>,
    /// Tangent verdict at the configured slope tolerance.
    pub accepted: bool,
}

/// Probe whether V lies in the tangent cone at the boundary point R_b.
///
/// The finite-difference slope uses h ∈ {1e−2, 1e−3, 1e−4}·‖R_b‖/‖V‖ by
/// default and takes the max (a direction is tangent when some positive
/// step stays inside). Eigenvalue and trace margins also get an analytic
/// first-order check on the active eigenspace.
pub fn tangent_probe(
    cone: &ConeSpec,
    r_b: &CurvatureOperator,
    v: &CurvatureOperator,
    tols: &Tolerances,
    h_grid: Option<&[f64]>,
) -> Result<TangentProbe> {
    let margin_b = cone.margin_value(r_b);
    if margin_b.abs() > tols.boundary * (1.0 + r_b.norm()) {
        return Err(Error::NotOnBoundary {
            margin: margin_b,
            tol: tols.boundary * (1.0 + r_b.norm()),
        });
    }
    let vnorm = v.norm();
    if vnorm == 0.0 {
        return Ok(TangentProbe {
            slope_margin: 0.0,
            analytic_slope: None,
            accepted: true,
        });
    }
    let scale = r_b.norm().max(1.0) / vnorm;
    let default_grid = [1e-2 * scale, 1e-3 * scale, 1e-4 * scale];
    let grid = h_grid.unwrap_or(&default_grid);
    let mut slope = f64::NEG_INFINITY;
    for &h in grid {
        let probe = cone.margin_value(&r_b.add(&v.scale(h)));
        slope = slope.max(probe / h);
    }
    let analytic = cone.analytic_slope(r_b, v);
    let threshold = -tols.slope * vnorm;
    let accepted = slope >= threshold && analytic.is_none_or(|a| a >= threshold);
    Ok(TangentProbe {
        slope_margin: slope,
        analytic_slope: analytic,
        accepted,
    })
}

// ---------------------------------------------------------------------------
// Lineality space
// ---------------------------------------------------------------------------

/// Classification of the maximal vector subspace inside the cone, by
/// irreducible component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinealityClass {
    FullSpace,
    CScal,
    ContainsTracelessRicci,
    ContainsWeyl,
    Coercive,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinealityReport {
    pub id_flag: bool,
    pub ric0_flag: bool,
    pub weyl_flag: bool,
    pub class: LinealityClass,
    /// Worst margin seen over all flagged-component generators.
    pub worst_flagged_margin: f64,
    pub heuristic: bool,
    pub trials: usize,
    pub seed: u64,
}

/// Probe which irreducible components lie inside the cone as vector
/// subspaces; the maximal subspace is a sum of components, so
/// component-level flags determine it.
pub fn lineality_space(
    cone: &ConeSpec,
    trials: usize,
    seed: u64,
    tols: &Tolerances,
) -> LinealityReport {
    let n = cone.n();
    let mut flags = [true; 3];
    let mut worst = f64::INFINITY;
    let components = [Component::Identity, Component::TracelessRicci, Component::Weyl];
    for (slot, comp) in components.iter().enumerate() {
        for k in 0..trials {
            let mut rng = stream(seed, "lineality", (slot * trials + k) as u64);
            let g = random_component(n, *comp, &mut rng);
            if g.norm() == 0.0 {
                continue;
            }
            let unit = g.scale(1.0 / g.norm());
            let plus = cone.margin_value(&unit);
            let minus = cone.margin_value(&unit.scale(-1.0));
            let m = plus.min(minus);
            if m < -tols.lineality {
                flags[slot] = false;
                break;
            }
            worst = worst.min(m);
        }
    }
    // Id in the lineality space forces the whole space.
    if flags[0] {
        flags = [true; 3];
    }
    let class = match flags {
        [true, _, _] => LinealityClass::FullSpace,
        [false, true, true] => LinealityClass::CScal,
        [false, true, false] => LinealityClass::ContainsTracelessRicci,
        [false, false, true] => LinealityClass::ContainsWeyl,
        [false, false, false] => LinealityClass::Coercive,
    };
    if !flags.iter().any(|f| *f) {
        worst = f64::NAN;
    }
    LinealityReport {
        id_flag: flags[0],
        ric0_flag: flags[1],
        weyl_flag: flags[2],
        class,
        worst_flagged_margin: worst,
        heuristic: !cone.is_exact(),
        trials,
        seed,
    }
}

/// One testable direction of the boundedness dichotomy: every trace-free
/// direction must exit a coercive cone. Returns the largest margin seen
/// over unit trace-free samples (negative for coercive cones).
pub fn boundedness_probe(cone: &ConeSpec, trials: usize, seed: u64) -> f64 {
    let n = cone.n();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..trials {
        let mut rng = stream(seed, "boundedness", k as u64);
        let r = random_operator(n, &mut rng);
        let dec = decompose(&r);
        let traceless = r.sub(&dec.r_id);
        let unit = traceless.scale(1.0 / traceless.norm().max(1e-300));
        worst = worst.max(cone.margin_value(&unit));
    }
    worst
}

// ---------------------------------------------------------------------------
// Haar averaging
// ---------------------------------------------------------------------------

/// Monte-Carlo average of g·R over Haar-random g ∈ O(n); converges to the
/// identity component of R (projection onto the trivial subrepresentation).
pub fn haar_average(r: &CurvatureOperator, samples: usize, seed: u64) -> CurvatureOperator {
    assert!(samples >= 1);
    let n = r.n();
    let dim = r.dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for k in 0..samples {
        let mut rng = stream(seed, "haar", k as u64);
        let g = random_orthogonal(n, &mut rng);
        acc += act(&g, r).expect("matching dimension").mat();
    }
    CurvatureOperator::from_mat_unchecked(r.basis().clone(), acc / samples as f64)
}
