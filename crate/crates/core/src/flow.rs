//! The quadratic vector field Q(R) = R² + R# driving the curvature ODE,
//! its bilinear polarization B, the trilinear pairing, and a fixed-step
//! classical integrator for d/dt R = Q(R).
//!
//! R# is assembled from the structure constants of so(n) in the bivector
//! basis: with c_{αγδ} = ⟨[ω_α, ω_γ], ω_δ⟩,
//!
//! ```text
//! (R#)_{αβ} = ½ Σ c_{αγδ} c_{βεζ} R_{γε} R_{δζ}.
//! ```
//!
//! The quadratic form of the assembled matrix is validated in tests
//! against the defining sum ⟨R#η,η⟩ = −½ Σᵢ ⟨[η, R[η, Rωᵢ]], ωᵢ⟩
//! evaluated with the Lie bracket, which pins the convention.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::bivector::{bracket, Bivector, BivectorBasis};
use crate::error::{Error, Result};
use crate::operator::{bianchi_residual, ricci, CurvatureOperator};

/// Default blow-up guard for the ODE.
pub const BLOWUP_THRESHOLD: f64 = 1e12;
/// Default Bianchi-drift guard for accepted ODE states (relative).
pub const DRIFT_TOL: f64 = 1e-8;

/// Nonzero structure constants c_{αγδ} = ⟨[ω_α, ω_γ], ω_δ⟩ of so(n) in
/// the lexicographic bivector basis. Immutable and shared per dimension.
pub struct StructureConstants {
    n: usize,
    /// (α, γ, δ, c) with c = ±1.
    entries: Vec<(usize, usize, usize, f64)>,
}

impl StructureConstants {
    fn build(n: usize) -> Result<Self> {
        let basis = BivectorBasis::new(n)?;
        let dim = basis.dim();
        let mut entries = Vec::new();
        for alpha in 0..dim {
            let a = Bivector::basis_element(basis.clone(), basis.pair_of(alpha).0, basis.pair_of(alpha).1);
            for gamma in 0..dim {
                let (gi, gj) = basis.pair_of(gamma);
                let (ai, aj) = basis.pair_of(alpha);
                // brackets vanish unless the index pairs share exactly one leg
                let shared = [gi, gj].iter().filter(|x| **x == ai || **x == aj).count();
                if shared != 1 {
                    continue;
                }
                let g = Bivector::basis_element(basis.clone(), gi, gj);
                let br = bracket(&a, &g)?;
                for delta in 0..dim {
                    let c = br.coords[delta];
                    if c.abs() > 0.5 {
                        entries.push((alpha, gamma, delta, c));
                    }
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }
}

/// Per-dimension cache; tables are immutable once built.
pub fn structure_constants(n: usize) -> Result<Arc<StructureConstants>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<StructureConstants>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("structure-constant cache poisoned");
    if let Some(found) = guard.get(&n) {
        return Ok(found.clone());
    }
    let built = Arc::new(StructureConstants::build(n)?);
    guard.insert(n, built.clone());
    Ok(built)
}

/// The sharp operator R#, assembled from structure constants.
pub fn sharp(r: &CurvatureOperator) -> CurvatureOperator {
    let n = r.n();
    let table = structure_constants(n).expect("n >= 2 for an existing operator");
    let dim = r.dim();
    let m = r.mat();
    let mut out = DMatrix::zeros(dim, dim);
    for &(alpha, gamma, delta, c1) in table.entries() {
        for &(beta, eps, zeta, c2) in table.entries() {
            out[(alpha, beta)] += 0.5 * c1 * c2 * m[(gamma, eps)] * m[(delta, zeta)];
        }
    }
    let sym = (&out + out.transpose()) * 0.5;
    CurvatureOperator::from_mat_unchecked(r.basis().clone(), sym)
}

/// Reference quadratic form of R# straight from its defining sum,
/// evaluated with the Lie bracket; used as the oracle for `sharp`.
pub fn sharp_quadratic_form_reference(r: &CurvatureOperator, eta: &DVector<f64>) -> f64 {
    let basis = r.basis().clone();
    let dim = basis.dim();
    let eta_b = Bivector::from_coords(basis.clone(), eta.clone()).expect("same dimension");
    let mut total = 0.0;
    for i in 0..dim {
        let (p, q) = basis.pair_of(i);
        let omega = Bivector::basis_element(basis.clone(), p, q);
        let r_omega = Bivector::from_coords(basis.clone(), r.mat() * &omega.coords).unwrap();
        let inner = bracket(&eta_b, &r_omega).unwrap();
        let r_inner = Bivector::from_coords(basis.clone(), r.mat() * &inner.coords).unwrap();
        let outer = bracket(&eta_b, &r_inner).unwrap();
        total += outer.dot(&omega);
    }
    -0.5 * total
}

/// Q(R) = R² + R#.
pub fn q(r: &CurvatureOperator) -> CurvatureOperator {
    let square = r.mat() * r.mat();
    let sq = CurvatureOperator::from_mat_unchecked(r.basis().clone(), square);
    sq.add(&sharp(r))
}

/// Bilinear polarization B(R₁,R₂) = ½(Q(R₁+R₂) − Q(R₁) − Q(R₂)).
pub fn b(r1: &CurvatureOperator, r2: &CurvatureOperator) -> Result<CurvatureOperator> {
    if r1.basis() != r2.basis() {
        return Err(Error::DimensionMismatch(format!(
            "B of operators with n = {} and n = {}",
            r1.n(),
            r2.n()
        )));
    }
    let sum = q(&r1.add(r2));
    let out = sum.sub(&q(r1)).sub(&q(r2)).scale(0.5);
    Ok(out)
}

/// Trilinear pairing ⟨B(R₁,R₂), R₃⟩; fully symmetric in its arguments.
pub fn trilinear(
    r1: &CurvatureOperator,
    r2: &CurvatureOperator,
    r3: &CurvatureOperator,
) -> Result<f64> {
    if r1.basis() != r3.basis() {
        return Err(Error::DimensionMismatch(format!(
            "trilinear form of operators with n = {} and n = {}",
            r1.n(),
            r3.n()
        )));
    }
    Ok(b(r1, r2)?.dot(r3))
}

// ---------------------------------------------------------------------------
// Hamilton ODE
// ---------------------------------------------------------------------------

/// How an integration run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeOutcome {
    Completed,
    /// Norm guard tripped; the trajectory carries the states accepted so far.
    BlowUp { at_time: f64, norm: f64 },
    /// A state left the Bianchi subspace beyond the drift tolerance.
    ValidationDrift { at_time: f64, residual: f64 },
}

/// Fixed-step trajectory of d/dt R = Q(R).
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CurvatureOperator>,
    pub step_size: f64,
    pub method: &'static str,
    pub outcome: OdeOutcome,
}

impl OdeTrajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial state")
    }

    pub fn final_state(&self) -> &CurvatureOperator {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Guards for the integrator.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub blowup_threshold: f64,
    pub drift_tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            blowup_threshold: BLOWUP_THRESHOLD,
            drift_tol: DRIFT_TOL,
        }
    }
}

/// Classical fourth-order one-step integration of d/dt R = Q(R).
///
/// Deterministic fixed step; the last step is shortened to land on
/// `t_end` exactly. Aborts cleanly on the blow-up or drift guards.
pub fn ode_evolve(
    r0: &CurvatureOperator,
    t_end: f64,
    step: f64,
    opts: OdeOptions,
) -> Result<OdeTrajectory> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {step}")));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be > 0, got {t_end}"
        )));
    }
    let mut times = vec![0.0];
    let mut states = vec![r0.clone()];
    let mut t = 0.0;
    let mut state = r0.clone();
    let mut outcome = OdeOutcome::Completed;
    while t < t_end - 1e-15 * t_end.max(1.0) {
        let h = step.min(t_end - t);
        let k1 = q(&state);
        let k2 = q(&state.add(&k1.scale(h / 2.0)));
        let k3 = q(&state.add(&k2.scale(h / 2.0)));
        let k4 = q(&state.add(&k3.scale(h)));
        let incr = k1
            .add(&k2.scale(2.0))
            .add(&k3.scale(2.0))
            .add(&k4)
            .scale(h / 6.0);
        let next = state.add(&incr);
        let t_next = t + h;
        let norm = next.norm();
        if !norm.is_finite() || norm > opts.blowup_threshold {
            outcome = OdeOutcome::BlowUp {
                at_time: t_next,
                norm,
            };
            break;
        }
        let drift = bianchi_residual(&next) / norm.max(1.0);
        if drift > opts.drift_tol {
            outcome = OdeOutcome::ValidationDrift {
                at_time: t_next,
                residual: drift,
            };
            break;
        }
        t = t_next;
        state = next;
        times.push(t);
        states.push(state.clone());
    }
    Ok(OdeTrajectory {
        times,
        states,
        step_size: step,
        method: "rk4",
        outcome,
    })
}

/// CSV export: one row per accepted step with the norms of the state,
/// its irreducible parts, and the extreme eigenvalues.
pub fn trajectory_to_csv(traj: &OdeTrajectory) -> String {
    let mut out =
        String::from("t,norm,trace,norm_r_id,norm_r_0,norm_r_w,lambda_min,lambda_min_ricci\n");
    for (t, state) in traj.times.iter().zip(traj.states.iter()) {
        let dec = crate::operator::decompose(state);
        let ric = ricci(state);
        out.push_str(&format!(
            "{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            state.norm(),
            state.trace(),
            dec.r_id.norm(),
            dec.r_0.norm(),
            dec.r_w.norm(),
            state.lambda_min(),
            ric.eigenvalues()[0],
        ));
    }
    out
}
