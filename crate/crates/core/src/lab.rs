//! The verification engine: samples cone boundaries to test invariance
//! under the quadratic flow, and reproduces the identity-level computations behind the invariance arguments
//! (polarization identities, the collinearity constant, product and
//! closed-form checks, the dimension-four eigenvalue formula, witness
//! searches) as named checks with machine-readable verdicts.
//!
//! Every operation is a pure function of its inputs and seed; identical
//! seeds give identical reports (wall-time lives in a separate metadata
//! field).

use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cones::{
    boundary_point, isotropic_expression, lineality_space, tangent_probe, BoundaryResult,
    ConeSpec, LinealityClass, PicOptions, Tolerances,
};
use crate::error::{Error, Result};
use crate::flow::{b, ode_evolve, q, OdeOptions, OdeOutcome};
use crate::models::{
    constant_curvature, einstein_constant, flat_times_sphere2, fubini_study, product,
    sphere_times_hyperbolic, ProductSplitting,
};

use crate::operator::{
    decompose, from_traceless_ricci, scalar, sym_eigenvalues, to_json_value, CurvatureOperator,
    SymTensor2,
};
use crate::report::{Meta, Verdict, VerificationResult};
use crate::rng::stream;
use crate::sampling::{random_component, random_operator, random_traceless_sym, Component};

/// Default trial count for identity checks.
pub const DEFAULT_TRIALS: usize = 200;
/// Default boundary-sample count for invariance runs.
pub const DEFAULT_SAMPLES: usize = 500;
/// Default evaluation budget for witness searches.
pub const DEFAULT_BUDGET: usize = 10_000;

// ---------------------------------------------------------------------------
// Invariance runs
// ---------------------------------------------------------------------------

/// The worst boundary sample of an invariance run; the operator is stored
/// in the curvature-operator file format so it re-validates by direct
/// evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceWitness {
    pub boundary_operator: serde_json::Value,
    pub tau: f64,
    pub q_norm: f64,
    pub slope_margin: f64,
    pub analytic_slope: Option<f64>,
}

/// Aggregated result of boundary sampling against the tangent condition.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub cone: String,
    pub n: usize,
    pub samples: usize,
    pub skipped_recession: usize,
    pub seed: u64,
    pub tol_boundary: f64,
    pub tol_slope: f64,
    pub min_slope_margin: f64,
    pub mean_slope_margin: f64,
    pub worst: Option<InvarianceWitness>,
    pub verdict: Verdict,
    pub meta: Meta,
}

impl InvarianceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_json_without_meta(&self) -> String {
        let mut value = serde_json::to_value(self).expect("serializable");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("meta");
        }
        serde_json::to_string_pretty(&value).expect("serializable")
    }
}

/// Sample random boundary points of the cone and probe whether Q points
/// into the tangent cone there. Directions are Gaussian Bianchi-projected
/// operators; rays that never exit are skipped and counted.
pub fn check_invariance(
    cone: &ConeSpec,
    samples: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<InvarianceReport> {
    let start = Instant::now();
    let n = cone.n();
    let mut min_slope = f64::INFINITY;
    let mut mean_acc = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    let mut worst: Option<InvarianceWitness> = None;
    let mut violated = false;
    for k in 0..samples {
        let mut rng = stream(seed, "invariance-direction", k as u64);
        let x = random_operator(n, &mut rng);
        let found = match boundary_point(cone, &x, tols)? {
            BoundaryResult::Found { r_b, tau } => (r_b, tau),
            BoundaryResult::Recession => {
                skipped += 1;
                continue;
            }
        };
        let (r_b, tau) = found;
        let v = q(&r_b);
        let probe = tangent_probe(cone, &r_b, &v, tols, None)?;
        used += 1;
        mean_acc += probe.slope_margin;
        if probe.slope_margin < min_slope {
            min_slope = probe.slope_margin;
            worst = Some(InvarianceWitness {
                boundary_operator: to_json_value(&r_b),
                tau,
                q_norm: v.norm(),
                slope_margin: probe.slope_margin,
                analytic_slope: probe.analytic_slope,
            });
        }
        if !probe.accepted {
            violated = true;
        }
    }
    let verdict = if violated {
        Verdict::Violation
    } else {
        Verdict::Pass
    };
    Ok(InvarianceReport {
        cone: cone.name().to_string(),
        n,
        samples,
        skipped_recession: skipped,
        seed,
        tol_boundary: tols.boundary,
        tol_slope: tols.slope,
        min_slope_margin: if used > 0 { min_slope } else { f64::NAN },
        mean_slope_margin: if used > 0 {
            mean_acc / used as f64
        } else {
            f64::NAN
        },
        worst,
        verdict,
        meta: Meta {
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

// ---------------------------------------------------------------------------
// Named checks
// ---------------------------------------------------------------------------

fn finish(mut result: VerificationResult, started: Instant) -> VerificationResult {
    result.meta.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    result
}

/// The four polarization identities of the quadratic field against the
/// irreducible splitting: Q(Id) = (n−1)Id, B(W,Id) = 0, and the two
/// statements that B(R₀,·) against Id and Weyl inputs stays in the
/// traceless-Ricci summand.
pub fn verify_bohm_wilking(n: usize, trials: usize, seed: u64) -> Result<VerificationResult> {
    let started = Instant::now();
    if n < 3 {
        return Err(Error::Unsupported(format!("needs n >= 3, got {n}")));
    }
    let mut result = VerificationResult::new("bohm-wilking", n, seed, trials);
    let id = CurvatureOperator::identity(n)?;
    let q_id_residual =
        (q(&id).mat() - id.scale(n as f64 - 1.0).mat()).norm() / (n as f64 - 1.0);
    result.residual("q_identity", q_id_residual);
    let mut worst: f64 = 0.0;
    if trials == 0 {
        result.note("no samples requested; component identities vacuously pass");
    }
    let weyl_exists = n >= 4;
    if !weyl_exists {
        result.note("Weyl summand is trivial in dimension 3; its identities are skipped");
    }
    for k in 0..trials {
        let mut rng = stream(seed, "bohm-wilking", k as u64);
        let r0 = random_component(n, Component::TracelessRicci, &mut rng);
        let b_r0_id = b(&r0, &id)?;
        let dec = decompose(&b_r0_id);
        let scale = b_r0_id.norm().max(1.0);
        worst = worst.max(dec.r_id.norm() / scale).max(dec.r_w.norm() / scale);
        if weyl_exists {
            let w = random_component(n, Component::Weyl, &mut rng);
            let b_w_id = b(&w, &id)?;
            worst = worst.max(b_w_id.norm() / w.norm().max(1.0));
            let b_r0_w = b(&r0, &w)?;
            let dec2 = decompose(&b_r0_w);
            let scale2 = b_r0_w.norm().max(1.0);
            worst = worst
                .max(dec2.r_id.norm() / scale2)
                .max(dec2.r_w.norm() / scale2);
        }
    }
    result.residual("component_identities_max", worst);
    if q_id_residual > 1e-12 || worst > 1e-10 {
        result.demote(Verdict::Fail);
    }
    Ok(finish(result, started))
}

/// The collinearity computation: with R₀ the traceless-Ricci part of the
/// sphere-times-hyperbolic operator and W the Weyl part of Q(R₀), the
/// operator L = B(R₀, W) is a positive multiple a·R₀.
pub fn verify_collinearity(n: usize) -> Result<VerificationResult> {
    let started = Instant::now();
    let mut result = VerificationResult::new("collinearity", n, 0, 1);
    let r = sphere_times_hyperbolic(n)?;
    let r0 = decompose(&r).r_0;
    let w = decompose(&q(&r0)).r_w;
    let l = b(&r0, &w)?;
    let a = l.dot(&r0) / r0.dot(&r0);
    let collinearity = l.sub(&r0.scale(a)).norm() / l.norm().max(1e-300);
    let pairing_vs_weyl_norm =
        (l.dot(&r0) - w.dot(&w)).abs() / w.dot(&w).max(1e-300);
    let splitting = ProductSplitting::new(n, n - 2)?;
    let eigenspace_residual = splitting.eigenspace_residual(&l) / l.norm().max(1.0);
    result.constant("a", a);
    result.constant("weyl_norm", w.norm());
    result.constant("pairing", l.dot(&r0));
    result.residual("collinearity", collinearity);
    result.residual("pairing_vs_weyl_norm_sq", pairing_vs_weyl_norm);
    result.residual("eigenspace", eigenspace_residual);
    if !(a > 0.0) || collinearity > 1e-9 || w.norm() == 0.0 || pairing_vs_weyl_norm > 1e-10 {
        result.demote(Verdict::Fail);
    }
    Ok(finish(result, started))
}

/// Q of the sphere-times-hyperbolic operator is the product operator with
/// the first factor's curvature raised to n−3 and the second flipped to a
/// unit sphere.
pub fn verify_q_product_identity(n: usize) -> Result<VerificationResult> {
    let started = Instant::now();
    let mut result = VerificationResult::new("q-product", n, 0, 1);
    let r = sphere_times_hyperbolic(n)?;
    let lhs = q(&r);
    let rhs = product(
        &constant_curvature(n - 2, n as f64 - 3.0)?,
        &constant_curvature(2, 1.0)?,
    )?;
    let residual = (lhs.mat() - rhs.mat()).norm() / rhs.norm().max(1.0);
    result.residual("product_identity", residual);
    let homogeneity =
        (q(&r.scale(2.0)).mat() - q(&r).scale(4.0).mat()).norm() / q(&r).norm().max(1.0);
    result.residual("homogeneity", homogeneity);
    if residual > 1e-12 || homogeneity > 1e-11 {
        result.demote(Verdict::Fail);
    }
    Ok(finish(result, started))
}

/// The dimension-four closed form: for R₀ built from a traceless Ricci
/// tensor with eigenvalues λᵢ, the identity-plus-Weyl part of Q(R₀)
/// equals ½ric₀∧ric₀ + ½ric₀²∧id, its eigenvectors are the eᵢ∧eⱼ, and
/// its eigenvalues are λᵢλⱼ/2 + (λᵢ²+λⱼ²)/4 = (λᵢ+λⱼ)²/4 ≥ 0.
pub fn verify_dim4_formula(trials: usize, seed: u64) -> Result<VerificationResult> {
    let started = Instant::now();
    let n = 4usize;
    let mut result = VerificationResult::new("dim4-formula", n, seed, trials);
    let id = SymTensor2::identity(n);
    let mut worst_closed: f64 = 0.0;
    let mut worst_eigen: f64 = 0.0;
    let mut worst_nonneg: f64 = 0.0;
    for k in 0..trials.max(1) {
        let ric0 = if k == 0 {
            // pinned example: diag(1,1,−1,−1) has spectrum {1,0,0,0,0,1}
            SymTensor2::from_mat(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                1.0, 1.0, -1.0, -1.0,
            ])))?
        } else {
            let mut rng = stream(seed, "dim4-formula", k as u64);
            random_traceless_sym(n, &mut rng)
        };
        let r0 = from_traceless_ricci(&ric0)?;
        let l = decompose(&q(&r0)).einstein_part();
        let scale = l.norm().max(1.0);
        let ric0_sq = SymTensor2::from_mat(ric0.mat() * ric0.mat())?;
        let closed = crate::operator::wedge_sym(&ric0, &ric0)?
            .scale(0.5)
            .add(&crate::operator::wedge_sym(&ric0_sq, &id)?.scale(0.5));
        worst_closed = worst_closed.max((l.mat() - closed.mat()).norm() / scale);
        let lambda = ric0.eigenvalues();
        let mut expected: Vec<f64> = Vec::with_capacity(6);
        for i in 0..n {
            for j in (i + 1)..n {
                expected
                    .push(lambda[i] * lambda[j] / 2.0 + (lambda[i].powi(2) + lambda[j].powi(2)) / 4.0);
            }
        }
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let got = sym_eigenvalues(l.mat());
        for (g, e) in got.iter().zip(expected.iter()) {
            worst_eigen = worst_eigen.max((g - e).abs() / scale);
        }
        worst_nonneg = worst_nonneg.max((-got[0] / scale).max(0.0));
        if k == 0 {
            let top = expected.last().copied().unwrap_or(0.0);
            result.constant("pinned_diag_top_eigenvalue", top);
        }
    }
    result.residual("closed_form", worst_closed);
    result.residual("eigenvalue_multiset", worst_eigen);
    result.residual("negativity", worst_nonneg);
    result.note("eigenvalues follow mu_ij = li*lj/2 + (li^2+lj^2)/4 = (li+lj)^2/4");
    if worst_closed > 1e-10 || worst_eigen > 1e-10 || worst_nonneg > 1e-12 {
        result.demote(Verdict::Fail);
    }
    Ok(finish(result, started))
}

/// Settings for the closed-form flow comparison.
#[derive(Debug, Clone, Copy)]
pub struct OdeClosedFormSettings {
    pub epsilon: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for OdeClosedFormSettings {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            t_max: 0.9,
            step: 1e-3,
        }
    }
}

/// Rescale an Einstein symmetric operator to a fixed point of Q, bleed ε
/// out of its identity component, and compare the integrated flow with
/// the two-mode closed form 1/(1−(1−ε)t)·R̄_Id + 1/(1−t)·R̄_W.
pub fn verify_ode_closed_form(settings: OdeClosedFormSettings) -> Result<VerificationResult> {
    let started = Instant::now();
    let OdeClosedFormSettings { epsilon, t_max, step } = settings;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    if !(t_max > 0.0 && t_max < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max must lie in (0,1): the closed form has a pole at t = 1, got {t_max}"
        )));
    }
    let model = fubini_study(2)?;
    let n = model.n();
    let mut result = VerificationResult::new("ode-closed-form", n, 0, 1);
    result.constant("epsilon", epsilon);
    result.constant("t_max", t_max);
    result.constant("step", step);
    let (lambda, einstein_residual) = einstein_constant(&model);
    if einstein_residual > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "model is not Einstein symmetric (residual {einstein_residual:.3e})"
        )));
    }
    let fixed = model.scale(1.0 / lambda);
    let dec = decompose(&fixed);
    let r0_leak = dec.r_0.norm() / fixed.norm();
    result.residual("traceless_ricci_leak", r0_leak);
    let id = CurvatureOperator::identity(n)?;
    let bar_id = dec.r_id.sub(&id.scale(epsilon / (n as f64 - 1.0)));
    let bar_w = dec.r_w.clone();
    let eigen_id =
        (q(&bar_id).mat() - bar_id.scale(1.0 - epsilon).mat()).norm() / bar_id.norm();
    let eigen_w = (q(&bar_w).mat() - bar_w.mat()).norm() / bar_w.norm();
    result.residual("q_eigen_identity_id", eigen_id);
    result.residual("q_eigen_identity_w", eigen_w);
    let bar = bar_id.add(&bar_w);
    let traj = ode_evolve(&bar, t_max, step, OdeOptions::default())?;
    if traj.outcome != OdeOutcome::Completed {
        result.note(format!("integration aborted early: {:?}", traj.outcome));
        result.demote(Verdict::Fail);
        return Ok(finish(result, started));
    }
    let mut worst = 0.0f64;
    for (t, state) in traj.times.iter().zip(traj.states.iter()) {
        let reference = bar_id
            .scale(1.0 / (1.0 - (1.0 - epsilon) * t))
            .add(&bar_w.scale(1.0 / (1.0 - t)));
        worst = worst.max((state.mat() - reference.mat()).norm() / reference.norm());
    }
    result.residual("trajectory_vs_closed_form", worst);
    // limit of the rescaled ray: (1−t)·R̄(t) → R̄_W along the closed form
    let t_limit = 1.0 - 1e-9;
    let rescaled = bar_id
        .scale((1.0 - t_limit) / (1.0 - (1.0 - epsilon) * t_limit))
        .add(&bar_w);
    let limit_residual = rescaled.sub(&bar_w).norm() / bar_w.norm();
    result.residual("rescaled_limit", limit_residual);
    if eigen_id > 1e-10 || eigen_w > 1e-10 || worst > 1e-6 || limit_residual > 1e-6 {
        result.demote(Verdict::Fail);
    }
    Ok(finish(result, started))
}

/// The dimension-four cone construction over a base cone containing all
/// nonnegative operators: invariance run plus containment of random
/// conformally-flat scalar-flat operators.
pub fn verify_dim4_cone(
    base_name: &str,
    samples: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<(VerificationResult, InvarianceReport)> {
    let started = Instant::now();
    if base_name != "nno" && base_name != "2nn" {
        return Err(Error::Unsupported(format!(
            "the construction is verified over bases containing all nonnegative operators (nno, 2nn), got {base_name}"
        )));
    }
    let cone = ConeSpec::dim4(ConeSpec::by_name(base_name, 4)?)?;
    let mut result = VerificationResult::new("dim4-cone", 4, seed, samples);
    result.cone = Some(cone.name().to_string());
    let invariance = check_invariance(&cone, samples, seed, tols)?;
    result.residual("min_slope_margin", invariance.min_slope_margin);
    result.residual("mean_slope_margin", invariance.mean_slope_margin);
    let mut worst_margin = f64::INFINITY;
    for k in 0..100 {
        let mut rng = stream(seed, "dim4-containment", k as u64);
        let cfsf = random_component(4, Component::TracelessRicci, &mut rng);
        worst_margin = worst_margin.min(cone.margin_value(&cfsf) / cfsf.norm().max(1.0));
    }
    result.residual("containment_worst_margin", worst_margin);
    if invariance.verdict != Verdict::Pass || worst_margin < -1e-10 {
        result.demote(Verdict::Fail);
    }
    Ok((finish(result, started), invariance))
}

/// Search for a conformally flat scalar flat operator with negative
/// isotropic curvature (exists for n ≥ 5); the verdict is inconclusive,
/// not failed, when the budget runs out empty-handed.
pub fn pic_cfsf_witness(n: usize, budget: usize, seed: u64) -> Result<VerificationResult> {
    let started = Instant::now();
    if n < 5 {
        return Err(Error::Unsupported(format!(
            "in dimension 4 the construction over the isotropic cone contains every conformally flat scalar-flat operator; witnesses need n >= 5, got {n}"
        )));
    }
    let mut result = VerificationResult::new("pic-cfsf-witness", n, seed, budget);
    let pic_opts = PicOptions {
        starts: 16,
        seed,
        max_iters: 200,
    };
    let cone = ConeSpec::pic(n, 0)?.with_pic_options(pic_opts);
    let mut evals = 0usize;
    let mut best: Option<(f64, SymTensor2, CurvatureOperator)> = None;
    let mut round = 0u64;
    while evals < budget {
        let mut rng = stream(seed, "cfsf-candidate", round);
        round += 1;
        let candidate = match &best {
            // exploit: jitter the current best
            Some((_, ric0, _)) if round % 2 == 0 => {
                let noise = random_traceless_sym(n, &mut rng);
                let mixed = ric0.mat() + noise.mat() * 0.2;
                SymTensor2::from_mat(mixed)?.traceless()
            }
            // explore
            _ => random_traceless_sym(n, &mut rng),
        };
        let unit = SymTensor2::from_mat(candidate.mat() / candidate.norm().max(1e-300))?;
        let r = from_traceless_ricci(&unit)?;
        let eval = cone.margin(&r);
        evals += pic_opts.starts;
        let rel = eval.value / r.norm();
        if best.as_ref().is_none_or(|(b, _, _)| rel < *b) {
            if let Some(frame) = eval.witness_frame {
                let direct = isotropic_expression(&r, &frame);
                result.residual(
                    "witness_frame_revalidation",
                    (direct - eval.value).abs() / (1.0 + eval.value.abs()),
                );
                best = Some((rel, unit.clone(), r.clone()));
                result.witness = Some(to_json_value(&r));
                result.constant("witness_margin_relative", rel);
            }
        }
        if best.as_ref().is_some_and(|(b, _, _)| *b <= -1e-3) && evals >= pic_opts.starts * 4 {
            break;
        }
    }
    result.constant("margin_evaluations", evals as f64);
    match &best {
        Some((rel, _, _)) if *rel <= -1e-3 => {}
        _ => {
            result.note("budget exhausted without a certified negative margin");
            result.demote(Verdict::Inconclusive);
        }
    }
    Ok(finish(result, started))
}

/// Ingredients of the Einstein-product argument: the sphere-hyperbolic
/// operator is conformally flat with positive scalar curvature, and a
/// positive multiple of the flat-sphere operator added to it lands on the
/// Einstein product sphere metric, a fixed point of Q up to its Einstein
/// constant. The Einstein coefficient is n−2; the n−3 combination's
/// residual is measured and reported alongside.
pub fn verify_einstein_product(n: usize) -> Result<VerificationResult> {
    let started = Instant::now();
    if n < 5 {
        return Err(Error::Unsupported(format!(
            "the Einstein-product argument runs in n >= 5, got {n}"
        )));
    }
    let mut result = VerificationResult::new("einstein-product", n, 0, 1);
    let r = sphere_times_hyperbolic(n)?;
    let rbar = flat_times_sphere2(n)?;
    let weyl_leak = decompose(&r).r_w.norm() / r.norm();
    result.residual("conformal_flatness", weyl_leak);
    result.constant("scalar_curvature", scalar(&r));
    let coefficient = n as f64 - 2.0;
    let einstein = r.add(&rbar.scale(coefficient));
    let (lambda, einstein_residual) = einstein_constant(&einstein);
    result.constant("einstein_coefficient", coefficient);
    result.constant("lambda", lambda);
    result.residual("einstein", einstein_residual);
    let fixed_point =
        (q(&einstein).mat() - einstein.scale(lambda).mat()).norm() / einstein.norm();
    result.residual("q_fixed_point", fixed_point);
    let stated = r.add(&rbar.scale(n as f64 - 3.0));
    let (_, stated_residual) = einstein_constant(&stated);
    result.residual("einstein_residual_at_coefficient_n_minus_3", stated_residual);
    result.note("coefficient n-2 is the Einstein combination; the n-3 combination's residual is recorded for comparison");
    if weyl_leak > 1e-10
        || scalar(&r) <= 0.0
        || einstein_residual > 1e-10
        || fixed_point > 1e-10
        || !(lambda > 0.0)
    {
        result.demote(Verdict::Fail);
    }
    Ok(finish(result, started))
}

/// Monte-Carlo Haar averaging converges to the identity component.
pub fn verify_haar(n: usize, samples: usize, trials: usize, seed: u64) -> Result<VerificationResult> {
    let started = Instant::now();
    let mut result = VerificationResult::new("haar", n, seed, trials);
    result.constant("samples", samples as f64);
    let mut worst: f64 = 0.0;
    for k in 0..trials {
        let mut rng = stream(seed, "haar-input", k as u64);
        let r = random_operator(n, &mut rng);
        let avg = crate::cones::haar_average(&r, samples, crate::rng::derive_seed(seed, "haar-run", k as u64));
        let target = decompose(&r).r_id;
        worst = worst.max((avg.mat() - target.mat()).norm() / r.norm());
    }
    result.residual("projection_error", worst);
    if worst > 0.02 {
        result.demote(Verdict::Fail);
    }
    Ok(finish(result, started))
}

/// Lineality-space classification with the reference classes for the
/// registered cones.
pub fn verify_lineality(
    cone_name: &str,
    n: usize,
    trials: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<VerificationResult> {
    let started = Instant::now();
    let cone = ConeSpec::by_name(cone_name, n)?;
    let mut result = VerificationResult::new("lineality", n, seed, trials);
    result.cone = Some(cone_name.to_string());
    let report = lineality_space(&cone, trials, seed, tols);
    result.constant("id_flag", report.id_flag as u8 as f64);
    result.constant("ric0_flag", report.ric0_flag as u8 as f64);
    result.constant("weyl_flag", report.weyl_flag as u8 as f64);
    result.note(format!("class: {:?}", report.class));
    if report.heuristic {
        result.note("heuristic margin: flags hold up to the optimizer's gap");
    }
    let expected = match cone_name {
        "scal" => Some(LinealityClass::CScal),
        "nno" | "2nn" => Some(LinealityClass::Coercive),
        "dim4:nno" | "dim4:2nn" => Some(LinealityClass::ContainsTracelessRicci),
        _ => None,
    };
    match expected {
        Some(class) => {
            if report.class != class {
                result.note(format!("expected class {:?}", class));
                result.demote(Verdict::Fail);
            }
        }
        None => {
            result.note("no reference classification for this cone");
        }
    };
    Ok(finish(result, started))
}

/// Invariance run re-packaged as a verification result (for the check
/// registry and the summary command).
pub fn verify_invariance(
    cone_name: &str,
    n: usize,
    samples: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<(VerificationResult, InvarianceReport)> {
    let started = Instant::now();
    let cone = ConeSpec::by_name(cone_name, n)?;
    let report = check_invariance(&cone, samples, seed, tols)?;
    let mut result = VerificationResult::new("invariance", n, seed, samples);
    result.cone = Some(cone_name.to_string());
    result.residual("min_slope_margin", report.min_slope_margin);
    result.residual("mean_slope_margin", report.mean_slope_margin);
    result.constant("skipped_recession", report.skipped_recession as f64);
    if let Some(w) = &report.worst {
        result.witness = Some(serde_json::to_value(w).expect("serializable"));
    }
    if report.verdict != Verdict::Pass {
        result.demote(Verdict::Violation);
    }
    Ok((finish(result, started), report))
}

/// The check battery behind `verify all`: every named check that applies
/// at the given dimension, with reduced-but-meaningful sample counts.
pub fn verify_all(n: usize, seed: u64, tols: &Tolerances) -> Result<Vec<VerificationResult>> {
    let mut out = Vec::new();
    out.push(verify_bohm_wilking(n, DEFAULT_TRIALS, seed)?);
    if n >= 4 {
        out.push(verify_collinearity(n)?);
        out.push(verify_q_product_identity(n)?);
    }
    if n == 4 {
        out.push(verify_dim4_formula(100, seed)?);
        out.push(verify_ode_closed_form(OdeClosedFormSettings::default())?);
        for base in ["nno", "2nn"] {
            out.push(verify_dim4_cone(base, 100, seed, tols)?.0);
        }
        out.push(verify_haar(4, 20_000, 3, seed)?);
        for cone in ["scal", "nno", "dim4:nno"] {
            out.push(verify_lineality(cone, 4, 50, seed, tols)?);
        }
    }
    if n >= 5 {
        out.push(pic_cfsf_witness(n, DEFAULT_BUDGET, seed)?);
        out.push(verify_einstein_product(n)?);
    }
    for cone in ["scal", "nno"] {
        out.push(verify_invariance(cone, n, 100, seed, tols)?.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::from_json;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn bohm_wilking_passes_at_desk_scale() {
        for n in [3usize, 4, 5] {
            let result = verify_bohm_wilking(n, 20, 11).unwrap();
            assert_eq!(result.verdict, Verdict::Pass, "n = {n}: {:?}", result.residuals);
        }
        let vacuous = verify_bohm_wilking(4, 0, 11).unwrap();
        assert_eq!(vacuous.verdict, Verdict::Pass);
        assert_eq!(vacuous.residuals["component_identities_max"], 0.0);
    }

    #[test]
    fn collinearity_constant_is_positive_across_dimensions() {
        for n in 4..=8 {
            let result = verify_collinearity(n).unwrap();
            assert_eq!(result.verdict, Verdict::Pass, "n = {n}");
            assert!(result.constants["a"] > 0.0);
            assert!(result.constants["weyl_norm"] > 0.0);
            assert!(result.residuals["collinearity"] <= 1e-9);
        }
    }

    #[test]
    fn q_product_identity_is_exact() {
        for n in 4..=8 {
            let result = verify_q_product_identity(n).unwrap();
            assert_eq!(result.verdict, Verdict::Pass);
            assert!(result.residuals["product_identity"] <= 1e-12);
        }
    }

    #[test]
    fn dim4_formula_holds_on_random_tensors() {
        let result = verify_dim4_formula(25, 17).unwrap();
        assert_eq!(result.verdict, Verdict::Pass, "{:?}", result.residuals);
        // the pinned diag(1,1,-1,-1) example tops out at (1+1)^2/4 = 1
        assert!((result.constants["pinned_diag_top_eigenvalue"] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ode_closed_form_tracks_integrator() {
        let result = verify_ode_closed_form(OdeClosedFormSettings {
            epsilon: 0.1,
            t_max: 0.5,
            step: 1e-3,
        })
        .unwrap();
        assert_eq!(result.verdict, Verdict::Pass, "{:?}", result.residuals);
        assert!(result.residuals["trajectory_vs_closed_form"] <= 1e-6);
    }

    #[test]
    fn ode_closed_form_rejects_pole_crossing() {
        assert!(verify_ode_closed_form(OdeClosedFormSettings {
            epsilon: 0.1,
            t_max: 1.5,
            step: 1e-3,
        })
        .is_err());
        assert!(verify_ode_closed_form(OdeClosedFormSettings {
            epsilon: 1.5,
            t_max: 0.5,
            step: 1e-3,
        })
        .is_err());
    }

    #[test]
    fn positive_controls_pass_invariance() {
        for (cone, n) in [("scal", 4), ("scal", 5), ("nno", 4)] {
            let spec = ConeSpec::by_name(cone, n).unwrap();
            let report = check_invariance(&spec, 60, 7, &tols()).unwrap();
            assert_eq!(report.verdict, Verdict::Pass, "{cone} n = {n}");
            assert!(
                report.min_slope_margin >= -1e-8,
                "{cone} n = {n}: min slope {:.3e}",
                report.min_slope_margin
            );
        }
    }

    #[test]
    fn negative_control_finds_violation_with_revalidating_witness() {
        let spec = ConeSpec::by_name("nnricci", 4).unwrap();
        let report = check_invariance(&spec, 120, 7, &tols()).unwrap();
        assert_eq!(report.verdict, Verdict::Violation);
        let witness = report.worst.expect("violation carries a witness");
        assert!(
            witness.slope_margin <= -1e-4,
            "witness slope {:.3e}",
            witness.slope_margin
        );
        // the stored boundary operator re-validates by direct evaluation
        let (r_b, _) = from_json(&witness.boundary_operator.to_string()).unwrap();
        let probe = tangent_probe(&spec, &r_b, &q(&r_b), &tols(), None).unwrap();
        assert!(
            (probe.slope_margin - witness.slope_margin).abs()
                <= 1e-10 * (1.0 + witness.slope_margin.abs()),
            "witness re-evaluation drifted: {} vs {}",
            probe.slope_margin,
            witness.slope_margin
        );
    }

    #[test]
    fn dim4_cone_invariance_and_containment() {
        let (result, report) = verify_dim4_cone("nno", 60, 3, &tols()).unwrap();
        assert_eq!(result.verdict, Verdict::Pass, "{:?}", result.residuals);
        assert!(report.min_slope_margin >= -1e-8);
        assert!(result.residuals["containment_worst_margin"] >= -1e-10);
        assert!(verify_dim4_cone("scal", 10, 3, &tols()).is_err());
    }

    #[test]
    fn cfsf_witness_found_in_dimension_five() {
        let result = pic_cfsf_witness(5, 2000, 23).unwrap();
        assert_eq!(result.verdict, Verdict::Pass, "{:?}", result.notes);
        assert!(result.constants["witness_margin_relative"] <= -1e-3);
        assert!(result.residuals["witness_frame_revalidation"] <= 1e-10);
        assert!(result.witness.is_some());
        assert!(pic_cfsf_witness(4, 100, 23).is_err());
    }

    #[test]
    fn einstein_product_passes_for_all_dimensions() {
        for n in 5..=8 {
            let result = verify_einstein_product(n).unwrap();
            assert_eq!(result.verdict, Verdict::Pass, "n = {n}: {:?}", result.residuals);
            assert!((result.constants["lambda"] - (n as f64 - 3.0)).abs() <= 1e-10);
            assert!(result.residuals["einstein_residual_at_coefficient_n_minus_3"] > 1e-3);
        }
    }

    #[test]
    fn haar_and_lineality_checks() {
        let haar = verify_haar(4, 20_000, 2, 5).unwrap();
        assert_eq!(haar.verdict, Verdict::Pass, "{:?}", haar.residuals);
        let lin = verify_lineality("scal", 4, 30, 5, &tols()).unwrap();
        assert_eq!(lin.verdict, Verdict::Pass);
        let lin_nno = verify_lineality("nno", 4, 30, 5, &tols()).unwrap();
        assert_eq!(lin_nno.verdict, Verdict::Pass);
    }

    #[test]
    fn reports_are_deterministic_per_seed() {
        let a = verify_bohm_wilking(4, 10, 99).unwrap();
        let b = verify_bohm_wilking(4, 10, 99).unwrap();
        assert_eq!(a.to_json_without_meta(), b.to_json_without_meta());
        let spec = ConeSpec::by_name("scal", 4).unwrap();
        let ra = check_invariance(&spec, 20, 5, &tols()).unwrap();
        let rb = check_invariance(&spec, 20, 5, &tols()).unwrap();
        assert_eq!(ra.to_json_without_meta(), rb.to_json_without_meta());
    }
}
