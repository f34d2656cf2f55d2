//! Command-line frontend: model constructors, pointwise computations,
//! trajectory export, and the verification checks, all emitting JSON/CSV
//! artifacts. Exit codes: 0 pass, 1 verified violation or failed check,
//! 2 usage/parse error, 3 inconclusive.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use curvlab_core::cones::Tolerances;
use curvlab_core::error::Error;
use curvlab_core::flow::{ode_evolve, q, sharp, trajectory_to_csv, OdeOptions};
use curvlab_core::lab::{
    pic_cfsf_witness, verify_all, verify_bohm_wilking, verify_dim4_formula, verify_haar,
    verify_invariance, verify_collinearity, verify_lineality, verify_ode_closed_form,
    verify_q_product_identity, verify_dim4_cone, verify_einstein_product,
    OdeClosedFormSettings, DEFAULT_BUDGET, DEFAULT_SAMPLES, DEFAULT_TRIALS,
};
use curvlab_core::models::{einstein_constant, model_by_name, ModelParams, MODEL_NAMES};
use curvlab_core::operator::{
    decompose, read_json_file, ricci, scalar, sym_tensor_to_json, to_json, write_json_file,
    CurvatureOperator, BIANCHI_TOL,
};
use curvlab_core::report::{write_atomic, Summary, Verdict, VerificationResult};

#[derive(Parser)]
#[command(name = "curvlab", version, about = "Curvature operators, cones, and the quadratic flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a model-geometry operator and write it as JSON.
    Model(ModelArgs),
    /// Apply an operation to an operator file.
    Compute(ComputeArgs),
    /// Integrate the curvature ODE and export the trajectory as CSV.
    Ode(OdeArgs),
    /// Run a named verification check and write its report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model name: sphere, hyperbolic, sxh2, rxs2, s2xs2, cpm, product.
    #[arg(long)]
    name: String,
    /// Ambient dimension n.
    #[arg(long)]
    dim: usize,
    /// Curvature of the (first) constant-curvature factor.
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// First-block dimension for the product model.
    #[arg(long)]
    p: Option<usize>,
    /// Curvature of the second factor for the product model.
    #[arg(long, allow_negative_numbers = true)]
    kappa2: Option<f64>,
    /// Output path (default: <name>_<dim>.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ComputeOp {
    Decompose,
    Q,
    Ricci,
    Sharp,
}

#[derive(Args)]
struct ComputeArgs {
    /// Operation to apply.
    #[arg(value_enum)]
    op: ComputeOp,
    /// Input operator file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Output path (default: derived from the input stem).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OdeArgs {
    /// Input operator file (JSON), the initial condition.
    #[arg(long)]
    input: PathBuf,
    /// Final time.
    #[arg(long)]
    t_end: f64,
    /// Fixed step size.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Output CSV path (default: <input stem>_trajectory.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check name: bohm-wilking, collinearity, q-product, dim4-formula,
    /// ode-closed-form, dim4-cone, pic-cfsf-witness, einstein-product,
    /// invariance, haar, lineality, all.
    check: String,
    /// Ambient dimension n.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Root seed; every random stream derives from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Trial count for identity checks.
    #[arg(long)]
    trials: Option<usize>,
    /// Boundary-sample count for invariance runs.
    #[arg(long)]
    samples: Option<usize>,
    /// Evaluation budget for witness searches.
    #[arg(long)]
    budget: Option<usize>,
    /// Cone registry name (invariance, lineality).
    #[arg(long)]
    cone: Option<String>,
    /// Base cone for the dimension-four construction.
    #[arg(long)]
    base: Option<String>,
    /// Epsilon for the closed-form flow comparison.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Final time for the closed-form flow comparison.
    #[arg(long)]
    t_max: Option<f64>,
    /// Step size for the closed-form flow comparison.
    #[arg(long)]
    step: Option<f64>,
    /// Tolerance overrides as name=value (boundary, slope, lineality,
    /// ray_cap); repeatable.
    #[arg(long = "tol")]
    tol: Vec<String>,
    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Model(args) => cmd_model(args),
        Command::Compute(args) => cmd_compute(args),
        Command::Ode(args) => cmd_ode(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn cmd_model(args: ModelArgs) -> Result<ExitCode, Error> {
    let params = ModelParams {
        kappa: args.kappa,
        p: args.p,
        kappa2: args.kappa2,
    };
    let r = model_by_name(&args.name, args.dim, params).map_err(|e| match e {
        Error::UnknownName(name) => Error::UnknownName(format!(
            "{name} (known models: {})",
            MODEL_NAMES.join(", ")
        )),
        other => other,
    })?;
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}_{}.json", args.name, args.dim)));
    write_json_file(&r, &out)?;
    let (lambda, einstein_residual) = einstein_constant(&r);
    println!(
        "{}: n={} scalar={:.12e} einstein_lambda={:.12e} einstein_residual={:.3e} lambda_min={:.12e} -> {}",
        args.name,
        args.dim,
        scalar(&r),
        lambda,
        einstein_residual,
        r.lambda_min(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_operator(path: &Path) -> Result<CurvatureOperator, Error> {
    let (r, diag) = read_json_file(path)?;
    if diag.bianchi_residual_before > BIANCHI_TOL * r.norm().max(1.0) {
        eprintln!(
            "warning: {} violated the first Bianchi identity (residual {:.3e}); the projected operator is used",
            path.display(),
            diag.bianchi_residual_before
        );
    }
    Ok(r)
}

fn cmd_compute(args: ComputeArgs) -> Result<ExitCode, Error> {
    let r = load_operator(&args.input)?;
    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("operator")
        .to_string();
    let parent = args
        .input
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    match args.op {
        ComputeOp::Decompose => {
            let dec = decompose(&r);
            for (part, suffix) in [(&dec.r_id, "rid"), (&dec.r_0, "r0"), (&dec.r_w, "rw")] {
                let path = match &args.out {
                    Some(base) => with_suffix(base, suffix),
                    None => parent.join(format!("{stem}_{suffix}.json")),
                };
                write_json_file(part, &path)?;
                println!("{suffix}: norm={:.12e} -> {}", part.norm(), path.display());
            }
            let recon = dec.reassemble().sub(&r).norm() / r.norm().max(1.0);
            println!("reconstruction_residual={recon:.3e}");
        }
        ComputeOp::Q => {
            let out = args
                .out
                .unwrap_or_else(|| parent.join(format!("{stem}_q.json")));
            let qr = q(&r);
            write_json_file(&qr, &out)?;
            let validation = qr.validate();
            println!(
                "q: norm={:.12e} trace={:.12e} bianchi_residual={:.3e} -> {}",
                qr.norm(),
                qr.trace(),
                validation.bianchi_residual,
                out.display()
            );
        }
        ComputeOp::Ricci => {
            let out = args
                .out
                .unwrap_or_else(|| parent.join(format!("{stem}_ricci.json")));
            let ric = ricci(&r);
            write_atomic(&out, sym_tensor_to_json(&ric).as_bytes())?;
            println!(
                "ricci: trace={:.12e} lambda_min={:.12e} -> {}",
                ric.trace(),
                ric.eigenvalues()[0],
                out.display()
            );
        }
        ComputeOp::Sharp => {
            let out = args
                .out
                .unwrap_or_else(|| parent.join(format!("{stem}_sharp.json")));
            let sr = sharp(&r);
            write_atomic(&out, to_json(&sr).as_bytes())?;
            println!("sharp: norm={:.12e} -> {}", sr.norm(), out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("operator");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("json");
    base.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn cmd_ode(args: OdeArgs) -> Result<ExitCode, Error> {
    let r = load_operator(&args.input)?;
    let traj = ode_evolve(&r, args.t_end, args.step, OdeOptions::default())?;
    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("operator")
        .to_string();
    let out = args.out.unwrap_or_else(|| {
        args.input
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
            .join(format!("{stem}_trajectory.csv"))
    });
    write_atomic(&out, trajectory_to_csv(&traj).as_bytes())?;
    println!(
        "ode: steps={} final_t={:.6} outcome={:?} -> {}",
        traj.times.len() - 1,
        traj.final_time(),
        traj.outcome,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_tolerances(overrides: &[String]) -> Result<Tolerances, Error> {
    let mut tols = Tolerances::default();
    for entry in overrides {
        let (key, value) = entry.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("tolerance override must be name=value, got {entry}"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad tolerance value in {entry}")))?;
        match key {
            "boundary" => tols.boundary = value,
            "slope" => tols.slope = value,
            "lineality" => tols.lineality = value,
            "ray_cap" => tols.ray_cap = value,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance key {other} (known: boundary, slope, lineality, ray_cap)"
                )))
            }
        }
    }
    Ok(tols)
}

/// Embed the resolved run configuration into the report.
fn echo_config(result: &mut VerificationResult, args: &VerifyArgs, tols: &Tolerances) {
    result.constant("config.tol.boundary", tols.boundary);
    result.constant("config.tol.slope", tols.slope);
    result.constant("config.tol.lineality", tols.lineality);
    result.constant("config.tol.ray_cap", tols.ray_cap);
    result.note(format!(
        "config: check={} dim={} seed={}",
        args.check, args.dim, args.seed
    ));
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let tols = parse_tolerances(&args.tol)?;
    let trials = args.trials.unwrap_or(DEFAULT_TRIALS);
    let samples = args.samples.unwrap_or(DEFAULT_SAMPLES);
    let budget = args.budget.unwrap_or(DEFAULT_BUDGET);
    if args.check == "all" {
        let checks = verify_all(args.dim, args.seed, &tols)?;
        for check in &checks {
            print_check_line(check);
        }
        let summary = Summary::new(checks);
        let out = args
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("summary_{}.json", args.dim)));
        write_atomic(&out, summary.to_json().as_bytes())?;
        println!(
            "all: verdict={:?} checks={} -> {}",
            summary.verdict,
            summary.checks.len(),
            out.display()
        );
        return Ok(ExitCode::from(summary.verdict.exit_code() as u8));
    }
    let mut result = match args.check.as_str() {
        "bohm-wilking" => verify_bohm_wilking(args.dim, trials, args.seed)?,
        "collinearity" => verify_collinearity(args.dim)?,
        "q-product" => verify_q_product_identity(args.dim)?,
        "dim4-formula" => {
            if args.dim != 4 {
                return Err(Error::Unsupported(format!(
                    "dim4-formula runs in dimension 4, got {}",
                    args.dim
                )));
            }
            verify_dim4_formula(trials.min(200), args.seed)?
        }
        "ode-closed-form" => {
            let defaults = OdeClosedFormSettings::default();
            verify_ode_closed_form(OdeClosedFormSettings {
                epsilon: args.epsilon.unwrap_or(defaults.epsilon),
                t_max: args.t_max.unwrap_or(defaults.t_max),
                step: args.step.unwrap_or(defaults.step),
            })?
        }
        "dim4-cone" => {
            let base = args.base.as_deref().unwrap_or("nno");
            verify_dim4_cone(base, samples, args.seed, &tols)?.0
        }
        "pic-cfsf-witness" => pic_cfsf_witness(args.dim, budget, args.seed)?,
        "einstein-product" => verify_einstein_product(args.dim)?,
        "invariance" => {
            let cone = args.cone.as_deref().ok_or_else(|| {
                Error::InvalidArgument("invariance needs --cone <name>".to_string())
            })?;
            verify_invariance(cone, args.dim, samples, args.seed, &tols)?.0
        }
        "haar" => verify_haar(args.dim, samples.max(10_000), trials.min(10), args.seed)?,
        "lineality" => {
            let cone = args.cone.as_deref().ok_or_else(|| {
                Error::InvalidArgument("lineality needs --cone <name>".to_string())
            })?;
            verify_lineality(cone, args.dim, trials, args.seed, &tols)?
        }
        other => {
            return Err(Error::UnknownName(format!(
                "{other} (known checks: bohm-wilking, collinearity, q-product, dim4-formula, ode-closed-form, dim4-cone, pic-cfsf-witness, einstein-product, invariance, haar, lineality, all)"
            )))
        }
    };
    echo_config(&mut result, &args, &tols);
    print_check_line(&result);
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}_{}.json", args.check.replace(':', "_"), args.dim)));
    write_atomic(&out, result.to_json().as_bytes())?;
    println!("report -> {}", out.display());
    Ok(ExitCode::from(result.verdict.exit_code() as u8))
}

fn print_check_line(result: &VerificationResult) {
    let residuals: Vec<String> = result
        .residuals
        .iter()
        .filter(|(k, _)| !k.starts_with("config."))
        .map(|(k, v)| format!("{k}={v:.3e}"))
        .collect();
    println!(
        "{}{}: {} [{}]",
        result.check,
        result
            .cone
            .as_ref()
            .map(|c| format!("({c})"))
            .unwrap_or_default(),
        match result.verdict {
            Verdict::Pass => "pass",
            Verdict::Violation => "violation",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        },
        residuals.join(" ")
    );
}
