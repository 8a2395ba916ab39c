//! Deterministic batch front-end: every command validates its inputs, runs
//! the computation to completion, and only then writes output files. Exit
//! codes: 0 success, 2 validation error (nothing written), 1 assertion or
//! certificate failure (JSON diagnostics on stderr).

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use peetre::decompose::{iterate_decomposition, TraceStatus};
use peetre::interp::{
    discrete_interp_norm, equivalence_ratio, interp_weights, reiteration_theta, strict_bound,
    InterpParams,
};
use peetre::slowdecay::{certify_slow_decay, witness_c1, witness_lqlp, witness_lqlp_normalized};
use peetre::uniform::{phi_profile, CompactModelSpec};
use peetre::{k_solve, CoupleSpec, Element, Error, GridFunction, Result, Vector};

use config::{log_grid, parse_couple_config, parse_element, parse_sigma};

#[derive(Parser)]
#[command(name = "peetre", version, about = "K-functional curves, certificates, and reports")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate K(x, t) on a log-spaced t grid and write t,K,err CSV.
    Kcurve(KcurveArgs),
    /// Build a slow-decay certificate from a witness family.
    Certify(CertifyArgs),
    /// Discrete interpolation norm of one element.
    Interpnorm(InterpnormArgs),
    /// Closed-form truncation bound for the strict-inclusion element.
    Strictbound(StrictboundArgs),
    /// Iterated near-optimal decomposition trace.
    Decompose(DecomposeArgs),
    /// Uniform decay profile of a compactly embedded model space.
    Phi(PhiArgs),
    /// Empirical equivalence of iterated vs direct interpolation norms.
    #[command(name = "reiter-check")]
    ReiterCheck(ReiterArgs),
}

#[derive(Args)]
struct KcurveArgs {
    /// Path to a couple config JSON file.
    #[arg(long)]
    couple: PathBuf,
    /// Element spec: basis:K, ones:N, or a JSON array.
    #[arg(long)]
    x: String,
    #[arg(long)]
    tmin: f64,
    #[arg(long)]
    tmax: f64,
    #[arg(long)]
    points: usize,
    /// Left grid endpoint for lip_grid couples.
    #[arg(long, default_value_t = 0.0)]
    grid_a: f64,
    /// Right grid endpoint for lip_grid couples.
    #[arg(long, default_value_t = 1.0)]
    grid_b: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    /// Witness family: lqlp, lqlp-normalized, or c1.
    #[arg(long)]
    family: String,
    /// Y-side exponent for the lqlp families.
    #[arg(long)]
    p: Option<f64>,
    /// X-side exponent for the normalized family.
    #[arg(long)]
    q: Option<f64>,
    /// Number of witnesses n = 1..=N.
    #[arg(long = "N")]
    n: usize,
    /// Node count of the c1 grid template.
    #[arg(long, default_value_t = 1001)]
    nodes: usize,
    /// Optional couple config for solver cross-checks of the lower bounds.
    #[arg(long)]
    couple: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InterpnormArgs {
    #[arg(long)]
    couple: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    kmax: u32,
    #[arg(long, default_value_t = 0.0)]
    grid_a: f64,
    #[arg(long, default_value_t = 1.0)]
    grid_b: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StrictboundArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    q: f64,
    #[arg(long = "N0")]
    n0: u32,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    couple: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    t0: f64,
    #[arg(long)]
    rho: f64,
    /// Number of iterations beyond the first split.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.0)]
    grid_a: f64,
    #[arg(long, default_value_t = 1.0)]
    grid_b: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PhiArgs {
    /// Envelope spec: dyadic:N or a JSON array.
    #[arg(long)]
    sigma: String,
    /// Weighted couple config the profile is computed against.
    #[arg(long)]
    couple: PathBuf,
    #[arg(long)]
    tmin: f64,
    #[arg(long)]
    tmax: f64,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReiterArgs {
    /// RNG seed; mandatory so reports are reproducible.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 32)]
    kmax: u32,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Inner interpolation parameter.
    #[arg(long, default_value_t = 0.6)]
    theta: f64,
    /// Outer interpolation parameter; the direct norm uses alpha * theta.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Inner fine exponent; must be 1 (the inner norm is then weighted l1).
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Outer fine exponent.
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Largest acceptable rho_max / rho_min before the check fails.
    #[arg(long, default_value_t = 10.0)]
    max_spread: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(code) = init_threads().and_then(|()| run(cli)) {
        std::process::exit(code);
    }
}

fn init_threads() -> std::result::Result<(), i32> {
    match std::env::var("K_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                Ok(())
            }
            _ => {
                eprintln!("error: K_THREADS must be a positive integer, got {raw:?}");
                Err(2)
            }
        },
    }
}

fn run(cli: Cli) -> std::result::Result<(), i32> {
    match cli.cmd {
        Cmd::Kcurve(a) => cmd_kcurve(a),
        Cmd::Certify(a) => cmd_certify(a),
        Cmd::Interpnorm(a) => cmd_interpnorm(a),
        Cmd::Strictbound(a) => cmd_strictbound(a),
        Cmd::Decompose(a) => cmd_decompose(a),
        Cmd::Phi(a) => cmd_phi(a),
        Cmd::ReiterCheck(a) => cmd_reiter(a),
    }
}

/// Validation failures exit 2 with a plain message; failed assertions and
/// certificates exit 1 with JSON diagnostics.
fn report_error(e: &Error) -> i32 {
    let assertion = matches!(
        e,
        Error::CertificateViolation(_)
            | Error::InvariantViolation(_)
            | Error::NoContraction { .. }
            | Error::SolverFailure(_)
    );
    if assertion {
        eprintln!(
            "{}",
            serde_json::json!({ "status": "failed", "error": e.to_string() })
        );
        1
    } else {
        eprintln!("error: {e}");
        2
    }
}

fn fail_with(diagnostics: serde_json::Value) -> std::result::Result<(), i32> {
    eprintln!("{diagnostics}");
    Err(1)
}

fn read_couple(path: &Path) -> Result<CoupleSpec> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::param("couple", format!("cannot read {}: {e}", path.display()))
    })?;
    parse_couple_config(&text)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::param("out", format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::param("out", format!("serialization failed: {e}")))?;
    text.push('\n');
    match path {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_line(fields: &[f64]) -> String {
    let mut line = String::new();
    for (i, v) in fields.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{v:.16e}");
    }
    line.push('\n');
    line
}

fn cmd_kcurve(a: KcurveArgs) -> std::result::Result<(), i32> {
    let inner = || -> Result<String> {
        let couple = read_couple(&a.couple)?;
        let x = parse_element(&a.x, &couple, a.grid_a, a.grid_b)?;
        let grid = log_grid(a.tmin, a.tmax, a.points)?;
        let results: Vec<(f64, f64)> = grid
            .par_iter()
            .map(|&t| k_solve(&x, t, &couple).map(|r| (r.value, r.error_bound)))
            .collect::<Result<_>>()?;
        let mut csv = String::from("t,K,err\n");
        for (&t, &(k, err)) in grid.iter().zip(&results) {
            csv.push_str(&csv_line(&[t, k, err]));
        }
        Ok(csv)
    };
    let csv = inner().map_err(|e| report_error(&e))?;
    write_file(&a.out, &csv).map_err(|e| report_error(&e))?;
    Ok(())
}

fn cmd_certify(a: CertifyArgs) -> std::result::Result<(), i32> {
    let inner = || -> Result<peetre::slowdecay::SlowDecayCertificate> {
        let couple = a.couple.as_deref().map(read_couple).transpose()?;
        let count = a.n;
        let need = |name: &'static str, v: Option<f64>| {
            v.ok_or_else(|| Error::param(name, format!("--{name} is required for this family")))
        };
        match a.family.as_str() {
            "lqlp" => {
                let p = need("p", a.p)?;
                certify_slow_decay(|n| witness_lqlp(n, p), couple.as_ref(), count)
            }
            "lqlp-normalized" => {
                let p = need("p", a.p)?;
                let q = need("q", a.q)?;
                certify_slow_decay(|n| witness_lqlp_normalized(n, p, q), couple.as_ref(), count)
            }
            "c1" => {
                let template =
                    GridFunction::new(0.0, 1.0, Vector::zeros(a.nodes.max(2))?)?;
                certify_slow_decay(|n| witness_c1(n, &template), couple.as_ref(), count)
            }
            other => Err(Error::param(
                "family",
                format!("unknown family {other:?}; expected lqlp, lqlp-normalized, or c1"),
            )),
        }
    };
    let cert = inner().map_err(|e| report_error(&e))?;
    if !cert.slow_decay {
        return fail_with(serde_json::json!({
            "status": "failed",
            "error": "family does not certify slow decay",
            "c": cert.c,
            "growth_ratio": cert.growth_ratio,
        }));
    }
    write_json(Some(&a.out), &cert).map_err(|e| report_error(&e))?;
    Ok(())
}

fn cmd_interpnorm(a: InterpnormArgs) -> std::result::Result<(), i32> {
    let inner = || -> Result<serde_json::Value> {
        let couple = read_couple(&a.couple)?;
        let x = parse_element(&a.x, &couple, a.grid_a, a.grid_b)?;
        let params = InterpParams::new(a.theta, a.q)?;
        let r = discrete_interp_norm(&x, &couple, params, a.kmax)?;
        Ok(serde_json::json!({
            "value": r.value,
            "k_max": r.k_max,
            "tail_bound": r.tail_bound,
        }))
    };
    let report = inner().map_err(|e| report_error(&e))?;
    write_json(a.out.as_deref(), &report).map_err(|e| report_error(&e))?;
    Ok(())
}

fn cmd_strictbound(a: StrictboundArgs) -> std::result::Result<(), i32> {
    let value = strict_bound(a.theta, a.q, a.n0).map_err(|e| report_error(&e))?;
    println!("{value:.16e}");
    Ok(())
}

fn cmd_decompose(a: DecomposeArgs) -> std::result::Result<(), i32> {
    let inner = || -> Result<peetre::DecompositionTrace> {
        let couple = read_couple(&a.couple)?;
        let x = parse_element(&a.x, &couple, a.grid_a, a.grid_b)?;
        iterate_decomposition(&x, a.t0, a.rho, a.m, &couple)
    };
    let trace = inner().map_err(|e| report_error(&e))?;
    if let TraceStatus::ContractionFailed {
        at_step,
        k_value,
        threshold,
    } = trace.status
    {
        return fail_with(serde_json::json!({
            "status": "failed",
            "error": "contraction hypothesis failed",
            "at_step": at_step,
            "k_value": k_value,
            "threshold": threshold,
            "partial_trace": trace,
        }));
    }
    write_json(Some(&a.out), &trace).map_err(|e| report_error(&e))?;
    Ok(())
}

fn cmd_phi(a: PhiArgs) -> std::result::Result<(), i32> {
    let inner = || -> Result<String> {
        let couple = read_couple(&a.couple)?;
        let sigma = parse_sigma(&a.sigma)?;
        let spec = CompactModelSpec::new(sigma)?;
        let grid = log_grid(a.tmin, a.tmax, a.points)?;
        let curve = phi_profile(&spec, &couple, &grid)?;
        let total: f64 = spec.sigma().iter().sum();
        let weights = couple
            .y_space()
            .weights()
            .ok_or_else(|| Error::param("couple", "phi needs a weighted couple"))?;
        let weighted_mass: f64 = spec
            .sigma()
            .iter()
            .zip(weights.iter())
            .map(|(s, w)| s * w)
            .sum();
        let mut csv = String::from("t,phi,const_cap,linear_cap\n");
        for (&t, &phi) in grid.iter().zip(curve.k_values()) {
            csv.push_str(&csv_line(&[t, phi, total, t * weighted_mass]));
        }
        Ok(csv)
    };
    let csv = inner().map_err(|e| report_error(&e))?;
    write_file(&a.out, &csv).map_err(|e| report_error(&e))?;
    Ok(())
}

fn cmd_reiter(a: ReiterArgs) -> std::result::Result<(), i32> {
    let inner = || -> Result<(f64, f64)> {
        if a.p != 1.0 {
            return Err(Error::param(
                "p",
                "the inner fine exponent must be 1 so the inner space is exactly weighted l1",
            ));
        }
        if a.samples == 0 {
            return Err(Error::param("samples", "need at least one sample"));
        }
        let w = Vector::new((0..a.dim).map(|k| (k as f64).exp2()).collect())?;
        let outer = CoupleSpec::weighted(w.clone())?;
        let inner_couple = CoupleSpec::weighted(interp_weights(a.theta, a.kmax, &w)?)?;
        let direct = InterpParams::new(reiteration_theta(a.alpha, a.theta)?, a.q)?;
        let iterated = InterpParams::new(a.alpha, a.q)?;

        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let samples: Vec<Element> = (0..a.samples)
            .map(|_| {
                let mut v = vec![0.0; a.dim];
                for _ in 0..4 {
                    let idx = rng.gen_range(0..a.dim);
                    let mag = rng.gen_range(0.1..1.0);
                    v[idx] = mag * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
                }
                Ok(Element::Vector(Vector::new(v)?))
            })
            .collect::<Result<_>>()?;
        let report = equivalence_ratio(
            |x| Ok(discrete_interp_norm(x, &inner_couple, iterated, a.kmax)?.value),
            |x| Ok(discrete_interp_norm(x, &outer, direct, a.kmax)?.value),
            &samples,
        )?;
        Ok((report.rho_min, report.rho_max))
    };
    let (rho_min, rho_max) = inner().map_err(|e| report_error(&e))?;
    let spread = rho_max / rho_min;
    let report = serde_json::json!({
        "seed": a.seed,
        "samples": a.samples,
        "rho_min": rho_min,
        "rho_max": rho_max,
        "spread": spread,
        "max_spread": a.max_spread,
    });
    if spread.is_nan() || spread > a.max_spread {
        return fail_with(serde_json::json!({
            "status": "failed",
            "error": "equivalence spread exceeds the configured limit",
            "report": report,
        }));
    }
    write_json(a.out.as_deref(), &report).map_err(|e| report_error(&e))?;
    Ok(())
}
