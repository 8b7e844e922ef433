//! vessel-lab: construct operator vessels, sweep their tau profiles and
//! potentials, and run verification suites over the identities they must
//! satisfy.
//!
//! Exit codes: 0 on success, 1 when a verification suite fails, 2 for usage
//! and precondition errors (with a machine-readable JSON object on stderr).

mod report;
mod suites;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use vessel_lab::curve::{discretize_curve_with_density, CurveSpec, ProfileKind};
use vessel_lab::numerics::c64;
use vessel_lab::params::{Family, VesselParameters};
use vessel_lab::schema::VesselJson;
use vessel_lab::{fixtures, CMatrix, Vessel};

use report::{SuiteReport, VerificationReport};

#[derive(Parser)]
#[command(
    name = "vessel-lab",
    about = "numerical laboratory for operator vessels and the potentials they generate",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a vessel from a named fixture or a spectral-curve spec and
    /// write it as JSON.
    Construct(ConstructArgs),
    /// Emit the tau profile `x,tau,logderiv,beta,q` as CSV over an x-range.
    Sweep(SweepArgs),
    /// Run verification suites and report per-check residuals.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Named fixture: rank1 | zero | diag2 | nls | nls4 | canonical
    #[arg(long, conflicts_with_all = ["curve", "curve_spec"])]
    fixture: Option<String>,

    /// Frequency of the rank1 fixture's dynamics (`A = [i kappa]`)
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,

    /// Inline curve spec `segment-imag:T_MIN:T_MAX`
    #[arg(long)]
    curve: Option<String>,

    /// Path to a curve-spec JSON file
    #[arg(long)]
    curve_spec: Option<PathBuf>,

    /// Quadrature nodes for the curve discretization
    #[arg(long, default_value_t = 8)]
    nodes: usize,

    /// Parameter family for curve vessels: sl | nls | nls4 | canonical
    #[arg(long, default_value = "sl")]
    family: String,

    /// Curve profile: gaussian | constant
    #[arg(long, default_value = "gaussian")]
    profile: String,

    /// Scale (gaussian) or value (constant) of the profile
    #[arg(long, default_value_t = 1.0)]
    profile_scale: f64,

    /// Sweep interval `A:B`
    #[arg(long)]
    interval: Option<String>,

    /// Cache grid steps per unit length
    #[arg(long, default_value_t = 256)]
    grid_density: usize,

    /// Output path for the vessel JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Vessel JSON produced by `construct`
    #[arg(long)]
    input: PathBuf,

    #[arg(long)]
    x_min: f64,

    #[arg(long)]
    x_max: f64,

    /// Number of rows (grid points) to emit
    #[arg(long)]
    steps: usize,

    /// Cache grid steps per unit length used to rebuild the vessel
    #[arg(long, default_value_t = 256)]
    grid_density: usize,

    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Vessel JSON produced by `construct`
    #[arg(long)]
    input: PathBuf,

    /// Comma-separated suites from: axioms, symmetry, det, intertwine,
    /// kernels, tau, gl, jost, bounds
    #[arg(long)]
    suite: String,

    /// Override for residual-check tolerances (structural thresholds such
    /// as kernel positivity floors keep their built-in values)
    #[arg(long)]
    tol: Option<f64>,

    /// Seed for the randomized draws
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Where to write the JSON report
    #[arg(long)]
    report: Option<PathBuf>,

    /// Cache grid steps per unit length used to rebuild the vessel
    #[arg(long, default_value_t = 256)]
    grid_density: usize,
}

/// Failure that should surface as exit code 2 with JSON on stderr.
struct UsageError {
    kind: &'static str,
    message: String,
}

impl UsageError {
    fn new(kind: &'static str, message: impl Into<String>) -> UsageError {
        UsageError {
            kind,
            message: message.into(),
        }
    }
}

impl From<vessel_lab::Error> for UsageError {
    fn from(e: vessel_lab::Error) -> UsageError {
        UsageError::new("precondition", e.to_string())
    }
}

impl From<std::io::Error> for UsageError {
    fn from(e: std::io::Error) -> UsageError {
        UsageError::new("io", e.to_string())
    }
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Construct(args) => cmd_construct(args).map(|_| true),
        Command::Sweep(args) => cmd_sweep(args).map(|_| true),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(e),
    }
}

fn fail(e: UsageError) -> ExitCode {
    let payload = json!({"error": {"kind": e.kind, "message": e.message}});
    eprintln!("{payload}");
    ExitCode::from(2)
}

/// Honors `VESSEL_LAB_THREADS` as a cap on worker threads.
fn configure_threads() -> Result<(), UsageError> {
    if let Ok(raw) = std::env::var("VESSEL_LAB_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| UsageError::new("usage", "VESSEL_LAB_THREADS must be an integer"))?;
        if n == 0 {
            return Err(UsageError::new(
                "usage",
                "VESSEL_LAB_THREADS must be at least 1",
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError::new("usage", e.to_string()))?;
    }
    Ok(())
}

fn parse_interval(raw: &Option<String>, default: (f64, f64)) -> Result<(f64, f64), UsageError> {
    match raw {
        None => Ok(default),
        Some(text) => {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 2 {
                return Err(UsageError::new("usage", "--interval expects A:B"));
            }
            let a: f64 = parts[0]
                .parse()
                .map_err(|_| UsageError::new("usage", "--interval expects numbers"))?;
            let b: f64 = parts[1]
                .parse()
                .map_err(|_| UsageError::new("usage", "--interval expects numbers"))?;
            if !(a < b) {
                return Err(UsageError::new("usage", "--interval needs A < B"));
            }
            Ok((a, b))
        }
    }
}

fn cmd_construct(args: ConstructArgs) -> Result<(), UsageError> {
    let density = args.grid_density;
    let (vessel, family_args) = if let Some(fixture) = &args.fixture {
        let (a, b) = parse_interval(&args.interval, (0.0, 10.0))?;
        if a > 0.0 {
            return Err(UsageError::new(
                "usage",
                "fixtures are based at x0 = 0; the interval must contain 0",
            ));
        }
        let vessel = match fixture.as_str() {
            "rank1" => fixtures::rank1_kappa_on(args.kappa, a, b, density),
            "zero" => {
                let params = VesselParameters::sturm_liouville(a, b);
                Vessel::construct_with_density(
                    params,
                    CMatrix::from_rows(&[vec![c64(0.0, 1.0)]]),
                    CMatrix::zeros(1, 2),
                    CMatrix::identity(1),
                    0.0,
                    density,
                )?
            }
            "diag2" => {
                let params = VesselParameters::sturm_liouville(a, b);
                Vessel::construct_with_density(
                    params,
                    CMatrix::diag(&[c64(0.0, 1.0), c64(0.0, 4.0)]),
                    CMatrix::from_rows(&[
                        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
                        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
                    ]),
                    CMatrix::identity(2),
                    0.0,
                    density,
                )?
            }
            "nls" => fixtures::nls2(),
            "nls4" => fixtures::nls4(),
            "canonical" => fixtures::canonical2(),
            other => {
                return Err(UsageError::new(
                    "usage",
                    format!("unknown fixture `{other}`"),
                ))
            }
        };
        let family_args = json!({"fixture": fixture, "kappa": args.kappa});
        (vessel, family_args)
    } else if args.curve.is_some() || args.curve_spec.is_some() {
        let spec = if let Some(path) = &args.curve_spec {
            let text = std::fs::read_to_string(path)?;
            CurveSpec::from_json(&text)?
        } else {
            let text = args.curve.as_ref().unwrap();
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 || parts[0] != "segment-imag" {
                return Err(UsageError::new(
                    "usage",
                    "--curve expects segment-imag:T_MIN:T_MAX",
                ));
            }
            let t_min: f64 = parts[1]
                .parse()
                .map_err(|_| UsageError::new("usage", "--curve expects numbers"))?;
            let t_max: f64 = parts[2]
                .parse()
                .map_err(|_| UsageError::new("usage", "--curve expects numbers"))?;
            let profile = match args.profile.as_str() {
                "gaussian" => ProfileKind::Gaussian {
                    scale: args.profile_scale,
                },
                "constant" => ProfileKind::Constant {
                    value: args.profile_scale,
                },
                other => {
                    return Err(UsageError::new(
                        "usage",
                        format!("unknown profile `{other}`"),
                    ))
                }
            };
            CurveSpec::segment_imag(t_min, t_max, args.nodes).with_profile(profile)
        };
        let family = Family::parse(&args.family)?;
        let (a, b) = parse_interval(&args.interval, (0.0, 10.0))?;
        let params = VesselParameters::from_family(family, a, b)?;
        let vessel = discretize_curve_with_density(&spec, params, 0.0, density)?;
        let family_args = json!({"curve": serde_json::from_str::<serde_json::Value>(&spec.to_json()).unwrap()});
        (vessel, family_args)
    } else {
        return Err(UsageError::new(
            "usage",
            "construct needs --fixture, --curve or --curve-spec",
        ));
    };

    let snapshot = VesselJson::from_vessel(&vessel, family_args);
    std::fs::write(&args.out, snapshot.to_string_pretty() + "\n")?;
    if let Some(t) = vessel.truncation() {
        let warning = json!({"warning": {
            "kind": "interval-truncated",
            "requested": [t.requested.0, t.requested.1],
            "valid": [vessel.valid_interval().0, vessel.valid_interval().1],
            "sigma_min": t.sigma_min,
        }});
        eprintln!("{warning}");
    }
    Ok(())
}

fn load_vessel(path: &PathBuf, density: usize) -> Result<Vessel, UsageError> {
    let text = std::fs::read_to_string(path)?;
    Ok(VesselJson::parse(&text)?.to_vessel(density)?)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), UsageError> {
    if args.steps == 0 {
        return Err(UsageError::new("usage", "--steps must be at least 1"));
    }
    if args.x_max < args.x_min {
        return Err(UsageError::new("usage", "--x-max must be >= --x-min"));
    }
    let vessel = load_vessel(&args.input, args.grid_density)?;
    let full: Vec<f64> = if args.steps == 1 {
        vec![args.x_min]
    } else {
        (0..args.steps)
            .map(|k| {
                args.x_min + (args.x_max - args.x_min) * k as f64 / (args.steps - 1) as f64
            })
            .collect()
    };
    let (lo, hi) = vessel.valid_interval();
    let grid: Vec<f64> = full
        .iter()
        .copied()
        .filter(|&x| x >= lo - 1e-12 && x <= hi + 1e-12)
        .collect();
    if grid.len() < full.len() {
        let warning = json!({"warning": {
            "kind": "rows-truncated-to-valid-interval",
            "valid": [lo, hi],
            "emitted": grid.len(),
            "requested": full.len(),
        }});
        eprintln!("{warning}");
    }
    if grid.is_empty() {
        return Err(UsageError::new(
            "precondition",
            "requested range lies outside the valid interval",
        ));
    }
    let profile = vessel.potential(&grid)?;
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            profile.write_csv(&mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            profile.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, UsageError> {
    let names: Vec<String> = args
        .suite
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(UsageError::new("usage", "--suite needs at least one name"));
    }
    for name in &names {
        if !suites::SUITE_NAMES.contains(&name.as_str()) {
            return Err(UsageError::new(
                "usage",
                format!(
                    "unknown suite `{name}` (expected one of {})",
                    suites::SUITE_NAMES.join(", ")
                ),
            ));
        }
    }
    let vessel = load_vessel(&args.input, args.grid_density)?;

    let mut suite_reports: Vec<SuiteReport> = Vec::new();
    for name in &names {
        let start = Instant::now();
        let checks = suites::run_suite(name, &vessel, args.tol, args.seed)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let report = SuiteReport::new(name.clone(), checks, wall_ms);
        println!(
            "suite {:<11} {:>4} passed {:>3} failed   {:8.1} ms",
            report.name, report.passed, report.failed, report.wall_ms
        );
        for check in report.checks.iter().filter(|c| !c.pass) {
            println!(
                "  FAIL {} at {}: residual {:.3e} > {:.3e}",
                check.name, check.location, check.residual, check.tolerance
            );
        }
        suite_reports.push(report);
    }
    let report = VerificationReport::assemble(
        args.input.display().to_string(),
        args.seed,
        suite_reports,
    );
    println!(
        "total: {} passed, {} failed",
        report.total_passed, report.total_failed
    );
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report).unwrap() + "\n")?;
    }
    Ok(report.all_pass())
}
