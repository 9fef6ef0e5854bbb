//! Command-line front end for the scalar LQ game solver.
//!
//! Exit codes: 0 on success, 1 for invalid input or arguments, 2 when
//! `reproduce` finds a mismatch, 3 for I/O failures. Diagnostics go to
//! stderr; set `FNE_LOG=debug` for progress logging.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use log::debug;

use scalar_fne::aux_functions::{all_branches, sample_curves, write_curves_csv, BranchCurve};
use scalar_fne::classifier::{classify, default_a_large, DEFAULT_A_SMALL};
use scalar_fne::fne_solver::{solve_all_fne, SolverOptions};
use scalar_fne::game_model::{validate_game, GameSpec, NormalizedGame};
use scalar_fne::verify_oracle::{verify_equilibrium, VerificationReport};

#[derive(Parser)]
#[command(
    name = "scalar-fne",
    version,
    about = "Linear feedback Nash equilibria of scalar discrete-time LQ games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute every linear feedback Nash equilibrium of a game.
    Solve(SolveArgs),
    /// Predict the number of equilibria from the weight profile alone.
    Classify(ClassifyArgs),
    /// Solve, then re-derive each equilibrium from first principles.
    ///
    /// The exit code stays 0 even when a report fails; inspect the verdicts.
    Verify(VerifyArgs),
    /// Sample the auxiliary branch functions to CSV, with a JSON sidecar
    /// describing branches and breakpoints.
    PlotData(PlotDataArgs),
    /// Re-run the built-in reference games and compare their equilibrium
    /// counts and closed-loop bound against the expected values.
    Reproduce,
}

#[derive(Args)]
struct InputArgs {
    /// Path to a game description JSON file
    /// ({"n": 2, "a": 0.3, "b": [...], "q": [...], "r": [...]}).
    #[arg(long)]
    input: PathBuf,
    /// Replace the system coefficient `a` before solving.
    #[arg(long, allow_negative_numbers = true)]
    a_override: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Root localization tolerance in the reduced variable.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Coefficient size treated as large (default scales with the weights).
    #[arg(long)]
    a_large: Option<f64>,
    /// Coefficient size treated as small.
    #[arg(long)]
    a_small: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Verification tolerance, scaled per check by the reference magnitude.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct PlotDataArgs {
    #[command(flatten)]
    input: InputArgs,
    /// CSV output path; a `<stem>.meta.json` sidecar lands next to it.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    xi_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    xi_max: f64,
    /// Grid points per branch.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
}

enum Failure {
    Usage(String),
    Mismatch(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Mismatch(m) | Failure::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FNE_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Classify(args) => run_classify(args),
        Command::Verify(args) => run_verify(args),
        Command::PlotData(args) => run_plot_data(args),
        Command::Reproduce => run_reproduce(),
    }
}

fn load_game(args: &InputArgs) -> Result<(GameSpec, NormalizedGame), Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.input.display())))?;
    let mut spec = GameSpec::from_json_str(&text)
        .map_err(|e| Failure::Usage(format!("invalid game description: {e}")))?;
    if let Some(a) = args.a_override {
        spec.a = a;
    }
    let norm = validate_game(&spec).map_err(|e| Failure::Usage(format!("invalid game: {e}")))?;
    Ok((spec, norm))
}

fn emit(output: &Option<PathBuf>, body: &str) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn run_solve(args: SolveArgs) -> Result<(), Failure> {
    let (_, norm) = load_game(&args.input)?;
    let mut opts = SolverOptions::default();
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Failure::Usage("--tol must be a positive number".into()));
        }
        opts.xi_abs_tol = tol;
    }
    let sols = solve_all_fne(&norm, &opts);
    debug!("found {} equilibria", sols.len());
    emit(&args.output, &to_pretty(&sols))
}

fn run_classify(args: ClassifyArgs) -> Result<(), Failure> {
    let (_, norm) = load_game(&args.input)?;
    let a_large = args.a_large.unwrap_or_else(|| default_a_large(&norm));
    let a_small = args.a_small.unwrap_or(DEFAULT_A_SMALL);
    if !(a_large.is_finite() && a_large > 1.0) {
        return Err(Failure::Usage("--a-large must exceed 1".into()));
    }
    if !(a_small.is_finite() && a_small > 0.0 && a_small <= 1.0) {
        return Err(Failure::Usage("--a-small must lie in (0, 1]".into()));
    }
    let c = classify(&norm, a_large, a_small);
    debug!("predicted count {:?}", c.predicted_count);
    emit(&args.output, &to_pretty(&c))
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::Usage("--tol must be a positive number".into()));
    }
    let (spec, norm) = load_game(&args.input)?;
    let sols = solve_all_fne(&norm, &SolverOptions::default());
    let reports: Vec<VerificationReport> = sols
        .iter()
        .map(|s| verify_equilibrium(s, &spec, args.tol))
        .collect();
    debug!(
        "{}/{} reports passed",
        reports.iter().filter(|r| r.passed()).count(),
        reports.len()
    );
    emit(&args.output, &to_pretty(&reports))
}

fn run_plot_data(args: PlotDataArgs) -> Result<(), Failure> {
    if !(args.xi_min.is_finite() && args.xi_max.is_finite() && args.xi_min < args.xi_max) {
        return Err(Failure::Usage("--xi-min must be below --xi-max".into()));
    }
    if args.samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    let (_, norm) = load_game(&args.input)?;
    let sigma = norm.sigma();

    let rows = sample_curves(sigma, args.xi_min, args.xi_max, args.samples);
    let mut csv = Vec::new();
    write_curves_csv(&mut csv, &rows).expect("in-memory write");
    fs::write(&args.output, &csv)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.output.display())))?;

    let mut breakpoints = vec![0.0];
    for &s in sigma {
        if s > 0.0 {
            breakpoints.push(s.sqrt());
            breakpoints.push(-s.sqrt());
        }
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let branches: Vec<serde_json::Value> = all_branches(norm.n())
        .iter()
        .map(|t| {
            let curve = BranchCurve::new(t, sigma);
            let (slope_neg, slope_pos) = curve.slopes();
            serde_json::json!({
                "branch": t.index(),
                "signs": t.signs(),
                "slope_neg_inf": slope_neg,
                "slope_pos_inf": slope_pos,
            })
        })
        .collect();
    let meta = serde_json::json!({
        "n": norm.n(),
        "sigma": sigma,
        "xi_min": args.xi_min,
        "xi_max": args.xi_max,
        "samples": args.samples,
        "breakpoints": breakpoints,
        "branches": branches,
    });
    let meta_path = args.output.with_extension("meta.json");
    fs::write(&meta_path, to_pretty(&meta))
        .map_err(|e| Failure::Io(format!("{}: {e}", meta_path.display())))?;
    debug!(
        "wrote {} rows to {} and metadata to {}",
        rows.len(),
        args.output.display(),
        meta_path.display()
    );
    Ok(())
}

fn run_reproduce() -> Result<(), Failure> {
    let cases: [(&str, [f64; 3], f64, usize); 4] = [
        ("game-a", [0.1, 0.05, 0.0], 0.3, 1),
        ("game-a", [0.1, 0.05, 0.0], -5.0, 7),
        ("game-b", [0.1, -0.8, -0.9], 0.3, 3),
        ("game-b", [0.1, -0.8, -0.9], -5.0, 7),
    ];
    let bound = 0.7326;
    let mut ok = true;
    let mut max_acl = 0.0f64;
    for (label, q, a, want) in cases {
        let spec = GameSpec {
            n: 3,
            a,
            b: vec![1.0; 3],
            q: q.to_vec(),
            r: vec![1.0; 3],
        };
        let norm = validate_game(&spec).expect("reference games are valid");
        let sols = solve_all_fne(&norm, &SolverOptions::default());
        for s in &sols {
            max_acl = max_acl.max(s.a_cl.abs());
        }
        let line_ok = sols.len() == want;
        ok &= line_ok;
        println!(
            "{label} a={a:>4}: {} equilibria (expected {want}) {}",
            sols.len(),
            if line_ok { "ok" } else { "MISMATCH" }
        );
    }
    let bound_ok = max_acl <= bound + 1e-4;
    ok &= bound_ok;
    println!(
        "max |a_cl| = {max_acl:.6} (bound {bound}) {}",
        if bound_ok { "ok" } else { "MISMATCH" }
    );
    if ok {
        Ok(())
    } else {
        Err(Failure::Mismatch(
            "reference reproduction does not match the expected table".into(),
        ))
    }
}
