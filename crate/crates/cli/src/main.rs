use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rearrange_lab::io::{blocks_to_value, profile_to_value, Instance};
use rearrange_lab::oscillation::zero_mean_decompose;
use rearrange_lab::rearrange::decreasing_rearrangement;
use rearrange_lab::search::{landscape_csv, ratio_landscape, search, Param, SearchProblem, Target};
use rearrange_lab::verify::{run_with, AtomRange, ExponentTuple, Suite, TrialConfig, WeightScheme};
use rearrange_lab::{BigRational, Error, FloatWidth, Mode, RiNorm, Scalar};
use serde_json::Value;

const PRECISION_VAR: &str = "REARRANGE_LAB_PRECISION";

#[derive(Parser)]
#[command(name = "rearrange-lab", version, about = "Rearrangements, RI norms and Leibniz-type oscillation bounds")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decreasing rearrangement of one function of an instance.
    Rearrange(FunctionArgs),
    /// Zero-mean two-level block decomposition of a centered function.
    Decompose(FunctionArgs),
    /// Run a seeded verification suite.
    Verify(VerifyArgs),
    /// Hill-climb for near-equality instances.
    Search(SearchArgs),
    /// Tabulate LHS/RHS over one or two varied values, as CSV.
    Landscape(LandscapeArgs),
}

#[derive(Args)]
struct FunctionArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    function: String,
    /// Overrides the mode implied by the input literals.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `<out>.meta.json` with a timestamp.
    #[arg(long, requires = "out")]
    sidecar: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// A count (`4`) or a range (`2-8`).
    #[arg(long, default_value = "2-8")]
    atoms: AtomRange,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    mode: Mode,
    /// `equal`, `random-rational` or `mixed`; defaults per suite.
    #[arg(long)]
    weights: Option<WeightScheme>,
    /// Norm descriptor JSON, inline or `@file`.
    #[arg(long)]
    norm: Option<String>,
    /// `r,p1,q1,p2,q2`.
    #[arg(long)]
    exponents: Option<ExponentTuple>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ProblemArgs {
    /// `thm32`, `thm41` or `thm43` (a `-ratio` suffix is accepted).
    #[arg(long)]
    target: Target,
    #[arg(long, default_value_t = 4)]
    atoms: usize,
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    exponents: Option<ExponentTuple>,
    /// Values are kept in `[-bound, bound]`.
    #[arg(long, default_value_t = 8.0)]
    bound: f64,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct LandscapeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Instance supplying fixed values; its weights replace `--atoms`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Value to vary, e.g. `f[1]`; at most two.
    #[arg(long)]
    vary: Vec<Param>,
    /// `lo,hi`.
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    range: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = if e.is_precondition() { 3 } else { 2 };
            eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let width = float_width()?;
    match cli.command {
        Command::Rearrange(a) => {
            let (inst, mode) = read_instance(&a.input)?;
            let value = match a.mode.unwrap_or(mode) {
                Mode::Exact => rearrange_value::<BigRational>(&inst, &a.function)?,
                Mode::Float => rearrange_value::<f64>(&inst, &a.function)?,
            };
            emit(&pretty(&value), a.out.as_deref(), false)?;
            Ok(0)
        }
        Command::Decompose(a) => {
            let (inst, mode) = read_instance(&a.input)?;
            let value = match a.mode.unwrap_or(mode) {
                Mode::Exact => decompose_value::<BigRational>(&inst, &a.function)?,
                Mode::Float => decompose_value::<f64>(&inst, &a.function)?,
            };
            emit(&pretty(&value), a.out.as_deref(), false)?;
            Ok(0)
        }
        Command::Verify(a) => verify(a, width),
        Command::Search(a) => {
            let problem = build_problem(&a.problem)?;
            let result = search(&problem, a.iters, a.restarts, a.seed)?;
            emit(&result.to_canonical_json(), a.output.out.as_deref(), a.output.sidecar)?;
            Ok(if result.violations.is_empty() { 0 } else { 1 })
        }
        Command::Landscape(a) => {
            let mut problem = build_problem(&a.problem)?;
            let base = match &a.input {
                Some(path) => {
                    let (inst, _) = read_instance(path)?;
                    problem.weights = inst.weights.clone();
                    inst
                }
                None => Instance::new(problem.weights.clone()),
            };
            let (lo, hi) = parse_range(&a.range)?;
            let rows = ratio_landscape(&problem, &base, &a.vary, &lo, &hi, a.grid)?;
            emit(&landscape_csv(&rows), a.out.as_deref(), false)?;
            Ok(0)
        }
    }
}

fn float_width() -> Result<FloatWidth, Error> {
    match std::env::var(PRECISION_VAR) {
        Ok(s) => {
            let bits = s.trim().parse().map_err(|_| Error::InvalidConfig(format!("{PRECISION_VAR}=`{s}` is not an integer")))?;
            FloatWidth::from_bits(bits)
        }
        Err(_) => Ok(FloatWidth::Double),
    }
}

fn verify(a: VerifyArgs, width: FloatWidth) -> Result<u8, Error> {
    let suites: Vec<Suite> = if a.suite == "all" { Suite::ALL.to_vec() } else { vec![a.suite.parse()?] };
    let norm = a.norm.as_deref().map(parse_norm).transpose()?;
    if a.exponents.is_some() && !suites.contains(&Suite::Thm41) {
        return Err(Error::InvalidConfig("--exponents only applies to thm41".into()));
    }
    if norm.is_some() && !suites.contains(&Suite::Thm43) {
        return Err(Error::InvalidConfig("--norm only applies to thm43".into()));
    }
    let configs = suites
        .iter()
        .map(|&suite| {
            let mut cfg = TrialConfig::new(suite).with_trials(a.trials).with_atoms(a.atoms).with_seed(a.seed).with_mode(a.mode);
            if let Some(w) = a.weights {
                cfg = cfg.with_weights(w);
            }
            if suite == Suite::Thm41 {
                cfg.exponents = a.exponents.clone();
            }
            if suite == Suite::Thm43 {
                cfg.norm = norm.clone();
            }
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let reports = configs.iter().map(|cfg| run_with(cfg, width)).collect::<Result<Vec<_>, Error>>()?;
    let violated = reports.iter().any(|r| r.has_violations());
    let text = if reports.len() == 1 {
        reports[0].to_canonical_json()
    } else {
        serde_json::to_string_pretty(&reports).expect("reports serialize")
    };
    emit(&text, a.output.out.as_deref(), a.output.sidecar)?;
    Ok(if violated { 1 } else { 0 })
}

fn build_problem(a: &ProblemArgs) -> Result<SearchProblem, Error> {
    let mut p = SearchProblem::uniform(a.target, a.atoms);
    p.exponents = a.exponents.clone();
    p.norm = a.norm.as_deref().map(parse_norm).transpose()?;
    p.bound = a.bound;
    Ok(p)
}

fn parse_norm(arg: &str) -> Result<RiNorm, Error> {
    match arg.strip_prefix('@') {
        Some(path) => RiNorm::from_json(&read(Path::new(path))?),
        None => RiNorm::from_json(arg),
    }
}

fn parse_range(s: &str) -> Result<(BigRational, BigRational), Error> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| Error::InvalidConfig(format!("range `{s}` is not lo,hi")))?;
    Ok((rearrange_lab::scalar::parse_rational(lo.trim())?, rearrange_lab::scalar::parse_rational(hi.trim())?))
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<(Instance, Mode), Error> {
    Instance::from_json(&read(path)?)
}

fn rearrange_value<T: Scalar>(inst: &Instance, name: &str) -> Result<Value, Error> {
    let space = inst.space::<T>()?;
    Ok(profile_to_value(&decreasing_rearrangement(&inst.function(&space, name)?)))
}

fn decompose_value<T: Scalar>(inst: &Instance, name: &str) -> Result<Value, Error> {
    let space = inst.space::<T>()?;
    Ok(blocks_to_value(&zero_mean_decompose(&inst.function(&space, name)?)?))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn emit(text: &str, out: Option<&Path>, sidecar: bool) -> Result<(), Error> {
    let body = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match out {
        None => print!("{body}"),
        Some(path) => {
            let write = |p: &Path, s: &str| std::fs::write(p, s).map_err(|e| Error::Malformed(format!("{}: {e}", p.display())));
            write(path, &body)?;
            if sidecar {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                let mut meta = path.as_os_str().to_owned();
                meta.push(".meta.json");
                let doc = serde_json::json!({ "timestamp": secs.to_string(), "output": path.display().to_string() });
                write(Path::new(&meta), &pretty(&doc))?;
            }
        }
    }
    Ok(())
}
