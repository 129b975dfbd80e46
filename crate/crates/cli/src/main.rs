use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use majorant::corpus::STANDARD_SEED;
use majorant::decompose::{decompose_k, decompose_sequence};
use majorant::kfunc::{dyadic_t_grid, k_curve, to_csv};
use majorant::majorize::{left_majorizes, lift_left, lift_right, right_majorizes, Side};
use majorant::matrix::Matrix;
use majorant::numeric::{format_rational, parse_rational, rat_to_f64};
use majorant::schurhorn::{birkhoff, compose, khintchine_witness, schur_horn_matrix, tchain};
use majorant::spaces::{boyd_probe, dilation_norm_probe, dyadic_dilations, monotonicity_probe, SpaceSpec};
use majorant::transfer::{apply_transfer, build_transfer, calderon_transfer, TransferMap};
use majorant::verify::{run_suite, Suite};
use majorant::{Error, Rational, Real, SeqView, StepFunction};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "majorant", version, about = "Majorization, K-functionals and interpolation constructions on step functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Non-increasing rearrangement of a step function.
    Rearrange {
        #[arg(long = "in")]
        input: String,
    },
    /// Left or right majorization of `f` over `g`, optionally lifting `g` to equal norm.
    Majorize {
        #[arg(long, conflicts_with = "right", required_unless_present = "right")]
        left: bool,
        #[arg(long)]
        right: bool,
        #[arg(long, value_parser = exponent)]
        exp: f64,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Print the lifted function instead of the report.
        #[arg(long)]
        lift: bool,
    },
    /// K-functional of `(L_p, L_q)` at one `t` or along a grid.
    Kfunc {
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_parser = exponent)]
        p: f64,
        #[arg(long, value_parser = exponent)]
        q: f64,
        #[arg(long, value_parser = positive, conflicts_with = "curve")]
        t: Option<f64>,
        #[arg(long)]
        curve: bool,
        /// `lo:hi` for the dyadic grid `2^lo … 2^hi`, or a comma-separated list of points.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
    },
    #[command(subcommand)]
    Transfer(TransferCommand),
    #[command(subcommand)]
    Decompose(DecomposeCommand),
    #[command(subcommand, name = "schur-horn")]
    SchurHorn(SchurHornCommand),
    /// Symmetric matrix whose spectrum and diagonal encode `f^2` and `g^2` on the grid of level `n`.
    Witness {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        level: u32,
    },
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Runs a named property suite.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Emit {
    Json,
    Csv,
}

#[derive(Args)]
struct Pair {
    #[arg(long)]
    f: String,
    #[arg(long)]
    g: String,
}

#[derive(Subcommand)]
enum TransferCommand {
    /// `h` and the transfer map with `T h* = g`.
    Build {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = exponent)]
        p: f64,
    },
    /// Applies a transfer map to a step function.
    Apply {
        #[arg(long)]
        map: String,
        #[arg(long = "in")]
        input: String,
    },
    /// Geometric discretization of the pair followed by the transfer construction.
    Calderon {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = exponent)]
        p: f64,
        #[arg(long, value_parser = positive)]
        d: f64,
    },
}

#[derive(Subcommand)]
enum DecomposeCommand {
    /// `g = h + l` for step functions.
    Function {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = exponent)]
        p: f64,
        #[arg(long, value_parser = exponent)]
        q: f64,
    },
    /// Averaged decomposition of a sequence `v` dominated by `u` (given as `--f u --g v`).
    Sequence {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = exponent)]
        p: f64,
        #[arg(long, value_parser = exponent)]
        q: f64,
    },
}

#[derive(Subcommand)]
enum SchurHornCommand {
    /// T-transform chain from the vector `f` to the vector `g`.
    Tchain(Pair),
    /// Birkhoff certificate of a doubly stochastic matrix (`--in`), or of the chain from `f` to `g`.
    Birkhoff {
        #[arg(long = "in", conflicts_with_all = ["f", "g"])]
        input: Option<String>,
        #[arg(long, requires = "g")]
        f: Option<String>,
        #[arg(long, requires = "f")]
        g: Option<String>,
    },
    /// Symmetric matrix with spectrum `f` and diagonal `g`.
    Matrix(Pair),
}

#[derive(Subcommand)]
enum ProbeCommand {
    Monotone {
        #[arg(long)]
        space: SpaceSpec,
        #[arg(long, value_parser = exponent)]
        exp: f64,
        #[arg(long, conflicts_with = "right", required_unless_present = "right")]
        left: bool,
        #[arg(long)]
        right: bool,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = STANDARD_SEED)]
        seed: u64,
    },
    Dilation {
        #[arg(long)]
        space: SpaceSpec,
        #[arg(long, value_parser = rational)]
        t: Rational,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = STANDARD_SEED)]
        seed: u64,
    },
    Boyd {
        #[arg(long)]
        space: SpaceSpec,
        /// Dilations `2^k` for `0 < |k| ≤ grid`.
        #[arg(long, default_value_t = 4)]
        grid: u32,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = STANDARD_SEED)]
        seed: u64,
    },
}

fn exponent(s: &str) -> Result<f64, String> {
    let x = if s == "inf" {
        f64::INFINITY
    } else {
        parse_rational(s).map(|r| rat_to_f64(&r)).map_err(|e| e.to_string())?
    };
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("exponent must be positive, got {s}"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    exponent(s).and_then(|x| if x.is_finite() { Ok(x) } else { Err("must be finite".into()) })
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Status {
    Ok,
    Violated,
    Error,
}

/// What a command produced: `payload` goes to stdout, `diagnostics` to stderr.
struct CommandResult {
    status: Status,
    payload: Option<Output>,
    diagnostics: String,
}

enum Output {
    Json(Value),
    Text(String),
}

impl CommandResult {
    fn ok(payload: Value) -> Self {
        CommandResult { status: Status::Ok, payload: Some(Output::Json(payload)), diagnostics: String::new() }
    }

    fn judged(holds: bool, payload: Value, what: &str) -> Self {
        if holds {
            CommandResult::ok(payload)
        } else {
            CommandResult { status: Status::Violated, payload: Some(Output::Json(payload)), diagnostics: format!("{what} fails") }
        }
    }

    fn from_error(e: Error) -> Self {
        if e.is_violation() {
            let witness = match &e {
                Error::NotMajorized { witness } => witness.as_ref().map(format_rational),
                Error::HypothesisFailed { witness } => Some(format_rational(witness)),
                _ => None,
            };
            let payload = json!({ "status": "violated", "error": e.to_string(), "witness": witness });
            CommandResult { status: Status::Violated, payload: Some(Output::Json(payload)), diagnostics: e.to_string() }
        } else {
            CommandResult { status: Status::Error, payload: None, diagnostics: e.to_string() }
        }
    }
}

fn read_source(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::InvalidArgument(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{path}: {e}")))
    }
}

fn load<T: DeserializeOwned>(path: &str) -> Result<T, Error> {
    serde_json::from_str(&read_source(path)?).map_err(|e| Error::Parse(format!("{path}: {e}")))
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn side(left: bool) -> Side {
    if left {
        Side::Left
    } else {
        Side::Right
    }
}

fn t_grid(spec: Option<&str>) -> Result<Vec<f64>, Error> {
    let Some(spec) = spec else {
        return Ok(dyadic_t_grid(-10, 9));
    };
    if let Some((lo, hi)) = spec.split_once(':') {
        let parse = |x: &str| x.trim().parse::<i32>().map_err(|e| Error::Parse(format!("grid bound {x:?}: {e}")));
        return Ok(dyadic_t_grid(parse(lo)?, parse(hi)?));
    }
    spec.split(',').map(|x| positive(x.trim()).map_err(Error::Parse)).collect()
}

fn run(command: Command) -> Result<CommandResult, Error> {
    Ok(match command {
        Command::Rearrange { input } => CommandResult::ok(to_json(&load::<StepFunction>(&input)?.rearrange())),
        Command::Majorize { left, exp, f, g, lift, .. } => {
            let (f, g): (StepFunction, StepFunction) = (load(&f)?, load(&g)?);
            if lift {
                let h = if left { lift_left(&f, &g, exp)? } else { lift_right(&f, &g, exp)? };
                CommandResult::ok(to_json(&h))
            } else {
                let report = if left { left_majorizes(&f, &g, exp) } else { right_majorizes(&f, &g, exp) };
                CommandResult::judged(report.holds, to_json(&report), "majorization")
            }
        }
        Command::Kfunc { input, p, q, t, curve: _, grid, emit } => {
            let f: StepFunction = load(&input)?;
            let points = match t {
                Some(t) => vec![t],
                None => t_grid(grid.as_deref())?,
            };
            let estimates = k_curve(&f, p, q, &points)?;
            match (emit, t) {
                (Emit::Csv, _) => CommandResult {
                    status: Status::Ok,
                    payload: Some(Output::Text(to_csv(&estimates))),
                    diagnostics: String::new(),
                },
                (Emit::Json, Some(_)) => CommandResult::ok(to_json(&estimates[0])),
                (Emit::Json, None) => CommandResult::ok(to_json(&estimates)),
            }
        }
        Command::Transfer(TransferCommand::Build { pair, p }) => {
            let (f, g): (StepFunction, StepFunction) = (load(&pair.f)?, load(&pair.g)?);
            CommandResult::ok(to_json(&build_transfer(&f, &g, p)?))
        }
        Command::Transfer(TransferCommand::Apply { map, input }) => {
            let (map, u): (TransferMap, StepFunction) = (load(&map)?, load(&input)?);
            if !map.is_well_formed() {
                return Err(Error::InvalidArgument("transfer map is not well formed".into()));
            }
            CommandResult::ok(to_json(&apply_transfer(&map, &u)))
        }
        Command::Transfer(TransferCommand::Calderon { pair, p, d }) => {
            let (f, g): (StepFunction, StepFunction) = (load(&pair.f)?, load(&pair.g)?);
            CommandResult::ok(to_json(&calderon_transfer(&f, &g, p, d)?))
        }
        Command::Decompose(DecomposeCommand::Function { pair, p, q }) => {
            let (f, g): (StepFunction, StepFunction) = (load(&pair.f)?, load(&pair.g)?);
            CommandResult::ok(to_json(&decompose_k(&f, &g, p, q)?))
        }
        Command::Decompose(DecomposeCommand::Sequence { pair, p, q }) => {
            let (u, v): (Vec<Real>, Vec<Real>) = (load(&pair.f)?, load(&pair.g)?);
            CommandResult::ok(to_json(&decompose_sequence(&SeqView::new(u)?, &SeqView::new(v)?, p, q)?))
        }
        Command::SchurHorn(SchurHornCommand::Tchain(pair)) => {
            let (a, b): (Vec<Real>, Vec<Real>) = (load(&pair.f)?, load(&pair.g)?);
            CommandResult::ok(to_json(&tchain(&a, &b)?))
        }
        Command::SchurHorn(SchurHornCommand::Birkhoff { input, f, g }) => {
            let matrix = match (input, f, g) {
                (Some(path), _, _) => load::<Matrix<Real>>(&path)?,
                (None, Some(f), Some(g)) => {
                    let (a, b): (Vec<Real>, Vec<Real>) = (load(&f)?, load(&g)?);
                    compose(a.len(), &tchain(&a, &b)?)
                }
                _ => return Err(Error::InvalidArgument("give --in, or both --f and --g".into())),
            };
            CommandResult::ok(to_json(&birkhoff(&matrix)?))
        }
        Command::SchurHorn(SchurHornCommand::Matrix(pair)) => {
            let (a, b): (Vec<f64>, Vec<f64>) = (load(&pair.f)?, load(&pair.g)?);
            CommandResult::ok(to_json(&schur_horn_matrix(&a, &b)?))
        }
        Command::Witness { f, g, level } => {
            let (f, g): (StepFunction, StepFunction) = (load(&f)?, load(&g)?);
            CommandResult::ok(to_json(&khintchine_witness(&f, &g, level)?))
        }
        Command::Probe(ProbeCommand::Monotone { space, exp, left, trials, seed, .. }) => {
            CommandResult::ok(to_json(&monotonicity_probe(&space, exp, side(left), trials, seed)?))
        }
        Command::Probe(ProbeCommand::Dilation { space, t, trials, seed }) => {
            let norm = dilation_norm_probe(&space, &t, trials, seed)?;
            CommandResult::ok(json!({ "space": space.to_string(), "t": format_rational(&t), "norm_lower_bound": norm }))
        }
        Command::Probe(ProbeCommand::Boyd { space, grid, trials, seed }) => {
            CommandResult::ok(to_json(&boyd_probe(&space, &dyadic_dilations(grid), trials, seed)?))
        }
        Command::Verify { suite, trials, seed } => {
            let report = run_suite(suite, trials, seed)?;
            CommandResult::judged(report.passed, to_json(&report), &format!("suite {suite}"))
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(cli.command).unwrap_or_else(CommandResult::from_error);
    let mut out = std::io::stdout().lock();
    // A closed pipe downstream is not our failure.
    let _ = match result.payload {
        Some(Output::Json(v)) => writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("values serialize")),
        Some(Output::Text(s)) => write!(out, "{s}"),
        None => Ok(()),
    };
    if !result.diagnostics.is_empty() {
        eprintln!("majorant: {}", result.diagnostics);
    }
    ExitCode::from(match result.status {
        Status::Ok => 0,
        Status::Violated => 1,
        Status::Error => 2,
    })
}
