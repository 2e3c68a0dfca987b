//! Command-line front end for DI codes.
//!
//! Every JSON artifact carries `tool_version`, the full `config` and the
//! `seed`, so re-running with the embedded config reproduces it exactly.
//! Exit codes: 0 success, 1 validation or I/O error (including failed
//! `verify` criteria), 2 resource budget exceeded.

pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use di_codes::capacity::{bsc_capacity_curve, di_capacity};
use di_codes::channel::{reduce, Dmc};
use di_codes::discretization::{entropy_curve, DiscretizedChannel};
use di_codes::dmc_codec::{build_codebook, simulate_errors, BuildConfig, DmcCodebook, Mode, SimReport, DEFAULT_MAX_CODEWORDS};
use di_codes::gauss_codec::{build_gauss_codebook, simulate_gauss_errors, GaussBuildConfig, GaussCodebook, DEFAULT_MEMORY_BUDGET};
use di_codes::VERSION;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20240101;

#[derive(Debug, Parser)]
#[command(name = "di-codes", version, about = "Deterministic identification codes for DMCs and the Gaussian channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// DI capacity of a DMC.
    Capacity(CapacityArgs),
    /// Merge identical channel rows.
    Reduce(ChannelArgs),
    /// BSC capacity as a function of the weight constraint (CSV).
    SweepBsc(SweepArgs),
    /// Build a type-class codebook for a DMC.
    CodebookDmc(CodebookDmcArgs),
    /// Monte Carlo error estimates for a DMC codebook.
    SimulateDmc(SimulateDmcArgs),
    /// Build a saturated sphere-packing codebook.
    CodebookGauss(CodebookGaussArgs),
    /// Monte Carlo error estimates for a Gaussian codebook.
    SimulateGauss(SimulateGaussArgs),
    /// Quantise the Gaussian channel into a DMC.
    Discretize(DiscretizeArgs),
    /// Run the acceptance suite and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ChannelArgs {
    /// Channel JSON: {"input_size","output_size","matrix","cost","constraint"}.
    #[arg(long)]
    pub channel: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CapacityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub io: ChannelArgs,
    /// Override the channel's cost constraint.
    #[arg(long)]
    pub constraint: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub crossover: f64,
    /// start:stop:step
    #[arg(long, default_value = "0:1:0.01")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CodebookDmcArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub rate: f64,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value = "faithful")]
    pub mode: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Required gap between H(base type) and the rate; default 3θ(ε).
    #[arg(long)]
    pub backoff: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_CODEWORDS)]
    pub max_codewords: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateDmcArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Codebook JSON, bare or as emitted by `codebook-dmc`.
    #[arg(long)]
    pub codebook: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 64)]
    pub pair_budget: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write one CSV row `n,pe1_max,pe2_max,...`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CodebookGaussArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub power: f64,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub probe_budget: u64,
    #[arg(long)]
    pub max_centers: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET)]
    pub memory_budget: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateGaussArgs {
    #[arg(long)]
    pub codebook: PathBuf,
    #[arg(long)]
    pub sigma2: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 64)]
    pub pair_budget: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DiscretizeArgs {
    #[arg(long)]
    pub power: f64,
    #[arg(long)]
    pub sigma2: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long)]
    pub levels: usize,
    /// Output clip level; default J + ceil(4σ/Δ).
    #[arg(long)]
    pub levels_out: Option<usize>,
    /// Channel artifact, consumable by `capacity --channel`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV `step,H_bits,H_plus_log2_step`, halving the step each row with
    /// the grid span fixed.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub curve_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Comma-separated criterion ids; all when absent.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] di_codes::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid {field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("{0} acceptance criteria failed")]
    Failed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(di_codes::Error::Budget { .. }) => 2,
            _ => 1,
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        field,
        message: message.into(),
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|err| CliError::Io {
        path: path.to_path_buf(),
        message: err.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|err| CliError::Io {
        path: path.to_path_buf(),
        message: format!("malformed JSON: {err}"),
    })
}

/// Read `T` either bare or from the `key` field of an artifact.
fn read_embedded<T: serde::de::DeserializeOwned>(path: &Path, key: &str) -> Result<T, CliError> {
    let mut v = read_json(path)?;
    if let Some(inner) = v.get_mut(key) {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|err| CliError::Io {
        path: path.to_path_buf(),
        message: err.to_string(),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|err| CliError::Io {
            path: p.to_path_buf(),
            message: err.to_string(),
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn artifact<C: Serialize>(command: &str, config: &C, seed: Option<u64>, body: Value) -> String {
    let mut doc = json!({
        "tool_version": VERSION,
        "command": command,
        "config": config,
        "seed": seed,
    });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    serde_json::to_string_pretty(&doc).expect("artifact serialises")
}

/// Parse `start:stop:step` into an evenly spaced grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| invalid("grid", format!("expected start:stop:step, got {spec:?}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(invalid("grid", format!("expected start:stop:step, got {spec:?}")));
    };
    if !(step > 0.0) || stop < start {
        return Err(invalid("grid", "need step > 0 and stop >= start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn csv_report(path: &Path, n: usize, report: &SimReport) -> Result<(), CliError> {
    let text = format!("{}\n{}\n", SimReport::CSV_HEADER, report.csv_row(n));
    emit(Some(path), &text)
}

/// Execute one parsed command.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Capacity(a) => {
            let mut ch: Dmc = read_embedded(&a.io.channel, "channel")?;
            if let Some(c) = a.constraint {
                ch = ch.with_constraint(c)?;
            }
            let result = di_capacity(&ch)?;
            emit(
                a.io.out.as_deref(),
                &artifact("capacity", &a, None, json!({"notes": ch.notes(), "result": result})),
            )
        }
        Command::Reduce(a) => {
            let ch: Dmc = read_embedded(&a.channel, "channel")?;
            let (reduced, map) = reduce(&ch);
            emit(
                a.out.as_deref(),
                &artifact("reduce", &a, None, json!({"channel": reduced, "map": map})),
            )
        }
        Command::SweepBsc(a) => {
            let grid = parse_grid(&a.grid)?;
            let curve = bsc_capacity_curve(a.crossover, &grid)?;
            let mut text = String::from("A,capacity_bits\n");
            for (x, c) in curve {
                text.push_str(&format!("{x},{c}\n"));
            }
            emit(a.out.as_deref(), text.trim_end())
        }
        Command::CodebookDmc(a) => {
            let ch: Dmc = read_embedded(&a.channel, "channel")?;
            let mode: Mode = a.mode.parse().map_err(|_| invalid("mode", &a.mode))?;
            let cfg = BuildConfig {
                n: a.n,
                rate: a.rate,
                epsilon: a.epsilon,
                mode,
                seed: a.seed,
                backoff: a.backoff,
                gamma: a.gamma,
                max_codewords: a.max_codewords,
            };
            let (book, report) = build_codebook(&ch, &cfg)?;
            emit(
                a.out.as_deref(),
                &artifact("codebook-dmc", &a, Some(a.seed), json!({"codebook": book, "report": report})),
            )
        }
        Command::SimulateDmc(a) => {
            let ch: Dmc = read_embedded(&a.channel, "channel")?;
            let book: DmcCodebook = read_embedded(&a.codebook, "codebook")?;
            let report = simulate_errors(&book, &ch, a.delta, a.trials, a.pair_budget, a.seed)?;
            if let Some(p) = &a.csv {
                csv_report(p, book.n, &report)?;
            }
            emit(
                a.out.as_deref(),
                &artifact("simulate-dmc", &a, Some(a.seed), json!({"report": report})),
            )
        }
        Command::CodebookGauss(a) => {
            let cfg = GaussBuildConfig {
                n: a.n,
                power: a.power,
                epsilon: a.epsilon,
                seed: a.seed,
                probe_budget: a.probe_budget,
                max_centers: a.max_centers,
                memory_budget: a.memory_budget,
                verification_probes: None,
            };
            let (book, cert) = build_gauss_codebook(&cfg)?;
            emit(
                a.out.as_deref(),
                &artifact("codebook-gauss", &a, Some(a.seed), json!({"codebook": book, "certificate": cert})),
            )
        }
        Command::SimulateGauss(a) => {
            let book: GaussCodebook = read_embedded(&a.codebook, "codebook")?;
            let report = simulate_gauss_errors(&book, a.sigma2, a.delta, a.trials, a.pair_budget, a.seed)?;
            if let Some(p) = &a.csv {
                csv_report(p, book.n, &report)?;
            }
            emit(
                a.out.as_deref(),
                &artifact("simulate-gauss", &a, Some(a.seed), json!({"report": report})),
            )
        }
        Command::Discretize(a) => {
            let dc = DiscretizedChannel::new(a.power, a.sigma2, a.step, a.levels, a.levels_out)?;
            let ch = dc.to_dmc()?;
            if let Some(p) = &a.csv {
                let span = a.step * a.levels as f64;
                let steps: Vec<f64> = (0..a.curve_points.max(1))
                    .map(|i| a.step / (1u64 << i.min(62)) as f64)
                    .collect();
                let mut text = String::from("step,H_bits,H_plus_log2_step\n");
                for pt in entropy_curve(a.power, span, &steps)? {
                    text.push_str(&format!("{},{},{}\n", pt.step, pt.h_bits, pt.h_plus_log2_step));
                }
                emit(Some(p), &text)?;
            }
            emit(
                a.out.as_deref(),
                &artifact(
                    "discretize",
                    &a,
                    None,
                    json!({
                        "channel": ch,
                        "grid": dc.grid,
                        "input_pmf": dc.input_pmf,
                        "levels_out": dc.levels_out,
                        "second_moment": dc.second_moment(),
                    }),
                ),
            )
        }
        Command::Verify(a) => {
            let outcomes = verify::run_all(&a.only);
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} passed, {failed} failed", outcomes.len() - failed);
            if failed > 0 {
                Err(CliError::Failed(failed))
            } else {
                Ok(())
            }
        }
    }
}

/// Configure the worker pool from `DI_CODES_THREADS`, parse `argv` and run.
/// Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var("DI_CODES_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: invalid DI_CODES_THREADS: {v:?}");
                return 1;
            }
        }
    }
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
