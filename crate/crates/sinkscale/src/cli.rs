//! The `sinkscale` command line.
//!
//! | Exit code | Meaning |
//! |-----------|---------|
//! | 0 | success: `scale` converged, `match` found a perfect matching likely, `verify` found no violation |
//! | 1 | input error: bad flags, unreadable or malformed files, invalid instances |
//! | 2 | `scale` exhausted its iteration budget |
//! | 3 | `match` reports the largest matching below `n(1 − ε)` |
//! | 4 | `verify` found a violated inequality |
//!
//! With `--json`, `scale` and `match` print a JSON document on stdout
//! instead of a text summary; `verify` always prints JSON. Every JSON
//! document carries `"schema": 1`. `--quiet` suppresses stdout output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{validate_instance, TargetVectors};
use crate::io::{read_edge_list, read_matrix_market, read_targets, write_trace_csv};
use crate::matching::{distinguish, Verdict};
use crate::oracles::max_matching_exact;
use crate::sinkhorn::{
    certify_potential, run, Metric, Outcome, PotentialCertificate, StoppingRule,
};
use crate::verify::{run_sweep, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_NO_PERFECT_MATCHING: i32 = 3;
pub const EXIT_VIOLATIONS: i32 = 4;

/// Version of every JSON document written by the tool.
pub const JSON_SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "sinkscale",
    version,
    about = "Sinkhorn-Knopp matrix scaling with convergence certificates"
)]
pub struct Cli {
    /// Seed for all randomness (ChaCha8 via `seed_from_u64`).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print nothing on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print a JSON document instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale a matrix to prescribed row and column sums.
    Scale(ScaleArgs),
    /// Decide whether a bipartite graph is likely to have a perfect matching.
    Match(MatchArgs),
    /// Check the KL lower bounds on random distribution pairs.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    L1,
    L2,
    Kl,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::L1 => Metric::L1,
            MetricArg::L2 => Metric::L2,
            MetricArg::Kl => Metric::KlMarginal,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Matrix Market coordinate file.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Row and column target files, one number per line.
    #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"], required_unless_present = "uniform", conflicts_with = "uniform")]
    pub targets: Option<Vec<PathBuf>>,
    /// All targets equal to 1 (square matrices only).
    #[arg(long)]
    pub uniform: bool,
    /// Error measured by the stopping rule.
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// Stopping threshold for the chosen metric.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
    /// KL level used to size the iteration budget (default: derived from the rule).
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Explicit iteration budget, overriding the derived one.
    #[arg(long)]
    pub max_iters: Option<u64>,
    /// A feasible scaling of the matrix; enables the potential certificate.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    /// Trace CSV output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Scalers JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Edge list: header `n_left n_right`, then 1-based `left right` pairs.
    #[arg(long)]
    pub graph: PathBuf,
    /// Accept when the `l1` marginal error is at most `n * eps`.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
    /// Also compute the exact maximum matching and report agreement.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Number of Dirichlet pairs; a quarter as many adversarial pairs are added.
    #[arg(long, default_value_t = 100_000)]
    pub pairs: usize,
    /// Comma-separated theta values for the generalized Pinsker bound.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.1, 0.5, 1.0, 2.0, 10.0])]
    pub theta: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ScaleReport<'a> {
    schema: u32,
    row_scaler: &'a [f64],
    col_scaler: &'a [f64],
    /// Iteration index `t` of the returned iterate.
    iterations: u64,
    half_steps: usize,
    max_iters: u64,
    outcome: Outcome,
    certificate: Option<PotentialCertificate>,
}

#[derive(Debug, Serialize)]
struct MatchReport {
    schema: u32,
    verdict: &'static str,
    bound: Option<f64>,
    iterations: u64,
    budget: u64,
    err1: Option<f64>,
    matching_lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_agrees: Option<bool>,
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout and succeed; usage errors are input errors
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Runs a parsed command, writing reports to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Scale(args) => cmd_scale(cli, args, out),
        Command::Match(args) => cmd_match(cli, args, out),
        Command::Verify(args) => cmd_verify(cli, args, out),
    }
}

fn check_output_path(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        if !dir.is_dir() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("output directory {} does not exist", dir.display()),
            )));
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, mut w: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

pub fn cmd_scale(cli: &Cli, args: &ScaleArgs, out: &mut dyn Write) -> Result<i32> {
    for p in args.trace.iter().chain(&args.out) {
        check_output_path(p)?;
    }
    let matrix = read_matrix_market(&args.matrix)?;
    let targets = match &args.targets {
        Some(files) => TargetVectors::new(read_targets(&files[0])?, read_targets(&files[1])?)?,
        None => {
            if matrix.n_rows() != matrix.n_cols() {
                return Err(Error::NotSquare {
                    n_rows: matrix.n_rows(),
                    n_cols: matrix.n_cols(),
                });
            }
            TargetVectors::uniform(matrix.n_rows())
        }
    };
    let witness = args
        .witness
        .as_deref()
        .map(read_matrix_market)
        .transpose()?;
    let inst = validate_instance(matrix, &targets)?;

    let mut rule = StoppingRule::new(args.metric.into(), args.eps);
    if let Some(d) = args.delta {
        rule = rule.with_budget_delta(d);
    }
    if let Some(n) = args.max_iters {
        rule = rule.with_max_iters(n);
    }
    let res = run(&inst, &rule, witness.as_ref())?;
    let certificate = certify_potential(&res.trace, inst.params());

    if let Some(path) = &args.trace {
        write_trace_csv(
            &res.trace,
            std::io::BufWriter::new(std::fs::File::create(path)?),
        )?;
    }
    let report = ScaleReport {
        schema: JSON_SCHEMA,
        row_scaler: res.state.row_scaler(),
        col_scaler: res.state.col_scaler(),
        iterations: res.state.t(),
        half_steps: res.trace.len(),
        max_iters: res.max_iters,
        outcome: res.outcome,
        certificate: certificate.clone(),
    };
    if let Some(path) = &args.out {
        write_json(&report, std::fs::File::create(path)?)?;
    }
    if !cli.quiet {
        if cli.json {
            write_json(&report, &mut *out)?;
        } else {
            match res.outcome {
                Outcome::Converged { t, phase, value } => writeln!(
                    out,
                    "converged at t={t} ({}) with {:?} error {value:e}",
                    phase.label(),
                    rule.metric
                )?,
                Outcome::BudgetExhausted {
                    max_iters,
                    best,
                    best_t,
                    best_phase,
                } => writeln!(
                    out,
                    "budget of {max_iters} iterations exhausted; best {:?} error {best:e} at t={best_t} ({})",
                    rule.metric,
                    best_phase.label()
                )?,
            }
            if let Some(c) = &certificate {
                writeln!(
                    out,
                    "potential certificate {}: D(Z, A(0)) = {:e} <= {:e}, max drop residual {:e}",
                    if c.holds() { "holds" } else { "FAILS" },
                    c.initial_potential,
                    c.initial_bound,
                    c.max_drop_residual
                )?;
            }
        }
    }
    Ok(if res.outcome.converged() {
        EXIT_OK
    } else {
        EXIT_EXHAUSTED
    })
}

pub fn cmd_match(cli: &Cli, args: &MatchArgs, out: &mut dyn Write) -> Result<i32> {
    let g = read_edge_list(&args.graph)?;
    let v = distinguish(&g, args.eps)?;
    let n = g.n_left();
    let positive = v.verdict == Verdict::PerfectMatchingLikely;
    let oracle_size = args.oracle.then(|| max_matching_exact(&g));
    // positive verdicts promise ceil(n(1 - eps)); negative ones rule out a perfect matching
    let oracle_agrees = oracle_size.map(|k| {
        if positive {
            k as f64 >= (n as f64 * (1.0 - args.eps)).ceil()
        } else {
            k < n
        }
    });
    let report = MatchReport {
        schema: JSON_SCHEMA,
        verdict: if positive {
            "perfect_matching_likely"
        } else {
            "max_matching_below"
        },
        bound: match v.verdict {
            Verdict::MaxMatchingBelow { bound } => Some(bound),
            Verdict::PerfectMatchingLikely => None,
        },
        iterations: v.iterations_used,
        budget: v.budget,
        err1: v.achieved_error1,
        matching_lower_bound: v.certificate.map(|c| c.matching_lower_bound),
        oracle_size,
        oracle_agrees,
    };
    if oracle_agrees == Some(false) {
        eprintln!("warning: verdict disagrees with the exact maximum matching");
    }
    if !cli.quiet {
        if cli.json {
            write_json(&report, &mut *out)?;
        } else {
            match v.verdict {
                Verdict::PerfectMatchingLikely => writeln!(
                    out,
                    "perfect matching likely (accepted at t={} of {})",
                    v.iterations_used, v.budget
                )?,
                Verdict::MaxMatchingBelow { bound } => {
                    writeln!(out, "largest matching is below {bound}")?
                }
            }
            if let Some(k) = oracle_size {
                writeln!(out, "exact maximum matching: {k}")?;
            }
        }
    }
    Ok(if positive {
        EXIT_OK
    } else {
        EXIT_NO_PERFECT_MATCHING
    })
}

pub fn cmd_verify(cli: &Cli, args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let report = run_sweep(&SweepConfig::new(args.pairs, args.theta.clone(), cli.seed))?;
    if !cli.quiet {
        write_json(&report, &mut *out)?;
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}
