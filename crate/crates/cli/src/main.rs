//! `smoothcount`: command-line front-end. Every invocation prints one JSON document on
//! standard output. Exit codes: 0 success, 1 numerical failure, 2 certification failure,
//! 3 work limit, 4 input error.

mod commands;
mod json;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smoothcount::zerofree::Degree;

#[derive(Parser, Debug)]
#[command(name = "smoothcount", version, about = "Smoothed counting of 0-1 solutions of linear systems")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Relative error target.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Certificate shrink parameter; chosen automatically when absent.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Input JSON file; standard input when absent or `-`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Maximum number of enumerated terms.
    #[arg(long, global = true, default_value_t = smoothcount::interpolation::DEFAULT_WORK_LIMIT)]
    pub work_limit: u128,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Seed for `random` instance generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ProbArg {
    /// Uniform probability used when the instance has no "p" field.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Zero-free polydisc certificate at x = p/(1 − p).
    Check(ProbArg),
    /// Weight selection.
    #[command(subcommand)]
    Gamma(GammaCommand),
    /// Smoothed expectation.
    Eval {
        #[command(flatten)]
        prob: ProbArg,
        /// Geometric variables P(ξ = k) = (1 − p)pᵏ instead of Bernoulli.
        #[arg(long)]
        geometric: bool,
        /// Evaluate without a certificate (no error guarantee).
        #[arg(long)]
        force: bool,
    },
    /// Conditional expectation with some variables fixed.
    Cond {
        #[command(flatten)]
        prob: ProbArg,
        /// Fixing `j=bit`; repeatable.
        #[arg(long = "fix", value_parser = parse_fix)]
        fix: Vec<(usize, bool)>,
        #[arg(long)]
        force: bool,
    },
    /// Derandomized rounding.
    Round {
        #[command(flatten)]
        prob: ProbArg,
        /// Variable order, comma separated.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        #[arg(long)]
        force: bool,
    },
    /// Hypergraph instances.
    #[command(subcommand)]
    Hyper(HyperCommand),
    /// Ising model translation and checks.
    #[command(subcommand)]
    Ising(IsingCommand),
    /// Maximum-entropy marginals and counting bounds.
    Maxent {
        /// Solver tolerance on ‖Ap − b‖∞.
        #[arg(long, default_value_t = smoothcount::maxent::DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Exhaustive reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Seeded random instance (uses --seed).
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Nonzeros per column, at most.
        #[arg(long, default_value_t = 3)]
        sparsity: usize,
        #[arg(long)]
        nonnegative: bool,
        /// Shrink p until certified with at least this δ.
        #[arg(long)]
        certified: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GammaCommand {
    /// Largest t = γk for a k-uniform Δ-regular hypergraph.
    Uniform {
        #[arg(long)]
        k: usize,
        /// Vertex degree, or `inf`.
        #[arg(long = "Delta", alias = "degree")]
        degree: Degree,
    },
    /// Largest γ in the matching regime p = ω/Δ.
    Matching {
        #[arg(long)]
        k: usize,
        #[arg(long = "Delta", alias = "degree")]
        degree: usize,
        #[arg(long)]
        omega: f64,
    },
    /// Weights 1/(c·rᵢ) for a sparse system read from --input.
    Sparse,
}

#[derive(Args, Debug, Clone)]
pub struct HyperArgs {
    /// Fixed weight instead of the certified automatic choice.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Skip uniformity/regularity checks; requires --gamma and --p.
    #[arg(long)]
    pub general: bool,
    /// Edge probability for --general.
    #[arg(long)]
    pub p: Option<f64>,
    /// Include the generated instance in the output.
    #[arg(long)]
    pub emit: bool,
}

#[derive(Subcommand, Debug)]
pub enum HyperCommand {
    /// Perfect matchings (p = 1/Δ).
    Perfect(HyperArgs),
    /// Matchings with p = ω/Δ.
    Matching {
        #[command(flatten)]
        args: HyperArgs,
        #[arg(long)]
        omega: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum IsingCommand {
    /// Instance (with p) to Ising couplings, field and log constant.
    To(ProbArg),
    /// Ising couplings to an instance with γ = 1, β = 0.
    From,
    /// Column sums Σ|g| against 1 − δ.
    Check,
    /// Exhaustive spin sum.
    Bruteforce,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// P(z) by exhaustive summation; z defaults to p/(1 − p).
    P {
        #[command(flatten)]
        prob: ProbArg,
        /// JSON array of [re, im] pairs.
        #[arg(long)]
        z: Option<String>,
    },
    /// Exact expectation.
    Expect(ProbArg),
    /// Number of exact 0-1 solutions.
    Count {
        #[arg(long, default_value_t = smoothcount::oracle::DEFAULT_COUNT_TOLERANCE)]
        tolerance: f64,
    },
    /// Σ over σ ∈ {−1,1}^m of Πⱼ(1 + zⱼ exp{iΣαᵢⱼσᵢ}); input {"a": [[...]], "z": [[re, im], ...]}.
    Prop31,
}

fn parse_fix(s: &str) -> Result<(usize, bool), String> {
    let (j, b) = s.split_once('=').ok_or_else(|| format!("expected j=bit, got {s:?}"))?;
    let j = j.trim().parse().map_err(|e| format!("bad index in {s:?}: {e}"))?;
    let b = match b.trim() {
        "0" => false,
        "1" => true,
        other => return Err(format!("bit must be 0 or 1, got {other:?}")),
    };
    Ok((j, b))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads.max(1)).build_global() {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(1);
    }
    let (doc, code) = match commands::run(&cli) {
        Ok(doc) => (doc, 0),
        Err(f) => {
            eprintln!("error: {}", f.message);
            (f.document(), f.code)
        }
    };
    print!("{}", json::render(&doc));
    ExitCode::from(code)
}
