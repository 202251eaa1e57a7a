//! Batch interface to the traversal workbench: instance compilers, static
//! checks, ground-energy solvers, path evaluation, and the lemma suite.
//!
//! Exit codes: 0 pass, 1 check failed, 2 input error, 3 resource cap.
//! `QCW_SEED` supplies a default seed and `QCW_JOBS` (or `--jobs`) caps the
//! worker pool.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub exit: u8,
}

impl CliError {
    pub fn schema(message: &str) -> Self {
        CliError { code: "schema", message: message.to_string(), exit: 2 }
    }

    pub fn io(message: &str) -> Self {
        CliError { code: "io", message: message.to_string(), exit: 2 }
    }
}

impl From<qcw_core::Error> for CliError {
    fn from(e: qcw_core::Error) -> Self {
        CliError {
            code: e.code(),
            message: e.to_string(),
            exit: if e.is_resource_cap() { 3 } else { 2 },
        }
    }
}

#[derive(Parser)]
#[command(name = "qcw", version, about = "Commuting-Hamiltonian ground-space traversal workbench")]
struct Cli {
    /// Cap the worker-thread pool (also via QCW_JOBS).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instance compilers.
    #[command(subcommand)]
    Build(BuildCommand),
    /// Static checks (nonzero exit on failure).
    #[command(subcommand)]
    Check(CheckCommand),
    /// Ground-energy computation.
    Ground(GroundArgs),
    /// Traversal paths: build, evaluate, optimize.
    #[command(subcommand)]
    Path(PathCommand),
    /// Inequality suites along a path.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum BuildCommand {
    /// Circuit → unary-clock Hamiltonian (swap-normalizes first).
    C2h {
        #[arg(long)]
        circuit: PathBuf,
        /// Comma-separated witness qubit indices (may be empty).
        #[arg(long, default_value = "")]
        witness_qubits: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bounded-degree Hamiltonian → two commuting layers.
    Layer {
        #[arg(long)]
        ham: PathBuf,
        /// Penalty exponent (r = b + 5).
        #[arg(long)]
        b: f64,
        /// YES threshold of the input (defaults to the file's, else 0).
        #[arg(long)]
        c: Option<f64>,
        /// NO threshold of the input (defaults to the file's, else 1).
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-layer instance → commuting connectivity instance.
    Cgscon {
        #[arg(long)]
        twolayer: PathBuf,
        #[arg(long)]
        m_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Intra-layer commutation.
    Commute {
        #[arg(long)]
        ham: PathBuf,
    },
    /// PSD and unit-norm certificates per term.
    Psd {
        #[arg(long)]
        ham: PathBuf,
    },
    /// Per-qubit degree table and (k, l) summary.
    Degree {
        #[arg(long)]
        ham: PathBuf,
    },
}

#[derive(Args)]
struct GroundArgs {
    #[arg(long)]
    ham: PathBuf,
    /// dense | lanczos
    #[arg(long, default_value = "dense")]
    method: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Defaults to QCW_SEED, else 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum PathCommand {
    /// Emit the intended witness path for an instance.
    Completeness {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        prep: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a path: energies, ε, δ, verdict.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Adversarial search for low-max-energy paths.
    Optimize {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Small-projection, traversal-bound, cross-term, and soundness checks.
    Lemmas {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

fn env_seed() -> u64 {
    std::env::var("QCW_SEED").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
}

fn configure_jobs(flag: Option<usize>) {
    let jobs = flag.or_else(|| std::env::var("QCW_JOBS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_jobs(cli.jobs);
    match cli.command {
        Command::Build(BuildCommand::C2h { circuit, witness_qubits, out }) => {
            commands::build_c2h(&circuit, &witness_qubits, &out)
        }
        Command::Build(BuildCommand::Layer { ham, b, c, s, out }) => {
            commands::build_layer(&ham, b, c, s, &out)
        }
        Command::Build(BuildCommand::Cgscon { twolayer, m_max, out }) => {
            commands::build_cgscon(&twolayer, m_max, &out)
        }
        Command::Check(CheckCommand::Commute { ham }) => commands::check_commute(&ham),
        Command::Check(CheckCommand::Psd { ham }) => commands::check_psd(&ham),
        Command::Check(CheckCommand::Degree { ham }) => commands::check_degree(&ham),
        Command::Ground(args) => commands::ground(
            &args.ham,
            &args.method,
            args.tol,
            args.max_iter,
            args.seed.unwrap_or_else(env_seed),
        ),
        Command::Path(PathCommand::Completeness { instance, prep, out }) => {
            commands::path_completeness(&instance, &prep, &out)
        }
        Command::Path(PathCommand::Eval { instance, path, report }) => {
            commands::path_eval(&instance, &path, &report)
        }
        Command::Path(PathCommand::Optimize { instance, config, report }) => {
            commands::path_optimize(&instance, &config, &report, env_seed())
        }
        Command::Verify(VerifyCommand::Lemmas { instance, path, report }) => {
            commands::verify_lemmas(&instance, &path, &report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let msg = serde_json::json!({"error": {"code": e.code, "message": e.message}});
            eprintln!("{msg}");
            ExitCode::from(e.exit)
        }
    }
}
