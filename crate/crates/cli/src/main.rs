mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gsbench::error::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config: {0}")]
    TomlEmit(#[from] toml::ser::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use gsbench::error::Error as E;
        match self {
            CliError::Core(E::BudgetZero) => 4,
            CliError::Core(E::Evaluation(_) | E::Linalg(_) | E::BudgetTooSmall(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gsbench", version, about = "Fixed-budget ground-state benchmarks and protocol search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact reference energies.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Run one solver protocol under a budget.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Frozen high-accuracy DMRG references.
    #[command(subcommand)]
    Reference(ReferenceCmd),
    /// Mutate-score-archive protocol search.
    #[command(subcommand)]
    Campaign(CampaignCmd),
    /// CSV/JSON artifacts from logs, traces and MI matrices.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Subcommand)]
enum OracleCmd {
    /// Exact diagonalization (dense or Lanczos).
    Ed(ProblemArgs),
    /// Free-fermion closed form for XX and transverse-field Ising chains.
    Ff(ProblemArgs),
}

#[derive(Debug, Subcommand)]
enum BenchCmd {
    Vqe(BenchArgs),
    Dmrg {
        #[command(flatten)]
        args: BenchArgs,
        /// Default protocol when no file is given.
        #[arg(long, value_enum, default_value = "baseline")]
        preset: DmrgPreset,
        /// Also write the mutual-information matrix.
        #[arg(long)]
        mi: bool,
    },
    Projector {
        #[command(flatten)]
        args: BenchArgs,
        #[arg(long)]
        lambda: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum DmrgPreset {
    Baseline,
    Best,
}

#[derive(Debug, Subcommand)]
enum ReferenceCmd {
    Make {
        #[command(flatten)]
        problem: ProblemArgs,
        /// DMRG protocol (TOML); the last stage must be two-site.
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Bundles go to `<root>/<fingerprint>/`.
        #[arg(long, default_value = "references")]
        root: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum CampaignCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCmd {
    /// Running best, scores and acceptance counts from a campaign log.
    Campaign {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Block energies with the production region and their live score.
    Trace {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = gsbench::projector::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entrywise absolute error between two MI matrices.
    Mi {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Named chain: xxx, xxz, tfim or xx.
    #[arg(long, conflicts_with_all = ["couplings", "hamiltonian"])]
    chain: Option<String>,
    /// jx,jy,jz,hx,hz
    #[arg(long, value_delimiter = ',', num_args = 5, conflicts_with = "hamiltonian")]
    couplings: Option<Vec<f64>>,
    #[arg(long, short = 'L')]
    length: Option<usize>,
    /// Pauli-sum Hamiltonian file.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
}

impl ProblemArgs {
    fn spec(&self) -> config::ProblemSpec {
        config::ProblemSpec {
            chain: self.chain.clone(),
            couplings: self.couplings.as_ref().map(|c| [c[0], c[1], c[2], c[3], c[4]]),
            length: self.length,
            hamiltonian_file: self.hamiltonian.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    #[arg(long, conflicts_with = "budget_quanta")]
    budget_seconds: Option<f64>,
    /// Deterministic work units (evaluations, local updates, walker-steps).
    #[arg(long)]
    budget_quanta: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> Option<gsbench::budget::Budget> {
        use gsbench::budget::Budget;
        self.budget_seconds.map(Budget::WallTime).or(self.budget_quanta.map(Budget::Quanta))
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Protocol file (TOML) for this family; defaults to a built-in preset.
    #[arg(long)]
    protocol: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for trace.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Oracle(OracleCmd::Ed(p)) => commands::oracle_ed(&p.spec()),
        Command::Oracle(OracleCmd::Ff(p)) => commands::oracle_ff(&p.spec()),
        Command::Bench(BenchCmd::Vqe(a)) => commands::bench_vqe(&a),
        Command::Bench(BenchCmd::Dmrg { args, preset, mi }) => {
            commands::bench_dmrg(&args, matches!(preset, DmrgPreset::Best), mi)
        }
        Command::Bench(BenchCmd::Projector { args, lambda }) => commands::bench_projector(&args, lambda),
        Command::Reference(ReferenceCmd::Make { problem, protocol, budget, root }) => {
            commands::reference_make(&problem.spec(), protocol.as_deref(), budget.budget(), &root)
        }
        Command::Campaign(CampaignCmd::Run { config, seed, budget, lambda, iterations, out }) => {
            let overrides = commands::CampaignOverrides { seed, budget: budget.budget(), lambda, iterations, out };
            commands::campaign_run(&config, overrides)
        }
        Command::Report(ReportCmd::Campaign { log, out }) => commands::report_campaign(&log, &out),
        Command::Report(ReportCmd::Trace { trace, lambda, out }) => commands::report_trace(&trace, lambda, &out),
        Command::Report(ReportCmd::Mi { candidate, reference, out }) => commands::report_mi(&candidate, &reference, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
