//! `triphot`: command-line front end for the biphoton qutrit toolkit.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use triphot::Error;

#[derive(Debug, Parser)]
#[command(name = "triphot", version, about = "Biphoton polarization qutrits: plates, coincidences, synthesis")]
pub struct Cli {
    /// Read numeric angle arguments in degrees (output stays in radians).
    #[arg(long, global = true)]
    pub deg: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check closed-form laws, the lift oracle and polarization-degree invariance.
    Verify(VerifyArgs),
    /// Predicted coincidence rate along a phase or plate-angle sweep.
    Sweep(SweepArgs),
    /// Seeded coincidence-counting Monte Carlo.
    Mc(McArgs),
    /// Stokes vector, degree of polarization and correlators of a state.
    Stokes(StokesArgs),
    /// Search plate settings realising a state transition.
    Synth(SynthArgs),
    /// Conventions and trit digit assignment.
    Info,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Points per axis of the closed-form grids.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Random samples for the oracle and invariance suites.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 2000)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlateKind {
    Hwp,
    Qwp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalysisArg {
    None,
    X,
    Y,
}

/// Flags that override fields of the config file.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Source phase.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Plate axis angle.
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<String>,
    /// Plate kind (sets the retardance).
    #[arg(long)]
    pub plate: Option<PlateKind>,
    /// Plate retardance.
    #[arg(long)]
    pub retardance: Option<String>,
    #[arg(long)]
    pub t20: Option<f64>,
    #[arg(long)]
    pub t02: Option<f64>,
    /// Phase jitter sigma.
    #[arg(long)]
    pub jitter: Option<String>,
    /// Pairs per second.
    #[arg(long)]
    pub pair_rate: Option<f64>,
    #[arg(long)]
    pub analysis: Option<AnalysisArg>,
    #[arg(long)]
    pub eta1: Option<f64>,
    #[arg(long)]
    pub eta2: Option<f64>,
    /// Accidental coincidences per second.
    #[arg(long)]
    pub accidental_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: std::path::PathBuf,
    /// Swept parameter: phi or chi.
    #[arg(long)]
    pub param: String,
    /// Start of the range (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<String>,
    /// End of the range (default 2pi for phi, pi for chi).
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    #[arg(long, default_value_t = 181)]
    pub steps: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub config: std::path::PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Simulated time, seconds.
    #[arg(long, default_value_t = 100.0)]
    pub duration: f64,
    /// Bin width, seconds.
    #[arg(long, default_value_t = 1.0)]
    pub bin: f64,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct StokesArgs {
    /// Trit label (psi_plus, minus, ...), Fock label `Nx,Ny`, or three
    /// comma-separated complex amplitudes.
    #[arg(allow_hyphen_values = true)]
    pub state: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Transition `FROM->TO` (also `FROM→TO`); each side is a state spec as
    /// accepted by `stokes`.
    pub problem: String,
    /// Allowed plates, comma-separated: hwp, qwp, free.
    #[arg(long, default_value = "free")]
    pub plates: String,
    /// Number of plates.
    #[arg(long, default_value_t = 1)]
    pub budget: usize,
    /// Fixed source phase preparing the input; must agree with FROM.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Optimize the source phase as an extra parameter.
    #[arg(long)]
    pub optimize_phi: bool,
    /// Grid points per free parameter.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    /// Simplex diameter at which refinement stops.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Verification,
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("TRIPHOT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let deg = cli.deg;
    let result = match cli.command {
        Command::Verify(a) => commands::verify(&a),
        Command::Sweep(a) => commands::sweep(&a, deg),
        Command::Mc(a) => commands::mc(&a, deg),
        Command::Stokes(a) => commands::stokes(&a),
        Command::Synth(a) => commands::synth(&a, deg),
        Command::Info => commands::info(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(3)
        }
    }
}
