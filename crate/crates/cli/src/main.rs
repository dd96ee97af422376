//! `ccm`: command-line front end for the kicked chiral clock chain.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use ccm_core::{KickVariant, TritString};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ccm", version, about = "Kicked Z3 chiral clock chains: trajectories, spectra and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write its observables as CSV.
    Simulate(SimulateArgs),
    /// Diagonalize the cycle unitary and report quasienergy statistics as JSON.
    Spectrum(SpectrumArgs),
    /// Run an ensemble described by a JSON sweep config.
    Sweep(SweepArgs),
    /// Convert cross-Kerr phases to clock couplings, or back with --inverse.
    MapCk(MapCkArgs),
    /// Fourier transform a stored series.
    Fft(FftArgs),
    /// Print the trit strings of an initial-state family.
    States(StatesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Subspace,
}

impl From<VariantArg> for KickVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => KickVariant::Standard,
            VariantArg::Subspace => KickVariant::Subspace,
        }
    }
}

/// Model selection shared by `simulate` and `spectrum`; flags override the config file.
#[derive(Args)]
struct ModelArgs {
    /// JSON file with any of: n_sites, g, kick_variant, disorder, instance, params.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chain length.
    #[arg(long = "n")]
    n_sites: Option<usize>,
    /// Kick strength in [0, 1].
    #[arg(long)]
    g: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Disorder seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Disorder instance (PRNG stream).
    #[arg(long)]
    instance: Option<u64>,
    /// Explicit chain parameters (JSON), used instead of a disorder draw.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial trit string; defaults to all zeros.
    #[arg(long)]
    initial: Option<TritString>,
    #[arg(long)]
    cycles: Option<usize>,
    /// Comma-separated probes: populations, magnetization, autocorrelator, chi_ea.
    #[arg(long, value_delimiter = ',')]
    probes: Option<Vec<String>>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Keep the full quasienergy list even for long chains.
    #[arg(long)]
    full: bool,
    /// Largest chain to diagonalize.
    #[arg(long, default_value_t = ccm_core::spectral::DEFAULT_ED_CAP)]
    cap: usize,
    /// Add the perfect-kick eigenvector check to the report.
    #[arg(long)]
    cat_check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the disorder seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the number of worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct MapCkArgs {
    #[arg(long, allow_hyphen_values = true)]
    theta11: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta12: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta21: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta22: Option<f64>,
    /// JSON file with the four angles (forward) or a mapping (with --inverse).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Read clock couplings and recover the cross-Kerr phases.
    #[arg(long)]
    inverse: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FftArgs {
    /// Trajectory CSV, or a plain file with one number per line.
    input: PathBuf,
    /// Site label to select from a trajectory CSV.
    #[arg(long)]
    site: Option<String>,
    /// Observable to select from a trajectory CSV.
    #[arg(long, default_value = "magnetization")]
    observable: String,
    /// Keep the t = 0 sample.
    #[arg(long)]
    include_initial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Fm,
    Af,
    Random,
}

#[derive(Args)]
struct StatesArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long = "n")]
    n_sites: usize,
    /// Number of random strings.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit a JSON family object instead of one string per line.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::MapCk(a) => commands::map_ck(a),
        Command::Fft(a) => commands::fft(a),
        Command::States(a) => commands::states(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ccm: {e}");
            ExitCode::from(e.code())
        }
    }
}
