use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod settings;

use settings::{DetectorArg, NoiseArg, Preset};

#[derive(Parser)]
#[command(
    name = "ngqkd",
    version,
    about = "Non-Gaussianity and key-rate analysis of entanglement-based QKD links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assess a single (T, nu) point.
    Eval(EvalArgs),
    /// Trace the boundary curves over a transmittance grid.
    Scan(ScanArgs),
    /// Dump the photocount distribution of a Fock state mixed with thermal noise.
    Pmf(PmfArgs),
}

/// Link settings shared by `eval` and `scan`.
#[derive(Args, Debug, Clone, Default)]
pub struct LinkArgs {
    /// Named parameter set reproducing a figure recipe.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Flat key=value file; keys mirror the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    /// Defaults to the detector paired with --noise.
    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,
    /// Detector efficiency.
    #[arg(long)]
    eta: Option<f64>,
    /// Dark-count rate per gate.
    #[arg(long)]
    dark: Option<f64>,
    /// Werner weight of the Bell state.
    #[arg(long)]
    p: Option<f64>,
    /// Fixed thermal-sum cutoff (default: max(50, ceil(40*(nbar+1)))).
    #[arg(long)]
    n_max: Option<usize>,
    /// Largest neglected thermal mass.
    #[arg(long)]
    tail_tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Coupling transmittance.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Mean photon number of the noise.
    #[arg(long)]
    nu: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Explicit comma-separated transmittance grid (overrides --t-min/--t-max/--t-points).
    #[arg(long)]
    t_grid: Option<String>,
    /// Lowest grid transmittance (default 0.02).
    #[arg(long)]
    t_min: Option<f64>,
    /// Highest grid transmittance (default 1.0).
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of evenly spaced grid points (default 96).
    #[arg(long)]
    t_points: Option<usize>,
    /// Comma-separated subset of nongauss,bb84,di.
    #[arg(long)]
    criteria: Option<String>,
    /// Largest noise mean searched.
    #[arg(long)]
    nu_cap: Option<f64>,
    /// Bisection tolerance on nu.
    #[arg(long)]
    tol: Option<f64>,
    /// Skip the single-crossing probe.
    #[arg(long)]
    no_probe: bool,
    /// Worker threads (default 1).
    #[arg(long)]
    workers: Option<usize>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; the manifest goes to <out>.manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PmfArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Incident Fock number.
    #[arg(long)]
    l: Option<usize>,
    /// Thermal mean photon number.
    #[arg(long)]
    nbar: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
    /// text or json.
    #[arg(long)]
    format: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => commands::eval(&args),
        Command::Scan(args) => commands::scan(&args),
        Command::Pmf(args) => commands::pmf(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let doc = serde_json::json!({ "error": format!("{err:#}") });
            eprintln!("{doc}");
            ExitCode::from(2)
        }
    }
}
