//! Command-line laboratory for the thin-film model: evolution runs,
//! initial-datum classification, bound evaluation, and the image
//! filtering pipelines, all driven by flat key = value manifests.

mod bounds;
mod classify;
mod config;
mod images;
mod problem;
mod simulate;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;

const SIMULATE_KEYS: &str = "\
Config keys:
  initial                example1 | example2 | zero | file:<path.tff>
  nx, ny, lx, ly         grid size and extent (initial = zero only)
  p                      example1 | example2 | constant
  p_const                exponent value for p = constant
  k                      example1 | example2 | constant | exponential |
                         power | arctan | table
  k_a, k_b, k_c          schedule parameters (see README for the formulas)
  k_times, k_values      comma separated samples for k = table
  alpha, s               fractional term weight and order
  dt, t_end              step size and final time
  lambda_source          linear source strength (default 0)
  source_implicit        true | false (default false)
  blowup_threshold       sup-norm divergence cutoff (default 1e8)
  snapshot_times         comma separated times to dump TFF1 fields
  stride                 keep every n-th diagnostics row (default 1)
  verbatim_denominator   true | false (default false)";

const CLASSIFY_KEYS: &str = "\
Config keys: the problem keys of simulate (initial, nx/ny/lx/ly, p,
p_const, k, k_a/k_b/k_c, k_times/k_values, alpha, s). Evolution keys are
accepted and ignored so one manifest can drive both commands. Optional:
  d_lower                potential-well depth lower bound";

const BOUNDS_KEYS: &str = "\
Config keys (all optional; a formula whose inputs are missing prints
SKIPPED with the key names):
  p_minus, p_plus        exponent range
  omega_measure          domain area
  lambda1                principal Dirichlet eigenvalue
  b2_sq                  energy-to-mass norm constant
  k0                     coefficient value at t = 0
  j0, f10, u0_norm2_sq   initial energy, half mass, and squared L2 norm
  d_lower                potential-well depth lower bound
  n_dim                  space dimension for the lifespan bound
  c3_tilde, c4_tilde     interpolation constants of the lifespan bound
  kappa_star             coefficient bound over the existence window";

const SHARPEN_KEYS: &str = "\
Config keys:
  input                  PGM path or step_edge
  noise_sigma            flat-region noise for step_edge (default 0.01)
  t_stop                 evolution time (default 0.025)
  dt                     step size (default 5e-4)
  intensity_scale        image-to-field amplitude (default 48)
  blowup_threshold       sup-norm divergence cutoff (default 1e8)";

const ENHANCE_KEYS: &str = "\
Config keys: those of sharpen (t_stop defaults to 0.03 here), plus
  lambda                 linear source strength (default 10)";

const COMPARE_KEYS: &str = "\
Config keys: those of sharpen, plus the comparison filter parameters
  backward_epsilon       fourth-order damping weight (default 1e-3)
  backward_dt            backward diffusion step size (default 1e-3)
  backward_t             backward diffusion stop time (default 0.2)
  shock_dt               shock filter step size (default 0.1)
  shock_t                shock filter stop time (default 0.5)";

#[derive(Parser)]
#[command(
    name = "thinfilm",
    version,
    about = "Numerical laboratory for a thin-film equation with a \
             space and time dependent gradient nonlinearity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the evolution problem and write diagnostics
    #[command(after_help = SIMULATE_KEYS)]
    Simulate(CommonArgs),
    /// Check the blow-up and decay hypotheses for an initial datum
    #[command(after_help = CLASSIFY_KEYS)]
    Classify(CommonArgs),
    /// Sharpen a grayscale image with the thin-film pipeline
    #[command(after_help = SHARPEN_KEYS)]
    Sharpen(CommonArgs),
    /// Sharpen with a linear source that boosts contrast
    #[command(after_help = ENHANCE_KEYS)]
    Enhance(CommonArgs),
    /// Run the proposed, backward diffusion, and shock filters side by side
    #[command(after_help = COMPARE_KEYS)]
    Compare(CommonArgs),
    /// Evaluate the lifespan and decay formulas from supplied constants
    #[command(after_help = BOUNDS_KEYS)]
    Bounds(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment manifest: key = value lines, # comments
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized trial generation
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Keep every n-th diagnostics row, overriding the config key
    #[arg(long)]
    stride: Option<usize>,
    /// Drop the fractional term from the implicit denominator
    #[arg(long)]
    verbatim_denominator: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result) = match &cli.command {
        Command::Simulate(a) => ("simulate", simulate::run(a)),
        Command::Classify(a) => ("classify", classify::run(a)),
        Command::Sharpen(a) => ("sharpen", images::run_sharpen(a)),
        Command::Enhance(a) => ("enhance", images::run_enhance(a)),
        Command::Compare(a) => ("compare", images::run_compare(a)),
        Command::Bounds(a) => ("bounds", bounds::run(a)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("{name}: error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Creates the output directory and returns it for joining.
fn ensure_out_dir(out: &Path) -> Result<(), String> {
    fs::create_dir_all(out).map_err(|e| format!("output directory {}: {e}", out.display()))
}

/// Records what produced the artifacts next to them. The config path is
/// deliberately absent: identical config text and seed must give
/// byte-identical outputs no matter where the file lived.
fn write_manifest(
    out: &Path,
    subcommand: &str,
    seed: u64,
    extras: &[(&str, String)],
    cfg: &Config,
) -> Result<(), String> {
    let mut text = format!("subcommand = {subcommand}\nseed = {seed}\n");
    for (key, value) in extras {
        text.push_str(&format!("{key} = {value}\n"));
    }
    text.push_str("# effective config\n");
    text.push_str(&cfg.canonical());
    let path = out.join("manifest.txt");
    fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
}
