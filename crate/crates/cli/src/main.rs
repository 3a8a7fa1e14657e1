mod commands;
mod expr;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

/// Condition numbers, stability checks and loss-of-precision experiments
/// in the coordinatewise relative error metric.
#[derive(Parser, Debug)]
#[command(name = "stabilis", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Loss of precision of Strassen's 2x2 product near [[1,ε],[ε,1]].
    Strassen(StrassenArgs),
    /// Loss of precision of sin(π 2^k + 1) in double precision.
    Sine(SineArgs),
    /// Condition number of a catalog function at a point.
    Cond(CondArgs),
    /// Sampled amenability probe at a point.
    Amen(AmenArgs),
    /// Numerical excess factor of a composition g ∘ h.
    Excess(ExcessArgs),
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Random seed.
    #[arg(long, env = "STABILIS_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct StrassenArgs {
    /// Smallest and largest ε of the log-spaced grid.
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1e-8, 1e-2])]
    eps: Vec<f64>,
    /// Number of ε values.
    #[arg(long, default_value_t = 100)]
    n_eps: usize,
    /// Perturbed samples per ε.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Working precision in bits.
    #[arg(short = 't', long = "precision", default_value_t = 53)]
    t: u32,
    /// Full grid: 1000 values of ε in [1e-12, 1e-1], 1000 samples each.
    #[arg(long, conflicts_with_all = ["eps", "n_eps", "samples"])]
    full: bool,
}

#[derive(Args, Debug)]
struct SineArgs {
    /// Largest k.
    #[arg(long, default_value_t = 100)]
    k_max: u32,
    /// Working precision in bits.
    #[arg(short = 't', long = "precision", default_value_t = 53)]
    t: u32,
    /// Bits of the reference sine.
    #[arg(long, default_value_t = 512)]
    guard: u32,
}

#[derive(Args, Debug)]
struct CondArgs {
    /// Estimate by sampling shrinking relative spheres.
    #[arg(long, conflicts_with = "jacobian")]
    sample: bool,
    /// Use the hand-coded Jacobian instead of the closed form.
    #[arg(long)]
    jacobian: bool,
    #[command(flatten)]
    seed: SeedArg,
    /// Function id, e.g. product, sum, inner, power:3, matmul-entry:12.
    function: String,
    /// Comma-separated point; entries may use pi, + - * /, ^ and parentheses.
    #[arg(allow_hyphen_values = true)]
    point: String,
}

#[derive(Args, Debug)]
struct AmenArgs {
    function: String,
    /// Comma-separated point.
    #[arg(long = "x", allow_hyphen_values = true)]
    x: String,
    /// Amenability constant.
    #[arg(long = "a", default_value_t = 8.0)]
    a: f64,
    /// Number of sampled points.
    #[arg(long = "n", default_value_t = 500)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
struct ExcessArgs {
    /// Outer function id.
    g: String,
    /// Inner function id.
    h: String,
    /// Evaluate at (A_ε, B_ε) with A_ε = B_ε = [[1,ε],[ε,1]].
    #[arg(long, conflicts_with = "x", required_unless_present = "x")]
    eps: Option<f64>,
    /// Comma-separated point.
    #[arg(long = "x", allow_hyphen_values = true)]
    x: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
