mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Build, verify and report on explicit ReLU product networks.
#[derive(Parser, Debug)]
#[command(name = "relunet", version, about)]
struct Cli {
    /// Seed for every random draw; identical seeds give identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a network and write its interchange file.
    Build(BuildArgs),
    /// Check a stored network against its error bound and size budget.
    Verify(VerifyArgs),
    /// Generate a dataset.
    #[command(subcommand)]
    Data(DataCommand),
    /// Tabulate the sup error of the squaring network by sawtooth order.
    Curve(CurveArgs),
    /// Summarize CSV reports and curves.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// square, scalar-product, dot-product, matvec, complex-matvec or affine.
    #[arg(value_name = "KIND")]
    kind_positional: Option<String>,
    #[arg(long, conflicts_with = "kind_positional")]
    kind: Option<String>,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Half-width of the input cube.
    #[arg(long = "D", default_value_t = 1.0)]
    half_width: f64,
    /// Target accuracy, as a decimal or `2^-k`.
    #[arg(long, default_value = "2^-5", value_parser = commands::parse_eps)]
    eps: f64,
    /// Depth constant of the predicted budget.
    #[arg(long = "C", default_value_t = 2.0)]
    depth_constant: f64,
    /// Depth of an affine representation.
    #[arg(long = "K")]
    depth: Option<usize>,
    /// Affine representation variant (1, 2 or 3).
    #[arg(long, default_value_t = 1)]
    variant: u8,
    /// Matrix of an affine representation, rows separated by `;`.
    #[arg(long)]
    matrix: Option<String>,
    /// Tune the sawtooth order for value and derivative accuracy.
    #[arg(long)]
    sobolev: bool,
    /// Constants `c1,c2` of the `c1 log2(1/eps) + c2` size bound.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    sobolev_constants: Option<Vec<f64>>,
    /// Override the sawtooth order.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value = "network.json")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Worker cap; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Also check the Jacobian.
    #[arg(long)]
    sobolev: bool,
    /// CSV file the report row is appended to.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum DataCommand {
    /// Uniform grid samples of real matrix-vector products.
    Equispaced {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long = "D", default_value_t = 1.0)]
        half_width: f64,
        #[arg(long, default_value_t = 1025)]
        grid_points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// QPSK symbols through clipped Rayleigh channels.
    Qpsk {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 3.0)]
        clip: f64,
        /// Append one sample with an all-zero channel.
        #[arg(long)]
        zero_probe: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, default_value_t = 10)]
    max_order: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// CSV files or glob patterns.
    inputs: Vec<String>,
    /// Write an SVG of error against depth.
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed;
    let result = match cli.command {
        Command::Build(a) => commands::build(a, seed),
        Command::Verify(a) => commands::verify(a, seed),
        Command::Data(d) => commands::data(d, seed),
        Command::Curve(a) => commands::curve(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
