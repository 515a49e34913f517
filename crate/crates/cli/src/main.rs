//! `surfqp`: batch front end. Every command prints one JSON document with
//! sorted keys and a `schema_version` field.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerically inconclusive,
//! 64 usage or I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "surfqp",
    version,
    about = "Triangulations, quivers with potential and WKB data of quadratic differentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ideal triangulations of marked surfaces.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Quivers with potential.
    #[command(subcommand)]
    Qp(QpCmd),
    /// Ginzburg algebras.
    #[command(subcommand)]
    Ginzburg(GinzburgCmd),
    /// Cyclic A-infinity categories.
    #[command(subcommand)]
    Ainfty(AinftyCmd),
    /// Quadratic differentials.
    #[command(subcommand)]
    Wkb(WkbCmd),
    /// Floer-side potentials of trivalent cellulations.
    #[command(subcommand)]
    Floer(FloerCmd),
    /// Differential to WKB triangulation, quiver with potential and reduction.
    Pipeline(PipelineArgs),
}

#[derive(Subcommand, Debug)]
pub enum SurfaceCmd {
    /// Structural checks of a triangulation.
    Validate {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Flip the given edges in order; with no edges only re-emit.
    Flip {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long = "edge")]
        edges: Vec<usize>,
        /// Relabel into the canonical form.
        #[arg(long)]
        canonical: bool,
    },
    /// Seeded random flip sequence from the standard triangulation.
    Random {
        #[arg(long)]
        genus: u32,
        #[arg(long, default_value_t = 0)]
        punctures: u32,
        /// Marked points on each boundary component.
        #[arg(long, value_delimiter = ',')]
        boundary: Vec<u32>,
        #[arg(long, default_value_t = 20)]
        flips: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum QpCmd {
    /// Quiver with potential of a triangulation.
    Build {
        #[arg(long)]
        surface: PathBuf,
        /// Signs at the punctures, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        signing: Option<Vec<i8>>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Mutation at a vertex, followed by reduction.
    Mutate {
        #[arg(long)]
        qp: PathBuf,
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Dimensions of the truncated Jacobian algebra.
    Jacobian {
        #[arg(long)]
        qp: PathBuf,
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum GinzburgCmd {
    /// Dimensions of the truncated Jacobian algebra; same as `qp jacobian`.
    Dims {
        #[arg(long)]
        qp: PathBuf,
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum AinftyCmd {
    /// Check the A-infinity relations up to arity `nmax`.
    Verify {
        #[arg(long)]
        qp: PathBuf,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
    },
    /// Euler form and the rank of its kernel.
    Euler {
        #[arg(long)]
        qp: PathBuf,
    },
    /// Nonzero structure constants of the higher products.
    Constants {
        #[arg(long)]
        qp: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct TraceOpts {
    /// Phase of the foliation.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Integration and root tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Pole capture radius relative to the distance to other singular points.
    #[arg(long, default_value_t = 0.05)]
    pub capture: f64,
}

#[derive(Subcommand, Debug)]
pub enum WkbCmd {
    /// Zeroes and poles with orders and leading coefficients.
    Classify {
        #[arg(long)]
        differential: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// A single horizontal trajectory.
    Trace {
        #[arg(long)]
        differential: PathBuf,
        /// Starting point as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[command(flatten)]
        opts: TraceOpts,
    },
    /// WKB triangulation at a phase.
    Triangulate {
        #[arg(long)]
        differential: PathBuf,
        #[command(flatten)]
        opts: TraceOpts,
    },
    /// Separatrix picture.
    Plot {
        #[arg(long)]
        differential: PathBuf,
        #[command(flatten)]
        opts: TraceOpts,
        #[arg(long, value_enum, default_value_t = PlotFormat::Svg)]
        format: PlotFormat,
        /// Half-width of the plotted square.
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FloerOpts {
    /// Triangulation whose dual is the cellulation.
    #[arg(long)]
    pub cellulation: PathBuf,
    #[arg(long, value_enum, default_value_t = BackgroundArg::B0)]
    pub background: BackgroundArg,
    /// JSON list of areas, one per puncture (integers or `"p/q"` strings).
    #[arg(long)]
    pub areas: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub signing: Option<Vec<i8>>,
}

#[derive(Subcommand, Debug)]
pub enum FloerCmd {
    /// Graded morphism table and potential of the cellulation.
    Assemble(FloerOpts),
    /// Compare the assembled potential with the quiver side.
    Compare(FloerOpts),
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// Differential (`P`, `Q` coefficient lists) or pole data (`genus`, `pole_orders`).
    #[arg(long)]
    pub differential: PathBuf,
    #[command(flatten)]
    pub opts: TraceOpts,
    #[arg(long, value_enum, default_value_t = BackgroundArg::B0)]
    pub background: BackgroundArg,
    #[arg(long)]
    pub areas: Option<PathBuf>,
    /// Truncation order of the potentials.
    #[arg(long, default_value_t = 12)]
    pub order: usize,
    /// Seed for the sampled d^2 check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotFormat {
    Svg,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackgroundArg {
    B0,
    None,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    ExitCode::from(commands::run(cli))
}
