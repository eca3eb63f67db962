//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "treemap", version, about = "Rectangular treemap layouts, comparisons and stability studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lay out one instance and print its metrics row.
    Layout(LayoutArgs),
    /// Metrics of several algorithms on several instances.
    Compare(CompareArgs),
    /// Stability under perturbed weights.
    Study(StudyArgs),
    /// Draw a layout file as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
    Svg,
}

/// Options shared by every command that runs an algorithm.
#[derive(Debug, Clone, Args)]
pub struct AlgoOpts {
    /// Container width and height. Spirals build their own container.
    #[arg(long, num_args = 2, value_names = ["W", "H"])]
    pub container: Option<Vec<f64>>,
    /// Split trigger of the modified divide and conquer.
    #[arg(long = "c", default_value_t = 2.0)]
    pub c: f64,
    /// Aspect ratio of the first two spiral cells.
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
    /// 1 weights each cell's perimeter by its area in the optimizer.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub alpha: u8,
    /// Optimizer reward for cells at least as wide as tall.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Optimizer node limit.
    #[arg(long, default_value_t = 1_000_000)]
    pub node_limit: u64,
    /// Optimizer wall-clock limit in seconds. Makes results timing dependent.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Let the optimizer skip mirror-image branches.
    #[arg(long)]
    pub break_symmetry: bool,
    /// Fail when the weights do not already sum to the container area.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    /// Instance file: a JSON tree or `label,weight` CSV.
    pub instance: PathBuf,
    #[arg(long, short)]
    pub algorithm: String,
    #[command(flatten)]
    pub opts: AlgoOpts,
    /// json or svg writes the layout; csv or md writes only the metrics row.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Where the layout goes; without it the layout goes to stdout and the
    /// metrics row to stderr.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Seed of the SVG palette.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Instance files.
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
    /// Comma-separated algorithm ids.
    #[arg(long, short, value_delimiter = ',', required = true)]
    pub algorithms: Vec<String>,
    #[command(flatten)]
    pub opts: AlgoOpts,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    pub instance: PathBuf,
    #[arg(long, short)]
    pub algorithm: String,
    #[command(flatten)]
    pub opts: AlgoOpts,
    /// Comma-separated perturbation levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1])]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perturb each round's weights again instead of the originals.
    #[arg(long)]
    pub cumulative: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Layout JSON written by `layout`.
    pub layout: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write cell names into the cells.
    #[arg(long)]
    pub labels: bool,
    /// Leave out bundle outlines.
    #[arg(long)]
    pub no_bundles: bool,
    /// Seed of the palette.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
