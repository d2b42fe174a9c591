use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "magbend",
    version,
    about = "Bending simulation and prediction for graded-stiffness magnetic soft rods"
)]
pub struct Cli {
    /// Suppress status messages on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print results as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory for output files when no explicit path is given.
    #[arg(long, global = true, env = "MAGBEND_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// On-axis field of a cuboid magnet, or calibrate its remanence.
    Field(FieldArgs),
    /// Solve the equilibrium of one rod in a uniform field.
    Solve(SolveArgs),
    /// Fit one shape descriptor to x,y points.
    Fit(FitArgs),
    /// Solve and fit every point of a parameter grid.
    Sweep(SweepArgs),
    /// Train the surrogate on a dataset CSV.
    Train(TrainArgs),
    /// Predict the bending coefficient with a trained model.
    Predict(PredictArgs),
    /// Extract a centerline from a binary PGM image.
    Extract(ExtractArgs),
    /// Plot curves to SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Cube side of the magnet.
    #[arg(long = "side-mm", default_value_t = 55.0)]
    pub side_mm: f64,
    /// Remanence of the magnet.
    #[arg(long = "br-T", required_unless_present = "calibrate")]
    pub br_t: Option<f64>,
    /// Infer the remanence from a field measured at --distance-mm.
    #[arg(long, requires = "measured_mt", conflicts_with = "br_t")]
    pub calibrate: bool,
    #[arg(long = "measured-mT")]
    pub measured_mt: Option<f64>,
    /// Distance from the pole face along the axis.
    #[arg(long = "distance-mm")]
    pub distance_mm: f64,
    /// Gauss-Legendre order per face dimension.
    #[arg(long, default_value_t = 32)]
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Bundled id (no1..no7) or path to a spec JSON file.
    #[arg(long)]
    pub spec: String,
    #[arg(long = "field-mT")]
    pub field_mt: f64,
    /// Field direction from the undeformed rod axis.
    #[arg(long = "angle-deg", default_value_t = 90.0)]
    pub angle_deg: f64,
    /// Segments per millimetre.
    #[arg(long, default_value_t = 2.0)]
    pub resolution: f64,
    /// json: full state; csv: centerline x_mm,y_mm.
    #[arg(long = "out", value_enum, default_value = "json")]
    pub format: SolveFormat,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Quad,
    Radius,
    Curvature,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV of x,y points in mm, root first; `-` reads stdin.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "quad")]
    pub metric: Metric,
    /// Clamp tangent; the curve is rotated so it lies along +x.
    #[arg(long = "base-angle-deg", default_value_t = 0.0)]
    pub base_angle_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LibraryFormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config JSON (specs, fields_mT, angles_deg, resolution, solver).
    #[arg(long, conflicts_with_all = ["all_bundled", "spec"])]
    pub config: Option<PathBuf>,
    /// Sweep the seven bundled specs.
    #[arg(long)]
    pub all_bundled: bool,
    /// Spec ids or paths; repeatable.
    #[arg(long)]
    pub spec: Vec<String>,
    #[arg(
        long = "fields-mT",
        value_delimiter = ',',
        default_value = "10,20,30,40,50,60,70,80,90,100,110,120"
    )]
    pub fields_mt: Vec<f64>,
    #[arg(long = "angles-deg", value_delimiter = ',', default_value = "90")]
    pub angles_deg: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub resolution: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: LibraryFormatArg,
    /// Library file; defaults to library.csv or library.json in the output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write converged points as a surrogate dataset CSV.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Field whose samples form the test split.
    #[arg(long = "holdout-mT", default_value_t = 60.0)]
    pub holdout_mt: f64,
    #[arg(long, default_value_t = 5000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Model file; defaults to model.json in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "mt-mT")]
    pub mt_mt: f64,
    /// Bottom, middle, top modulus, as a,b,c.
    #[arg(long = "e-MPa", value_parser = parse_triple)]
    pub e_mpa: [f64; 3],
    /// Bottom, middle, top length, as a,b,c.
    #[arg(long = "l-mm", value_parser = parse_triple)]
    pub l_mm: [f64; 3],
    #[arg(long = "cs-mm")]
    pub cs_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    X,
    Y,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Binary (P5) PGM image.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Millimetres per pixel; no default.
    #[arg(long)]
    pub scale: f64,
    /// Pixels darker than this are rod.
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    #[arg(long, value_enum, default_value = "x")]
    pub axis: AxisArg,
    /// CSV of x_mm,y_mm; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// LABEL=PATH of an x,y mm CSV; repeatable.
    #[arg(long)]
    pub curve: Vec<String>,
    /// Solve this spec at each of --fields-mT and plot the centerlines.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long = "fields-mT", value_delimiter = ',', requires = "spec")]
    pub fields_mt: Vec<f64>,
    #[arg(long = "angle-deg", default_value_t = 90.0)]
    pub angle_deg: f64,
    #[arg(long, default_value_t = 2.0)]
    pub resolution: f64,
    #[arg(long)]
    pub title: Option<String>,
    /// SVG file; defaults to curves.svg in the output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c] = parts[..] else {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    };
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([num(a)?, num(b)?, num(c)?])
}
