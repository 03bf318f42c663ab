//! `stereospoof`: command-line front end for the spoofing lab.
//!
//! Exit status is 0 when the requested pipeline ran (an attack that fails to
//! fool the matcher still exits 0), 1 on IO failures and 2 on usage or parse
//! errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod args;
mod commands;

use args::{AlgorithmArg, DetectArgs, GeometryArgs, MatcherArgs, ModeArg, PatternArg, RigArgs, SceneArgs};

#[derive(Debug, Parser)]
#[command(
    name = "stereospoof",
    version,
    about = "Stereo-depth spoofing lab: predict, render, match, analyze, simulate"
)]
struct Cli {
    /// Output directory (overrides STEREOSPOOF_OUT; default ./stereospoof-out)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form fake depths for a source geometry
    Predict(PredictArgs),
    /// Render a stereo pair, optionally with an injected attack
    Render(RenderArgs),
    /// Run a stereo matcher on a PPM pair
    Match(MatchArgs),
    /// Detect fake obstacles in a depth map and check frames for saturation
    Analyze(AnalyzeArgs),
    /// Render, inject, match and analyze in one go
    Attack(AttackArgs),
    /// Fly a scenario through the depth manipulator
    Sim(SimArgs),
    /// Attack pipeline over a grid of geometries, in parallel
    Sweep(SweepArgs),
}

#[derive(Debug, clap::Args)]
pub struct PredictArgs {
    /// Stereo baseline [m]
    #[arg(long = "b", value_name = "M", default_value_t = 0.12)]
    pub baseline_m: f64,
    /// Focal length [px]
    #[arg(long, value_name = "PX", default_value_t = 700.0)]
    pub focal_px: f64,
    /// Distance between the two light sources [m]
    #[arg(long = "d", value_name = "M", default_value_t = 1.0, allow_hyphen_values = true)]
    pub separation_m: f64,
    /// Perpendicular distance from the sources to the rig [m]; required without --table
    #[arg(
        long = "z",
        value_name = "M",
        required_unless_present = "table",
        allow_hyphen_values = true
    )]
    pub distance_m: Option<f64>,
    /// Artifact type; all types when omitted
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Source pattern; all patterns when omitted
    #[arg(long, value_enum)]
    pub pattern: Option<PatternArg>,
    /// Obstacle-avoidance display step [m]
    #[arg(long, value_name = "M", default_value_t = 0.5)]
    pub step: f64,
    /// Print the expected-depth table for z = 1..=z-max as CSV
    #[arg(long)]
    pub table: bool,
    /// Largest distance in the table [m, integer]
    #[arg(long, value_name = "M", default_value_t = 16)]
    pub z_max: u32,
    /// Print predictions as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub rig: RigArgs,
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Inject the attack described by the geometry flags
    #[arg(long)]
    pub attack: bool,
    /// Texture and jitter seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, clap::Args)]
pub struct MatchArgs {
    /// Left frame (binary PPM)
    #[arg(long, value_name = "PPM")]
    pub left: PathBuf,
    /// Right frame (binary PPM)
    #[arg(long, value_name = "PPM")]
    pub right: PathBuf,
    /// Stereo baseline [m]
    #[arg(long = "b", value_name = "M", default_value_t = 0.12)]
    pub baseline_m: f64,
    /// Focal length [px]
    #[arg(long, value_name = "PX", default_value_t = 700.0)]
    pub focal_px: f64,
    /// Matching algorithm
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Bm)]
    pub algorithm: AlgorithmArg,
    #[command(flatten)]
    pub matcher: MatcherArgs,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    /// Depth map (PFM, meters, non-finite = invalid)
    #[arg(long, value_name = "PFM")]
    pub depth: PathBuf,
    /// Background depth of the scene [m]
    #[arg(long, value_name = "M", default_value_t = 30.0)]
    pub background_m: f64,
    /// Stereo baseline [m]
    #[arg(long = "b", value_name = "M", default_value_t = 0.12)]
    pub baseline_m: f64,
    /// Focal length [px]
    #[arg(long, value_name = "PX", default_value_t = 700.0)]
    pub focal_px: f64,
    #[command(flatten)]
    pub detect: DetectArgs,
    /// Left frame for the saturation check (binary PPM)
    #[arg(long, value_name = "PPM", requires = "right")]
    pub left: Option<PathBuf>,
    /// Right frame for the saturation check (binary PPM)
    #[arg(long, value_name = "PPM", requires = "left")]
    pub right: Option<PathBuf>,
    /// Channel level counted as saturated [0..255]
    #[arg(long, value_name = "LEVEL", default_value_t = stereospoof::analysis::DEFAULT_SAT_LEVEL)]
    pub sat_level: u8,
    /// Saturated fraction above which a frame is suspect [fraction]
    #[arg(long, value_name = "FRAC", default_value_t = stereospoof::analysis::DEFAULT_SAT_FRACTION)]
    pub sat_frac: f64,
}

#[derive(Debug, clap::Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub rig: RigArgs,
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Matching algorithm
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Bm)]
    pub algorithm: AlgorithmArg,
    #[command(flatten)]
    pub matcher: MatcherArgs,
    #[command(flatten)]
    pub detect: DetectArgs,
    /// Skip the injection and analyze the clean scene
    #[arg(long)]
    pub clean: bool,
    /// Texture and jitter seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, clap::Args)]
pub struct SimArgs {
    /// Built-in scenario name (sudden_stop, drift_away, shake_fb, shake_lr) or a TOML file
    pub scenario: String,
    /// Replace the injection repeat period [s]
    #[arg(long, value_name = "S")]
    pub period: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub rig: RigArgs,
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Source separations [m, comma separated]
    #[arg(long, value_name = "M,..", value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub d_list: Vec<f64>,
    /// Attack distances [m, comma separated]
    #[arg(long, value_name = "M,..", value_delimiter = ',', default_values_t = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])]
    pub z_list: Vec<f64>,
    /// Patterns [comma separated]
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PatternArg::X, PatternArg::Trapezoid])]
    pub patterns: Vec<PatternArg>,
    /// Artifact types [comma separated]
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::Beams, ModeArg::Orbs])]
    pub modes: Vec<ModeArg>,
    /// Matchers [comma separated]
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [AlgorithmArg::Bm, AlgorithmArg::Sgm])]
    pub algorithms: Vec<AlgorithmArg>,
    /// Glare brightness in the targeted camera [0..1]
    #[arg(long, value_name = "I", default_value_t = 1.0)]
    pub primary: f64,
    /// Glare brightness in the other camera [0..1, below --primary]
    #[arg(long, value_name = "I", default_value_t = 0.55)]
    pub secondary: f64,
    #[command(flatten)]
    pub matcher: MatcherArgs,
    #[command(flatten)]
    pub detect: DetectArgs,
    /// Worker threads [count]; 0 uses every core
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub jobs: usize,
    /// Texture and jitter seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = args::resolve_out_dir(cli.out);
    let result = match cli.command {
        Command::Predict(a) => commands::predict(&a),
        Command::Render(a) => commands::render(&a, &out),
        Command::Match(a) => commands::match_pair(&a, &out),
        Command::Analyze(a) => commands::analyze(&a, &out),
        Command::Attack(a) => commands::attack(&a, &out),
        Command::Sim(a) => commands::sim(&a, &out),
        Command::Sweep(a) => commands::sweep(&a, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
