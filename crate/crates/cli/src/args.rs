// Shared flag groups and their conversion into library types.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use stereospoof::analysis::DetectConfig;
use stereospoof::depth::{Algorithm, MatcherConfig};
use stereospoof::geometry::{AttackGeometry, AttackMode, AttackPattern, StereoRig};
use stereospoof::render::{Background, SceneSpec};

/// Output directory when neither `--out` nor `STEREOSPOOF_OUT` is given.
pub const DEFAULT_OUT_DIR: &str = "stereospoof-out";
pub const OUT_ENV: &str = "STEREOSPOOF_OUT";

/// `--out` wins over the environment, which wins over the default.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    X,
    Trapezoid,
    Triangle,
}

impl From<PatternArg> for AttackPattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::X => AttackPattern::XShape,
            PatternArg::Trapezoid => AttackPattern::Trapezoid,
            PatternArg::Triangle => AttackPattern::Triangle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Beams,
    Orbs,
    Combined,
}

impl From<ModeArg> for AttackMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Beams => AttackMode::Beams,
            ModeArg::Orbs => AttackMode::Orbs,
            ModeArg::Combined => AttackMode::Combined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum AlgorithmArg {
    /// Block matching on sum of absolute differences
    Bm,
    /// Semi-global matching on census costs
    Sgm,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Bm => Algorithm::BlockSad,
            AlgorithmArg::Sgm => Algorithm::SemiGlobal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneArg {
    /// Fronto-parallel wall at --wall-m
    Wall,
    /// Textured plane at 10 m
    Flat,
    /// Side walls from --near-m to a back wall at --far-m
    Corridor,
}

#[derive(Debug, Clone, Args)]
pub struct RigArgs {
    /// Stereo baseline [m]
    #[arg(long = "b", value_name = "M", default_value_t = 0.12)]
    pub baseline_m: f64,
    /// Focal length [px]
    #[arg(long, value_name = "PX", default_value_t = 700.0)]
    pub focal_px: f64,
    /// Image width [px]
    #[arg(long, value_name = "PX", default_value_t = 640)]
    pub width: usize,
    /// Image height [px]
    #[arg(long, value_name = "PX", default_value_t = 360)]
    pub height: usize,
}

impl RigArgs {
    pub fn rig(&self) -> stereospoof::Result<StereoRig> {
        StereoRig::new(self.focal_px, self.baseline_m, self.width, self.height)
    }

    /// Same optics, sized to an existing image.
    pub fn rig_sized(&self, width: usize, height: usize) -> stereospoof::Result<StereoRig> {
        StereoRig::new(self.focal_px, self.baseline_m, width, height)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    /// Background geometry
    #[arg(long, value_enum, default_value_t = SceneArg::Wall)]
    pub scene: SceneArg,
    /// Wall depth for --scene wall [m]
    #[arg(long, value_name = "M", default_value_t = 30.0)]
    pub wall_m: f64,
    /// Corridor depth at the image border [m]
    #[arg(long, value_name = "M", default_value_t = 2.0)]
    pub near_m: f64,
    /// Corridor back wall depth [m]
    #[arg(long, value_name = "M", default_value_t = 20.0)]
    pub far_m: f64,
    /// Ambient light [lux, 0..4000]; 0 is a black night scene
    #[arg(long, value_name = "LUX", default_value_t = 0.0, conflicts_with = "night")]
    pub lux: f64,
    /// Night scene (ambient light 0 lux)
    #[arg(long)]
    pub night: bool,
}

impl SceneArgs {
    pub fn scene(&self, seed: u64) -> SceneSpec {
        let background = match self.scene {
            SceneArg::Wall => Background::FrontoparallelWall { depth_m: self.wall_m },
            SceneArg::Flat => Background::FlatTextured { seed },
            SceneArg::Corridor => Background::Corridor {
                near_m: self.near_m,
                far_m: self.far_m,
            },
        };
        SceneSpec {
            background,
            ambient_lux: if self.night { 0.0 } else { self.lux },
            texture_seed: seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    /// Distance between the two light sources [m]
    #[arg(long = "d", value_name = "M", default_value_t = 1.0)]
    pub separation_m: f64,
    /// Perpendicular distance from the sources to the rig [m]
    #[arg(long = "z", value_name = "M", default_value_t = 9.0)]
    pub distance_m: f64,
    /// Horizontal offset of the source pair from the rig axis [m]
    #[arg(long, value_name = "M", default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset_m: f64,
    /// Which camera each source targets
    #[arg(long, value_enum, default_value_t = PatternArg::X)]
    pub pattern: PatternArg,
    /// Artifacts exploited by the matcher
    #[arg(long, value_enum, default_value_t = ModeArg::Beams)]
    pub mode: ModeArg,
    /// Glare brightness in the targeted camera [0..1]
    #[arg(long, value_name = "I", default_value_t = 1.0)]
    pub primary: f64,
    /// Glare brightness in the other camera [0..1, below --primary]
    #[arg(long, value_name = "I", default_value_t = 0.55)]
    pub secondary: f64,
}

impl GeometryArgs {
    pub fn geometry(&self, seed: u64) -> AttackGeometry {
        AttackGeometry {
            lateral_offset_m: self.offset_m,
            intensity_primary: self.primary,
            intensity_secondary: self.secondary,
            jitter_seed: seed,
            ..AttackGeometry::new(
                self.separation_m,
                self.distance_m,
                self.pattern.into(),
                self.mode.into(),
            )
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MatcherArgs {
    /// SAD window side, odd [px]
    #[arg(long, value_name = "PX", default_value_t = 5)]
    pub block_size: usize,
    /// Largest disparity searched [px]
    #[arg(long, value_name = "PX", default_value_t = 512)]
    pub max_disp: usize,
    /// SGM penalty for a 1 px disparity change [cost units]
    #[arg(long, value_name = "COST", default_value_t = 8)]
    pub p1: u16,
    /// SGM penalty for larger disparity changes [cost units]
    #[arg(long, value_name = "COST", default_value_t = 32)]
    pub p2: u16,
    /// Best cost times this must beat the runner-up [ratio, >= 1]
    #[arg(long, value_name = "RATIO", default_value_t = 1.1)]
    pub uniqueness: f64,
    /// Left/right consistency tolerance [px]
    #[arg(long, value_name = "PX", default_value_t = 1.0)]
    pub lr_px: f64,
    /// Disable the left/right consistency check
    #[arg(long)]
    pub no_lr: bool,
    /// Disable parabolic sub-pixel refinement
    #[arg(long)]
    pub no_subpixel: bool,
}

impl MatcherArgs {
    pub fn config(&self, algorithm: AlgorithmArg) -> MatcherConfig {
        MatcherConfig {
            algorithm: algorithm.into(),
            block_size: self.block_size,
            max_disparity: self.max_disp,
            sgm_p1: self.p1,
            sgm_p2: self.p2,
            uniqueness_ratio: self.uniqueness,
            lr_consistency_px: (!self.no_lr).then_some(self.lr_px),
            subpixel: !self.no_subpixel,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Relative departure from the background depth marking a pixel [fraction]
    #[arg(long, value_name = "FRAC", default_value_t = 0.3)]
    pub deviation: f64,
    /// Smallest blob reported as a detection [px]
    #[arg(long, value_name = "PX", default_value_t = 25)]
    pub min_area: usize,
    /// Obstacle-avoidance trigger distance [m]
    #[arg(long, value_name = "M", default_value_t = 6.0)]
    pub oa_threshold: f64,
}

impl DetectArgs {
    pub fn config(&self) -> DetectConfig {
        DetectConfig {
            deviation_frac: self.deviation,
            min_blob_area: self.min_area,
            oa_threshold_m: self.oa_threshold,
        }
    }
}
