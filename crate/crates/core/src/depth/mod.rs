//! Classic stereo matchers and the disparity -> depth -> point cloud chain.
//!
//! Disparity is measured on the left image: left pixel `x` corresponds to
//! right pixel `x - d`. Both matchers share the same winner selection:
//! smallest-disparity tie-break, uniqueness filtering, optional parabolic
//! refinement and a left-right consistency check.

mod block;
mod census;
mod select;
mod sgm;

use serde::{Deserialize, Serialize};

pub use census::{census_transform, CENSUS_BITS, CENSUS_RADIUS};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::StereoRig;
use crate::io::FloatMap;
use crate::raster::GrayImage;
use crate::render::StereoFrame;

/// Sentinel carried by invalid disparity and depth pixels.
pub const INVALID: f32 = f32::INFINITY;

/// Disparities at or below this value are treated as infinitely far.
pub const MIN_DEPTH_DISPARITY_PX: f32 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BlockSad,
    SemiGlobal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatcherConfig {
    pub algorithm: Algorithm,
    /// Odd SAD window side; also sets the invalid border for block matching.
    pub block_size: usize,
    /// Candidates are `0..=max_disparity`.
    pub max_disparity: usize,
    pub sgm_p1: u16,
    pub sgm_p2: u16,
    /// Best cost times this ratio must stay below the runner-up two or more
    /// pixels away.
    pub uniqueness_ratio: f64,
    /// Maximum left/right winner disagreement; `None` disables the check.
    pub lr_consistency_px: Option<f64>,
    pub subpixel: bool,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            algorithm: Algorithm::BlockSad,
            block_size: 5,
            max_disparity: 512,
            sgm_p1: 8,
            sgm_p2: 32,
            uniqueness_ratio: 1.1,
            lr_consistency_px: Some(1.0),
            subpixel: true,
        }
    }
}

/// Keeps the summed SGM cost inside u16.
pub(crate) const MAX_SGM_P2: u16 = 8000;

impl MatcherConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        MatcherConfig {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size < 3 || self.block_size % 2 == 0 {
            return Err(Error::Config(format!(
                "block size must be odd and >= 3, got {}",
                self.block_size
            )));
        }
        if self.max_disparity == 0 {
            return Err(Error::Config("max disparity must be positive".into()));
        }
        if self.sgm_p2 < self.sgm_p1 {
            return Err(Error::Config(format!(
                "p2 ({}) must not be below p1 ({})",
                self.sgm_p2, self.sgm_p1
            )));
        }
        if self.sgm_p2 > MAX_SGM_P2 {
            return Err(Error::Config(format!("p2 must not exceed {MAX_SGM_P2}")));
        }
        if !(self.uniqueness_ratio >= 1.0) {
            return Err(Error::Config(format!(
                "uniqueness ratio must be >= 1, got {}",
                self.uniqueness_ratio
            )));
        }
        if let Some(lr) = self.lr_consistency_px {
            if !(lr >= 0.0) {
                return Err(Error::Config(format!("LR tolerance must be >= 0, got {lr}")));
            }
        }
        Ok(())
    }

    /// Pixels at the image edge that can never carry a valid disparity.
    pub fn border(&self) -> usize {
        match self.algorithm {
            Algorithm::BlockSad => self.block_size / 2,
            Algorithm::SemiGlobal => CENSUS_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    pub width: usize,
    pub height: usize,
    /// Pixels; [`INVALID`] where `valid` is false.
    pub values: Vec<f32>,
    pub valid: Vec<bool>,
    pub min_disparity: f32,
    pub max_disparity: f32,
}

impl DisparityMap {
    pub fn invalid(width: usize, height: usize, max_disparity: f32) -> Self {
        DisparityMap {
            width,
            height,
            values: vec![INVALID; width * height],
            valid: vec![false; width * height],
            min_disparity: 0.0,
            max_disparity,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        let i = y * self.width + x;
        self.valid[i].then_some(self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f32> + '_ {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
    }

    pub fn to_float_map(&self) -> FloatMap {
        FloatMap {
            width: self.width,
            height: self.height,
            data: self.values.clone(),
        }
    }

    /// Finite samples become valid pixels.
    pub fn from_float_map(map: &FloatMap, max_disparity: f32) -> Self {
        DisparityMap {
            width: map.width,
            height: map.height,
            values: map
                .data
                .iter()
                .map(|v| if v.is_finite() { *v } else { INVALID })
                .collect(),
            valid: map.data.iter().map(|v| v.is_finite()).collect(),
            min_disparity: 0.0,
            max_disparity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    /// Meters; [`INVALID`] where `valid` is false.
    pub values: Vec<f32>,
    pub valid: Vec<bool>,
    pub rig: StereoRig,
}

impl DepthMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        let i = y * self.width + x;
        self.valid[i].then_some(self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn to_float_map(&self) -> FloatMap {
        FloatMap {
            width: self.width,
            height: self.height,
            data: self.values.clone(),
        }
    }

    pub fn from_float_map(map: &FloatMap, rig: StereoRig) -> Result<Self> {
        if map.width != rig.image_width_px || map.height != rig.image_height_px {
            return Err(Error::Geometry(format!(
                "depth map is {}x{}, rig expects {}x{}",
                map.width, map.height, rig.image_width_px, rig.image_height_px
            )));
        }
        let valid: Vec<bool> = map.data.iter().map(|v| v.is_finite() && *v > 0.0).collect();
        Ok(DepthMap {
            width: map.width,
            height: map.height,
            values: map
                .data
                .iter()
                .zip(&valid)
                .map(|(&v, &ok)| if ok { v } else { INVALID })
                .collect(),
            valid,
            rig,
        })
    }
}

/// Matches a rendered RGB pair (converted to BT.601 luma).
pub fn match_stereo(frame: &StereoFrame, cfg: &MatcherConfig) -> Result<DisparityMap> {
    match_stereo_with(frame, cfg, Exec::default())
}

pub fn match_stereo_with(frame: &StereoFrame, cfg: &MatcherConfig, exec: Exec) -> Result<DisparityMap> {
    match_gray(&frame.left.to_gray(), &frame.right.to_gray(), cfg, exec)
}

pub fn match_gray(left: &GrayImage, right: &GrayImage, cfg: &MatcherConfig, exec: Exec) -> Result<DisparityMap> {
    cfg.validate()?;
    if left.width != right.width || left.height != right.height {
        return Err(Error::Geometry(format!(
            "left {}x{} and right {}x{} differ",
            left.width, left.height, right.width, right.height
        )));
    }
    if cfg.block_size > left.width || cfg.block_size > left.height {
        return Err(Error::Config(format!(
            "block size {} exceeds the {}x{} image",
            cfg.block_size, left.width, left.height
        )));
    }
    match cfg.algorithm {
        Algorithm::BlockSad => Ok(block::match_block_sad(left, right, cfg, exec)),
        Algorithm::SemiGlobal => Ok(sgm::match_semi_global(left, right, cfg, exec)),
    }
}

/// Per-pixel depth `f * b / disparity`.
pub fn to_depth(disp: &DisparityMap, rig: &StereoRig) -> Result<DepthMap> {
    if disp.width != rig.image_width_px || disp.height != rig.image_height_px {
        return Err(Error::Geometry(format!(
            "disparity map is {}x{}, rig expects {}x{}",
            disp.width, disp.height, rig.image_width_px, rig.image_height_px
        )));
    }
    let fb = rig.focal_length_px * rig.baseline_m;
    let mut values = vec![INVALID; disp.values.len()];
    let mut valid = vec![false; disp.values.len()];
    for (i, (&d, &ok)) in disp.values.iter().zip(&disp.valid).enumerate() {
        if ok && d > MIN_DEPTH_DISPARITY_PX {
            values[i] = (fb / d as f64) as f32;
            valid[i] = true;
        }
    }
    Ok(DepthMap {
        width: disp.width,
        height: disp.height,
        values,
        valid,
        rig: *rig,
    })
}

/// Back-projects every valid pixel into the left camera frame.
pub fn to_point_cloud(depth: &DepthMap) -> Vec<[f64; 3]> {
    let rig = &depth.rig;
    let (cx, cy) = rig.principal_point;
    let f = rig.focal_length_px;
    let mut out = Vec::with_capacity(depth.valid_count());
    for y in 0..depth.height {
        for x in 0..depth.width {
            if let Some(z) = depth.get(x, y) {
                let z = z as f64;
                out.push([(x as f64 - cx) * z / f, (y as f64 - cy) * z / f, z]);
            }
        }
    }
    out
}
