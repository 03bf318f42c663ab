//! Synthetic stereo pairs with injected glares and lens-flare orbs.

mod attack;
mod composite;
mod scene;
mod texture;

pub use attack::{glare_radius_px, place_attack, AttackArtifacts, GlareSpec};
pub use composite::{composite, composite_detailed, AutoExposure, Composited, GLARE_GAIN, ORB_GAIN, ORB_RB_RATIO};
pub use scene::{
    ground_truth_depth, render_scene, render_scene_with, Background, SceneSpec, FLAT_DEPTH_M, MAX_AMBIENT_LUX,
};

use crate::raster::RgbImage;

#[derive(Debug, Clone, PartialEq)]
pub struct StereoFrame {
    pub left: RgbImage,
    pub right: RgbImage,
    pub width: usize,
    pub height: usize,
    pub timestamp_s: f64,
}

impl StereoFrame {
    pub fn new(left: RgbImage, right: RgbImage) -> crate::Result<Self> {
        if left.width != right.width || left.height != right.height {
            return Err(crate::Error::Geometry(format!(
                "left {}x{} and right {}x{} differ",
                left.width, left.height, right.width, right.height
            )));
        }
        Ok(StereoFrame {
            width: left.width,
            height: left.height,
            left,
            right,
            timestamp_s: 0.0,
        })
    }
}
