//! Pinhole stereo model, triangulation and the closed-form fake-depth
//! relations for two-source glare injection.
//!
//! Image coordinates are measured from the principal point: `u` grows to the
//! right and `v` grows downwards. The world frame is centred on the rig
//! midpoint with x right, y down and z forward; the left optical centre sits
//! at `x = -b/2` and the right one at `x = +b/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sensor pitch used to express the focal length in meters.
pub const DEFAULT_PIXEL_PITCH_M: f64 = 3e-6;

/// Depth resolution of the obstacle-avoidance display.
pub const DEFAULT_OA_STEP_M: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StereoRig {
    pub focal_length_px: f64,
    pub baseline_m: f64,
    pub image_width_px: usize,
    pub image_height_px: usize,
    /// Principal point in pixel coordinates (column, row).
    pub principal_point: (f64, f64),
    pub pixel_pitch_m_per_px: f64,
}

impl Default for StereoRig {
    /// 640x360 rig with a 12 cm baseline and a 700 px focal length.
    fn default() -> Self {
        StereoRig {
            focal_length_px: 700.0,
            baseline_m: 0.12,
            image_width_px: 640,
            image_height_px: 360,
            principal_point: (320.0, 180.0),
            pixel_pitch_m_per_px: DEFAULT_PIXEL_PITCH_M,
        }
    }
}

impl StereoRig {
    /// Builds a rig with the principal point at the image centre.
    pub fn new(focal_length_px: f64, baseline_m: f64, width: usize, height: usize) -> Result<Self> {
        let rig = StereoRig {
            focal_length_px,
            baseline_m,
            image_width_px: width,
            image_height_px: height,
            principal_point: (width as f64 / 2.0, height as f64 / 2.0),
            pixel_pitch_m_per_px: DEFAULT_PIXEL_PITCH_M,
        };
        rig.validate()?;
        Ok(rig)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length_px.is_finite() && self.focal_length_px > 0.0) {
            return Err(Error::Domain(format!(
                "focal length must be positive, got {}",
                self.focal_length_px
            )));
        }
        if !(self.baseline_m.is_finite() && self.baseline_m > 0.0) {
            return Err(Error::Domain(format!(
                "baseline must be positive, got {}",
                self.baseline_m
            )));
        }
        if self.image_width_px == 0 || self.image_height_px == 0 {
            return Err(Error::Domain("image dimensions must be positive".into()));
        }
        let (cx, cy) = self.principal_point;
        if !(0.0..=self.image_width_px as f64).contains(&cx) || !(0.0..=self.image_height_px as f64).contains(&cy) {
            return Err(Error::Domain(format!(
                "principal point ({cx}, {cy}) lies outside the image"
            )));
        }
        if !(self.pixel_pitch_m_per_px.is_finite() && self.pixel_pitch_m_per_px > 0.0) {
            return Err(Error::Domain("pixel pitch must be positive".into()));
        }
        Ok(())
    }

    /// Focal length in meters.
    pub fn focal_length_m(&self) -> f64 {
        self.focal_length_px * self.pixel_pitch_m_per_px
    }

    /// Converts a centre-relative image point to pixel coordinates.
    pub fn to_pixel(&self, p: &ImagePoint) -> (f64, f64) {
        (p.u + self.principal_point.0, p.v + self.principal_point.1)
    }

    /// Converts pixel coordinates to a centre-relative image point.
    pub fn from_pixel(&self, x: f64, y: f64, camera: Camera) -> ImagePoint {
        ImagePoint {
            u: x - self.principal_point.0,
            v: y - self.principal_point.1,
            camera,
        }
    }

    /// Whether a centre-relative point falls on the sensor.
    pub fn in_frame(&self, p: &ImagePoint) -> bool {
        let (x, y) = self.to_pixel(p);
        x >= 0.0 && y >= 0.0 && x < self.image_width_px as f64 && y < self.image_height_px as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Camera {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
    pub camera: Camera,
}

impl ImagePoint {
    pub fn new(u: f64, v: f64, camera: Camera) -> Self {
        ImagePoint { u, v, camera }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackPattern {
    /// Each source targets the opposite camera; beams cross in front of the rig.
    XShape,
    /// Each source targets the camera on its own side.
    Trapezoid,
    /// Both sources cover both cameras.
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMode {
    Beams,
    Orbs,
    Combined,
}

impl AttackMode {
    pub fn has_beams(self) -> bool {
        matches!(self, AttackMode::Beams | AttackMode::Combined)
    }

    pub fn has_orbs(self) -> bool {
        matches!(self, AttackMode::Orbs | AttackMode::Combined)
    }
}

impl AttackPattern {
    fn has_x(self) -> bool {
        matches!(self, AttackPattern::XShape | AttackPattern::Triangle)
    }

    fn has_trapezoid(self) -> bool {
        matches!(self, AttackPattern::Trapezoid | AttackPattern::Triangle)
    }
}

/// Placement and brightness of the two attacking light sources P (left) and Q (right).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackGeometry {
    pub separation_m: f64,
    pub distance_m: f64,
    pub lateral_offset_m: f64,
    pub pattern: AttackPattern,
    pub mode: AttackMode,
    pub intensity_primary: f64,
    pub intensity_secondary: f64,
    /// Seed for the triangle-pattern intensity jitter.
    pub jitter_seed: u64,
}

impl AttackGeometry {
    pub fn new(separation_m: f64, distance_m: f64, pattern: AttackPattern, mode: AttackMode) -> Self {
        AttackGeometry {
            separation_m,
            distance_m,
            lateral_offset_m: 0.0,
            pattern,
            mode,
            intensity_primary: 1.0,
            intensity_secondary: 0.55,
            jitter_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation_m.is_finite() && self.separation_m > 0.0) {
            return Err(Error::Domain(format!(
                "source separation must be positive, got {}",
                self.separation_m
            )));
        }
        if !(self.distance_m.is_finite() && self.distance_m > 0.0) {
            return Err(Error::Domain(format!(
                "attack distance must be positive, got {}",
                self.distance_m
            )));
        }
        if !self.lateral_offset_m.is_finite() {
            return Err(Error::Domain("lateral offset must be finite".into()));
        }
        if !(self.intensity_primary > 0.0 && self.intensity_primary <= 1.0) {
            return Err(Error::Domain(format!(
                "primary intensity must lie in (0, 1], got {}",
                self.intensity_primary
            )));
        }
        if !(self.intensity_secondary >= 0.0 && self.intensity_secondary < self.intensity_primary) {
            return Err(Error::Domain(format!(
                "secondary intensity must lie in [0, primary), got {}",
                self.intensity_secondary
            )));
        }
        Ok(())
    }

    /// World position of source P (the left one).
    pub fn source_p(&self) -> [f64; 3] {
        [-self.separation_m / 2.0 + self.lateral_offset_m, 0.0, self.distance_m]
    }

    /// World position of source Q (the right one).
    pub fn source_q(&self) -> [f64; 3] {
        [self.separation_m / 2.0 + self.lateral_offset_m, 0.0, self.distance_m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityReason {
    Feasible,
    BehindCamera,
    WithinFocalLength,
    DegenerateSeparation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    BeamsX,
    BeamsTrapezoid,
    OrbsX,
    OrbsTrapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FakeDepthPrediction {
    /// Signed depth from the closed form; infinite when the separation is degenerate.
    pub depth_m: f64,
    pub exists: bool,
    pub reason: FeasibilityReason,
    pub source: PredictionSource,
}

/// Depth from a left/right horizontal correspondence.
pub fn triangulate(rig: &StereoRig, left_u: f64, right_u: f64) -> Result<f64> {
    let disparity = left_u - right_u;
    if !(disparity > 0.0) {
        return Err(Error::Disparity(disparity));
    }
    Ok(rig.focal_length_px * rig.baseline_m / disparity)
}

/// Projects a world point into both cameras (continuous coordinates).
pub fn project(rig: &StereoRig, world: [f64; 3]) -> Result<(ImagePoint, ImagePoint)> {
    let [x, y, z] = world;
    if !(z > 0.0) {
        return Err(Error::BehindCamera(z));
    }
    let f = rig.focal_length_px;
    let half_b = rig.baseline_m / 2.0;
    let v = f * y / z;
    let left = ImagePoint::new(f * (x + half_b) / z, v, Camera::Left);
    let right = ImagePoint::new(f * (x - half_b) / z, v, Camera::Right);
    Ok((left, right))
}

/// Position of the lens-flare orb generated by a glare: the point reflection
/// through the principal point.
pub fn orb_position(glare: &ImagePoint) -> ImagePoint {
    ImagePoint::new(-glare.u, -glare.v, glare.camera)
}

fn classify(rig: &StereoRig, depth_m: f64, source: PredictionSource, degenerate: bool) -> FakeDepthPrediction {
    let reason = if degenerate {
        FeasibilityReason::DegenerateSeparation
    } else if depth_m <= 0.0 {
        FeasibilityReason::BehindCamera
    } else if depth_m <= rig.focal_length_m() {
        FeasibilityReason::WithinFocalLength
    } else {
        FeasibilityReason::Feasible
    };
    FakeDepthPrediction {
        depth_m,
        exists: reason == FeasibilityReason::Feasible,
        reason,
        source,
    }
}

/// Closed-form fake depth for one mechanism.
pub fn fake_depth(
    rig: &StereoRig,
    separation_m: f64,
    distance_m: f64,
    source: PredictionSource,
) -> FakeDepthPrediction {
    let b = rig.baseline_m;
    let d = separation_m;
    let z = distance_m;
    match source {
        PredictionSource::BeamsX => classify(rig, b / (d + b) * z, source, false),
        PredictionSource::OrbsX => classify(rig, -b / (d + b) * z, source, false),
        PredictionSource::BeamsTrapezoid | PredictionSource::OrbsTrapezoid if d == b => {
            classify(rig, f64::INFINITY, source, true)
        }
        PredictionSource::BeamsTrapezoid => classify(rig, b / (b - d) * z, source, false),
        PredictionSource::OrbsTrapezoid => classify(rig, b / (d - b) * z, source, false),
    }
}

/// All fake-depth predictions applicable to an attack.
///
/// The pattern selects the crossing (X) and/or parallel (trapezoid)
/// correspondences, a triangle yielding both; the mode selects beams and/or
/// orbs. Output order is BeamsX, BeamsTrapezoid, OrbsX, OrbsTrapezoid.
pub fn predict_fake_depth(rig: &StereoRig, geo: &AttackGeometry) -> Vec<FakeDepthPrediction> {
    let mut sources = Vec::with_capacity(4);
    if geo.mode.has_beams() {
        if geo.pattern.has_x() {
            sources.push(PredictionSource::BeamsX);
        }
        if geo.pattern.has_trapezoid() {
            sources.push(PredictionSource::BeamsTrapezoid);
        }
    }
    if geo.mode.has_orbs() {
        if geo.pattern.has_x() {
            sources.push(PredictionSource::OrbsX);
        }
        if geo.pattern.has_trapezoid() {
            sources.push(PredictionSource::OrbsTrapezoid);
        }
    }
    sources
        .into_iter()
        .map(|s| fake_depth(rig, geo.separation_m, geo.distance_m, s))
        .collect()
}

/// Rounds a depth to the nearest OA display step; ties round up and the
/// result is never below one step.
pub fn round_to_oa_step(depth_m: f64, step_m: f64) -> Result<f64> {
    if !(depth_m > 0.0 && depth_m.is_finite()) {
        return Err(Error::Domain(format!("depth must be positive, got {depth_m}")));
    }
    if !(step_m > 0.0 && step_m.is_finite()) {
        return Err(Error::Domain(format!("step must be positive, got {step_m}")));
    }
    let steps = (depth_m / step_m + 0.5).floor().max(1.0);
    Ok(steps * step_m)
}

/// Disparity of the crossed false correspondence in an X-shape beams attack.
pub fn fake_disparity(rig: &StereoRig, geo: &AttackGeometry) -> f64 {
    rig.focal_length_px * (geo.separation_m + rig.baseline_m) / geo.distance_m
}
