use serde::{Deserialize, Serialize};

use super::texture::surface_texture;
use super::StereoFrame;
use crate::error::{Error, Result};
use crate::exec::{for_each_chunk_mut, Exec};
use crate::geometry::StereoRig;
use crate::raster::RgbImage;

/// Depth at which `FlatTextured` backgrounds are rendered.
pub const FLAT_DEPTH_M: f64 = 10.0;
pub const MAX_AMBIENT_LUX: f64 = 4000.0;

/// Nominal texel footprint on the image, in pixels.
const TEXEL_PX: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// Textured plane at [`FLAT_DEPTH_M`]; carries its own texture seed.
    FlatTextured {
        seed: u64,
    },
    FrontoparallelWall {
        depth_m: f64,
    },
    /// Two side walls reaching the image border at `near_m` and a back wall at `far_m`.
    Corridor {
        near_m: f64,
        far_m: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub background: Background,
    /// Brightness proxy in [0, 4000]; 0 renders a black night scene.
    pub ambient_lux: f64,
    pub texture_seed: u64,
}

impl SceneSpec {
    pub fn wall(depth_m: f64, ambient_lux: f64) -> Self {
        SceneSpec {
            background: Background::FrontoparallelWall { depth_m },
            ambient_lux,
            texture_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=MAX_AMBIENT_LUX).contains(&self.ambient_lux) {
            return Err(Error::Domain(format!(
                "ambient lux must lie in [0, {MAX_AMBIENT_LUX}], got {}",
                self.ambient_lux
            )));
        }
        match self.background {
            Background::FrontoparallelWall { depth_m } if !(depth_m > 0.0 && depth_m.is_finite()) => {
                Err(Error::Domain(format!("wall depth must be positive, got {depth_m}")))
            }
            Background::Corridor { near_m, far_m } if !(near_m > 0.0 && near_m < far_m && far_m.is_finite()) => Err(
                Error::Domain(format!("corridor needs 0 < near < far, got near={near_m} far={far_m}")),
            ),
            _ => Ok(()),
        }
    }

    /// Depth used as the reference background for fake-depth detection.
    pub fn nominal_depth_m(&self) -> f64 {
        match self.background {
            Background::FlatTextured { .. } => FLAT_DEPTH_M,
            Background::FrontoparallelWall { depth_m } => depth_m,
            Background::Corridor { far_m, .. } => far_m,
        }
    }
}

struct Hit {
    depth: f64,
    s: f64,
    t: f64,
    seed: u64,
}

fn cast(rig: &StereoRig, scene: &SceneSpec, cam_x: f64, x: f64, y: f64) -> Hit {
    let f = rig.focal_length_px;
    let dx = (x - rig.principal_point.0) / f;
    let dy = (y - rig.principal_point.1) / f;
    let plane = |depth: f64, seed: u64| {
        let cell = depth * TEXEL_PX / f;
        Hit {
            depth,
            s: (cam_x + dx * depth) / cell,
            t: dy * depth / cell,
            seed,
        }
    };
    match scene.background {
        Background::FlatTextured { seed } => plane(FLAT_DEPTH_M, seed),
        Background::FrontoparallelWall { depth_m } => plane(depth_m, scene.texture_seed),
        Background::Corridor { near_m, far_m } => {
            let half_width = near_m * (rig.image_width_px as f64 / 2.0) / f;
            let side = if dx > 0.0 {
                Some(((half_width - cam_x) / dx, 1u64))
            } else if dx < 0.0 {
                Some(((-half_width - cam_x) / dx, 2u64))
            } else {
                None
            };
            match side {
                Some((depth, wall)) if depth < far_m => {
                    let cell = near_m * TEXEL_PX / f;
                    Hit {
                        depth,
                        s: depth / cell,
                        t: dy * depth / cell,
                        seed: scene.texture_seed.wrapping_add(wall),
                    }
                }
                _ => plane(far_m, scene.texture_seed),
            }
        }
    }
}

/// True depth seen by each left-camera pixel, row-major.
pub fn ground_truth_depth(rig: &StereoRig, scene: &SceneSpec) -> Vec<f64> {
    let cam_x = -rig.baseline_m / 2.0;
    let (w, h) = (rig.image_width_px, rig.image_height_px);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            out.push(cast(rig, scene, cam_x, x as f64, y as f64).depth);
        }
    }
    out
}

fn render_camera(rig: &StereoRig, scene: &SceneSpec, cam_x: f64, exec: Exec) -> RgbImage {
    let (w, h) = (rig.image_width_px, rig.image_height_px);
    let mut img = RgbImage::new(w, h);
    let level = scene.ambient_lux / MAX_AMBIENT_LUX * 255.0;
    if level <= 0.0 {
        return img;
    }
    for_each_chunk_mut(exec, &mut img.data, w * 3, |y, row| {
        for x in 0..w {
            let hit = cast(rig, scene, cam_x, x as f64, y as f64);
            let n = surface_texture(hit.s, hit.t, hit.seed);
            let v = (level * (0.75 + 0.25 * n)).round().clamp(0.0, 255.0) as u8;
            row[x * 3..x * 3 + 3].fill(v);
        }
    });
    img
}

/// Renders a rectified stereo pair of the background scene.
pub fn render_scene(rig: &StereoRig, scene: &SceneSpec) -> Result<StereoFrame> {
    render_scene_with(rig, scene, Exec::default())
}

pub fn render_scene_with(rig: &StereoRig, scene: &SceneSpec, exec: Exec) -> Result<StereoFrame> {
    rig.validate()?;
    scene.validate()?;
    let half_b = rig.baseline_m / 2.0;
    let left = render_camera(rig, scene, -half_b, exec);
    let right = render_camera(rig, scene, half_b, exec);
    StereoFrame::new(left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn night_is_black() {
        let rig = StereoRig::default();
        let f = render_scene(&rig, &SceneSpec::wall(4.0, 0.0)).unwrap();
        assert!(f.left.data.iter().chain(&f.right.data).all(|&v| v == 0));
    }

    #[test]
    fn deterministic_and_exec_independent() {
        let rig = StereoRig::new(700.0, 0.12, 96, 48).unwrap();
        let scene = SceneSpec {
            background: Background::Corridor {
                near_m: 2.0,
                far_m: 12.0,
            },
            ambient_lux: 3000.0,
            texture_seed: 9,
        };
        let a = render_scene_with(&rig, &scene, Exec::Sequential).unwrap();
        let b = render_scene_with(&rig, &scene, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, render_scene(&rig, &scene).unwrap());
    }

    #[test]
    fn corridor_depths_span_near_to_far() {
        let rig = StereoRig::default();
        let scene = SceneSpec {
            background: Background::Corridor {
                near_m: 2.0,
                far_m: 10.0,
            },
            ambient_lux: 4000.0,
            texture_seed: 0,
        };
        let depth = ground_truth_depth(&rig, &scene);
        let min = depth.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = depth.iter().cloned().fold(0.0, f64::max);
        assert!(min < 2.2 && min > 1.8, "min {min}");
        assert_eq!(max, 10.0);
    }

    #[test]
    fn brightness_scales_with_lux() {
        let rig = StereoRig::new(700.0, 0.12, 64, 32).unwrap();
        let mean = |lux| {
            let f = render_scene(&rig, &SceneSpec::wall(4.0, lux)).unwrap();
            f.left.data.iter().map(|&v| v as f64).sum::<f64>() / f.left.data.len() as f64
        };
        let (full, half) = (mean(4000.0), mean(2000.0));
        assert!((full / half - 2.0).abs() < 0.02, "{full} {half}");
    }

    #[test]
    fn rejects_invalid_scene() {
        assert!(SceneSpec::wall(4.0, 5000.0).validate().is_err());
        assert!(SceneSpec::wall(-1.0, 0.0).validate().is_err());
        let c = SceneSpec {
            background: Background::Corridor {
                near_m: 5.0,
                far_m: 3.0,
            },
            ambient_lux: 0.0,
            texture_seed: 0,
        };
        assert!(c.validate().is_err());
    }
}
