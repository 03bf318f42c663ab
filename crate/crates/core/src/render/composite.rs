use serde::{Deserialize, Serialize};

use super::{AttackArtifacts, GlareSpec, StereoFrame};
use crate::error::{Error, Result};
use crate::exec::{for_each_chunk_mut, map_collect, Exec};
use crate::geometry::StereoRig;
use crate::raster::RgbImage;

/// Irradiance of a glare peak relative to full scale; the core saturates.
pub const GLARE_GAIN: f64 = 4.0;
/// Green-channel irradiance of an orb peak relative to full scale.
pub const ORB_GAIN: f64 = 0.9;
/// Red/blue share of an orb relative to its green channel.
pub const ORB_RB_RATIO: f64 = 0.35;

/// Contributions below this many counts are dropped.
const MIN_CONTRIBUTION: f64 = 0.25;

/// Global mean-targeting gain, never above unity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoExposure {
    pub enabled: bool,
    /// Target mean brightness as a fraction of full scale.
    pub target_mean: f64,
}

impl Default for AutoExposure {
    fn default() -> Self {
        AutoExposure {
            enabled: true,
            target_mean: 100.0 / 255.0,
        }
    }
}

impl AutoExposure {
    pub fn disabled() -> Self {
        AutoExposure {
            enabled: false,
            ..Self::default()
        }
    }

    /// `min(1, target / mean)` with `mean` in [0, 1].
    pub fn gain(&self, mean: f64) -> f64 {
        if !self.enabled || mean <= 0.0 {
            1.0
        } else {
            (self.target_mean / mean).min(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composited {
    pub frame: StereoFrame,
    pub gain_left: f64,
    pub gain_right: f64,
}

struct Splat {
    x: f64,
    y: f64,
    two_sigma_sq: f64,
    reach: f64,
    // per-channel peak irradiance in counts
    amp: [f64; 3],
}

fn splats(rig: &StereoRig, glares: &[GlareSpec], orbs: &[GlareSpec]) -> Vec<Splat> {
    let make = |g: &GlareSpec, amp: [f64; 3]| {
        let (x, y) = rig.to_pixel(&g.center);
        let peak = amp.iter().cloned().fold(0.0, f64::max);
        let reach = if peak > MIN_CONTRIBUTION {
            g.sigma_px * (2.0 * (peak / MIN_CONTRIBUTION).ln()).sqrt()
        } else {
            0.0
        };
        Splat {
            x,
            y,
            two_sigma_sq: 2.0 * g.sigma_px * g.sigma_px,
            reach,
            amp,
        }
    };
    let glare = glares.iter().map(|g| {
        let a = 255.0 * GLARE_GAIN * g.peak_intensity;
        make(g, [a, a, a])
    });
    let orb = orbs.iter().map(|g| {
        let a = 255.0 * ORB_GAIN * g.peak_intensity;
        make(g, [a * ORB_RB_RATIO, a, a * ORB_RB_RATIO])
    });
    glare.chain(orb).filter(|s| s.reach > 0.0).collect()
}

fn irradiance(base: &RgbImage, splats: &[Splat], exec: Exec) -> Vec<f64> {
    let w = base.width;
    let mut e: Vec<f64> = base.data.iter().map(|&v| v as f64).collect();
    for_each_chunk_mut(exec, &mut e, w * 3, |y, row| {
        let yf = y as f64;
        for s in splats.iter().filter(|s| (yf - s.y).abs() <= s.reach) {
            let dy2 = (yf - s.y) * (yf - s.y);
            let x0 = (s.x - s.reach).ceil().max(0.0) as usize;
            let x1 = ((s.x + s.reach).floor() as i64).min(w as i64 - 1);
            if x1 < x0 as i64 {
                continue;
            }
            for x in x0..=x1 as usize {
                let dx = x as f64 - s.x;
                let k = (-(dx * dx + dy2) / s.two_sigma_sq).exp();
                for c in 0..3 {
                    row[x * 3 + c] += s.amp[c] * k;
                }
            }
        }
    });
    e
}

fn expose(e: &[f64], width: usize, height: usize, ae: &AutoExposure, exec: Exec) -> (RgbImage, f64) {
    let rows: Vec<usize> = (0..height).collect();
    let row_len = width * 3;
    // row sums first, then a fixed-order total, so the mean is exec-independent
    let sums = map_collect(exec, &rows, |&y| {
        e[y * row_len..(y + 1) * row_len]
            .iter()
            .map(|v| v.clamp(0.0, 255.0))
            .sum::<f64>()
    });
    let mean = sums.iter().sum::<f64>() / (e.len() as f64 * 255.0);
    let gain = ae.gain(mean);
    let mut img = RgbImage::new(width, height);
    for_each_chunk_mut(exec, &mut img.data, row_len, |y, row| {
        for (o, v) in row.iter_mut().zip(&e[y * row_len..(y + 1) * row_len]) {
            *o = (v * gain).round().clamp(0.0, 255.0) as u8;
        }
    });
    (img, gain)
}

/// Adds glares (white) and orbs (green-dominant) to a rendered pair, then
/// applies auto exposure to the sensor irradiance before clipping to 8 bits.
pub fn composite(
    rig: &StereoRig,
    frame: &StereoFrame,
    artifacts: &AttackArtifacts,
    exposure: &AutoExposure,
) -> Result<StereoFrame> {
    composite_detailed(rig, frame, artifacts, exposure, Exec::default()).map(|c| c.frame)
}

pub fn composite_detailed(
    rig: &StereoRig,
    frame: &StereoFrame,
    artifacts: &AttackArtifacts,
    exposure: &AutoExposure,
    exec: Exec,
) -> Result<Composited> {
    let (w, h) = (rig.image_width_px, rig.image_height_px);
    for (name, img) in [("left", &frame.left), ("right", &frame.right)] {
        if img.width != w || img.height != h {
            return Err(Error::Geometry(format!(
                "{name} image is {}x{}, rig expects {w}x{h}",
                img.width, img.height
            )));
        }
    }
    let left_e = irradiance(
        &frame.left,
        &splats(rig, &artifacts.left_glares, &artifacts.left_orbs),
        exec,
    );
    let right_e = irradiance(
        &frame.right,
        &splats(rig, &artifacts.right_glares, &artifacts.right_orbs),
        exec,
    );
    let (left, gain_left) = expose(&left_e, w, h, exposure, exec);
    let (right, gain_right) = expose(&right_e, w, h, exposure, exec);
    Ok(Composited {
        frame: StereoFrame {
            left,
            right,
            width: w,
            height: h,
            timestamp_s: frame.timestamp_s,
        },
        gain_left,
        gain_right,
    })
}
