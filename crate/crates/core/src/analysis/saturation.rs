use serde::{Deserialize, Serialize};

use super::kv_line;
use crate::raster::RgbImage;
use crate::render::StereoFrame;

pub const DEFAULT_SAT_LEVEL: u8 = 250;
/// 0.2% of the frame.
pub const DEFAULT_SAT_FRACTION: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Clean,
    Suspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    #[serde(skip)]
    pub left_mask: Vec<bool>,
    #[serde(skip)]
    pub right_mask: Vec<bool>,
    pub left_fraction: f64,
    pub right_fraction: f64,
    /// The larger of the two per-camera fractions.
    pub flagged_fraction: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl SaturationReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        kv_line(&mut s, "left_fraction", self.left_fraction);
        kv_line(&mut s, "right_fraction", self.right_fraction);
        kv_line(&mut s, "flagged_fraction", self.flagged_fraction);
        kv_line(&mut s, "threshold", self.threshold);
        let verdict = match self.verdict {
            Verdict::Clean => "clean",
            Verdict::Suspect => "suspect",
        };
        kv_line(&mut s, "verdict", verdict);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn flag(img: &RgbImage, level: u8) -> (Vec<bool>, f64) {
    let mask: Vec<bool> = img
        .data
        .chunks_exact(3)
        .map(|p| p.iter().all(|&c| c >= level))
        .collect();
    let n = mask.iter().filter(|&&m| m).count();
    let frac = if mask.is_empty() {
        0.0
    } else {
        n as f64 / mask.len() as f64
    };
    (mask, frac)
}

/// Flags pixels saturated in every channel; the frame is suspect when either
/// camera's flagged fraction exceeds `frac_threshold`.
pub fn detect_saturation(frame: &StereoFrame, sat_level: u8, frac_threshold: f64) -> SaturationReport {
    let level = sat_level.max(1);
    let (left_mask, left_fraction) = flag(&frame.left, level);
    let (right_mask, right_fraction) = flag(&frame.right, level);
    let flagged_fraction = left_fraction.max(right_fraction);
    SaturationReport {
        left_mask,
        right_mask,
        left_fraction,
        right_fraction,
        flagged_fraction,
        threshold: frac_threshold,
        verdict: if flagged_fraction > frac_threshold {
            Verdict::Suspect
        } else {
            Verdict::Clean
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: usize, h: usize, lit: usize) -> StereoFrame {
        let mut l = RgbImage::new(w, h);
        for i in 0..lit {
            l.put_pixel(i % w, i / w, [255, 255, 255]);
        }
        l.put_pixel(w - 1, h - 1, [255, 255, 200]);
        StereoFrame::new(l, RgbImage::new(w, h)).unwrap()
    }

    #[test]
    fn all_channels_must_saturate() {
        let r = detect_saturation(&frame(10, 10, 0), DEFAULT_SAT_LEVEL, DEFAULT_SAT_FRACTION);
        assert_eq!(r.flagged_fraction, 0.0);
        assert_eq!(r.verdict, Verdict::Clean);
    }

    #[test]
    fn verdict_follows_threshold() {
        let r = detect_saturation(&frame(10, 10, 3), DEFAULT_SAT_LEVEL, 0.03);
        assert_eq!(r.left_fraction, 0.03);
        assert_eq!(r.verdict, Verdict::Clean);
        let r = detect_saturation(&frame(10, 10, 4), DEFAULT_SAT_LEVEL, 0.03);
        assert_eq!(r.verdict, Verdict::Suspect);
        assert_eq!(r.right_fraction, 0.0);
        assert!(r.to_kv().ends_with("verdict=suspect\n"));
    }
}
