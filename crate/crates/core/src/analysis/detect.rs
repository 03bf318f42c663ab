use serde::{Deserialize, Serialize};

use super::{kv_line, opt};
use crate::depth::DepthMap;
use crate::geometry::{Camera, FakeDepthPrediction, ImagePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    /// Relative departure from the background depth that marks a pixel.
    pub deviation_frac: f64,
    /// Smallest blob, in pixels, reported as a detection.
    pub min_blob_area: usize,
    /// The avoidance controller reacts below this depth (meters).
    pub oa_threshold_m: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            deviation_frac: 0.3,
            min_blob_area: 25,
            oa_threshold_m: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FakeDepthReport {
    pub detected: bool,
    /// Centroid of the blob in left-image coordinates.
    pub blob_center: Option<ImagePoint>,
    /// Area of the largest deviating component, even when below the minimum.
    pub blob_area_px: usize,
    /// Median depth over the blob, meters.
    pub measured_depth_m: Option<f64>,
    pub predicted: Option<FakeDepthPrediction>,
    pub relative_error: Option<f64>,
    /// Detected and nearer than the avoidance threshold.
    pub success: bool,
}

impl FakeDepthReport {
    /// Attaches a prediction and fills in the relative error when both a
    /// feasible prediction and a measurement exist.
    pub fn with_prediction(mut self, pred: FakeDepthPrediction) -> Self {
        self.relative_error = match self.measured_depth_m {
            Some(m) if pred.exists => Some((m - pred.depth_m).abs() / pred.depth_m),
            _ => None,
        };
        self.predicted = Some(pred);
        self
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        kv_line(&mut s, "detected", self.detected);
        kv_line(&mut s, "blob_center_u", opt(self.blob_center.map(|c| c.u)));
        kv_line(&mut s, "blob_center_v", opt(self.blob_center.map(|c| c.v)));
        kv_line(&mut s, "blob_area_px", self.blob_area_px);
        kv_line(&mut s, "measured_depth_m", opt(self.measured_depth_m));
        if let Some(p) = &self.predicted {
            kv_line(
                &mut s,
                "predicted_source",
                serde_json::to_value(p.source).unwrap().as_str().unwrap_or(""),
            );
            kv_line(&mut s, "predicted_depth_m", p.depth_m);
            kv_line(&mut s, "predicted_exists", p.exists);
            kv_line(
                &mut s,
                "predicted_reason",
                serde_json::to_value(p.reason).unwrap().as_str().unwrap_or(""),
            );
        } else {
            kv_line(&mut s, "predicted_source", "none");
        }
        kv_line(&mut s, "relative_error", opt(self.relative_error));
        kv_line(&mut s, "success", self.success);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// 8-connected labelling of `mask` (row-major). Returns per-pixel labels
/// (0 = background, components numbered from 1 in raster order of their
/// first pixel) and the area of each component.
pub fn label_components(mask: &[bool], width: usize, height: usize) -> (Vec<u32>, Vec<usize>) {
    let mut labels = vec![0u32; mask.len()];
    let mut areas = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        areas.push(0);
        let id = areas.len() as u32;
        labels[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            areas[id as usize - 1] += 1;
            let (x, y) = ((i % width) as isize, (i / width) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if mask[j] && labels[j] == 0 {
                        labels[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
    }
    (labels, areas)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Finds the largest connected region whose depth departs from the known
/// background by more than `deviation_frac`.
pub fn detect_fake_depth(depth: &DepthMap, background_depth_m: f64, cfg: &DetectConfig) -> FakeDepthReport {
    let (w, h) = (depth.width, depth.height);
    let mask: Vec<bool> = depth
        .values
        .iter()
        .zip(&depth.valid)
        .map(|(&z, &ok)| ok && ((z as f64 - background_depth_m).abs() > cfg.deviation_frac * background_depth_m))
        .collect();
    let (labels, areas) = label_components(&mask, w, h);

    let mut report = FakeDepthReport {
        detected: false,
        blob_center: None,
        blob_area_px: 0,
        measured_depth_m: None,
        predicted: None,
        relative_error: None,
        success: false,
    };
    // largest area; the earliest component wins ties
    let Some((best, &area)) = areas.iter().enumerate().rev().max_by_key(|(_, &a)| a) else {
        return report;
    };
    report.blob_area_px = area;
    if area < cfg.min_blob_area {
        return report;
    }
    let id = best as u32 + 1;
    let mut zs = Vec::with_capacity(area);
    let (mut sx, mut sy) = (0.0, 0.0);
    for (i, _) in labels.iter().enumerate().filter(|(_, &l)| l == id) {
        zs.push(depth.values[i] as f64);
        sx += (i % w) as f64;
        sy += (i / w) as f64;
    }
    let n = zs.len() as f64;
    let measured = median(&mut zs);
    report.detected = true;
    report.blob_center = Some(depth.rig.from_pixel(sx / n, sy / n, Camera::Left));
    report.measured_depth_m = Some(measured);
    report.success = measured < cfg.oa_threshold_m;
    report
}
