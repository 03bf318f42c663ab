use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{fake_depth, round_to_oa_step, PredictionSource, StereoRig};

pub const TABLE_CSV_HEADER: &str = "z_m,x_raw_m,x_expected_m,trapezoid_source,trapezoid_raw_m,trapezoid_expected_m";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedRow {
    pub distance_m: f64,
    pub x_raw_m: f64,
    pub x_expected_m: f64,
    /// Orbs when the sources are wider than the baseline, beams when narrower;
    /// `None` for a degenerate separation.
    pub trapezoid_source: Option<PredictionSource>,
    pub trapezoid_raw_m: Option<f64>,
    pub trapezoid_expected_m: Option<f64>,
}

/// Expected fake depth for each distance, rounded to the OA display step.
pub fn expected_table(
    rig: &StereoRig,
    separation_m: f64,
    distances_m: &[f64],
    step_m: f64,
) -> Result<Vec<ExpectedRow>> {
    rig.validate()?;
    let b = rig.baseline_m;
    let trap = if separation_m > b {
        Some(PredictionSource::OrbsTrapezoid)
    } else if separation_m < b {
        Some(PredictionSource::BeamsTrapezoid)
    } else {
        None
    };
    distances_m
        .iter()
        .map(|&z| {
            let x = fake_depth(rig, separation_m, z, PredictionSource::BeamsX);
            let t = trap.map(|s| fake_depth(rig, separation_m, z, s)).filter(|p| p.exists);
            Ok(ExpectedRow {
                distance_m: z,
                x_raw_m: x.depth_m,
                x_expected_m: round_to_oa_step(x.depth_m, step_m)?,
                trapezoid_source: t.map(|p| p.source),
                trapezoid_raw_m: t.map(|p| p.depth_m.abs()),
                trapezoid_expected_m: t.map(|p| round_to_oa_step(p.depth_m.abs(), step_m)).transpose()?,
            })
        })
        .collect()
}

pub fn table_csv(rows: &[ExpectedRow]) -> String {
    let mut out = String::from(TABLE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let src = match r.trapezoid_source {
            Some(PredictionSource::OrbsTrapezoid) => "orbs_trapezoid",
            Some(PredictionSource::BeamsTrapezoid) => "beams_trapezoid",
            _ => "",
        };
        let f = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.4}"));
        out.push_str(&format!(
            "{},{:.4},{},{},{},{}\n",
            r.distance_m,
            r.x_raw_m,
            r.x_expected_m,
            src,
            f(r.trapezoid_raw_m),
            r.trapezoid_expected_m.map_or(String::new(), |v| v.to_string())
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn distances() -> Vec<f64> {
        (1..=16).map(f64::from).collect()
    }

    #[test]
    fn x_column_reference_rows() {
        let rig = StereoRig::default();
        let rows = expected_table(&rig, 1.0, &distances(), 0.5).unwrap();
        assert_eq!(rows[3].x_expected_m, 0.5);
        assert_eq!(rows[7].x_expected_m, 1.0);
        assert_eq!(rows[15].x_expected_m, 1.5);
        assert!((rows[3].x_raw_m - 0.428_571).abs() < 1e-5);
    }

    #[test]
    fn trapezoid_source_follows_regime() {
        let rig = StereoRig::default();
        let wide = expected_table(&rig, 1.0, &[4.0], 0.5).unwrap();
        assert_eq!(wide[0].trapezoid_source, Some(PredictionSource::OrbsTrapezoid));
        let narrow = expected_table(&rig, 0.06, &[4.0], 0.5).unwrap();
        assert_eq!(narrow[0].trapezoid_source, Some(PredictionSource::BeamsTrapezoid));
        assert!((narrow[0].trapezoid_raw_m.unwrap() - 8.0).abs() < 1e-9);
        let equal = expected_table(&rig, 0.12, &[4.0], 0.5).unwrap();
        assert_eq!(equal[0].trapezoid_expected_m, None);
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let rig = StereoRig::default();
        let csv = table_csv(&expected_table(&rig, 1.0, &distances(), 0.5).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[0], TABLE_CSV_HEADER);
        assert_eq!(lines[4], "4,0.4286,0.5,orbs_trapezoid,0.5455,0.5");
    }
}
