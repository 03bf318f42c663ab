//! Fake-obstacle detection on depth maps, expected-depth tables and the
//! over-saturation detector.

mod detect;
mod saturation;
mod table;

pub use detect::{detect_fake_depth, label_components, DetectConfig, FakeDepthReport};
pub use saturation::{detect_saturation, SaturationReport, Verdict, DEFAULT_SAT_FRACTION, DEFAULT_SAT_LEVEL};
pub use table::{expected_table, table_csv, ExpectedRow, TABLE_CSV_HEADER};

/// Renders `key=value` lines; `None` prints as `none`.
pub(crate) fn kv_line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    use std::fmt::Write;
    let _ = writeln!(out, "{key}={value}");
}

pub(crate) fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}
