//! ASCII PLY point clouds with `float x, y, z` vertex properties.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn encode_ply(points: &[[f64; 3]]) -> String {
    let mut out = String::with_capacity(128 + points.len() * 32);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", points.len());
    out.push_str("property float x\nproperty float y\nproperty float z\nend_header\n");
    for p in points {
        let _ = writeln!(out, "{:.6} {:.6} {:.6}", p[0] as f32, p[1] as f32, p[2] as f32);
    }
    out
}

pub fn decode_ply(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(Error::Format("missing ply magic".into()));
    }
    let mut count = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "end_header" {
            break;
        }
        if let Some(rest) = line.strip_prefix("element vertex ") {
            count = Some(
                rest.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Format(format!("bad vertex count {rest:?}")))?,
            );
        } else if line.starts_with("format") && line != "format ascii 1.0" {
            return Err(Error::Format(format!("unsupported PLY format {line:?}")));
        }
    }
    let count = count.ok_or_else(|| Error::Format("PLY header lacks vertex element".into()))?;
    let mut points = Vec::with_capacity(count);
    for line in lines.take(count) {
        let vals: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|s| s.parse().map_err(|_| Error::Format(format!("bad coordinate {s:?}"))))
            .collect::<Result<_>>()?;
        let [x, y, z] = vals[..] else {
            return Err(Error::Format("vertex needs three coordinates".into()));
        };
        points.push([x, y, z]);
    }
    if points.len() != count {
        return Err(Error::Format(format!(
            "expected {count} vertices, found {}",
            points.len()
        )));
    }
    Ok(points)
}

pub fn write_ply(path: impl AsRef<Path>, points: &[[f64; 3]]) -> Result<()> {
    fs::write(path, encode_ply(points))?;
    Ok(())
}

pub fn read_ply(path: impl AsRef<Path>) -> Result<Vec<[f64; 3]>> {
    decode_ply(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_text() {
        let s = encode_ply(&[[0.0, -0.5, 4.0]]);
        assert_eq!(
            s,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n\
             property float z\nend_header\n0.000000 -0.500000 4.000000\n"
        );
        assert_eq!(decode_ply(&s).unwrap(), vec![[0.0, -0.5, 4.0]]);
    }

    #[test]
    fn empty_cloud() {
        assert!(decode_ply(&encode_ply(&[])).unwrap().is_empty());
        assert!(decode_ply("ply\nformat binary_little_endian 1.0\nend_header\n").is_err());
    }
}
