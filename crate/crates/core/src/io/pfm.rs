//! Grayscale PFM (`Pf`): little-endian f32, scanlines stored bottom-up.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Single-channel float raster in top-down row order.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

pub fn encode_pfm(map: &FloatMap) -> Vec<u8> {
    let mut out = format!("Pf\n{} {}\n-1.0\n", map.width, map.height).into_bytes();
    out.reserve(map.data.len() * 4);
    for y in (0..map.height).rev() {
        for v in &map.data[y * map.width..(y + 1) * map.width] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8]) -> Result<FloatMap> {
    let mut lines = Vec::with_capacity(3);
    let mut pos = 0;
    while lines.len() < 3 {
        let end = bytes[pos..]
            .iter()
            .position(|&c| c == b'\n')
            .ok_or_else(|| Error::Format("truncated PFM header".into()))?;
        let line =
            std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| Error::Format("non-UTF-8 PFM header".into()))?;
        let line = line.trim();
        pos += end + 1;
        if !line.is_empty() {
            lines.push(line.to_string());
        }
    }
    match lines[0].as_str() {
        "Pf" => {}
        "PF" => return Err(Error::Format("colour PFM is not supported".into())),
        other => return Err(Error::Format(format!("bad PFM magic {other:?}"))),
    }
    let dims: Vec<usize> = lines[1]
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Format(format!("bad PFM dimension {s:?}"))))
        .collect::<Result<_>>()?;
    let [width, height] = dims[..] else {
        return Err(Error::Format("PFM dimensions need two fields".into()));
    };
    let scale: f32 = lines[2]
        .parse()
        .map_err(|_| Error::Format(format!("bad PFM scale {:?}", lines[2])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Format("PFM scale must be non-zero".into()));
    }
    let little = scale < 0.0;
    let need = width * height * 4;
    let raw = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Format(format!("truncated PFM raster: need {need} bytes")))?;
    let mut data = vec![0f32; width * height];
    for (i, chunk) in raw.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let (row_from_bottom, x) = (i / width, i % width);
        data[(height - 1 - row_from_bottom) * width + x] = v;
    }
    Ok(FloatMap { width, height, data })
}

pub fn write_pfm(path: impl AsRef<Path>, map: &FloatMap) -> Result<()> {
    fs::write(path, encode_pfm(map))?;
    Ok(())
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<FloatMap> {
    decode_pfm(&fs::read(path)?)
}
