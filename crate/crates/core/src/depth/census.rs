use crate::raster::GrayImage;

pub const CENSUS_RADIUS: usize = 2;
/// Bits in a 5x5 census signature (centre excluded).
pub const CENSUS_BITS: u32 = 24;

/// 5x5 census transform: bit set where the neighbour is darker than the
/// centre, neighbours in raster order. Pixels closer than two to the border
/// get an all-zero signature.
pub fn census_transform(img: &GrayImage) -> Vec<u32> {
    let (w, h) = (img.width, img.height);
    let r = CENSUS_RADIUS;
    let mut out = vec![0u32; w * h];
    if w <= 2 * r || h <= 2 * r {
        return out;
    }
    for y in r..h - r {
        for x in r..w - r {
            let c = img.get(x, y);
            let mut sig = 0u32;
            for j in y - r..=y + r {
                let row = img.row(j);
                for (i, &v) in row[x - r..=x + r].iter().enumerate() {
                    if j == y && i == r {
                        continue;
                    }
                    sig = (sig << 1) | (v < c) as u32;
                }
            }
            out[y * w + x] = sig;
        }
    }
    out
}

/// True where the whole 5x5 window equals its centre pixel. Border pixels
/// are never flat.
pub(crate) fn flat_windows(img: &GrayImage) -> Vec<bool> {
    let (w, h) = (img.width, img.height);
    let r = CENSUS_RADIUS;
    let mut out = vec![false; w * h];
    if w <= 2 * r || h <= 2 * r {
        return out;
    }
    for y in r..h - r {
        for x in r..w - r {
            let c = img.get(x, y);
            out[y * w + x] = (y - r..=y + r).all(|j| img.row(j)[x - r..=x + r].iter().all(|&v| v == c));
        }
    }
    out
}
