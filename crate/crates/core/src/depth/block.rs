// Sum-of-absolute-differences block matching.

use super::select::select_row;
use super::{DisparityMap, MatcherConfig};
use crate::exec::{for_each_chunk_pair_mut, Exec};
use crate::raster::GrayImage;

/// Rows handled together so the block's column sums can be rolled downwards.
const BAND_ROWS: usize = 16;

/// Adds `sign * |left(x) - right(x - d)|` for row `y` into column sums laid
/// out `[x * nd + d]`. `rev` is the right row reversed, which makes the
/// partner pixels contiguous in `d`. Sums never exceed `255 * block_size`, so
/// wrapping arithmetic is exact here.
fn add_row(colsum: &mut [i32], left: &[u8], rev: &[u8], nd: usize, sign: i32) {
    let w = left.len();
    for (x, &a) in left.iter().enumerate() {
        let n = nd.min(x + 1);
        let partners = &rev[w - 1 - x..w - 1 - x + n];
        for (acc, &b) in colsum[x * nd..x * nd + n].iter_mut().zip(partners) {
            *acc = acc.wrapping_add(sign.wrapping_mul(a.abs_diff(b) as i32));
        }
    }
}

/// SAD costs for one row from its column sums, laid out `[x * nd + d]`.
/// Only the candidates with `d <= x - r` are meaningful.
fn window_costs(colsum: &[i32], w: usize, r: usize, nd: usize, costs: &mut [u32]) {
    if w < 2 * r + 1 {
        return;
    }
    let mut window = vec![0i32; nd];
    for x in 0..2 * r + 1 {
        for (s, &c) in window.iter_mut().zip(&colsum[x * nd..(x + 1) * nd]) {
            *s += c;
        }
    }
    for (o, &v) in costs[r * nd..(r + 1) * nd].iter_mut().zip(&window) {
        *o = v as u32;
    }
    for x in r + 1..w - r {
        let (add, sub) = (
            &colsum[(x + r) * nd..(x + r + 1) * nd],
            &colsum[(x - r - 1) * nd..(x - r) * nd],
        );
        for (((s, &a), &b), o) in window
            .iter_mut()
            .zip(add)
            .zip(sub)
            .zip(&mut costs[x * nd..(x + 1) * nd])
        {
            *s = s.wrapping_add(a.wrapping_sub(b));
            *o = *s as u32;
        }
    }
}

#[cfg(test)]
fn row_costs(left: &GrayImage, right: &GrayImage, y: usize, r: usize, nd: usize) -> Vec<u32> {
    let w = left.width;
    let mut colsum = vec![0i32; w * nd];
    for yy in y - r..=y + r {
        let rev: Vec<u8> = right.row(yy).iter().rev().copied().collect();
        add_row(&mut colsum, left.row(yy), &rev, nd, 1);
    }
    let mut costs = vec![0u32; w * nd];
    window_costs(&colsum, w, r, nd, &mut costs);
    costs
}

pub(super) fn match_block_sad(left: &GrayImage, right: &GrayImage, cfg: &MatcherConfig, exec: Exec) -> DisparityMap {
    let (w, h) = (left.width, left.height);
    let r = cfg.block_size / 2;
    let nd = cfg.max_disparity.min(w) + 1;
    let mut out = DisparityMap::invalid(w, h, cfg.max_disparity as f32);
    if h < 2 * r + 1 {
        return out;
    }
    let rev: Vec<Vec<u8>> = (0..h).map(|y| right.row(y).iter().rev().copied().collect()).collect();
    let band = BAND_ROWS * w;
    for_each_chunk_pair_mut(exec, &mut out.values, band, &mut out.valid, band, |b, values, valid| {
        let y0 = (b * BAND_ROWS).max(r);
        let y1 = ((b + 1) * BAND_ROWS).min(h - r);
        if y0 >= y1 {
            return;
        }
        let mut colsum = vec![0i32; w * nd];
        let mut costs = vec![0u32; w * nd];
        for yy in y0 - r..y0 + r {
            add_row(&mut colsum, left.row(yy), &rev[yy], nd, 1);
        }
        for y in y0..y1 {
            add_row(&mut colsum, left.row(y + r), &rev[y + r], nd, 1);
            window_costs(&colsum, w, r, nd, &mut costs);
            let o = (y - b * BAND_ROWS) * w;
            select_row(w, r, cfg, &costs, nd, &mut values[o..o + w], &mut valid[o..o + w]);
            add_row(&mut colsum, left.row(y - r), &rev[y - r], nd, -1);
        }
    });
    out
}
