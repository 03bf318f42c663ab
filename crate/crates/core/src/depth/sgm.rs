// Semi-global matching over a census/Hamming cost volume.

use super::census::{census_transform, flat_windows, CENSUS_BITS, CENSUS_RADIUS};
use super::select::select_row;
use super::{DisparityMap, MatcherConfig};
use crate::exec::{for_each_chunk_mut, for_each_chunk_pair_mut, Exec};
use crate::raster::GrayImage;

/// Hamming costs, laid out `[(y * w + x) * nd + d]`. Candidates whose right
/// pixel falls inside the census border get the maximum cost.
fn cost_volume(left: &GrayImage, right: &GrayImage, nd: usize, exec: Exec) -> Vec<u8> {
    let (w, h) = (left.width, left.height);
    let cl = census_transform(left);
    let cr = census_transform(right);
    let mut vol = vec![CENSUS_BITS as u8; w * h * nd];
    for_each_chunk_mut(exec, &mut vol, w * nd, |y, row| {
        let sl = &cl[y * w..(y + 1) * w];
        // reversed right row: partners x - d become contiguous in d
        let rev: Vec<u32> = cr[y * w..(y + 1) * w].iter().rev().copied().collect();
        for x in CENSUS_RADIUS..w {
            let n = nd.min(x - CENSUS_RADIUS + 1);
            let partners = &rev[w - 1 - x..w - 1 - x + n];
            for (c, &r) in row[x * nd..x * nd + n].iter_mut().zip(partners) {
                *c = (sl[x] ^ r).count_ones() as u8;
            }
        }
    });
    vol
}

/// One path step: `cur = cost + min(prev, prev±1 + p1, min(prev) + p2) - min(prev)`.
/// Takes `min(prev)` and returns `min(cur)`. Values are bounded (see
/// [`aggregate`]), so the arithmetic is written wrapping to keep the loop free
/// of overflow checks.
#[inline]
fn step(cost: &[u8], prev: &[i16], min_prev: i16, cur: &mut [i16], p1: i16, p2: i16) -> i16 {
    let nd = cost.len();
    let jump = min_prev.wrapping_add(p2);
    if nd == 1 {
        cur[0] = cost[0] as i16;
        return cur[0];
    }
    cur[0] = (cost[0] as i16)
        .wrapping_add(prev[0].min(prev[1].wrapping_add(p1)).min(jump))
        .wrapping_sub(min_prev);
    let last = nd - 1;
    cur[last] = (cost[last] as i16)
        .wrapping_add(prev[last].min(prev[last - 1].wrapping_add(p1)).min(jump))
        .wrapping_sub(min_prev);
    let mut lowest = cur[0].min(cur[last]);
    // interior written as straight zips so the loop vectorises
    let (lo, mid, hi) = (&prev[..nd - 2], &prev[1..nd - 1], &prev[2..]);
    for ((((o, &c), &a), &m), &b) in cur[1..last].iter_mut().zip(&cost[1..last]).zip(lo).zip(mid).zip(hi) {
        *o = (c as i16)
            .wrapping_add(m.min(a.min(b).wrapping_add(p1)).min(jump))
            .wrapping_sub(min_prev);
        lowest = lowest.min(*o);
    }
    lowest
}

/// Path start: the raw costs. Returns their minimum.
#[inline]
fn start(cost: &[u8], cur: &mut [i16]) -> i16 {
    let mut lowest = i16::MAX;
    for (c, &v) in cur.iter_mut().zip(cost) {
        *c = v as i16;
        lowest = lowest.min(*c);
    }
    lowest
}

#[inline]
fn accumulate(sum: &mut [u16], path: &[i16]) {
    for (s, &v) in sum.iter_mut().zip(path) {
        *s = s.wrapping_add(v as u16);
    }
}

/// Both horizontal paths of every row. The row of `sum` is overwritten.
fn aggregate_rows(vol: &[u8], sum: &mut [u16], w: usize, nd: usize, p1: i16, p2: i16, exec: Exec) {
    for_each_chunk_mut(exec, sum, w * nd, |y, srow| {
        let crow = &vol[y * w * nd..(y + 1) * w * nd];
        let mut prev = vec![0i16; nd];
        let mut cur = vec![0i16; nd];
        let mut low = 0;
        for x in 0..w {
            let c = &crow[x * nd..(x + 1) * nd];
            low = if x == 0 {
                start(c, &mut cur)
            } else {
                step(c, &prev, low, &mut cur, p1, p2)
            };
            for (o, &v) in srow[x * nd..(x + 1) * nd].iter_mut().zip(&cur) {
                *o = v as u16;
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        for x in (0..w).rev() {
            let c = &crow[x * nd..(x + 1) * nd];
            low = if x == w - 1 {
                start(c, &mut cur)
            } else {
                step(c, &prev, low, &mut cur, p1, p2)
            };
            accumulate(&mut srow[x * nd..(x + 1) * nd], &cur);
            std::mem::swap(&mut prev, &mut cur);
        }
    });
}

/// The three paths entering each row from the row above (`down`) or below:
/// straight and both diagonals. Path state is kept as `[x][path][d]`, with
/// each path's minimum alongside as `[x][path]`.
#[allow(clippy::too_many_arguments)]
fn sweep_vertical(
    vol: &[u8],
    sum: &mut [u16],
    w: usize,
    h: usize,
    nd: usize,
    down: bool,
    p1: i16,
    p2: i16,
    exec: Exec,
) {
    const DX: [isize; 3] = [0, 1, -1];
    let stride = w * nd;
    let mut prev = vec![0i16; 3 * stride];
    let mut cur = vec![0i16; 3 * stride];
    let mut prev_low = vec![0i16; 3 * w];
    let mut cur_low = vec![0i16; 3 * w];
    let ys: Vec<usize> = if down { (0..h).collect() } else { (0..h).rev().collect() };
    for (k, &y) in ys.iter().enumerate() {
        let crow = &vol[y * stride..(y + 1) * stride];
        let srow = &mut sum[y * stride..(y + 1) * stride];
        let (prev_ref, prev_low_ref) = (&prev, &prev_low);
        for_each_chunk_pair_mut(exec, &mut cur, 3 * nd, &mut cur_low, 3, |x, lr, low| {
            let c = &crow[x * nd..(x + 1) * nd];
            for (p, &dx) in DX.iter().enumerate() {
                let out = &mut lr[p * nd..(p + 1) * nd];
                let px = x as isize - dx;
                low[p] = if k == 0 || px < 0 || px >= w as isize {
                    start(c, out)
                } else {
                    let i = px as usize * 3 + p;
                    step(c, &prev_ref[i * nd..(i + 1) * nd], prev_low_ref[i], out, p1, p2)
                };
            }
        });
        let cur_ref = &cur;
        for_each_chunk_mut(exec, srow, nd, |x, s| {
            let paths = &cur_ref[3 * x * nd..3 * (x + 1) * nd];
            let (a, rest) = paths.split_at(nd);
            let (b, c) = rest.split_at(nd);
            for (((o, &a), &b), &c) in s.iter_mut().zip(a).zip(b).zip(c) {
                *o = o.wrapping_add(a.wrapping_add(b).wrapping_add(c) as u16);
            }
        });
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut prev_low, &mut cur_low);
    }
}

/// Summed path costs over all eight directions: both horizontals per row,
/// then one downward and one upward sweep carrying three paths each.
pub(super) fn aggregate(vol: &[u8], w: usize, h: usize, nd: usize, p1: u16, p2: u16, exec: Exec) -> Vec<u16> {
    // path values stay below 24 + 2 * p2, and p2 is capped so that both they
    // and the eight-path sum fit
    debug_assert!(p1 <= p2 && p2 <= super::MAX_SGM_P2);
    let (p1, p2) = (p1 as i16, p2 as i16);
    let mut sum = vec![0u16; w * h * nd];
    aggregate_rows(vol, &mut sum, w, nd, p1, p2, exec);
    sweep_vertical(vol, &mut sum, w, h, nd, true, p1, p2, exec);
    sweep_vertical(vol, &mut sum, w, h, nd, false, p1, p2, exec);
    sum
}

pub(super) fn match_semi_global(left: &GrayImage, right: &GrayImage, cfg: &MatcherConfig, exec: Exec) -> DisparityMap {
    let (w, h) = (left.width, left.height);
    let border = CENSUS_RADIUS;
    let nd = cfg.max_disparity.min(w.saturating_sub(2 * border).max(1) - 1) + 1;
    let vol = cost_volume(left, right, nd, exec);
    let sum = aggregate(&vol, w, h, nd, cfg.sgm_p1, cfg.sgm_p2, exec);
    drop(vol);
    let mut out = DisparityMap::invalid(w, h, cfg.max_disparity as f32);
    let row_cfg = MatcherConfig {
        max_disparity: nd - 1,
        ..*cfg
    };
    // a uniform window has an all-zero census against any uniform partner, so
    // its disparity would come from path propagation alone
    let flat = flat_windows(left);
    for_each_chunk_pair_mut(exec, &mut out.values, w, &mut out.valid, w, |y, values, valid| {
        if y < border || y + border >= h {
            return;
        }
        let srow = &sum[y * w * nd..(y + 1) * w * nd];
        select_row(w, border, &row_cfg, srow, nd, values, valid);
        for (x, _) in flat[y * w..(y + 1) * w].iter().enumerate().filter(|(_, &f)| f) {
            values[x] = super::INVALID;
            valid[x] = false;
        }
    });
    out
}
