// Winner selection shared by both matchers, one image row at a time.

use super::{MatcherConfig, INVALID};

/// Parabola vertex through three equally spaced costs, clamped to +/-0.5.
#[inline]
pub(super) fn parabolic_offset(c_minus: u32, c_best: u32, c_plus: u32) -> f32 {
    let denom = c_minus as f64 - 2.0 * c_best as f64 + c_plus as f64;
    if denom <= 0.0 {
        return 0.0;
    }
    (((c_minus as f64 - c_plus as f64) / (2.0 * denom)).clamp(-0.5, 0.5)) as f32
}

#[inline]
fn is_unique(best: u32, runner_up: u32, ratio: f64) -> bool {
    runner_up == u32::MAX || (best as f64) * ratio < runner_up as f64
}

/// Writes disparities for one row from costs laid out `[x * nd + d]`.
///
/// Entries must be defined for every `border <= x < width - border` and
/// `d <= min(max_disp, x - border)`; no other entries are read.
pub(super) fn select_row<T>(
    width: usize,
    border: usize,
    cfg: &MatcherConfig,
    costs: &[T],
    nd: usize,
    values: &mut [f32],
    valid: &mut [bool],
) where
    T: Copy + Into<u32>,
{
    values.fill(INVALID);
    valid.fill(false);
    if width <= 2 * border {
        return;
    }
    let max_disp = cfg.max_disparity.min(nd - 1);
    let x_end = width - border;
    let candidates = |x: usize| &costs[x * nd..x * nd + max_disp.min(x - border) + 1];

    // right-image winners from the same costs: candidate (x, d) matches right
    // pixel x - d; visiting x and d in ascending order keeps the smallest d on ties
    let right_winner: Vec<Option<usize>> = if cfg.lr_consistency_px.is_some() {
        let mut best_c = vec![u32::MAX; width];
        let mut best_d = vec![usize::MAX; width];
        for x in border..x_end {
            let row = candidates(x);
            let lo = x + 1 - row.len();
            // slot x - d for d = 0, 1, ... walks the slices backwards
            let slots = best_c[lo..=x].iter_mut().rev().zip(best_d[lo..=x].iter_mut().rev());
            for (d, ((bc, bd), &c)) in slots.zip(row).enumerate() {
                let c = c.into();
                if c < *bc {
                    *bc = c;
                    *bd = d;
                }
            }
        }
        best_d.into_iter().map(|d| (d != usize::MAX).then_some(d)).collect()
    } else {
        Vec::new()
    };

    for x in border..x_end {
        let row = candidates(x);
        let d_hi = row.len() - 1;
        let (mut best_d, mut best_c) = (0, u32::MAX);
        for (d, &c) in row.iter().enumerate() {
            let c = c.into();
            if c < best_c {
                best_c = c;
                best_d = d;
            }
        }
        let below = &row[..best_d.saturating_sub(1)];
        let above = row.get(best_d + 2..).unwrap_or(&[]);
        let runner_up = below.iter().chain(above).map(|&c| c.into()).min().unwrap_or(u32::MAX);
        // a winner on a search range cut short by the image edge is unverifiable
        if best_d == d_hi && d_hi < max_disp {
            continue;
        }
        if !is_unique(best_c, runner_up, cfg.uniqueness_ratio) {
            continue;
        }
        if let Some(tol) = cfg.lr_consistency_px {
            match right_winner[x - best_d] {
                Some(dr) if (dr as f64 - best_d as f64).abs() <= tol => {}
                _ => continue,
            }
        }
        let mut v = best_d as f32;
        if cfg.subpixel && best_d > 0 && best_d < d_hi {
            v += parabolic_offset(row[best_d - 1].into(), best_c, row[best_d + 1].into());
        }
        values[x] = v;
        valid[x] = true;
    }
}
