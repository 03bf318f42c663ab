// Hash-based value noise anchored to world coordinates, so both cameras see
// the same surface pattern.

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[inline]
fn lattice(ix: i64, iy: i64, seed: u64) -> f64 {
    let h = splitmix64(
        seed ^ (ix as u64).wrapping_mul(0x9E37_79B1_85EB_CA87) ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F),
    );
    (h >> 11) as f64 / (1u64 << 53) as f64
}

#[inline]
fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn value_noise(s: f64, t: f64, seed: u64) -> f64 {
    let (fs, ft) = (s.floor(), t.floor());
    let (ix, iy) = (fs as i64, ft as i64);
    let (wx, wy) = (smooth(s - fs), smooth(t - ft));
    let a = lattice(ix, iy, seed);
    let b = lattice(ix + 1, iy, seed);
    let c = lattice(ix, iy + 1, seed);
    let d = lattice(ix + 1, iy + 1, seed);
    let top = a + (b - a) * wx;
    let bottom = c + (d - c) * wx;
    top + (bottom - top) * wy
}

/// Two-octave noise in [0, 1].
pub(crate) fn surface_texture(s: f64, t: f64, seed: u64) -> f64 {
    0.6 * value_noise(s, t, seed) + 0.4 * value_noise(1.9 * s + 31.7, 1.9 * t + 11.3, seed.wrapping_add(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_and_deterministic() {
        for i in 0..1000 {
            let s = i as f64 * 0.37 - 100.0;
            let t = i as f64 * -0.11 + 3.0;
            let v = surface_texture(s, t, 42);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v, surface_texture(s, t, 42));
        }
        assert_ne!(surface_texture(0.5, 0.5, 1), surface_texture(0.5, 0.5, 2));
    }
}
