use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{orb_position, project, AttackGeometry, AttackPattern, ImagePoint, StereoRig};

/// Glare radius at the reference distance; radius scales as 1/z.
const REF_RADIUS_PX: f64 = 12.0;
const REF_DISTANCE_M: f64 = 4.0;
const TRIANGLE_JITTER: f64 = 0.05;

/// A Gaussian light blob; used for both glares and orbs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlareSpec {
    pub center: ImagePoint,
    pub radius_px: f64,
    pub peak_intensity: f64,
    pub sigma_px: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackArtifacts {
    pub left_glares: Vec<GlareSpec>,
    pub right_glares: Vec<GlareSpec>,
    pub left_orbs: Vec<GlareSpec>,
    pub right_orbs: Vec<GlareSpec>,
}

impl AttackArtifacts {
    pub fn is_empty(&self) -> bool {
        self.left_glares.is_empty()
            && self.right_glares.is_empty()
            && self.left_orbs.is_empty()
            && self.right_orbs.is_empty()
    }
}

pub fn glare_radius_px(distance_m: f64) -> f64 {
    REF_RADIUS_PX * REF_DISTANCE_M / distance_m
}

fn blob(center: ImagePoint, radius_px: f64, peak: f64) -> GlareSpec {
    GlareSpec {
        center,
        radius_px,
        peak_intensity: peak,
        sigma_px: radius_px / 2.0,
    }
}

/// Glare and orb layout for an attack.
///
/// X-shape: Q is bright in the left image and P in the right, with the cross
/// pair at the secondary intensity. Trapezoid: P lights only the left camera
/// and Q only the right. Triangle: all four glares at the primary intensity
/// with a seeded +/-5% jitter. Every primary glare spawns a centrosymmetric orb
/// when the mode includes orbs, even if the glare itself is out of frame.
pub fn place_attack(rig: &StereoRig, geo: &AttackGeometry) -> Result<AttackArtifacts> {
    rig.validate()?;
    geo.validate()?;
    let (p_left, p_right) = project(rig, geo.source_p())?;
    let (q_left, q_right) = project(rig, geo.source_q())?;
    let radius = glare_radius_px(geo.distance_m);
    let primary = geo.intensity_primary;
    let secondary = geo.intensity_secondary;

    let mut out = AttackArtifacts::default();
    // (glare, is_primary)
    let (left, right): (Vec<(GlareSpec, bool)>, Vec<(GlareSpec, bool)>) = match geo.pattern {
        AttackPattern::XShape => (
            vec![
                (blob(q_left, radius, primary), true),
                (blob(p_left, radius, secondary), false),
            ],
            vec![
                (blob(p_right, radius, primary), true),
                (blob(q_right, radius, secondary), false),
            ],
        ),
        AttackPattern::Trapezoid => (
            vec![(blob(p_left, radius, primary), true)],
            vec![(blob(q_right, radius, primary), true)],
        ),
        AttackPattern::Triangle => {
            let mut rng = ChaCha8Rng::seed_from_u64(geo.jitter_seed);
            let mut jittered = |c| {
                let j: f64 = rng.gen_range(-TRIANGLE_JITTER..=TRIANGLE_JITTER);
                (blob(c, radius, (primary * (1.0 + j)).min(1.0)), true)
            };
            let left = vec![jittered(p_left), jittered(q_left)];
            let right = vec![jittered(p_right), jittered(q_right)];
            (left, right)
        }
    };

    for (glares, orbs, items) in [
        (&mut out.left_glares, &mut out.left_orbs, left),
        (&mut out.right_glares, &mut out.right_orbs, right),
    ] {
        for (g, is_primary) in items {
            if is_primary && geo.mode.has_orbs() {
                orbs.push(GlareSpec {
                    center: orb_position(&g.center),
                    ..g
                });
            }
            glares.push(g);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fake_disparity, triangulate, AttackMode, Camera};

    fn bright(glares: &[GlareSpec]) -> GlareSpec {
        *glares
            .iter()
            .max_by(|a, b| a.peak_intensity.total_cmp(&b.peak_intensity))
            .unwrap()
    }

    #[test]
    fn x_shape_bright_pair_has_fake_disparity() {
        let rig = StereoRig::default();
        let geo = AttackGeometry::new(1.0, 4.0, AttackPattern::XShape, AttackMode::Beams);
        let a = place_attack(&rig, &geo).unwrap();
        let (l, r) = (bright(&a.left_glares), bright(&a.right_glares));
        assert!((l.center.u - 98.0).abs() < 1e-9);
        assert!((r.center.u + 98.0).abs() < 1e-9);
        assert!((l.center.u - r.center.u - fake_disparity(&rig, &geo)).abs() < 0.5);
        assert!(a.left_orbs.is_empty() && a.right_orbs.is_empty());
        assert_eq!(l.center.camera, Camera::Left);
    }

    #[test]
    fn trapezoid_orbs_triangulate_to_orbs_formula() {
        let rig = StereoRig::default();
        let geo = AttackGeometry::new(1.0, 4.0, AttackPattern::Trapezoid, AttackMode::Orbs);
        let a = place_attack(&rig, &geo).unwrap();
        // beams disparity is negative
        assert!(a.left_glares[0].center.u < a.right_glares[0].center.u);
        let (lo, ro) = (a.left_orbs[0], a.right_orbs[0]);
        assert!((lo.center.u - ro.center.u - 700.0 * 0.88 / 4.0).abs() < 1e-9);
        let z = triangulate(&rig, lo.center.u, ro.center.u).unwrap();
        assert!((z - 0.12 / 0.88 * 4.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_jitter_is_seeded_and_bounded() {
        let rig = StereoRig::default();
        let mut geo = AttackGeometry::new(1.0, 5.0, AttackPattern::Triangle, AttackMode::Combined);
        geo.intensity_primary = 0.8;
        geo.intensity_secondary = 0.4;
        let a = place_attack(&rig, &geo).unwrap();
        assert_eq!(a, place_attack(&rig, &geo).unwrap());
        assert_eq!(a.left_glares.len(), 2);
        assert_eq!(a.left_orbs.len(), 2);
        for g in a.left_glares.iter().chain(&a.right_glares) {
            assert!((g.peak_intensity - 0.8).abs() <= 0.8 * 0.05 + 1e-12);
        }
        geo.jitter_seed = 1;
        assert_ne!(a, place_attack(&rig, &geo).unwrap());
    }

    #[test]
    fn out_of_view_glare_still_yields_orb() {
        // off-centre principal point: the reflection of an off-frame glare can land on the sensor
        let mut rig = StereoRig::default();
        rig.principal_point = (280.0, 180.0);
        let mut geo = AttackGeometry::new(1.0, 2.0, AttackPattern::Trapezoid, AttackMode::Orbs);
        geo.lateral_offset_m = -0.417;
        let a = place_attack(&rig, &geo).unwrap();
        let g = a.left_glares[0];
        assert!(!rig.in_frame(&g.center), "{:?}", g.center);
        assert!(rig.in_frame(&a.left_orbs[0].center));
    }

    #[test]
    fn radius_scales_inverse_with_distance() {
        assert_eq!(glare_radius_px(4.0), 12.0);
        assert_eq!(glare_radius_px(8.0), 6.0);
    }
}
