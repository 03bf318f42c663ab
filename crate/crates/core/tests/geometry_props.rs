use proptest::prelude::*;

use stereospoof::geometry::{
    fake_depth, fake_disparity, orb_position, project, round_to_oa_step, triangulate, AttackGeometry, AttackMode,
    AttackPattern, Camera, FeasibilityReason, ImagePoint, PredictionSource, StereoRig,
};

fn rig_with(b: f64) -> StereoRig {
    StereoRig::new(700.0, b, 640, 360).unwrap()
}

proptest! {
    #[test]
    fn beams_x_is_nearer_than_sources(b in 0.01f64..2.0, d in 0.01f64..5.0, z in 0.1f64..100.0) {
        let p = fake_depth(&rig_with(b), d, z, PredictionSource::BeamsX);
        prop_assert!(p.depth_m < z);
        prop_assert!(p.depth_m > 0.0);
    }

    #[test]
    fn beams_trapezoid_sign_follows_baseline(b in 0.01f64..2.0, d in 0.01f64..5.0, z in 0.1f64..100.0) {
        prop_assume!(b != d);
        let p = fake_depth(&rig_with(b), d, z, PredictionSource::BeamsTrapezoid);
        prop_assert_eq!(p.depth_m > z, b > d);
        prop_assert_eq!(p.depth_m < 0.0, b < d);
        if b < d {
            prop_assert_eq!(p.reason, FeasibilityReason::BehindCamera);
        }
    }

    #[test]
    fn orbs_trapezoid_regions(b in 0.01f64..2.0, d in 0.01f64..5.0, z in 0.1f64..100.0) {
        prop_assume!(b != d);
        let rig = rig_with(b);
        let p = fake_depth(&rig, d, z, PredictionSource::OrbsTrapezoid);
        prop_assert_eq!(p.exists, d > b && p.depth_m > rig.focal_length_m());
        if d > b {
            prop_assert_eq!(p.depth_m < z, d > 2.0 * b);
        }
    }

    #[test]
    fn orbs_x_never_exists(b in 0.01f64..2.0, d in 0.01f64..5.0, z in 0.1f64..100.0) {
        let p = fake_depth(&rig_with(b), d, z, PredictionSource::OrbsX);
        prop_assert!(!p.exists);
        prop_assert!(p.depth_m < 0.0);
    }

    #[test]
    fn exists_implies_beyond_focal_length(b in 0.01f64..2.0, d in 0.01f64..5.0, z in 0.0001f64..100.0, k in 0usize..4) {
        let rig = rig_with(b);
        let source = [PredictionSource::BeamsX, PredictionSource::BeamsTrapezoid, PredictionSource::OrbsX, PredictionSource::OrbsTrapezoid][k];
        let p = fake_depth(&rig, d, z, source);
        if p.exists {
            prop_assert!(p.depth_m > rig.focal_length_m());
        }
        prop_assert_eq!(p.reason == FeasibilityReason::DegenerateSeparation, d == b && k % 2 == 1);
    }

    #[test]
    fn fake_disparity_triangulates_to_beams_x(b in 0.01f64..2.0, d in 0.0f64..5.0, z in 0.1f64..100.0) {
        let rig = rig_with(b);
        let geo = AttackGeometry::new(d.max(1e-6), z, AttackPattern::XShape, AttackMode::Beams);
        let disp = fake_disparity(&rig, &geo);
        let zt = triangulate(&rig, disp, 0.0).unwrap();
        let zx = fake_depth(&rig, geo.separation_m, z, PredictionSource::BeamsX).depth_m;
        prop_assert!(((zt - zx) / zx).abs() <= 1e-9);
    }

    #[test]
    fn orb_reflection_is_involution(u in -2000.0f64..2000.0, v in -2000.0f64..2000.0) {
        let p = ImagePoint::new(u, v, Camera::Right);
        let o = orb_position(&p);
        prop_assert_eq!(orb_position(&o), p);
        prop_assert_eq!(o.camera, Camera::Right);
        prop_assert_eq!(u.hypot(v), o.u.hypot(o.v));
    }

    #[test]
    fn project_triangulate_round_trip(x in -20.0f64..20.0, y in -20.0f64..20.0, z in 0.05f64..500.0, b in 0.01f64..2.0) {
        let rig = rig_with(b);
        let (l, r) = project(&rig, [x, y, z]).unwrap();
        prop_assert_eq!(l.v, r.v);
        let zt = triangulate(&rig, l.u, r.u).unwrap();
        prop_assert!(((zt - z) / z).abs() <= 1e-9);
    }

    #[test]
    fn rounding_is_idempotent_and_nearest(depth in 0.001f64..100.0, step in 0.05f64..5.0) {
        let r = round_to_oa_step(depth, step).unwrap();
        prop_assert_eq!(round_to_oa_step(r, step).unwrap(), r);
        prop_assert!(r >= step);
        if depth >= step {
            prop_assert!((r - depth).abs() <= step / 2.0 + 1e-9);
        }
    }
}

#[test]
fn disparity_for_wall_at_four_meters() {
    let rig = StereoRig::default();
    let (l, r) = project(&rig, [0.0, 0.0, 4.0]).unwrap();
    assert!((l.u - r.u - 21.0).abs() < 1e-12);
    assert!((l.u - 10.5).abs() < 1e-12 && (r.u + 10.5).abs() < 1e-12);
}
