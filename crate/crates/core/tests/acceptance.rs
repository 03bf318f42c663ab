//! Acceptance gate: one line per criterion, `PASS` or `FAIL`, at fixed tolerances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stereospoof::analysis::{
    detect_fake_depth, detect_saturation, expected_table, DetectConfig, Verdict, DEFAULT_SAT_FRACTION,
    DEFAULT_SAT_LEVEL,
};
use stereospoof::depth::{match_gray, match_stereo, to_depth, Algorithm, MatcherConfig};
use stereospoof::flightsim::{run_scenario, zero_crossings, Scenario};
use stereospoof::geometry::{
    fake_depth, predict_fake_depth, project, round_to_oa_step, triangulate, AttackGeometry, AttackMode, AttackPattern,
    FeasibilityReason, PredictionSource, StereoRig,
};
use stereospoof::raster::GrayImage;
use stereospoof::render::{composite, place_attack, render_scene, AutoExposure, Background, SceneSpec};
use stereospoof::Exec;

fn report(n: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {n} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_1_worked_example() {
    let rig = StereoRig::default();
    let p = fake_depth(&rig, 1.0, 4.0, PredictionSource::BeamsX);
    let rounded = round_to_oa_step(p.depth_m, 0.5).unwrap();
    let ok = p.exists && (p.depth_m - 0.43).abs() <= 0.005 && rounded == 0.5;
    report(
        1,
        "worked example",
        ok,
        &format!("raw {:.4} m, rounded {rounded} m", p.depth_m),
    );
}

#[test]
fn criterion_2_expected_table() {
    let rig = StereoRig::default();
    let z: Vec<f64> = (1..=16).map(f64::from).collect();
    let rows = expected_table(&rig, 1.0, &z, 0.5).unwrap();
    let mut want_x = vec![0.5; 7];
    want_x.extend([1.0; 4]);
    want_x.extend([1.5; 5]);
    let mut want_t = vec![0.5; 3];
    want_t.extend([1.0; 6]);
    want_t.extend([1.5; 3]);
    want_t.extend([2.0; 4]);
    let got_x: Vec<f64> = rows.iter().map(|r| r.x_expected_m).collect();
    let got_t: Vec<f64> = rows
        .iter()
        .map(|r| r.trapezoid_expected_m.unwrap_or(f64::NAN))
        .collect();
    let bad = |got: &[f64], want: &[f64]| -> Vec<String> {
        got.iter()
            .zip(want)
            .enumerate()
            .filter(|(_, (g, w))| g != w)
            .map(|(i, (g, w))| format!("z={} got {g} want {w}", i + 1))
            .collect()
    };
    let (bx, bt) = (bad(&got_x, &want_x), bad(&got_t, &want_t));
    let detail = format!(
        "x column {}; trapezoid column {}",
        if bx.is_empty() {
            "exact".to_string()
        } else {
            bx.join(", ")
        },
        if bt.is_empty() {
            "exact".to_string()
        } else {
            bt.join(", ")
        }
    );
    report(2, "expected-depth table", bx.is_empty() && bt.is_empty(), &detail);
}

#[test]
fn criterion_3_existence_regions() {
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for bi in 1..=20 {
        for di in 1..=20 {
            let b = 0.06 * bi as f64;
            let d = 0.06 * di as f64;
            let rig = StereoRig::new(700.0, b, 640, 360).unwrap();
            let floor = rig.focal_length_m();
            for zi in 1..=16 {
                let z = zi as f64;
                checked += 1;
                let geo = AttackGeometry::new(d, z, AttackPattern::Triangle, AttackMode::Combined);
                let p = predict_fake_depth(&rig, &geo);
                let [bx, bt, ox, ot] = [p[0], p[1], p[2], p[3]];
                let mut bad = |what: &str| violations.push(format!("b={b:.2} d={d:.2} z={z}: {what}"));
                if !(bx.depth_m < z) {
                    bad("beams X not nearer than z");
                }
                if ox.exists {
                    bad("orbs X exists");
                }
                if bi == di {
                    if bt.reason != FeasibilityReason::DegenerateSeparation
                        || ot.reason != FeasibilityReason::DegenerateSeparation
                    {
                        bad("d = b not degenerate");
                    }
                    continue;
                }
                if bt.exists != (b > d && bt.depth_m > floor) {
                    bad("beams trapezoid existence");
                }
                if ot.exists != (d > b && ot.depth_m > floor) {
                    bad("orbs trapezoid existence");
                }
            }
        }
    }
    let detail = format!("{checked} grid points, {} violations", violations.len());
    report(3, "existence regions", violations.is_empty(), &detail);
}

fn random_texture(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<u8> {
    (0..w * h).map(|_| rng.gen()).collect()
}

/// Exhaustive SAD winner per pixel; smallest disparity on ties.
fn sad_oracle(l: &GrayImage, r: &GrayImage, block: usize, max_d: usize) -> Vec<Option<usize>> {
    let rad = block / 2;
    let (w, h) = (l.width, l.height);
    let mut out = vec![None; w * h];
    for y in rad..h - rad {
        for x in rad..w - rad {
            let mut best: Option<(u32, usize)> = None;
            for d in 0..=max_d.min(x - rad) {
                let mut sad = 0u32;
                for j in y - rad..=y + rad {
                    for i in x - rad..=x + rad {
                        sad += (l.get(i, j) as i32 - r.get(i - d, j) as i32).unsigned_abs();
                    }
                }
                if best.map_or(true, |(c, _)| sad < c) {
                    best = Some((sad, d));
                }
            }
            out[y * w + x] = best.map(|(_, d)| d);
        }
    }
    out
}

#[test]
fn criterion_4_matcher_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = MatcherConfig {
        max_disparity: 16,
        subpixel: false,
        ..MatcherConfig::new(Algorithm::BlockSad)
    };
    let (w, h) = (32, 32);
    let (mut compared, mut agree) = (0usize, 0usize);
    for _ in 0..50 {
        let shift = rng.gen_range(0..=16usize);
        let base = random_texture(&mut rng, w + 16, h);
        let left: Vec<u8> = (0..h)
            .flat_map(|y| base[y * (w + 16) + 16..(y + 1) * (w + 16)].to_vec())
            .collect();
        let right: Vec<u8> = (0..h)
            .flat_map(|y| {
                base[y * (w + 16) + 16 - shift..y * (w + 16) + 16 - shift + w]
                    .iter()
                    .map(|&v| v.saturating_add(rng.gen_range(0..8)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let l = GrayImage::from_raw(w, h, left).unwrap();
        let r = GrayImage::from_raw(w, h, right).unwrap();
        let disp = match_gray(&l, &r, &cfg, Exec::Sequential).unwrap();
        let oracle = sad_oracle(&l, &r, cfg.block_size, cfg.max_disparity);
        for (i, o) in oracle.iter().enumerate() {
            if disp.valid[i] {
                compared += 1;
                if Some(disp.values[i] as usize) == *o && disp.values[i].fract() == 0.0 {
                    agree += 1;
                }
            }
        }
    }
    let ok = compared > 0 && agree == compared;
    report(
        4,
        "matcher oracle equivalence",
        ok,
        &format!("{agree}/{compared} valid pixels agree"),
    );
}

struct Cell {
    d: f64,
    z: f64,
    alg: Algorithm,
    pattern: AttackPattern,
    mode: AttackMode,
}

fn night_scene() -> SceneSpec {
    SceneSpec::wall(30.0, 0.0)
}

fn run_cell(rig: &StereoRig, c: &Cell) -> (bool, String) {
    let scene = night_scene();
    let geo = AttackGeometry::new(c.d, c.z, c.pattern, c.mode);
    let pred = predict_fake_depth(rig, &geo);
    let source = match (c.pattern, c.mode) {
        (AttackPattern::XShape, AttackMode::Beams) => PredictionSource::BeamsX,
        (AttackPattern::Trapezoid, AttackMode::Orbs) => PredictionSource::OrbsTrapezoid,
        (AttackPattern::Trapezoid, AttackMode::Beams) => PredictionSource::BeamsTrapezoid,
        _ => unreachable!(),
    };
    let pred = *pred.iter().find(|p| p.source == source).unwrap();
    let frame = render_scene(rig, &scene).unwrap();
    let art = place_attack(rig, &geo).unwrap();
    let attacked = composite(rig, &frame, &art, &AutoExposure::default()).unwrap();
    let disp = match_stereo(&attacked, &MatcherConfig::new(c.alg)).unwrap();
    let depth = to_depth(&disp, rig).unwrap();
    let cfg = DetectConfig::default();
    let r = detect_fake_depth(&depth, scene.nominal_depth_m(), &cfg).with_prediction(pred);
    let ok = if pred.exists {
        r.detected && r.relative_error.is_some_and(|e| e <= 0.25)
    } else {
        !r.detected || r.blob_area_px < cfg.min_blob_area
    };
    let desc = format!(
        "{:?} {:?} d={} z={} {:?}: predicted {:.3} ({}), detected={} measured={:?} area={}",
        c.alg,
        source,
        c.d,
        c.z,
        c.pattern,
        pred.depth_m,
        if pred.exists { "feasible" } else { "infeasible" },
        r.detected,
        r.measured_depth_m.map(|m| (m * 1000.0).round() / 1000.0),
        r.blob_area_px
    );
    (ok, desc)
}

#[test]
fn criterion_5_end_to_end_fidelity() {
    let rig = StereoRig::default();
    let mut cells = Vec::new();
    for d in [0.5, 1.0, 2.0] {
        for zi in 2..=9 {
            for alg in [Algorithm::BlockSad, Algorithm::SemiGlobal] {
                for (pattern, mode) in [
                    (AttackPattern::XShape, AttackMode::Beams),
                    (AttackPattern::Trapezoid, AttackMode::Orbs),
                    (AttackPattern::Trapezoid, AttackMode::Beams),
                ] {
                    cells.push(Cell {
                        d,
                        z: zi as f64,
                        alg,
                        pattern,
                        mode,
                    });
                }
            }
        }
    }
    let start = std::time::Instant::now();
    let mut passed = 0;
    for c in &cells {
        let (ok, desc) = run_cell(&rig, c);
        if ok {
            passed += 1;
        } else {
            println!("  cell failed: {desc}");
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let frac = passed as f64 / cells.len() as f64;
    report(
        5,
        "end-to-end attack fidelity",
        frac >= 0.9 && secs < 120.0,
        &format!(
            "{passed}/{} cells, {:.1}% (need 90%), {secs:.0} s (limit 120 s)",
            cells.len(),
            frac * 100.0
        ),
    );
}

#[test]
fn criterion_6_triangulation_round_trip() {
    let rig = StereoRig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = [
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.2..60.0),
        ];
        let (l, r) = project(&rig, p).unwrap();
        let z = triangulate(&rig, l.u, r.u).unwrap();
        worst = worst.max((z - p[2]).abs() / p[2]);
    }
    report(
        6,
        "triangulation round trip",
        worst <= 1e-9,
        &format!("worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_7_flight_maneuvers() {
    let tau = 0.3;
    let stop = run_scenario(&Scenario::builtin("sudden_stop").unwrap()).unwrap();
    let after = stop.displacement_between(5.0 + 5.0 * tau, 10.0).unwrap()[0];
    let stop_ok = after.abs() < 0.05;

    let drift = run_scenario(&Scenario::builtin("drift_away").unwrap()).unwrap();
    let lateral: Vec<f64> = drift
        .rows
        .iter()
        .map(|r| -(r.state.position[0] - drift.rows[0].state.position[0]))
        .collect();
    let drift_ok = lateral.windows(2).all(|w| w[1] > w[0]) && drift.summary().forward_displacement_m > 0.0;

    let shake = run_scenario(&Scenario::builtin("shake_fb").unwrap().with_period(0.5).unwrap()).unwrap();
    let crossings = zero_crossings(shake.rows.iter().map(|r| r.state.body_velocity()[0]));
    let shake_ok = (39..=41).contains(&crossings);

    let log_a = run_scenario(&Scenario::builtin("shake_lr").unwrap()).unwrap().to_csv();
    let log_b = run_scenario(&Scenario::builtin("shake_lr").unwrap()).unwrap().to_csv();
    let det_ok = log_a == log_b
        && stop.to_csv()
            == run_scenario(&Scenario::builtin("sudden_stop").unwrap())
                .unwrap()
                .to_csv();

    let detail = format!(
        "sudden_stop creep {after:.4} m; drift_away lateral {:.3} m monotone={}; shake_fb {crossings} crossings; logs identical={det_ok}",
        lateral.last().unwrap(),
        lateral.windows(2).all(|w| w[1] > w[0])
    );
    report(
        7,
        "flight maneuvers",
        stop_ok && drift_ok && shake_ok && det_ok,
        &detail,
    );
}

#[test]
fn criterion_8_saturation_defense() {
    let rig = StereoRig::default();
    let (mut core, mut flagged) = (0usize, 0usize);
    for (lux, z, pattern) in [
        (0.0, 4.0, AttackPattern::XShape),
        (0.0, 9.0, AttackPattern::XShape),
        (0.0, 3.0, AttackPattern::Trapezoid),
        (0.0, 6.0, AttackPattern::Triangle),
        (2000.0, 5.0, AttackPattern::XShape),
        (4000.0, 4.0, AttackPattern::Triangle),
    ] {
        let geo = AttackGeometry::new(1.0, z, pattern, AttackMode::Combined);
        let frame = render_scene(&rig, &SceneSpec::wall(6.0, lux)).unwrap();
        let art = place_attack(&rig, &geo).unwrap();
        let attacked = composite(&rig, &frame, &art, &AutoExposure::default()).unwrap();
        let rep = detect_saturation(&attacked, DEFAULT_SAT_LEVEL, DEFAULT_SAT_FRACTION);
        for (glares, mask) in [(&art.left_glares, &rep.left_mask), (&art.right_glares, &rep.right_mask)] {
            for g in glares.iter() {
                let (cx, cy) = rig.to_pixel(&g.center);
                let r = g.radius_px / 2.0;
                for y in 0..rig.image_height_px {
                    for x in 0..rig.image_width_px {
                        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                        if dx * dx + dy * dy <= r * r {
                            core += 1;
                            flagged += mask[y * rig.image_width_px + x] as usize;
                        }
                    }
                }
            }
        }
    }
    let core_frac = flagged as f64 / core.max(1) as f64;

    let mut clean = 0;
    for i in 0..20 {
        let lux = 4000.0 * i as f64 / 19.0;
        let background = match i % 3 {
            0 => Background::FlatTextured { seed: i },
            1 => Background::FrontoparallelWall {
                depth_m: 2.0 + i as f64,
            },
            _ => Background::Corridor {
                near_m: 2.0,
                far_m: 12.0,
            },
        };
        let scene = SceneSpec {
            background,
            ambient_lux: lux,
            texture_seed: i,
        };
        let frame = render_scene(&rig, &scene).unwrap();
        let exposed = composite(&rig, &frame, &Default::default(), &AutoExposure::default()).unwrap();
        if detect_saturation(&exposed, DEFAULT_SAT_LEVEL, DEFAULT_SAT_FRACTION).verdict == Verdict::Clean {
            clean += 1;
        }
    }
    let ok = core > 0 && core_frac >= 0.99 && clean == 20;
    let detail = format!(
        "{flagged}/{core} glare-core pixels flagged ({:.2}%), {clean}/20 clean scenes",
        core_frac * 100.0
    );
    report(8, "saturation defense", ok, &detail);
}

#[test]
fn criterion_9_daytime_orbs_dimmer() {
    let rig = StereoRig::default();
    let geo = AttackGeometry::new(1.0, 4.0, AttackPattern::Trapezoid, AttackMode::Orbs);
    let art = place_attack(&rig, &geo).unwrap();
    let orb = art.left_orbs[0];
    let (cx, cy) = rig.to_pixel(&orb.center);
    let peak_green = |lux: f64| {
        let frame = render_scene(&rig, &SceneSpec::wall(6.0, lux)).unwrap();
        let out = composite(&rig, &frame, &art, &AutoExposure::default()).unwrap();
        let mut peak = 0u8;
        for y in 0..rig.image_height_px {
            for x in 0..rig.image_width_px {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy <= orb.radius_px * orb.radius_px {
                    peak = peak.max(out.left.pixel(x, y)[1]);
                }
            }
        }
        peak
    };
    let (day, night) = (peak_green(4000.0), peak_green(0.0));
    report(
        9,
        "daytime orbs dimmer",
        day < night,
        &format!("peak green {day} at 4000 lux vs {night} at 0 lux"),
    );
}
