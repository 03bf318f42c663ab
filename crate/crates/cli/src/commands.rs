// Subcommand bodies. Each returns a `Failure` carrying its exit status.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::Serialize;
use stereospoof::analysis::{detect_fake_depth, detect_saturation, expected_table, table_csv, FakeDepthReport};
use stereospoof::depth::{match_stereo, match_stereo_with, to_depth, to_point_cloud, MatcherConfig};
use stereospoof::flightsim::{builtin_source, run_scenario, Scenario};
use stereospoof::geometry::{
    predict_fake_depth, round_to_oa_step, AttackGeometry, AttackMode, AttackPattern, FakeDepthPrediction, StereoRig,
};
use stereospoof::io::{read_pfm, read_ppm, write_pfm, write_ply, write_ppm};
use stereospoof::render::{
    composite, ground_truth_depth, place_attack, render_scene, render_scene_with, AutoExposure, SceneSpec, StereoFrame,
};
use stereospoof::{Error, Exec};

use crate::args::{AlgorithmArg, ModeArg, PatternArg};
use crate::{AnalyzeArgs, AttackArgs, MatchArgs, PredictArgs, RenderArgs, SimArgs, SweepArgs};

#[derive(Debug)]
pub enum Failure {
    Io(anyhow::Error),
    Usage(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Io(e) | Failure::Usage(e) => e,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) => Failure::Io(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

/// Library errors are classified by kind; the path goes into the message.
fn at(path: &Path, e: Error) -> Failure {
    let ctx = format!("{}", path.display());
    match Failure::from(e) {
        Failure::Io(e) => Failure::Io(e.context(ctx)),
        Failure::Usage(e) => Failure::Usage(e.context(ctx)),
    }
}

fn create_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
        .map_err(Failure::Io)
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Io)
}

/// Everything needed to repeat a run, written next to its artifacts.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    subcommand: &'a str,
    out_dir: &'a Path,
    inputs: Vec<&'a Path>,
    rig: Option<StereoRig>,
    scene: Option<SceneSpec>,
    geometry: Option<AttackGeometry>,
    matcher: Option<MatcherConfig>,
    seed: u64,
}

impl RunConfig<'_> {
    fn write(&self) -> CmdResult {
        let json = serde_json::to_string_pretty(self).map_err(|e| Failure::Io(e.into()))?;
        write_text(&self.out_dir.join("run_config.json"), &(json + "\n"))
    }
}

fn source_name(p: &FakeDepthPrediction) -> String {
    serde_json::to_value(p.source)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn reason_name(p: &FakeDepthPrediction) -> String {
    serde_json::to_value(p.reason)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn predict(a: &PredictArgs) -> CmdResult {
    let rig = StereoRig::new(a.focal_px, a.baseline_m, 640, 360)?;
    if a.table {
        if a.z_max == 0 {
            return Err(usage(anyhow!("--z-max must be at least 1")));
        }
        let distances: Vec<f64> = (1..=a.z_max).map(f64::from).collect();
        let rows = expected_table(&rig, a.separation_m, &distances, a.step)?;
        print!("{}", table_csv(&rows));
        return Ok(());
    }
    let z = a.distance_m.expect("clap requires --z without --table");
    let geo = AttackGeometry::new(
        a.separation_m,
        z,
        a.pattern.map_or(AttackPattern::Triangle, Into::into),
        a.mode.map_or(AttackMode::Combined, Into::into),
    );
    geo.validate()?;
    let preds = predict_fake_depth(&rig, &geo);
    if a.json {
        let json = serde_json::to_string_pretty(&preds).map_err(|e| Failure::Io(e.into()))?;
        println!("{json}");
        return Ok(());
    }
    let mut out = String::from("source,raw_m,exists,reason,rounded_m\n");
    for p in &preds {
        let rounded = if p.exists {
            format!("{}", round_to_oa_step(p.depth_m, a.step)?)
        } else {
            "none".into()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            source_name(p),
            fmt_depth(p.depth_m),
            p.exists,
            reason_name(p),
            rounded
        );
    }
    print!("{out}");
    Ok(())
}

fn fmt_depth(v: f64) -> String {
    if v.is_finite() {
        format!("{:.4}", v)
    } else {
        "inf".into()
    }
}

fn attacked_frame(
    rig: &StereoRig,
    scene: &SceneSpec,
    geo: Option<&AttackGeometry>,
    exec: Exec,
) -> stereospoof::Result<StereoFrame> {
    let frame = render_scene_with(rig, scene, exec)?;
    match geo {
        Some(g) => {
            let art = place_attack(rig, g)?;
            composite(rig, &frame, &art, &AutoExposure::default())
        }
        None => Ok(frame),
    }
}

pub fn render(a: &RenderArgs, out: &Path) -> CmdResult {
    let rig = a.rig.rig()?;
    let scene = a.scene.scene(a.seed);
    let geo = a.geometry.geometry(a.seed);
    let frame = attacked_frame(&rig, &scene, a.attack.then_some(&geo), Exec::default())?;
    create_dir(out)?;
    let (lp, rp, gp) = (
        out.join("left.ppm"),
        out.join("right.ppm"),
        out.join("ground_truth_depth.pfm"),
    );
    write_ppm(&lp, &frame.left).map_err(|e| at(&lp, e))?;
    write_ppm(&rp, &frame.right).map_err(|e| at(&rp, e))?;
    let gt = ground_truth_depth(&rig, &scene);
    let gt_map = stereospoof::io::FloatMap {
        width: rig.image_width_px,
        height: rig.image_height_px,
        data: gt.iter().map(|&v| v as f32).collect(),
    };
    write_pfm(&gp, &gt_map).map_err(|e| at(&gp, e))?;
    RunConfig {
        subcommand: "render",
        out_dir: out,
        inputs: vec![],
        rig: Some(rig),
        scene: Some(scene),
        geometry: a.attack.then_some(geo),
        matcher: None,
        seed: a.seed,
    }
    .write()?;
    for p in [&lp, &rp, &gp] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

struct MatchOutputs {
    disparity: PathBuf,
    depth: PathBuf,
    cloud: PathBuf,
}

fn write_match_outputs(
    frame: &StereoFrame,
    rig: &StereoRig,
    cfg: &MatcherConfig,
    out: &Path,
) -> Result<(MatchOutputs, stereospoof::depth::DepthMap), Failure> {
    let disp = match_stereo(frame, cfg)?;
    let depth = to_depth(&disp, rig)?;
    let paths = MatchOutputs {
        disparity: out.join("disparity.pfm"),
        depth: out.join("depth.pfm"),
        cloud: out.join("cloud.ply"),
    };
    write_pfm(&paths.disparity, &disp.to_float_map()).map_err(|e| at(&paths.disparity, e))?;
    write_pfm(&paths.depth, &depth.to_float_map()).map_err(|e| at(&paths.depth, e))?;
    write_ply(&paths.cloud, &to_point_cloud(&depth)).map_err(|e| at(&paths.cloud, e))?;
    Ok((paths, depth))
}

pub fn match_pair(a: &MatchArgs, out: &Path) -> CmdResult {
    let left = read_ppm(&a.left).map_err(|e| at(&a.left, e))?;
    let right = read_ppm(&a.right).map_err(|e| at(&a.right, e))?;
    let rig = StereoRig::new(a.focal_px, a.baseline_m, left.width, left.height)?;
    let frame = StereoFrame::new(left, right)?;
    let cfg = a.matcher.config(a.algorithm);
    create_dir(out)?;
    let (paths, depth) = write_match_outputs(&frame, &rig, &cfg, out)?;
    RunConfig {
        subcommand: "match",
        out_dir: out,
        inputs: vec![&a.left, &a.right],
        rig: Some(rig),
        scene: None,
        geometry: None,
        matcher: Some(cfg),
        seed: 0,
    }
    .write()?;
    println!("valid_pixels={}", depth.valid_count());
    for p in [&paths.disparity, &paths.depth, &paths.cloud] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

pub fn analyze(a: &AnalyzeArgs, out: &Path) -> CmdResult {
    let map = read_pfm(&a.depth).map_err(|e| at(&a.depth, e))?;
    let rig = StereoRig::new(a.focal_px, a.baseline_m, map.width, map.height)?;
    let depth = stereospoof::depth::DepthMap::from_float_map(&map, rig)?;
    let report = detect_fake_depth(&depth, a.background_m, &a.detect.config());
    create_dir(out)?;
    let mut text = report.to_kv();
    if let (Some(lp), Some(rp)) = (&a.left, &a.right) {
        let left = read_ppm(lp).map_err(|e| at(lp, e))?;
        let right = read_ppm(rp).map_err(|e| at(rp, e))?;
        let sat = detect_saturation(&StereoFrame::new(left, right)?, a.sat_level, a.sat_frac);
        write_text(&out.join("saturation.json"), &(sat.to_json() + "\n"))?;
        for line in sat.to_kv().lines() {
            let _ = writeln!(text, "saturation_{line}");
        }
    }
    write_text(&out.join("report.txt"), &text)?;
    write_text(&out.join("report.json"), &(report.to_json() + "\n"))?;
    print!("{text}");
    Ok(())
}

/// The prediction a measurement is judged against: the feasible one nearest
/// to the measured depth, else the first feasible, else the first listed.
fn pick_prediction(preds: &[FakeDepthPrediction], measured: Option<f64>) -> Option<FakeDepthPrediction> {
    let feasible: Vec<&FakeDepthPrediction> = preds.iter().filter(|p| p.exists).collect();
    let nearest = measured.and_then(|m| {
        feasible
            .iter()
            .min_by(|a, b| {
                let ea = (m - a.depth_m).abs() / a.depth_m;
                let eb = (m - b.depth_m).abs() / b.depth_m;
                ea.total_cmp(&eb)
            })
            .copied()
    });
    nearest.or(feasible.first().copied()).or(preds.first()).copied()
}

fn judge(report: FakeDepthReport, preds: &[FakeDepthPrediction]) -> FakeDepthReport {
    match pick_prediction(preds, report.measured_depth_m) {
        Some(p) => report.with_prediction(p),
        None => report,
    }
}

pub fn attack(a: &AttackArgs, out: &Path) -> CmdResult {
    let rig = a.rig.rig()?;
    let scene = a.scene.scene(a.seed);
    scene.validate()?;
    let geo = a.geometry.geometry(a.seed);
    if !a.clean {
        geo.validate()?;
    }
    let cfg = a.matcher.config(a.algorithm);
    cfg.validate()?;
    let frame = attacked_frame(&rig, &scene, (!a.clean).then_some(&geo), Exec::default())?;
    create_dir(out)?;
    let (lp, rp) = (out.join("left.ppm"), out.join("right.ppm"));
    write_ppm(&lp, &frame.left).map_err(|e| at(&lp, e))?;
    write_ppm(&rp, &frame.right).map_err(|e| at(&rp, e))?;
    let (_, depth) = write_match_outputs(&frame, &rig, &cfg, out)?;
    let mut report = detect_fake_depth(&depth, scene.nominal_depth_m(), &a.detect.config());
    if !a.clean {
        report = judge(report, &predict_fake_depth(&rig, &geo));
    }
    let sat = detect_saturation(
        &frame,
        stereospoof::analysis::DEFAULT_SAT_LEVEL,
        stereospoof::analysis::DEFAULT_SAT_FRACTION,
    );
    let mut text = report.to_kv();
    for line in sat.to_kv().lines() {
        let _ = writeln!(text, "saturation_{line}");
    }
    write_text(&out.join("report.txt"), &text)?;
    write_text(&out.join("report.json"), &(report.to_json() + "\n"))?;
    write_text(&out.join("saturation.json"), &(sat.to_json() + "\n"))?;
    RunConfig {
        subcommand: "attack",
        out_dir: out,
        inputs: vec![],
        rig: Some(rig),
        scene: Some(scene),
        geometry: (!a.clean).then_some(geo),
        matcher: Some(cfg),
        seed: a.seed,
    }
    .write()?;
    print!("{text}");
    Ok(())
}

fn load_scenario(spec: &str) -> Result<Scenario, Failure> {
    if builtin_source(spec).is_some() {
        return Scenario::builtin(spec).map_err(usage);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(usage(anyhow!("no built-in scenario or file named {spec:?}")));
    }
    // a scenario that cannot be read or parsed is a usage error
    Scenario::load(path).map_err(|e| usage(anyhow::Error::from(e).context(spec.to_string())))
}

pub fn sim(a: &SimArgs, out: &Path) -> CmdResult {
    let mut scenario = load_scenario(&a.scenario)?;
    if let Some(p) = a.period {
        scenario = scenario.with_period(p).map_err(usage)?;
    }
    let traj = run_scenario(&scenario)?;
    create_dir(out)?;
    let csv = out.join(format!("{}.csv", scenario.name));
    write_text(&csv, &traj.to_csv())?;
    let s = traj.summary();
    let mut text = String::new();
    let _ = writeln!(text, "scenario={}", scenario.name);
    let _ = writeln!(text, "steps={}", s.steps);
    let _ = writeln!(text, "duration_s={}", s.duration_s);
    let _ = writeln!(text, "forward_displacement_m={:.4}", s.forward_displacement_m);
    let _ = writeln!(text, "lateral_displacement_m={:.4}", s.lateral_displacement_m);
    let _ = writeln!(text, "min_forward_clearance_m={}", fmt_depth(s.min_forward_clearance_m));
    let _ = writeln!(text, "forward_zero_crossings={}", s.forward_zero_crossings);
    let _ = writeln!(text, "lateral_zero_crossings={}", s.lateral_zero_crossings);
    let _ = writeln!(text, "oa_engaged_steps={}", s.oa_engaged_steps);
    let _ = writeln!(text, "trajectory={}", csv.display());
    print!("{text}");
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    d: f64,
    z: f64,
    algorithm: AlgorithmArg,
    pattern: PatternArg,
    mode: ModeArg,
}

fn pattern_name(p: PatternArg) -> &'static str {
    match p {
        PatternArg::X => "x",
        PatternArg::Trapezoid => "trapezoid",
        PatternArg::Triangle => "triangle",
    }
}

fn mode_name(m: ModeArg) -> &'static str {
    match m {
        ModeArg::Beams => "beams",
        ModeArg::Orbs => "orbs",
        ModeArg::Combined => "combined",
    }
}

fn algorithm_name(a: AlgorithmArg) -> &'static str {
    match a {
        AlgorithmArg::Bm => "bm",
        AlgorithmArg::Sgm => "sgm",
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |v| format!("{v:.4}"))
}

const SWEEP_HEADER: &str =
    "d_m,z_m,algorithm,pattern,mode,source,predicted_m,feasible,detected,blob_area_px,measured_m,relative_error,success";

fn sweep_cell(
    a: &SweepArgs,
    rig: &StereoRig,
    scene: &SceneSpec,
    frame: &StereoFrame,
    c: &Cell,
) -> stereospoof::Result<String> {
    let geo = AttackGeometry {
        intensity_primary: a.primary,
        intensity_secondary: a.secondary,
        jitter_seed: a.seed,
        ..AttackGeometry::new(c.d, c.z, c.pattern.into(), c.mode.into())
    };
    geo.validate()?;
    let art = place_attack(rig, &geo)?;
    let attacked = composite(rig, frame, &art, &AutoExposure::default())?;
    let disp = match_stereo_with(&attacked, &a.matcher.config(c.algorithm), Exec::Sequential)?;
    let depth = to_depth(&disp, rig)?;
    let report = judge(
        detect_fake_depth(&depth, scene.nominal_depth_m(), &a.detect.config()),
        &predict_fake_depth(rig, &geo),
    );
    let (source, predicted, feasible) = match &report.predicted {
        Some(p) => (source_name(p), fmt_depth(p.depth_m), p.exists),
        None => ("none".into(), "none".into(), false),
    };
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        c.d,
        c.z,
        algorithm_name(c.algorithm),
        pattern_name(c.pattern),
        mode_name(c.mode),
        source,
        predicted,
        feasible,
        report.detected,
        report.blob_area_px,
        opt_num(report.measured_depth_m),
        opt_num(report.relative_error),
        report.success
    ))
}

pub fn sweep(a: &SweepArgs, out: &Path) -> CmdResult {
    let rig = a.rig.rig()?;
    let scene = a.scene.scene(a.seed);
    scene.validate()?;
    for alg in &a.algorithms {
        a.matcher.config(*alg).validate()?;
    }
    let mut cells = Vec::new();
    for &d in &a.d_list {
        for &z in &a.z_list {
            for &algorithm in &a.algorithms {
                for &pattern in &a.patterns {
                    for &mode in &a.modes {
                        cells.push(Cell {
                            d,
                            z,
                            algorithm,
                            pattern,
                            mode,
                        });
                    }
                }
            }
        }
    }
    cells.sort_by(|x, y| {
        x.d.total_cmp(&y.d)
            .then(x.z.total_cmp(&y.z))
            .then(x.algorithm.cmp(&y.algorithm))
            .then(pattern_name(x.pattern).cmp(pattern_name(y.pattern)))
            .then(mode_name(x.mode).cmp(mode_name(y.mode)))
    });
    let frame = render_scene(&rig, &scene)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Failure::Io(e.into()))?;
    // rows come back in cell order whatever the scheduling
    let rows: Vec<stereospoof::Result<String>> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| sweep_cell(a, &rig, &scene, &frame, c))
            .collect()
    });
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in rows {
        csv.push_str(&r?);
        csv.push('\n');
    }
    create_dir(out)?;
    let path = out.join("sweep.csv");
    write_text(&path, &csv)?;
    RunConfig {
        subcommand: "sweep",
        out_dir: out,
        inputs: vec![],
        rig: Some(rig),
        scene: Some(scene),
        geometry: None,
        matcher: None,
        seed: a.seed,
    }
    .write()?;
    println!("cells={}", cells.len());
    println!("wrote {}", path.display());
    Ok(())
}
