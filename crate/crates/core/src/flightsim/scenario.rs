use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::controller::{step, ControllerConfig, DepthObservation, DroneState, FlightMode, ObservationSource, Sector};
use super::schedule::{manipulate, InjectionEvent, InjectionSchedule};
use crate::analysis::{detect_fake_depth, DetectConfig};
use crate::depth::{match_stereo, to_depth, MatcherConfig};
use crate::error::{Error, Result};
use crate::geometry::{AttackGeometry, AttackMode, AttackPattern, StereoRig};
use crate::render::{composite, place_attack, render_scene, AutoExposure, SceneSpec};

const BUILTINS: [(&str, &str); 4] = [
    ("sudden_stop", include_str!("../../scenarios/sudden_stop.toml")),
    ("drift_away", include_str!("../../scenarios/drift_away.toml")),
    ("shake_fb", include_str!("../../scenarios/shake_fb.toml")),
    ("shake_lr", include_str!("../../scenarios/shake_lr.toml")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorMode {
    /// Fake depths are taken from the schedule as given.
    Sector,
    /// Each event's fake depth is measured by running its attack through the
    /// render, match and detect pipeline.
    Rendered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub position_m: [f64; 3],
    /// Body frame (forward, right, up), m/s.
    pub velocity_mps: [f64; 3],
    pub heading_rad: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState {
            position_m: [0.0, 0.0, 10.0],
            velocity_mps: [0.0; 3],
            heading_rad: 0.0,
        }
    }
}

/// Pilot command from `t_s` until the next segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotSegment {
    pub t_s: f64,
    /// Body frame (forward, right, up), m/s.
    pub command_mps: [f64; 3],
}

/// True nearest-obstacle depth per sector, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorTruth {
    pub forward_m: f64,
    pub backward_m: f64,
    pub left_m: f64,
    pub right_m: f64,
}

impl Default for SectorTruth {
    fn default() -> Self {
        SectorTruth {
            forward_m: f64::INFINITY,
            backward_m: f64::INFINITY,
            left_m: f64::INFINITY,
            right_m: f64::INFINITY,
        }
    }
}

impl SectorTruth {
    fn observation(&self) -> DepthObservation {
        DepthObservation {
            sectors: [self.forward_m, self.backward_m, self.left_m, self.right_m],
            source: ObservationSource::TrueScene,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttack {
    separation_m: f64,
    distance_m: f64,
    pattern: AttackPattern,
    mode: AttackMode,
    #[serde(default)]
    lateral_offset_m: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    t_start_s: f64,
    t_end_s: Option<f64>,
    sector: Sector,
    fake_depth_m: Option<f64>,
    attack: Option<RawAttack>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    repeat_period_s: Option<f64>,
    #[serde(default)]
    mask_truth: bool,
    #[serde(default)]
    events: Vec<Spanned<RawEvent>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    duration_s: f64,
    #[serde(default = "default_dt")]
    dt_s: f64,
    #[serde(default)]
    seed: u64,
    mode: FlightMode,
    #[serde(default = "default_sensor")]
    sensor: SensorMode,
    #[serde(default)]
    initial: InitialState,
    #[serde(default)]
    controller: ControllerConfig,
    #[serde(default)]
    pilot: Vec<PilotSegment>,
    #[serde(default)]
    truth: SectorTruth,
    rig: Option<StereoRig>,
    scene: Option<SceneSpec>,
    matcher: Option<MatcherConfig>,
    #[serde(default)]
    schedule: RawSchedule,
}

fn default_dt() -> f64 {
    0.02
}

fn default_sensor() -> SensorMode {
    SensorMode::Sector
}

/// A fully resolved scenario: rendered events already carry their measured
/// fake depth, so the simulation itself is a pure function of this record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
    pub mode: FlightMode,
    pub sensor: SensorMode,
    pub initial: InitialState,
    pub controller: ControllerConfig,
    pub pilot: Vec<PilotSegment>,
    pub truth: SectorTruth,
    pub schedule: InjectionSchedule,
}

/// Default night scene for rendered events: a black wall far beyond the OA range.
const RENDERED_WALL_M: f64 = 30.0;

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn parse_err(text: &str, offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: line_of(text, offset),
        message: message.into(),
    }
}

impl Scenario {
    /// Parses a scenario file. Syntax and schema errors carry the offending
    /// line; rendered events run the image pipeline here.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().trim().to_string(),
        })?;

        if !(raw.duration_s > 0.0 && raw.duration_s.is_finite()) {
            return Err(parse_err(
                text,
                0,
                format!("duration_s must be positive, got {}", raw.duration_s),
            ));
        }
        if !(raw.dt_s > 0.0 && raw.dt_s <= 0.1) {
            return Err(parse_err(
                text,
                0,
                format!("dt_s must lie in (0, 0.1], got {}", raw.dt_s),
            ));
        }
        raw.controller.validate()?;
        let mut pilot = raw.pilot.clone();
        pilot.sort_by(|a, b| a.t_s.total_cmp(&b.t_s));
        let truth = raw.truth.observation();
        truth.validate()?;

        let rig = raw.rig.unwrap_or_default();
        let scene = raw.scene.unwrap_or(SceneSpec {
            texture_seed: raw.seed,
            ..SceneSpec::wall(RENDERED_WALL_M, 0.0)
        });
        let matcher = raw.matcher.unwrap_or_default();
        let mut events = Vec::with_capacity(raw.schedule.events.len());
        for spanned in &raw.schedule.events {
            let at = spanned.span().start;
            let e = spanned.get_ref();
            let t_end_s = e.t_end_s.unwrap_or(f64::INFINITY);
            let fake = match (raw.sensor, e.fake_depth_m, e.attack) {
                (SensorMode::Sector, Some(d), None) => Some(d),
                (SensorMode::Rendered, None, Some(a)) => measure_attack(&rig, &scene, &matcher, &a, raw.seed)?,
                (SensorMode::Sector, _, _) => {
                    return Err(parse_err(
                        text,
                        at,
                        "sector-mode events need fake_depth_m and no attack",
                    ))
                }
                (SensorMode::Rendered, _, _) => {
                    return Err(parse_err(
                        text,
                        at,
                        "rendered-mode events need an attack and no fake_depth_m",
                    ))
                }
            };
            // an attack whose fake depth is not detected leaves the sensor untouched
            if let Some(fake_depth_m) = fake {
                events.push(InjectionEvent {
                    t_start_s: e.t_start_s,
                    t_end_s,
                    sector: e.sector,
                    fake_depth_m,
                });
            }
        }
        let schedule = InjectionSchedule::new(events, raw.schedule.repeat_period_s, raw.schedule.mask_truth)?;

        Ok(Scenario {
            name: raw.name,
            duration_s: raw.duration_s,
            dt_s: raw.dt_s,
            seed: raw.seed,
            mode: raw.mode,
            sensor: raw.sensor,
            initial: raw.initial,
            controller: raw.controller,
            pilot,
            truth: raw.truth,
            schedule,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let src = builtin_source(name).ok_or_else(|| {
            let known: Vec<&str> = builtin_names().collect();
            Error::Config(format!("unknown scenario {name:?}; built-ins are {}", known.join(", ")))
        })?;
        Self::from_toml(src)
    }

    /// Rescales the schedule's event times to a new repeat period.
    pub fn with_period(mut self, period_s: f64) -> Result<Self> {
        let Some(old) = self.schedule.repeat_period_s() else {
            return Err(Error::Config(format!("scenario {:?} has no repeat period", self.name)));
        };
        let k = period_s / old;
        let events = self
            .schedule
            .events()
            .iter()
            .map(|e| InjectionEvent {
                t_start_s: e.t_start_s * k,
                t_end_s: e.t_end_s * k,
                ..*e
            })
            .collect();
        self.schedule = InjectionSchedule::new(events, Some(period_s), self.schedule.mask_truth())?;
        Ok(self)
    }

    /// The scenario as TOML; re-parsing it yields the same simulation.
    pub fn to_toml(&self) -> String {
        let mut v = toml::Value::try_from(self).expect("scenario serializes");
        // resolved depths are replayed in sector mode
        if let Some(t) = v.as_table_mut() {
            t.insert("sensor".into(), toml::Value::String("sector".into()));
            if let Some(toml::Value::Table(s)) = t.get_mut("schedule") {
                if let Some(toml::Value::Array(evs)) = s.get_mut("events") {
                    for e in evs.iter_mut().filter_map(|e| e.as_table_mut()) {
                        if e.get("t_end_s").and_then(|x| x.as_float()) == Some(f64::INFINITY) {
                            e.remove("t_end_s");
                        }
                    }
                }
            }
        }
        toml::to_string(&v).expect("scenario serializes")
    }

    fn command_at(&self, t: f64) -> [f64; 3] {
        self.pilot
            .iter()
            .rev()
            .find(|p| p.t_s <= t)
            .map_or([0.0; 3], |p| p.command_mps)
    }

    pub fn steps(&self) -> usize {
        (self.duration_s / self.dt_s).round() as usize
    }
}

fn measure_attack(
    rig: &StereoRig,
    scene: &SceneSpec,
    matcher: &MatcherConfig,
    a: &RawAttack,
    seed: u64,
) -> Result<Option<f64>> {
    let mut geo = AttackGeometry::new(a.separation_m, a.distance_m, a.pattern, a.mode);
    geo.lateral_offset_m = a.lateral_offset_m;
    geo.jitter_seed = seed;
    let frame = render_scene(rig, scene)?;
    let artifacts = place_attack(rig, &geo)?;
    let attacked = composite(rig, &frame, &artifacts, &AutoExposure::default())?;
    let depth = to_depth(&match_stereo(&attacked, matcher)?, rig)?;
    let report = detect_fake_depth(&depth, scene.nominal_depth_m(), &DetectConfig::default());
    Ok(report.measured_depth_m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t_s: f64,
    pub command_mps: [f64; 3],
    pub state: DroneState,
    pub observation: DepthObservation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub rows: Vec<TrajectoryRow>,
}

pub const LOG_COLUMNS: &str = "t_s,cmd_forward_mps,cmd_right_mps,cmd_up_mps,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,heading_rad,mode,oa_engaged,forward_m,backward_m,left_m,right_m,source";

/// Simulates at a fixed step; row `i` holds the state at `t = i * dt` and the
/// observation the controller acts on during that step.
pub fn run_scenario(scenario: &Scenario) -> Result<Trajectory> {
    let init = &scenario.initial;
    let mut state = DroneState {
        position: init.position_m,
        velocity: super::controller::to_world(init.heading_rad, init.velocity_mps),
        heading_rad: init.heading_rad,
        mode: scenario.mode,
        oa_engaged: false,
    };
    let truth = scenario.truth.observation();
    let n = scenario.steps();
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 * scenario.dt_s;
        let obs = manipulate(&truth, &scenario.schedule, t);
        let cmd = scenario.command_at(t);
        rows.push(TrajectoryRow {
            t_s: t,
            command_mps: cmd,
            state,
            observation: obs,
        });
        if i < n {
            state = step(&state, cmd, &obs, scenario.dt_s, &scenario.controller)?;
        }
    }
    Ok(Trajectory {
        scenario: scenario.clone(),
        rows,
    })
}

/// Sign changes, skipping exact zeros.
pub fn zero_crossings(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut n = 0;
    for v in values {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            n += 1;
        }
        last = v;
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub steps: usize,
    pub duration_s: f64,
    /// Along the initial heading, meters.
    pub forward_displacement_m: f64,
    /// Along the initial right axis; negative is leftward.
    pub lateral_displacement_m: f64,
    pub min_forward_clearance_m: f64,
    pub forward_zero_crossings: usize,
    pub lateral_zero_crossings: usize,
    pub oa_engaged_steps: usize,
}

fn mode_name(m: FlightMode) -> &'static str {
    match m {
        FlightMode::Positioning => "positioning",
        FlightMode::ActiveTrack => "active_track",
    }
}

impl Trajectory {
    fn body_offset(&self, a: &TrajectoryRow, b: &TrajectoryRow) -> [f64; 3] {
        let p = b.state.position;
        let q = a.state.position;
        super::controller::to_body(
            self.scenario.initial.heading_rad,
            [p[0] - q[0], p[1] - q[1], p[2] - q[2]],
        )
    }

    /// Displacement in the initial body frame between the first rows at or
    /// after `t0` and `t1`.
    pub fn displacement_between(&self, t0: f64, t1: f64) -> Option<[f64; 3]> {
        let a = self.rows.iter().find(|r| r.t_s >= t0)?;
        let b = self.rows.iter().find(|r| r.t_s >= t1)?;
        Some(self.body_offset(a, b))
    }

    pub fn summary(&self) -> TrajectorySummary {
        let first = &self.rows[0];
        let last = &self.rows[self.rows.len() - 1];
        let off = self.body_offset(first, last);
        let body: Vec<[f64; 3]> = self.rows.iter().map(|r| r.state.body_velocity()).collect();
        TrajectorySummary {
            steps: self.rows.len() - 1,
            duration_s: last.t_s,
            forward_displacement_m: off[0],
            lateral_displacement_m: off[1],
            min_forward_clearance_m: self
                .rows
                .iter()
                .map(|r| r.observation.depth(Sector::Forward))
                .fold(f64::INFINITY, f64::min),
            forward_zero_crossings: zero_crossings(body.iter().map(|v| v[0])),
            lateral_zero_crossings: zero_crossings(body.iter().map(|v| v[1])),
            oa_engaged_steps: self.rows.iter().filter(|r| r.state.oa_engaged).count(),
        }
    }

    /// CSV with a `#`-prefixed header block holding the resolved scenario.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in self.scenario.to_toml().lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(LOG_COLUMNS);
        out.push('\n');
        for r in &self.rows {
            let s = &r.state;
            let o = &r.observation;
            let src = match o.source {
                ObservationSource::TrueScene => "true_scene",
                ObservationSource::Manipulated => "manipulated",
            };
            let c = r.command_mps;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.t_s,
                c[0],
                c[1],
                c[2],
                s.position[0],
                s.position[1],
                s.position[2],
                s.velocity[0],
                s.velocity[1],
                s.velocity[2],
                s.heading_rad,
                mode_name(s.mode),
                s.oa_engaged,
                o.sectors[0],
                o.sectors[1],
                o.sectors[2],
                o.sectors[3],
                src
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "hover"
duration_s = 1.0
mode = "positioning"
"#;

    #[test]
    fn minimal_scenario_hovers() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(s.dt_s, 0.02);
        let t = run_scenario(&s).unwrap();
        assert_eq!(t.rows.len(), 51);
        assert!(t.rows.iter().all(|r| r.state.velocity == [0.0; 3]));
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "name = \"x\"\nduration_s = 1.0\nmode = = 3\n";
        match Scenario::from_toml(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "name = \"x\"\nduration_s = 1.0\nmode = \"positioning\"\n\n[initial]\nvelocty_mps = [1, 0, 0]\n";
        match Scenario::from_toml(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 6, "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn event_without_depth_reports_its_line() {
        let text = "name = \"x\"\nduration_s = 1.0\nmode = \"positioning\"\n\n[[schedule.events]]\nt_start_s = 0.0\nsector = \"left\"\n";
        match Scenario::from_toml(text) {
            Err(Error::Parse { line, .. }) => assert!((5..=7).contains(&line), "{line}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overlapping_events_fail_at_load() {
        let text = r#"
name = "x"
duration_s = 1.0
mode = "positioning"
[[schedule.events]]
t_start_s = 0.0
t_end_s = 0.6
sector = "forward"
fake_depth_m = 1.0
[[schedule.events]]
t_start_s = 0.5
sector = "forward"
fake_depth_m = 1.0
"#;
        assert!(matches!(Scenario::from_toml(text), Err(Error::Schedule(_))));
    }

    #[test]
    fn header_round_trips() {
        for name in builtin_names() {
            let s = Scenario::builtin(name).unwrap();
            let back = Scenario::from_toml(&s.to_toml()).unwrap();
            assert_eq!(back, s, "{name}");
        }
    }

    #[test]
    fn zero_crossing_counter() {
        assert_eq!(zero_crossings([1.0, 0.0, -1.0, -2.0, 0.0, 3.0]), 2);
        assert_eq!(zero_crossings([0.0, -1.0, -1.0]), 0);
    }

    #[test]
    fn period_override_rescales_events() {
        let s = Scenario::builtin("shake_fb").unwrap().with_period(1.0).unwrap();
        assert_eq!(s.schedule.repeat_period_s(), Some(1.0));
        assert_eq!(s.schedule.events()[0].t_end_s, 0.5);
    }
}
