use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightMode {
    Positioning,
    ActiveTrack,
}

/// Horizontal sensing directions in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Forward,
    Backward,
    Left,
    Right,
}

impl Sector {
    pub const ALL: [Sector; 4] = [Sector::Forward, Sector::Backward, Sector::Left, Sector::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    /// (axis, sign): axis 0 is forward, 1 is right.
    fn axis(self) -> (usize, f64) {
        match self {
            Sector::Forward => (0, 1.0),
            Sector::Backward => (0, -1.0),
            Sector::Right => (1, 1.0),
            Sector::Left => (1, -1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationSource {
    TrueScene,
    Manipulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthObservation {
    /// Nearest obstacle per [`Sector`] (forward, backward, left, right), meters;
    /// infinite when clear.
    pub sectors: [f64; 4],
    pub source: ObservationSource,
}

impl DepthObservation {
    pub fn clear() -> Self {
        DepthObservation {
            sectors: [f64::INFINITY; 4],
            source: ObservationSource::TrueScene,
        }
    }

    pub fn depth(&self, s: Sector) -> f64 {
        self.sectors[s.index()]
    }

    pub fn validate(&self) -> Result<()> {
        match self.sectors.iter().find(|&&d| !(d > 0.0)) {
            Some(d) => Err(Error::Domain(format!("sector depth must be positive, got {d}"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Velocity tracking time constant, seconds.
    pub tau_s: f64,
    /// ActiveTrack sidestep speed, m/s.
    pub v_avoid_mps: f64,
    pub max_speed_mps: f64,
    pub oa_threshold_m: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            tau_s: 0.3,
            v_avoid_mps: 1.0,
            max_speed_mps: 5.0,
            oa_threshold_m: 6.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_s", self.tau_s),
            ("max_speed_mps", self.max_speed_mps),
            ("oa_threshold_m", self.oa_threshold_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.v_avoid_mps >= 0.0 && self.v_avoid_mps <= self.max_speed_mps) {
            return Err(Error::Config(format!(
                "v_avoid_mps must lie in [0, max_speed_mps], got {}",
                self.v_avoid_mps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    /// World frame: x east, y north, z up (meters).
    pub position: [f64; 3],
    /// World frame, m/s.
    pub velocity: [f64; 3],
    /// Clockwise from north, radians.
    pub heading_rad: f64,
    pub mode: FlightMode,
    pub oa_engaged: bool,
}

impl DroneState {
    pub fn hovering(mode: FlightMode, altitude_m: f64) -> Self {
        DroneState {
            position: [0.0, 0.0, altitude_m],
            velocity: [0.0; 3],
            heading_rad: 0.0,
            mode,
            oa_engaged: false,
        }
    }

    /// Velocity as (forward, right, up).
    pub fn body_velocity(&self) -> [f64; 3] {
        to_body(self.heading_rad, self.velocity)
    }

    pub fn speed(&self) -> f64 {
        norm(self.velocity)
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn scale_to(v: [f64; 3], max: f64) -> [f64; 3] {
    let n = norm(v);
    if n > max {
        let k = max / n;
        [v[0] * k, v[1] * k, v[2] * k]
    } else {
        v
    }
}

pub fn to_body(heading: f64, world: [f64; 3]) -> [f64; 3] {
    let (s, c) = heading.sin_cos();
    [world[0] * s + world[1] * c, world[0] * c - world[1] * s, world[2]]
}

pub fn to_world(heading: f64, body: [f64; 3]) -> [f64; 3] {
    let (s, c) = heading.sin_cos();
    [body[0] * s + body[1] * c, body[0] * c - body[1] * s, body[2]]
}

/// Advances the drone by `dt` seconds under a body-frame pilot command
/// (forward, right, up in m/s).
///
/// Velocity follows the command with a first-order lag. A blocked sector in
/// the commanded direction zeroes the velocity toward it (both modes); in
/// ActiveTrack every blocked sector additionally pushes the drone away from
/// it at the avoidance speed. Position is integrated with the new velocity.
pub fn step(
    state: &DroneState,
    pilot_cmd: [f64; 3],
    obs: &DepthObservation,
    dt: f64,
    cfg: &ControllerConfig,
) -> Result<DroneState> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::Domain(format!("dt must lie in (0, 0.1] s, got {dt}")));
    }
    let cmd = scale_to(pilot_cmd, cfg.max_speed_mps);
    let mut v = state.body_velocity();
    let alpha = (dt / cfg.tau_s).min(1.0);
    for i in 0..3 {
        v[i] += (cmd[i] - v[i]) * alpha;
    }

    let blocked = |s: Sector| obs.depth(s) < cfg.oa_threshold_m;
    let mut engaged = false;
    for s in Sector::ALL {
        let (axis, sign) = s.axis();
        if cmd[axis] * sign > 0.0 && blocked(s) {
            engaged = true;
            if v[axis] * sign > 0.0 {
                v[axis] = 0.0;
            }
        }
    }
    if state.mode == FlightMode::ActiveTrack {
        for s in Sector::ALL {
            if blocked(s) {
                let (axis, sign) = s.axis();
                engaged = true;
                v[axis] = -sign * cfg.v_avoid_mps;
            }
        }
    }

    let mut world_v = scale_to(to_world(state.heading_rad, v), cfg.max_speed_mps);
    let mut position = [0.0; 3];
    for i in 0..3 {
        position[i] = state.position[i] + world_v[i] * dt;
    }
    if position[2] < 0.0 {
        position[2] = 0.0;
        world_v[2] = world_v[2].max(0.0);
    }
    Ok(DroneState {
        position,
        velocity: world_v,
        heading_rad: state.heading_rad,
        mode: state.mode,
        oa_engaged: engaged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(forward: f64, right: f64) -> DepthObservation {
        let mut o = DepthObservation::clear();
        o.sectors[Sector::Forward.index()] = forward;
        o.sectors[Sector::Right.index()] = right;
        o
    }

    #[test]
    fn brakes_when_forward_blocked() {
        let cfg = ControllerConfig::default();
        let mut s = DroneState::hovering(FlightMode::Positioning, 10.0);
        s.velocity = [0.0, 2.0, 0.0];
        let n = step(&s, [2.0, 0.0, 0.0], &obs(3.0, f64::INFINITY), 0.02, &cfg).unwrap();
        assert_eq!(n.body_velocity()[0], 0.0);
        assert!(n.oa_engaged);
    }

    #[test]
    fn tracks_command_within_five_tau() {
        let cfg = ControllerConfig::default();
        let mut s = DroneState::hovering(FlightMode::Positioning, 10.0);
        let clear = DepthObservation::clear();
        for _ in 0..(5.0 * cfg.tau_s / 0.02) as usize {
            s = step(&s, [2.0, 0.0, 0.0], &clear, 0.02, &cfg).unwrap();
        }
        let fwd = s.body_velocity()[0];
        assert!(fwd > 2.0 * 0.99 && fwd <= 2.0, "{fwd}");
        assert!(!s.oa_engaged);
    }

    #[test]
    fn active_track_sidesteps_left_of_right_obstacle() {
        let cfg = ControllerConfig::default();
        let s = DroneState::hovering(FlightMode::ActiveTrack, 10.0);
        let n = step(&s, [2.0, 0.0, 0.0], &obs(f64::INFINITY, 4.0), 0.02, &cfg).unwrap();
        let v = n.body_velocity();
        assert_eq!(v[1], -1.0);
        assert!(v[0] > 0.0);
    }

    #[test]
    fn speed_is_capped() {
        let cfg = ControllerConfig::default();
        let mut s = DroneState::hovering(FlightMode::ActiveTrack, 10.0);
        for _ in 0..200 {
            s = step(&s, [9.0, 9.0, 0.0], &obs(f64::INFINITY, 2.0), 0.02, &cfg).unwrap();
            assert!(s.speed() <= cfg.max_speed_mps + 1e-12);
        }
    }

    #[test]
    fn heading_round_trip() {
        let v = [1.5, -0.25, 0.5];
        let w = to_world(0.7, v);
        let b = to_body(0.7, w);
        for i in 0..3 {
            assert!((b[i] - v[i]).abs() < 1e-12);
        }
        assert_eq!(to_world(0.0, [2.0, 0.0, 0.0]), [0.0, 2.0, 0.0]);
    }

    #[test]
    fn rejects_large_dt() {
        let s = DroneState::hovering(FlightMode::Positioning, 1.0);
        assert!(step(
            &s,
            [0.0; 3],
            &DepthObservation::clear(),
            0.5,
            &ControllerConfig::default()
        )
        .is_err());
    }
}
