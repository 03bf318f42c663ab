use serde::{Deserialize, Serialize};

use super::controller::{DepthObservation, ObservationSource, Sector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionEvent {
    pub t_start_s: f64,
    /// Exclusive end, seconds.
    pub t_end_s: f64,
    pub sector: Sector,
    pub fake_depth_m: f64,
}

impl InjectionEvent {
    fn active_at(&self, t: f64) -> bool {
        self.t_start_s <= t && t < self.t_end_s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InjectionSchedule {
    events: Vec<InjectionEvent>,
    repeat_period_s: Option<f64>,
    /// Replace the true depth instead of taking the nearer of the two.
    mask_truth: bool,
}

impl InjectionSchedule {
    /// Sorts events by start time and rejects overlaps within a sector.
    pub fn new(mut events: Vec<InjectionEvent>, repeat_period_s: Option<f64>, mask_truth: bool) -> Result<Self> {
        if let Some(p) = repeat_period_s {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Schedule(format!("repeat period must be positive, got {p}")));
            }
        }
        for e in &events {
            if !(e.fake_depth_m > 0.0) {
                return Err(Error::Schedule(format!(
                    "fake depth must be positive, got {}",
                    e.fake_depth_m
                )));
            }
            if !(e.t_start_s >= 0.0 && e.t_start_s < e.t_end_s) {
                return Err(Error::Schedule(format!(
                    "event needs 0 <= start < end, got [{}, {})",
                    e.t_start_s, e.t_end_s
                )));
            }
            if let Some(p) = repeat_period_s {
                if e.t_end_s > p {
                    return Err(Error::Schedule(format!(
                        "event ending at {} s exceeds the {p} s repeat period",
                        e.t_end_s
                    )));
                }
            }
        }
        events.sort_by(|a, b| a.t_start_s.total_cmp(&b.t_start_s));
        for (i, a) in events.iter().enumerate() {
            if let Some(b) = events[i + 1..]
                .iter()
                .find(|b| b.sector == a.sector && b.t_start_s < a.t_end_s)
            {
                return Err(Error::Schedule(format!(
                    "{:?} events [{}, {}) and [{}, {}) overlap",
                    a.sector, a.t_start_s, a.t_end_s, b.t_start_s, b.t_end_s
                )));
            }
        }
        Ok(InjectionSchedule {
            events,
            repeat_period_s,
            mask_truth,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[InjectionEvent] {
        &self.events
    }

    pub fn repeat_period_s(&self) -> Option<f64> {
        self.repeat_period_s
    }

    pub fn mask_truth(&self) -> bool {
        self.mask_truth
    }

    /// Events active at time `t`, after tiling by the repeat period.
    pub fn active(&self, t: f64) -> impl Iterator<Item = &InjectionEvent> {
        let local = match self.repeat_period_s {
            Some(p) => t.rem_euclid(p),
            None => t,
        };
        self.events.iter().filter(move |e| e.active_at(local))
    }
}

/// Rewrites the observation with every event active at `t`.
pub fn manipulate(obs_true: &DepthObservation, sched: &InjectionSchedule, t: f64) -> DepthObservation {
    let mut out = *obs_true;
    for e in sched.active(t) {
        let slot = &mut out.sectors[e.sector.index()];
        *slot = if sched.mask_truth {
            e.fake_depth_m
        } else {
            slot.min(e.fake_depth_m)
        };
        out.source = ObservationSource::Manipulated;
    }
    out
}
