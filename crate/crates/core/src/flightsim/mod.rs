//! Discrete-time drone with an obstacle-avoidance controller, a depth
//! manipulator between sensor and controller, and scenario files.

mod controller;
mod scenario;
mod schedule;

pub use controller::{
    step, to_body, to_world, ControllerConfig, DepthObservation, DroneState, FlightMode, ObservationSource, Sector,
};
pub use scenario::{
    builtin_names, builtin_source, run_scenario, zero_crossings, InitialState, PilotSegment, Scenario, SectorTruth,
    SensorMode, Trajectory, TrajectoryRow, TrajectorySummary, LOG_COLUMNS,
};
pub use schedule::{manipulate, InjectionEvent, InjectionSchedule};
