//! Desk-scale laboratory for stereo-depth spoofing with injected light.
//!
//! The pipeline runs in five stages, one module each:
//!
//! - [`geometry`]: pinhole stereo model and closed-form fake-depth predictions
//! - [`render`]: synthetic stereo pairs with glares, flare orbs and auto exposure
//! - [`depth`]: block matching and semi-global matching, depth maps, point clouds
//! - [`analysis`]: fake-obstacle detection, expected-depth tables, saturation defence
//! - [`flightsim`]: obstacle-avoidance flight loop driven by a depth manipulator
//!
//! Data-parallel kernels honour [`Exec`]; the `parallel` feature (on by default)
//! enables rayon.

pub mod analysis;
pub mod depth;
pub mod error;
pub mod exec;
pub mod flightsim;
pub mod geometry;
pub mod io;
pub mod raster;
pub mod render;

pub use error::{Error, Result};
pub use exec::Exec;
