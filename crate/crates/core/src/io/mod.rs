//! File formats: binary PPM/PGM for frames, PFM for float maps, ASCII PLY for
//! point clouds.

pub mod pfm;
pub mod ply;
pub mod pnm;

pub use pfm::{read_pfm, write_pfm, FloatMap};
pub use ply::{read_ply, write_ply};
pub use pnm::{read_pgm, read_ppm, write_pgm, write_ppm};
