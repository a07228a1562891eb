//! Electromechanical wave propagation toolkit.
//!
//! Simulates swing-equation dynamics on a geo-located network, synthesises
//! sensor-grade frequency traces, and turns threshold arrival times into
//! interpolated arrival maps, propagation-speed fields, event locations and
//! penetration/speed statistics.

pub mod config;
pub mod detect;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod field;
pub mod geometry;
pub mod locate;
pub mod network;
pub mod pipeline;
pub mod powerflow;
pub mod replay;
pub mod rng;
pub mod scenario;
pub mod sensor;
pub mod stats;

pub use error::{Error, Result};
