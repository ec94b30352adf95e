//! Online bounded-delay buffer management with two packet weights.
//!
//! Unit-length packets (jobs) arrive over discrete time slots and must be
//! sent before their deadline; at most one is sent per slot and the goal is
//! to maximize the total weight sent. Weights are either 1 (light) or
//! `alpha > 1` (heavy).
//!
//! The crate provides the data model and generators ([`model`]), the online
//! policies and simulation engine ([`scheduling`]), the exact offline
//! optimum ([`offline`]), competitive-ratio accounting ([`analysis`]) and a
//! property suite over random corpora ([`verify`]).

pub mod analysis;
pub mod model;
pub mod offline;
pub mod rng;
pub mod scheduling;
pub mod verify;

pub use analysis::{CurveRow, Estimate, ProfileCounts, Ratio, YaoBound};
pub use model::{GenParams, Instance, Job, JobId, Schedule, Slot};
pub use offline::{OptMethod, OptResult};
pub use rng::SplitMix64;
pub use scheduling::{Policy, PolicyKind, ALPHA_STAR};
