//! Dynamics of continuously driven V-type quantum emitters and emitter chains
//! coupled to acoustic phonons.
//!
//! Two independent engines are provided: a time-nonlocal polaron master
//! equation ([`polaron`]) and a second-order Heisenberg correlation expansion
//! on a discretized phonon grid ([`heisenberg`]).

pub mod analysis;
pub mod bath;
pub mod error;
pub mod heisenberg;
pub mod io;
pub mod linalg;
pub mod polaron;
pub mod system;
pub mod units;

pub use error::{Error, Result};
