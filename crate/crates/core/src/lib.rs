//! Exact distributions of the lattice random walks that approximate Brownian
//! ratchets and flashing Brownian ratchets, together with the Parrondo games
//! they induce.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: the continuous model (sawtooth potential, drift, invariant density).
//! - [`games`]: games A and B on a cycle, stationary profits, mixtures and patterns.
//! - [`lattice`]: exact evolution of lattice distributions under the flashing schedule.
//! - [`stationary`]: the wrapped once-per-cycle chain, its stationary law and mean displacement.
//! - [`stats`]: peak statistics, normal comparison, parameter sweeps.
//! - [`mc`]: an Euler–Maruyama cross-check of the lattice computations.
//! - [`io`]: CSV and binary file formats.

pub mod error;
pub mod games;
pub mod io;
pub mod lattice;
pub mod mc;
pub mod model;
pub mod rational;
pub mod stationary;
pub mod stats;

pub(crate) mod linalg;
pub(crate) mod par;

pub use error::{Error, Result};
pub use games::{CycleChain, GameB};
pub use lattice::{FlashingSchedule, LatticeDistribution, RatchetKernel};
pub use model::{FlashingPhase, RatchetParams};
pub use rational::Rational;
pub use stationary::{StationaryResult, WrappedCycleMatrix};
pub use stats::PeakStats;
