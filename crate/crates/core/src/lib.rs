//! Simulation and numerical verification of inhomogeneous random graphs.
//!
//! Points are drawn from a diffuse probability measure (as a Poisson process
//! of intensity `s` or as `n` i.i.d. points) and each pair `x, y` is joined
//! independently with probability `phi(x, y)`. The crate samples these
//! graphs through an explicit marked construction, counts degree,
//! component and connected-subgraph statistics, evaluates the Mecke-formula
//! expectations and Stein-method Poisson approximation bounds for them, and
//! compares empirical laws with their Poisson targets.
//!
//! Module map:
//! - [`statespace`]: state spaces, measures, sampling and ball measures.
//! - [`connection`]: connection-function families and kernel quantities.
//! - [`marks`], [`sampler`]: marked configurations and graph construction.
//! - [`stats`]: `D_j`, `N_k` and `H_k` counts.
//! - [`analytics`]: expectations, Stein bounds, calibration.
//! - [`distributions`]: Poisson/empirical laws, `d_TV`, `d_W`, moments.
//! - [`harness`]: configuration-driven experiments and output files.

pub mod analytics;
pub mod connection;
pub mod distributions;
pub mod error;
pub mod graph;
pub mod harness;
pub mod marks;
pub mod mc;
pub mod rng;
pub mod sampler;
pub mod statespace;
pub mod stats;

pub use connection::{ConnectMethod, ConnectionFunction, Kernel};
pub use error::{Error, Result};
pub use graph::Graph;
pub use sampler::{Construction, MarkedConfiguration, Process};
pub use statespace::{Point, ProbabilityMeasure, SpaceKind};
