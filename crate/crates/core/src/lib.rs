//! Simulation kernel for marked Gibbs point processes in low dimension.
//!
//! Two model families are covered: facet processes, where each point
//! carries a flat disc (a segment in the plane) and the energy counts
//! intersections, and Gibbs-Laguerre tessellations, where each point carries
//! a weight and the energy counts vertices of the power diagram.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, statistics
//! and the command-line front end live in the `gibbs-geom` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(a < b)` is deliberate where NaN must fall through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod config;
pub mod counterexample;
pub mod energy;
pub mod facet;
pub mod laguerre;
pub mod laguerre_energy;
pub mod mcmc;
pub mod poisson;
pub mod predicates;
pub mod rng;
pub(crate) mod vec;
pub mod window;

pub use config::{Configuration, ConfigError, Mark, MarkedPoint};
pub use energy::Energy;
pub use window::Window;

/// Default temperedness exponent.
pub const DEFAULT_DELTA: f64 = 0.5;
