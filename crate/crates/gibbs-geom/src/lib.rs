//! File formats, statistics and experiment drivers around `gibbs-geom-core`.

pub mod csv_out;
pub mod dlr;
pub mod dto;
pub mod experiment;
pub mod io;
pub mod stats;
pub mod svg;

pub use gibbs_geom_core as core;
