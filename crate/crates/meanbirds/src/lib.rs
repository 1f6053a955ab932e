//! File formats, the staged pipeline runner, a thread-pool executor and the
//! annotation service. The algorithms live in `meanbirds-core`.

pub mod config;
pub mod io;
pub mod parallel;
pub mod pipeline;
pub mod service;

pub use meanbirds_core as core;
