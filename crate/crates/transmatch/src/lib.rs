//! File formats, caching, corpus synthesis, benchmarks and multi-threaded
//! search on top of [`transmatch_core`].

pub mod bench;
pub mod cache;
pub mod config;
pub mod io;
pub mod parallel;
pub mod report;
pub mod synth;

