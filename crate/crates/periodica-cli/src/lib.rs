//! Batch front end for the periodica pipeline: configuration, stage
//! orchestration, manifest, and tidy plot-data emission.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod plotdata;
pub mod stageio;
