//! Command-line front end: config resolution, experiment runs, CSV/JSON
//! output and run manifests.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
