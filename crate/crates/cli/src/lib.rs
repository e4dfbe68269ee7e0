//! Pipeline plumbing around `nanorod-core`: run configuration files, CSV and
//! JSON artifacts, the subcommand implementations, and the sweep runner.

pub mod commands;
pub mod config;
pub mod io;
pub mod sweep;
