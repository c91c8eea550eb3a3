//! Library surface of the `segdiv` CLI: CSV ingestion, run configuration,
//! and report generation. The binary in `main.rs` is a thin wrapper over
//! these modules.

pub mod config;
pub mod errors;
pub mod io;
pub mod report;
