//! Plumbing around the `hartree` library: flat dotted-key configuration,
//! binary/CSV field files, checksummed run manifests, one driver per CLI
//! subcommand and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod drivers;
pub mod fieldio;
pub mod manifest;

pub use config::RunConfig;
pub use drivers::{run_subcommand, SUBCOMMANDS};
pub use manifest::{OutputDir, RunManifest};
