//! Command-line driver for the fractional Choquard solver: configuration,
//! run manifests and the subcommands behind the `choquard` binary.

pub mod commands;
pub mod config;
pub mod manifest;
