//! Subcommand implementations for the `magrotor` binary: frequency sweeps,
//! validation suites, the bosonization pipeline and spectrum comparisons.

pub mod commands;
pub mod suites;
