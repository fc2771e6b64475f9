//! Experiment harness: flat-file configuration, versioned reports, and the
//! drivers behind the `radonlab` subcommands.

pub mod config;
pub mod experiments;
pub mod report;
