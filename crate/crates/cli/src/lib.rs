//! The `milnor` command line: closed-form tables, sampled verification runs,
//! open-book pages, tameness evidence and the built-in germ catalog.

pub mod catalog;
pub mod cli;
pub mod pipeline;

pub use cli::{run, Cli, EXIT_USAGE};
pub use pipeline::{Verdict, VerifyReport, VERDICT_SCHEMA};
