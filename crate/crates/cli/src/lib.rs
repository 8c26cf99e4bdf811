//! Library surface of the experiment runner: distribution-file parsing,
//! configuration, report rendering, and the subcommand implementations.
//! The `fairmech` binary is a thin wrapper over [`runner`].

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod source_file;
