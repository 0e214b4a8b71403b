//! Library surface of the `hotspot` command-line tool, exposed so the
//! integration and acceptance suites can drive commands in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
