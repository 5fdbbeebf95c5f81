//! Command-line front end: config handling, commands and report writers.

pub mod commands;
pub mod config;
pub mod report;
pub mod svg;
