//! Command-line front end: problem files, trace CSVs and the bench table.

pub mod bench;
pub mod commands;
pub mod problem;
pub mod trace_io;
