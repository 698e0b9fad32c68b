//! Command-line front end and file formats for `heavysum-core`.

pub mod cli;
pub mod expr;
pub mod report;
pub mod suite;
