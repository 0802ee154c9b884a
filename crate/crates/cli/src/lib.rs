//! Library side of the command-line front end: the expression parser,
//! workspace and exchange file formats, report rendering and the
//! subcommand implementations. The binary in `main.rs` is a thin
//! argument-parsing shell over this.

pub mod ops;
pub mod parser;
pub mod report;
pub mod workspace;
