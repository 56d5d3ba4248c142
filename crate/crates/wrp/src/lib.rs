//! File formats, fixtures, SVG, event logs and the command-line front end around
//! [`wrp_core`].

pub mod cli;
pub mod eventlog;
pub mod format;
pub mod gen;
pub mod svg;

pub use wrp_core;
