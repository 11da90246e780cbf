//! Library surface of the command-line tool (shared with the integration
//! tests, which drive the acceptance suite through the same code paths).

pub mod artifacts;
pub mod checks;
pub mod commands;
pub mod config;
