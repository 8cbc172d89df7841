//! Command implementations behind the `kgrules` binary.

pub mod commands;
pub mod config;
pub mod rulefile;
