//! File formats, configuration and the `latstretch` command line on top of
//! `latstretch-core`.

pub mod body;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
