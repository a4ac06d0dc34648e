//! File formats, Monte Carlo verification and the `distnull` command line
//! on top of [`distnull_core`].

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod groups;
pub mod mc;
pub mod report;

pub use distnull_core as core;
