//! Command-line pipeline for continuum-robot shape sensing: simulate
//! scenarios, estimate shapes from sensor streams, and evaluate errors.
//!
//! The binary is a thin wrapper over these modules so the whole pipeline
//! stays callable from integration tests.

pub mod commands;
pub mod config;
pub mod evaluate;
pub mod formats;
pub mod pipeline;
