//! Configuration parsing, sweep orchestration and output writers behind the
//! `mechnet` binary.

pub mod app;
pub mod config;
pub mod figs;
pub mod output;
pub mod sweep;

pub use config::{schema_listing, Config, ConfigError, SCHEMA};
pub use figs::{run_fig, FigId};
pub use output::{csv_string, emit_csv, emit_heatmap, render_heatmap, OutputError};
pub use sweep::{evaluate_point, run_sweep, Axis, Field, ResultRow, Scheme, Status, SweepSpec, Table};
