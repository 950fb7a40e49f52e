//! Runnable face of `bessel-mp-core`: configuration, orchestration of the
//! solver and checker stages, JSON/CSV reports, and BMPF field files.

// `!(x > 0.0)` style range checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bmpf;
pub mod config;
pub mod report;
pub mod run;

pub use bmpf::{load_field, save_field, BmpfError};
pub use config::{parse_config, ConfigErrors, Mode, RunConfig};
pub use report::{RunReport, Status};
pub use run::{configure_threads, load_config, run, RunError};
