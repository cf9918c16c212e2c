//! Reproduction driver for the `belltensor` toolkit: α-sweeps, odd-N
//! threshold bisection and the named reproduction checks behind the
//! `belltensor` binary.

pub mod bisect;
pub mod error;
pub mod reproduce;
pub mod scan;

pub use bisect::bisect_threshold;
pub use error::{CliError, ExitCode};
pub use reproduce::{run_checks, Check, Expectations, Summary};
pub use scan::{run_scan, AlphaGrid, Format, ScanConfig, ScanMode, ScanReport, ScanRow};
