//! Experiment driver for nonlocality-activation statistics.
//!
//! Each experiment takes an [`ExperimentConfig`], returns its records and a
//! summary, and optionally writes them (CSV or JSON, see [`output`]). State
//! `i` of a Monte Carlo experiment always draws from stream `i` of the
//! configured seed, so results do not depend on the number of workers.

pub mod census;
pub mod config;
mod error;
pub mod iso;
pub mod output;
pub mod sweep;
pub mod verify;

pub use census::{run_census, CensusOutput, CensusRecord, CensusSummary};
pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use error::{HarnessError, Result};
pub use iso::{run_iso_curve, IsoCurve, IsoRow};
pub use output::Report;
pub use sweep::{run_decoherence_sweep, ExperimentRecord, SweepOutput, SweepSummary};
pub use verify::{run_extension_verify, run_protocol_verify, CheckResult, VerifyReport};
