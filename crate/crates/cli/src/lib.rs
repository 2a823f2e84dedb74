//! Experiment runner: JSON scenarios in, CSV results out.
//!
//! A [`Scenario`] names one experiment (a stability run, a covariance check,
//! a finite-field oracle, an inner-product test, a bound comparison or a
//! dead-zone sweep). [`run_scenario`] produces [`ResultRow`]s and a summary,
//! [`write_outputs`] writes them, and the registry in [`presets`] holds the
//! built-in scenarios.

pub mod error;
pub mod presets;
pub mod results;
pub mod run;
pub mod scenario;

pub use error::{HarnessError, Result};
pub use presets::{find, list_presets, presets, Preset, DEFAULT_SEED};
pub use results::{emit_plotdata, read_csv, to_csv, ResultRow, Status, PLOT_HEADER, RESULTS_HEADER};
pub use run::{run_scenario, write_outputs, Outcome, RunStatus, EXIT_INVALID};
pub use scenario::{Experiment, Scenario};
