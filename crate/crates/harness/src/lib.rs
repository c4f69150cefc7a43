//! Experiment orchestration for the RIS beam-sweeping simulator: scenario
//! presets, experiment specs, the four experiment families and their CSV/JSON
//! outputs.

pub mod error;
pub mod experiments;
pub mod output;
pub mod presets;
pub mod spec;

pub use error::HarnessError;
pub use spec::{CodebookSource, ExperimentKind, ExperimentSpec};
