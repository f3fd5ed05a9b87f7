//! Strips, exit times, classification, Monte Carlo estimation and pathwise
//! comparison.

pub mod audit;
pub mod classify;
pub mod mc;
pub mod mc_types;
pub mod stats;
pub mod strip;

pub use classify::{classify_path, Classification, Classifier};
pub use mc_types::{McSummary, Outcome, Tally};
pub use strip::{exit_time, Exit, ExitTracker, Side, StripKind, StripSpec};
