//! Loggers: trigger-driven recording of evaluations and watched parameters.

mod analyzer;
mod final_value;
mod format;
mod reader;
mod trigger;
mod watcher;

pub use analyzer::{create_run_folder, AnalyzerConfig, AnalyzerLogger};
pub use final_value::{FinalValue, FinalValueLogger};
pub use format::format_real;
pub use reader::{read_data_dir, DataRow, DataSet, ProblemData, RunData, Stanza};
pub use trigger::{Trigger, TriggerSet};
pub use watcher::{Parameters, Watcher};

use crate::error::Result;
use crate::problem::ProblemMetadata;

/// What a logger sees for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub evaluations: u64,
    /// Value returned to the algorithm, `T_y(f(T_x(x)))`.
    pub raw_y: f64,
    pub raw_y_best: f64,
    /// Whether this evaluation strictly improved the best-so-far.
    pub improved: bool,
}

/// Fixed description of the run a logger is recording.
#[derive(Debug, Clone, PartialEq)]
pub struct RunContext {
    pub suite: String,
    pub metadata: ProblemMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub instance_id: u32,
    pub dimension: usize,
    pub evaluations: u64,
    pub y_best: f64,
}

/// Receives run lifecycle notifications and evaluation records from a problem.
pub trait Logger: Send {
    fn on_run_start(&mut self, context: &RunContext) -> Result<()>;

    /// Offered once per evaluation; the logger decides whether to store it.
    fn log(&mut self, record: &LogRecord) -> Result<()>;

    fn on_run_end(&mut self, summary: &RunSummary) -> Result<()>;

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}
