//! Benchmarking toolkit for iterative optimization heuristics.
//!
//! Problems are instances `F = T_y o f o T_x` of a base function `f`, identified by
//! `(problem id, instance id, dimension)`. Loggers attached to a problem are offered
//! every evaluation and store what their triggers select, either in memory or in the
//! `.info`/`.dat` directory layout read by analysis tools. [`runner`] ties problems,
//! baseline algorithms and loggers into reproducible experiments.

pub mod cli;
pub mod error;
pub mod functions;
pub mod logging;
pub mod problem;
pub mod runner;
pub mod suite;
pub mod transforms;

pub use error::{Error, Result};
pub use functions::{FunctionEntry, Registry};
pub use problem::{Direction, Domain, Optimum, ProblemInstance, Solution, SolutionRef};
pub use suite::Suite;
