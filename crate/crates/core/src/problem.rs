//! Problem instances and the evaluation pipeline.

use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logging::{LogRecord, Logger, RunContext, RunSummary};
use crate::transforms::{DomainTransform, InstanceTransform};

/// Absolute tolerance used by [`ProblemInstance::final_target_hit`].
pub const TARGET_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Boolean,
    Continuous,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Boolean => f.write_str("boolean"),
            Domain::Continuous => f.write_str("continuous"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// Strict improvement of `candidate` over `incumbent`.
    pub fn is_better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Maximize => candidate > incumbent,
            Direction::Minimize => candidate < incumbent,
        }
    }

    pub fn is_not_worse(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Maximize => candidate >= incumbent,
            Direction::Minimize => candidate <= incumbent,
        }
    }

    /// Initial best-so-far value.
    pub fn worst(self) -> f64 {
        match self {
            Direction::Maximize => f64::NEG_INFINITY,
            Direction::Minimize => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemMetadata {
    pub problem_id: u32,
    pub name: String,
    pub dimension: usize,
    pub instance_id: u32,
    pub direction: Direction,
    pub domain: Domain,
    /// Per-variable `(lower, upper)`.
    pub bounds: Vec<(f64, f64)>,
}

impl ProblemMetadata {
    fn validate(&self) -> Result<()> {
        if self.problem_id < 1 {
            return Err(Error::InvalidParameter("problem id must be >= 1".into()));
        }
        if self.instance_id < 1 {
            return Err(Error::InvalidParameter("instance id must be >= 1".into()));
        }
        if self.dimension < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if self.bounds.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: self.bounds.len(),
            });
        }
        if self.domain == Domain::Continuous {
            if let Some(i) = self.bounds.iter().position(|(lo, hi)| !(lo < hi)) {
                return Err(Error::InvalidParameter(format!(
                    "bounds of variable {i} are empty: {:?}",
                    self.bounds[i]
                )));
            }
        }
        Ok(())
    }
}

/// An owned candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Bits(Vec<u8>),
    Reals(Vec<f64>),
}

impl Solution {
    pub fn as_ref(&self) -> SolutionRef<'_> {
        match self {
            Solution::Bits(b) => SolutionRef::Bits(b),
            Solution::Reals(r) => SolutionRef::Reals(r),
        }
    }

    pub fn len(&self) -> usize {
        self.as_ref().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A borrowed candidate solution, accepted by [`ProblemInstance::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolutionRef<'a> {
    Bits(&'a [u8]),
    Reals(&'a [f64]),
}

impl SolutionRef<'_> {
    pub fn len(&self) -> usize {
        match self {
            SolutionRef::Bits(b) => b.len(),
            SolutionRef::Reals(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_owned(&self) -> Solution {
        match *self {
            SolutionRef::Bits(b) => Solution::Bits(b.to_vec()),
            SolutionRef::Reals(r) => Solution::Reals(r.to_vec()),
        }
    }
}

impl<'a> From<&'a [u8]> for SolutionRef<'a> {
    fn from(x: &'a [u8]) -> Self {
        SolutionRef::Bits(x)
    }
}

impl<'a> From<&'a Vec<u8>> for SolutionRef<'a> {
    fn from(x: &'a Vec<u8>) -> Self {
        SolutionRef::Bits(x)
    }
}

impl<'a, const N: usize> From<&'a [u8; N]> for SolutionRef<'a> {
    fn from(x: &'a [u8; N]) -> Self {
        SolutionRef::Bits(x)
    }
}

impl<'a> From<&'a [f64]> for SolutionRef<'a> {
    fn from(x: &'a [f64]) -> Self {
        SolutionRef::Reals(x)
    }
}

impl<'a> From<&'a Vec<f64>> for SolutionRef<'a> {
    fn from(x: &'a Vec<f64>) -> Self {
        SolutionRef::Reals(x)
    }
}

impl<'a, const N: usize> From<&'a [f64; N]> for SolutionRef<'a> {
    fn from(x: &'a [f64; N]) -> Self {
        SolutionRef::Reals(x)
    }
}

impl<'a> From<&'a Solution> for SolutionRef<'a> {
    fn from(x: &'a Solution) -> Self {
        x.as_ref()
    }
}

pub type BitsFn = Arc<dyn Fn(&[u8]) -> f64 + Send + Sync>;
pub type RealsFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The untransformed base function `f`.
#[derive(Clone)]
pub enum Objective {
    Bits(BitsFn),
    Reals(RealsFn),
}

impl Objective {
    pub fn bits(f: impl Fn(&[u8]) -> f64 + Send + Sync + 'static) -> Self {
        Objective::Bits(Arc::new(f))
    }

    pub fn reals(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Objective::Reals(Arc::new(f))
    }

    pub fn domain(&self) -> Domain {
        match self {
            Objective::Bits(_) => Domain::Boolean,
            Objective::Reals(_) => Domain::Continuous,
        }
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Objective::{:?}", self.domain())
    }
}

/// Known optimum of a (transformed) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub y: f64,
    pub x: Option<Solution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemState {
    pub evaluations: u64,
    /// NaN until the first evaluation.
    pub y_current: f64,
    pub y_best: f64,
    pub x_best: Option<Solution>,
    pub improved_last_eval: bool,
}

impl ProblemState {
    fn initial(direction: Direction) -> Self {
        ProblemState {
            evaluations: 0,
            y_current: f64::NAN,
            y_best: direction.worst(),
            x_best: None,
            improved_last_eval: false,
        }
    }
}

pub type SharedLogger = Arc<Mutex<dyn Logger>>;

/// `F = T_y o f o T_x` together with its run state and attached loggers.
///
/// Not meant for concurrent use; move it between threads when idle.
pub struct ProblemInstance {
    metadata: ProblemMetadata,
    objective: Objective,
    transform: InstanceTransform,
    optimum: Option<Optimum>,
    state: ProblemState,
    suite: String,
    loggers: Vec<SharedLogger>,
    scratch_bits: Vec<u8>,
    scratch_reals: Vec<f64>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("metadata", &self.metadata)
            .field("state", &self.state)
            .field("optimum", &self.optimum)
            .field("loggers", &self.loggers.len())
            .finish()
    }
}

impl ProblemInstance {
    pub fn new(
        metadata: ProblemMetadata,
        objective: Objective,
        transform: InstanceTransform,
        optimum: Option<Optimum>,
    ) -> Result<Self> {
        metadata.validate()?;
        if objective.domain() != metadata.domain {
            return Err(Error::DomainMismatch {
                expected: metadata.domain,
            });
        }
        if transform.domain_kind() != metadata.domain {
            return Err(Error::DomainMismatch {
                expected: metadata.domain,
            });
        }
        if transform.dimension() != metadata.dimension {
            return Err(Error::DimensionMismatch {
                expected: metadata.dimension,
                got: transform.dimension(),
            });
        }
        let n = metadata.dimension;
        let state = ProblemState::initial(metadata.direction);
        Ok(ProblemInstance {
            metadata,
            objective,
            transform,
            optimum,
            state,
            suite: "None".to_string(),
            loggers: Vec::new(),
            scratch_bits: vec![0; n],
            scratch_reals: vec![0.0; n],
        })
    }

    /// Untransformed boolean problem from a closure, e.g. a user-defined function.
    pub fn from_bits_fn(
        problem_id: u32,
        name: &str,
        dimension: usize,
        direction: Direction,
        f: impl Fn(&[u8]) -> f64 + Send + Sync + 'static,
        optimum: Option<Optimum>,
    ) -> Result<Self> {
        let metadata = ProblemMetadata {
            problem_id,
            name: name.to_string(),
            dimension,
            instance_id: 1,
            direction,
            domain: Domain::Boolean,
            bounds: vec![(0.0, 1.0); dimension],
        };
        Self::new(
            metadata,
            Objective::bits(f),
            InstanceTransform::identity(Domain::Boolean, dimension),
            optimum,
        )
    }

    pub fn metadata(&self) -> &ProblemMetadata {
        &self.metadata
    }

    pub fn state(&self) -> &ProblemState {
        &self.state
    }

    pub fn transform(&self) -> &InstanceTransform {
        &self.transform
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }

    pub fn suite_name(&self) -> &str {
        &self.suite
    }

    pub fn set_suite_name(&mut self, name: impl Into<String>) {
        self.suite = name.into();
    }

    pub fn logger_count(&self) -> usize {
        self.loggers.len()
    }

    pub fn context(&self) -> RunContext {
        RunContext {
            suite: self.suite.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// Evaluates `T_y(f(T_x(x)))`, updates the run state and offers the
    /// resulting record to every attached logger.
    pub fn evaluate<'a>(&mut self, x: impl Into<SolutionRef<'a>>) -> Result<f64> {
        let x = x.into();
        let y = self.raw_evaluate(x)?;

        let state = &mut self.state;
        state.evaluations += 1;
        state.y_current = y;
        state.improved_last_eval = self.metadata.direction.is_better(y, state.y_best);
        if state.improved_last_eval {
            state.y_best = y;
            state.x_best = Some(x.to_owned());
        }

        let record = LogRecord {
            evaluations: state.evaluations,
            raw_y: y,
            raw_y_best: state.y_best,
            improved: state.improved_last_eval,
        };
        let mut first_error = None;
        for logger in &self.loggers {
            if let Err(e) = lock(logger).log(&record) {
                first_error.get_or_insert(e);
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(y),
        }
    }

    fn raw_evaluate(&mut self, x: SolutionRef<'_>) -> Result<f64> {
        let n = self.metadata.dimension;
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let inner = match (&self.objective, &self.transform.domain, x) {
            (Objective::Bits(f), DomainTransform::Boolean(t), SolutionRef::Bits(bits)) => {
                if let Some((index, &value)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
                    return Err(Error::NonBinary { index, value });
                }
                if t.is_identity() {
                    f(bits)
                } else {
                    t.apply_into(bits, &mut self.scratch_bits)?;
                    f(&self.scratch_bits)
                }
            }
            (Objective::Reals(f), DomainTransform::Continuous(t), SolutionRef::Reals(reals)) => {
                if t.is_identity() {
                    f(reals)
                } else {
                    t.apply_into(reals, &mut self.scratch_reals)?;
                    f(&self.scratch_reals)
                }
            }
            _ => {
                return Err(Error::DomainMismatch {
                    expected: self.metadata.domain,
                })
            }
        };
        Ok(self.transform.apply_output(inner))
    }

    /// Ends the current run and starts a new one. Loggers receive the run summary
    /// unless no evaluation happened since the last reset.
    pub fn reset(&mut self) -> Result<()> {
        let mut first_error = self.finish_run().err();
        self.state = ProblemState::initial(self.metadata.direction);
        let context = self.context();
        for logger in &self.loggers {
            if let Err(e) = lock(logger).on_run_start(&context) {
                first_error.get_or_insert(e);
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn summary(&self) -> RunSummary {
        RunSummary {
            instance_id: self.metadata.instance_id,
            dimension: self.metadata.dimension,
            evaluations: self.state.evaluations,
            y_best: self.state.y_best,
        }
    }

    fn finish_run(&mut self) -> Result<()> {
        if self.state.evaluations == 0 {
            return Ok(());
        }
        let summary = self.summary();
        let mut first_error = None;
        for logger in &self.loggers {
            if let Err(e) = lock(logger).on_run_end(&summary) {
                first_error.get_or_insert(e);
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Attaches a logger; it immediately receives a run-start notification.
    pub fn attach_logger<L: Logger + 'static>(&mut self, logger: Arc<Mutex<L>>) -> Result<()> {
        let logger: SharedLogger = logger;
        if self.position_of(&logger).is_some() {
            return Err(Error::LoggerAlreadyAttached);
        }
        lock(&logger).on_run_start(&self.context())?;
        self.loggers.push(logger);
        Ok(())
    }

    /// Detaches a logger. An unfinished run is summarized to it first, then it is flushed.
    pub fn detach_logger<L: Logger + 'static>(&mut self, logger: &Arc<Mutex<L>>) -> Result<()> {
        let logger: SharedLogger = logger.clone();
        let index = self.position_of(&logger).ok_or(Error::LoggerNotAttached)?;
        let logger = self.loggers.remove(index);
        let mut guard = lock(&logger);
        if self.state.evaluations > 0 {
            guard.on_run_end(&self.summary())?;
        }
        guard.flush()
    }

    fn position_of(&self, logger: &SharedLogger) -> Option<usize> {
        let target = Arc::as_ptr(logger) as *const ();
        self.loggers
            .iter()
            .position(|l| Arc::as_ptr(l) as *const () == target)
    }

    /// Whether the best-so-far reached the known optimum within [`TARGET_TOLERANCE`].
    /// `None` when the optimum is unknown.
    pub fn final_target_hit(&self) -> Option<bool> {
        let optimum = self.optimum.as_ref()?;
        let best = self.state.y_best;
        Some(match self.metadata.direction {
            Direction::Maximize => best >= optimum.y - TARGET_TOLERANCE,
            Direction::Minimize => best <= optimum.y + TARGET_TOLERANCE,
        })
    }
}

impl Drop for ProblemInstance {
    fn drop(&mut self) {
        let _ = self.finish_run();
        for logger in &self.loggers {
            let _ = lock(logger).flush();
        }
    }
}

fn lock(logger: &SharedLogger) -> std::sync::MutexGuard<'_, dyn Logger + 'static> {
    logger.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}
