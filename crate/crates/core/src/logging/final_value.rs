use crate::error::{Error, Result};

use super::{LogRecord, Logger, RunContext, RunSummary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalValue {
    pub y_best: f64,
    pub evaluations: u64,
}

/// Keeps only the final best value of each completed run, in memory.
#[derive(Debug, Default)]
pub struct FinalValueLogger {
    running: bool,
    results: Vec<FinalValue>,
}

impl FinalValueLogger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Completed runs in completion order.
    pub fn results(&self) -> &[FinalValue] {
        &self.results
    }
}

impl Logger for FinalValueLogger {
    fn on_run_start(&mut self, _context: &RunContext) -> Result<()> {
        self.running = true;
        Ok(())
    }

    fn log(&mut self, _record: &LogRecord) -> Result<()> {
        if self.running {
            Ok(())
        } else {
            Err(Error::RunNotStarted)
        }
    }

    fn on_run_end(&mut self, summary: &RunSummary) -> Result<()> {
        self.running = false;
        self.results.push(FinalValue {
            y_best: summary.y_best,
            evaluations: summary.evaluations,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Registry;
    use crate::problem::Domain;
    use std::sync::{Arc, Mutex};

    #[test]
    fn one_entry_per_completed_run() {
        let logger = Arc::new(Mutex::new(FinalValueLogger::new()));
        let mut p = Registry::with_defaults().create(Domain::Boolean, 1, 1, 16).unwrap();
        p.attach_logger(logger.clone()).unwrap();
        assert!(logger.lock().unwrap().results().is_empty());

        for _ in 0..436 {
            p.evaluate(&[0u8; 16]).unwrap();
        }
        p.evaluate(&[1u8; 16]).unwrap();
        p.reset().unwrap();
        assert_eq!(
            logger.lock().unwrap().results(),
            &[FinalValue {
                y_best: 16.0,
                evaluations: 437
            }]
        );

        for run in 1..=2u64 {
            for _ in 0..run {
                p.evaluate(&[0u8; 16]).unwrap();
            }
            // mid-run query only sees completed runs
            assert_eq!(logger.lock().unwrap().results().len(), run as usize);
            p.reset().unwrap();
        }
        let evals: Vec<u64> = logger
            .lock()
            .unwrap()
            .results()
            .iter()
            .map(|r| r.evaluations)
            .collect();
        assert_eq!(evals, vec![437, 1, 2]);
    }
}
