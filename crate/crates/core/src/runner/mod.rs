//! Experiment driver: algorithms x suite x repetitions into one data directory.

pub mod algorithms;
pub mod config;
pub mod seed;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::functions::Registry;
use crate::logging::{create_run_folder, AnalyzerConfig, AnalyzerLogger, Parameters};

pub use algorithms::{lookup_algorithm, AlgorithmEntry, RunSettings, ALGORITHMS};
pub use config::{ExperimentConfig, TriggerConfig, ValidatedExperiment};
pub use seed::mix_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub runs: usize,
    pub optima_hit: usize,
    pub output_dir: PathBuf,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    runs: usize,
    optima_hit: usize,
}

/// Runs every `(problem, dimension, instance)` of the suite `repetitions` times.
///
/// Each run gets the seed [`mix_seed`]`(master_seed, problem_id, dimension, instance_id, r)`.
/// Work is sharded by problem id, so a problem's files are written by exactly one worker
/// and the output does not depend on `parallelism`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_experiment_with(config, &Registry::with_defaults())
}

pub fn run_experiment_with(config: &ExperimentConfig, registry: &Registry) -> Result<ExperimentSummary> {
    let validated = config.validate(registry)?;
    let output_dir = create_run_folder(&config.output.root_dir, &config.output.folder_name)?;

    let problem_count = validated.suite.problem_ids().len();
    let workers = config.parallelism.min(problem_count).max(1);
    let next_problem = AtomicUsize::new(0);

    let worker = || -> Result<Tally> {
        let params = Parameters::new();
        let watchers = config
            .watchers
            .iter()
            .map(|w| params.watcher(w))
            .collect::<Result<Vec<_>>>()?;
        let logger = Arc::new(Mutex::new(AnalyzerLogger::in_directory(
            output_dir.clone(),
            AnalyzerConfig {
                root_dir: config.output.root_dir.clone(),
                folder_name: config.output.folder_name.clone(),
                algorithm_id: config.output.algorithm_id.clone(),
                algorithm_info: config.output.algorithm_info.clone(),
                triggers: validated.triggers.clone(),
                watchers,
            },
        )?));
        let mut tally = Tally::default();
        loop {
            let p = next_problem.fetch_add(1, Ordering::SeqCst);
            if p >= problem_count {
                return Ok(tally);
            }
            let per_problem = validated.suite.size() / problem_count;
            for index in p * per_problem..(p + 1) * per_problem {
                run_unit(config, &validated, index, &logger, &params, &mut tally)?;
            }
        }
    };

    let results: Vec<Result<Tally>> = if workers == 1 {
        vec![worker()]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|_| scope.spawn(worker)).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let mut total = Tally::default();
    for r in results {
        match r {
            Ok(t) => {
                total.runs += t.runs;
                total.optima_hit += t.optima_hit;
            }
            Err(e) => {
                return Err(Error::Aborted {
                    partial_output: output_dir,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(ExperimentSummary {
        runs: total.runs,
        optima_hit: total.optima_hit,
        output_dir,
    })
}

fn run_unit(
    config: &ExperimentConfig,
    validated: &ValidatedExperiment,
    index: usize,
    logger: &Arc<Mutex<AnalyzerLogger>>,
    params: &Parameters,
    tally: &mut Tally,
) -> Result<()> {
    let mut problem = validated
        .suite
        .construct_at(index)
        .expect("index within suite")?;
    let (problem_id, dimension, instance_id) = {
        let m = problem.metadata();
        (m.problem_id, m.dimension, m.instance_id)
    };
    problem.attach_logger(logger.clone())?;
    for repetition in 0..config.repetitions {
        params.clear();
        let settings = RunSettings {
            budget: config.budget,
            seed: mix_seed(config.master_seed, problem_id, dimension, instance_id, repetition),
            stop_on_optimum: config.stop_on_optimum,
            parameters: config.algorithm.parameters.clone(),
        };
        (validated.algorithm.run)(&mut problem, &settings, params)?;
        assert!(
            problem.state().evaluations <= config.budget,
            "{} exceeded its budget",
            validated.algorithm.name
        );
        tally.runs += 1;
        if problem.final_target_hit() == Some(true) {
            tally.optima_hit += 1;
        }
        problem.reset()?;
    }
    problem.detach_logger(logger)
}
