//! JSON experiment description.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::Registry;
use crate::logging::{Trigger, TriggerSet};
use crate::problem::Domain;
use crate::suite::Suite;

use super::algorithms::{lookup_algorithm, AlgorithmEntry};

/// Either a named default suite or an explicit `(domain, problem_ids)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem_ids: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TriggerConfig {
    Always,
    OnImprovement,
    Each { k: u64 },
    At { points: Vec<u64> },
    Targets { values: Vec<f64> },
}

impl TriggerConfig {
    pub fn build(&self) -> Result<Trigger> {
        match self {
            TriggerConfig::Always => Ok(Trigger::Always),
            TriggerConfig::OnImprovement => Ok(Trigger::OnImprovement),
            TriggerConfig::Each { k } => Trigger::each(*k),
            TriggerConfig::At { points } => Trigger::at(points.iter().copied()),
            TriggerConfig::Targets { values } => Trigger::targets(values.iter().copied()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub root_dir: PathBuf,
    pub folder_name: String,
    pub algorithm_id: String,
    #[serde(default)]
    pub algorithm_info: String,
}

fn default_triggers() -> Vec<TriggerConfig> {
    vec![TriggerConfig::OnImprovement]
}

fn default_true() -> bool {
    true
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: SuiteConfig,
    pub instance_ids: Vec<u32>,
    pub dimensions: Vec<usize>,
    pub algorithm: AlgorithmConfig,
    pub budget: u64,
    pub repetitions: u32,
    pub master_seed: u64,
    #[serde(default = "default_triggers")]
    pub triggers: Vec<TriggerConfig>,
    #[serde(default)]
    pub watchers: Vec<String>,
    pub output: OutputConfig,
    #[serde(default = "default_true")]
    pub stop_on_optimum: bool,
    /// Number of worker threads; work is sharded by problem id.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

/// A config that passed [`ExperimentConfig::validate`].
#[derive(Debug, Clone)]
pub struct ValidatedExperiment {
    pub suite: Suite,
    pub algorithm: &'static AlgorithmEntry,
    pub triggers: TriggerSet,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field against the registry without running anything.
    pub fn validate(&self, registry: &Registry) -> Result<ValidatedExperiment> {
        if self.budget < 1 {
            return Err(Error::config("budget", "must be >= 1"));
        }
        if self.repetitions < 1 {
            return Err(Error::config("repetitions", "must be >= 1"));
        }
        if self.parallelism < 1 {
            return Err(Error::config("parallelism", "must be >= 1"));
        }
        let suite = self.build_suite(registry)?;

        let algorithm = lookup_algorithm(&self.algorithm.name).ok_or_else(|| {
            Error::config(
                "algorithm.name",
                format!("unknown algorithm {:?}", self.algorithm.name),
            )
        })?;
        if !algorithm.domains.contains(&suite.domain()) {
            return Err(Error::config(
                "algorithm.name",
                format!("{} does not support {} problems", algorithm.name, suite.domain()),
            ));
        }
        if let Some(key) = self
            .algorithm
            .parameters
            .keys()
            .find(|k| !algorithm.settings.contains(&k.as_str()))
        {
            return Err(Error::config(
                "algorithm.parameters",
                format!("{} does not accept parameter {key:?}", algorithm.name),
            ));
        }
        for (i, w) in self.watchers.iter().enumerate() {
            if !algorithm.exposed.contains(&w.as_str()) {
                return Err(Error::config(
                    format!("watchers[{i}]"),
                    format!("{} does not expose parameter {w:?}", algorithm.name),
                ));
            }
            if self.watchers[..i].contains(w) {
                return Err(Error::config(format!("watchers[{i}]"), format!("duplicate watcher {w:?}")));
            }
        }

        let triggers = self
            .triggers
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.build()
                    .map_err(|e| Error::config(format!("triggers[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let triggers =
            TriggerSet::new(triggers).map_err(|e| Error::config("triggers", e.to_string()))?;

        let out = &self.output;
        if out.folder_name.is_empty() || out.folder_name.contains(['/', '\\', '"']) {
            return Err(Error::config("output.folder_name", "must be a plain directory name"));
        }
        for (field, value) in [
            ("output.algorithm_id", &out.algorithm_id),
            ("output.algorithm_info", &out.algorithm_info),
        ] {
            if value.contains(['"', '\n', '\r']) {
                return Err(Error::config(field, "must not contain quotes or line breaks"));
            }
        }

        Ok(ValidatedExperiment {
            suite,
            algorithm,
            triggers,
        })
    }

    fn build_suite(&self, registry: &Registry) -> Result<Suite> {
        check_ids("instance_ids", &self.instance_ids, |&i| i >= 1)?;
        check_ids("dimensions", &self.dimensions, |&n| n >= 1)?;
        let problem_error = |e: Error| Error::config("suite.problem_ids", e.to_string());
        let s = &self.suite;
        let suite = match (&s.name, s.domain, &s.problem_ids) {
            (Some(name), None, None) => {
                Suite::named(registry, name, &self.instance_ids, &self.dimensions)
                    .map_err(|e| Error::config("suite.name", e.to_string()))?
            }
            (name, Some(domain), Some(ids)) => Suite::new(
                registry,
                name.clone().unwrap_or_else(|| "Custom".to_string()),
                domain,
                ids,
                &self.instance_ids,
                &self.dimensions,
            )
            .map_err(problem_error)?,
            _ => {
                return Err(Error::config(
                    "suite",
                    "give either a suite name or both domain and problem_ids",
                ))
            }
        };
        if suite.name().contains(['"', '\n', '\r']) {
            return Err(Error::config("suite.name", "must not contain quotes or line breaks"));
        }
        // catch constructor failures (e.g. too few bits for a W-model layer) up front
        for &id in &suite.problem_ids() {
            let entry = registry.lookup(id, suite.domain())?;
            for &n in suite.dimensions() {
                entry.construct(suite.instance_ids()[0], n).map_err(|e| {
                    Error::config("dimensions", format!("problem {id} with dimension {n}: {e}"))
                })?;
            }
        }
        Ok(suite)
    }
}

fn check_ids<T: PartialEq + Copy + std::fmt::Debug>(
    field: &str,
    values: &[T],
    valid: impl Fn(&T) -> bool,
) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(field, "must not be empty"));
    }
    for (i, v) in values.iter().enumerate() {
        if !valid(v) {
            return Err(Error::config(format!("{field}[{i}]"), format!("{v:?} must be >= 1")));
        }
        if values[..i].contains(v) {
            return Err(Error::config(format!("{field}[{i}]"), format!("duplicate entry {v:?}")));
        }
    }
    Ok(())
}
