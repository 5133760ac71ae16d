#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use ioh_core::logging::{
    AnalyzerConfig, AnalyzerLogger, LogRecord, Logger, Parameters, RunContext, RunSummary,
    Trigger, TriggerSet,
};
use ioh_core::{Domain, Registry};

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/scripted")
}

/// Writes the fixed evaluation script behind the committed golden directory.
/// Uses instance 1 only, so no random draws are involved.
pub fn write_golden_scenario(root: &Path) -> PathBuf {
    let params = Parameters::new();
    let logger = Arc::new(Mutex::new(
        AnalyzerLogger::new(AnalyzerConfig {
            root_dir: root.to_path_buf(),
            folder_name: "scripted".into(),
            algorithm_id: "script".into(),
            algorithm_info: "fixed evaluation script, two problems".into(),
            triggers: TriggerSet::new(vec![Trigger::OnImprovement, Trigger::at([5]).unwrap()])
                .unwrap(),
            watchers: vec![params.watcher("p").unwrap()],
        })
        .unwrap(),
    ));
    let registry = Registry::with_defaults();

    let mut onemax = registry.create(Domain::Boolean, 1, 1, 4).unwrap();
    onemax.set_suite_name("golden");
    onemax.attach_logger(logger.clone()).unwrap();
    let script: [[u8; 4]; 6] = [
        [0, 0, 0, 0],
        [1, 0, 0, 0],
        [1, 0, 0, 0],
        [1, 1, 0, 1],
        [0, 0, 0, 0],
        [0, 0, 0, 1],
    ];
    for (k, x) in script.iter().enumerate() {
        params.set("p", 0.25 * (k + 1) as f64);
        onemax.evaluate(x).unwrap();
    }
    onemax.reset().unwrap();
    params.set("p", 1.0 / 3.0);
    onemax.evaluate(&[1u8, 1, 1, 1]).unwrap();
    onemax.evaluate(&[0u8, 0, 0, 0]).unwrap();
    onemax.reset().unwrap();
    onemax.detach_logger(&logger).unwrap();

    let mut sphere = registry.create(Domain::Continuous, 1, 1, 2).unwrap();
    sphere.set_suite_name("golden");
    sphere.attach_logger(logger.clone()).unwrap();
    params.clear();
    sphere.evaluate(&[0.5, 0.25]).unwrap();
    params.set("p", 1e-7);
    sphere.evaluate(&[0.1, 0.2]).unwrap();
    sphere.evaluate(&[3.0, -4.0]).unwrap();
    sphere.reset().unwrap();
    sphere.detach_logger(&logger).unwrap();

    let dir = logger.lock().unwrap().output_dir().to_path_buf();
    dir
}

/// Relative path -> bytes for every file below `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Logger that keeps every offered record.
#[derive(Default)]
pub struct Trace {
    pub records: Vec<LogRecord>,
    pub summaries: Vec<RunSummary>,
}

impl Logger for Trace {
    fn on_run_start(&mut self, _: &RunContext) -> ioh_core::Result<()> {
        Ok(())
    }
    fn log(&mut self, r: &LogRecord) -> ioh_core::Result<()> {
        self.records.push(*r);
        Ok(())
    }
    fn on_run_end(&mut self, s: &RunSummary) -> ioh_core::Result<()> {
        self.summaries.push(*s);
        Ok(())
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
