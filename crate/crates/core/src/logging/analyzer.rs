//! Writer for the two-part `.info` / `.dat` data directory.
//!
//! ```text
//! <root>/<folder>/
//!     IOHprofiler_f1_OneMax.info
//!     data_f1_OneMax/
//!         IOHprofiler_f1_DIM16.dat
//! ```
//!
//! A `.dat` file gets one quoted header line per run followed by that run's rows.
//! Each `.info` file holds three-line stanzas (metadata, `%`, run list) and is
//! rewritten at the end of every run. No timestamps are written anywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::problem::Direction;

use super::format::format_real;
use super::{LogRecord, Logger, RunContext, RunSummary, TriggerSet, Watcher};

pub(crate) const BASE_COLUMNS: [&str; 3] = ["evaluations", "raw_y", "raw_y_best"];

#[derive(Debug, Clone)]
pub struct AnalyzerConfig {
    pub root_dir: PathBuf,
    pub folder_name: String,
    pub algorithm_id: String,
    pub algorithm_info: String,
    pub triggers: TriggerSet,
    pub watchers: Vec<Watcher>,
}

#[derive(Debug, Clone)]
struct InfoStanza {
    suite: String,
    dimension: usize,
    maximization: bool,
    func_name: String,
    dat_path: String,
    runs: Vec<(u32, u64, f64)>,
}

#[derive(Debug)]
struct ActiveRun {
    context: RunContext,
    dat_path: PathBuf,
    writer: Option<BufWriter<File>>,
    rows: u64,
    last_offered: Option<LogRecord>,
    last_stored: Option<u64>,
    pending_parameters: Vec<f64>,
}

/// Logger producing the analyzer data directory.
#[derive(Debug)]
pub struct AnalyzerLogger {
    output_dir: PathBuf,
    algorithm_id: String,
    algorithm_info: String,
    triggers: TriggerSet,
    watchers: Vec<Watcher>,
    run: Option<ActiveRun>,
    /// Keyed by `(problem_id, problem name)`; boolean and continuous ids overlap.
    infos: BTreeMap<(u32, String), (String, Vec<InfoStanza>)>,
}

impl AnalyzerLogger {
    /// Creates `root_dir/folder_name`, or `folder_name-1`, `-2`, ... when taken.
    pub fn new(config: AnalyzerConfig) -> Result<Self> {
        let output_dir = create_run_folder(&config.root_dir, &config.folder_name)?;
        Self::in_directory(output_dir, config)
    }

    /// Writes into an existing directory (used by parallel workers sharing one folder).
    pub fn in_directory(output_dir: PathBuf, config: AnalyzerConfig) -> Result<Self> {
        check_text("algorithm_id", &config.algorithm_id)?;
        check_text("algorithm_info", &config.algorithm_info)?;
        let mut names: Vec<&str> = BASE_COLUMNS.to_vec();
        for w in &config.watchers {
            if names.contains(&w.name()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate column name {:?}",
                    w.name()
                )));
            }
            names.push(w.name());
        }
        if !output_dir.is_dir() {
            return Err(Error::io(
                &output_dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "output directory missing"),
            ));
        }
        Ok(AnalyzerLogger {
            output_dir,
            algorithm_id: config.algorithm_id,
            algorithm_info: config.algorithm_info,
            triggers: config.triggers,
            watchers: config.watchers,
            run: None,
            infos: BTreeMap::new(),
        })
    }

    pub fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    fn header(&self) -> String {
        BASE_COLUMNS
            .iter()
            .copied()
            .chain(self.watchers.iter().map(|w| w.name()))
            .map(|c| format!("\"{c}\""))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn poll(&self) -> Vec<f64> {
        self.watchers.iter().map(Watcher::poll).collect()
    }

    fn write_row(&mut self, record: &LogRecord, parameters: &[f64]) -> Result<()> {
        let header = self.header();
        let run = self.run.as_mut().ok_or(Error::RunNotStarted)?;
        if run.writer.is_none() {
            if let Some(dir) = run.dat_path.parent() {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&run.dat_path)
                .map_err(|e| Error::io(&run.dat_path, e))?;
            let mut writer = BufWriter::new(file);
            writeln!(writer, "{header}").map_err(|e| Error::io(&run.dat_path, e))?;
            run.writer = Some(writer);
        }
        let mut line = format!(
            "{} {} {}",
            record.evaluations,
            format_real(record.raw_y),
            format_real(record.raw_y_best)
        );
        for p in parameters {
            let _ = write!(line, " {}", format_real(*p));
        }
        let writer = run.writer.as_mut().expect("opened above");
        writeln!(writer, "{line}").map_err(|e| Error::io(&run.dat_path, e))?;
        run.rows += 1;
        run.last_stored = Some(record.evaluations);
        Ok(())
    }

    fn close_dat(&mut self) -> Result<()> {
        if let Some(run) = self.run.as_mut() {
            if let Some(mut w) = run.writer.take() {
                w.flush().map_err(|e| Error::io(&run.dat_path, e))?;
            }
        }
        Ok(())
    }

    fn write_info(&self, key: &(u32, String)) -> Result<()> {
        let problem_id = key.0;
        let (file_name, stanzas) = &self.infos[key];
        let mut out = String::new();
        for s in stanzas {
            let _ = writeln!(
                out,
                "suite = \"{}\", funcId = {}, funcName = \"{}\", DIM = {}, maximization = \"{}\", algId = \"{}\", algInfo = \"{}\"",
                s.suite,
                problem_id,
                s.func_name,
                s.dimension,
                if s.maximization { "T" } else { "F" },
                self.algorithm_id,
                self.algorithm_info
            );
            out.push_str("%\n");
            out.push_str(&s.dat_path);
            for (instance, evaluations, best) in &s.runs {
                let _ = write!(out, ", {instance}:{evaluations}|{}", format_real(*best));
            }
            out.push('\n');
        }
        let path = self.output_dir.join(file_name);
        fs::write(&path, out).map_err(|e| Error::io(&path, e))
    }
}

impl Logger for AnalyzerLogger {
    fn on_run_start(&mut self, context: &RunContext) -> Result<()> {
        self.close_dat()?;
        check_text("suite", &context.suite)?;
        check_text("problem name", &context.metadata.name)?;
        if context.metadata.name.contains(['/', '\\', ' ']) {
            return Err(Error::InvalidParameter(format!(
                "problem name {:?} cannot be used in file names",
                context.metadata.name
            )));
        }
        let m = &context.metadata;
        let dat_path = self
            .output_dir
            .join(format!("data_f{}_{}", m.problem_id, m.name))
            .join(format!("IOHprofiler_f{}_DIM{}.dat", m.problem_id, m.dimension));
        self.triggers.reset();
        self.run = Some(ActiveRun {
            context: context.clone(),
            dat_path,
            writer: None,
            rows: 0,
            last_offered: None,
            last_stored: None,
            pending_parameters: Vec::new(),
        });
        Ok(())
    }

    fn log(&mut self, record: &LogRecord) -> Result<()> {
        let direction = match &self.run {
            Some(run) => run.context.metadata.direction,
            None => return Err(Error::RunNotStarted),
        };
        let fire = self.triggers.fires(record, direction);
        let parameters = if fire || !self.watchers.is_empty() {
            self.poll()
        } else {
            Vec::new()
        };
        if fire {
            self.write_row(record, &parameters)?;
        }
        let run = self.run.as_mut().expect("checked above");
        run.last_offered = Some(*record);
        run.pending_parameters = parameters;
        Ok(())
    }

    fn on_run_end(&mut self, summary: &RunSummary) -> Result<()> {
        let Some(run) = self.run.as_ref() else {
            return Err(Error::RunNotStarted);
        };
        if let Some(last) = run.last_offered {
            if run.last_stored != Some(last.evaluations) {
                let parameters = run.pending_parameters.clone();
                self.write_row(&last, &parameters)?;
            }
        }
        self.close_dat()?;
        let run = self.run.take().expect("checked above");
        if run.rows == 0 {
            return Ok(());
        }

        let m = &run.context.metadata;
        let relative_dat = format!(
            "data_f{id}_{name}/IOHprofiler_f{id}_DIM{n}.dat",
            id = m.problem_id,
            name = m.name,
            n = m.dimension
        );
        let info_name = format!("IOHprofiler_f{}_{}.info", m.problem_id, m.name);
        let key = (m.problem_id, m.name.clone());
        let (_, stanzas) = self
            .infos
            .entry(key.clone())
            .or_insert_with(|| (info_name, Vec::new()));
        let same_block = stanzas.last().is_some_and(|s| {
            s.dimension == m.dimension && s.suite == run.context.suite && s.func_name == m.name
        });
        if !same_block {
            stanzas.push(InfoStanza {
                suite: run.context.suite.clone(),
                dimension: m.dimension,
                maximization: m.direction == Direction::Maximize,
                func_name: m.name.clone(),
                dat_path: relative_dat,
                runs: Vec::new(),
            });
        }
        stanzas.last_mut().expect("pushed above").runs.push((
            m.instance_id,
            summary.evaluations,
            summary.y_best,
        ));
        self.write_info(&key)
    }

    fn flush(&mut self) -> Result<()> {
        if let Some(run) = self.run.as_mut() {
            if let Some(w) = run.writer.as_mut() {
                w.flush().map_err(|e| Error::io(&run.dat_path, e))?;
            }
        }
        Ok(())
    }
}

/// Creates a fresh run folder under `root_dir`, suffixing `-1`, `-2`, ... on collision.
pub fn create_run_folder(root_dir: &Path, folder_name: &str) -> Result<PathBuf> {
    check_text("folder_name", folder_name)?;
    if folder_name.is_empty() || folder_name.contains(['/', '\\']) {
        return Err(Error::InvalidParameter(format!(
            "folder_name {folder_name:?} must be a plain directory name"
        )));
    }
    fs::create_dir_all(root_dir).map_err(|e| Error::io(root_dir, e))?;
    let mut output_dir = root_dir.join(folder_name);
    let mut suffix = 0;
    while output_dir.exists() {
        suffix += 1;
        output_dir = root_dir.join(format!("{folder_name}-{suffix}"));
    }
    fs::create_dir(&output_dir).map_err(|e| Error::io(&output_dir, e))?;
    Ok(output_dir)
}

fn check_text(field: &str, value: &str) -> Result<()> {
    if value.contains(['"', '\n', '\r']) {
        return Err(Error::InvalidParameter(format!(
            "{field} {value:?} must not contain quotes or line breaks"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Registry;
    use crate::logging::{Parameters, Trigger};
    use crate::problem::Domain;
    use std::sync::{Arc, Mutex};

    fn config(root: &Path, triggers: TriggerSet, watchers: Vec<Watcher>) -> AnalyzerConfig {
        AnalyzerConfig {
            root_dir: root.to_path_buf(),
            folder_name: "run".into(),
            algorithm_id: "test".into(),
            algorithm_info: "unit test".into(),
            triggers,
            watchers,
        }
    }

    fn dat_lines(dir: &Path) -> Vec<String> {
        fs::read_to_string(dir.join("data_f1_OneMax/IOHprofiler_f1_DIM16.dat"))
            .unwrap()
            .lines()
            .map(str::to_string)
            .collect()
    }

    #[test]
    fn always_budget_three() {
        let tmp = tempfile::tempdir().unwrap();
        let logger = Arc::new(Mutex::new(
            AnalyzerLogger::new(config(tmp.path(), TriggerSet::always(), vec![])).unwrap(),
        ));
        let mut p = Registry::with_defaults().create(Domain::Boolean, 1, 1, 16).unwrap();
        p.attach_logger(logger.clone()).unwrap();
        for _ in 0..3 {
            p.evaluate(&[1u8; 16]).unwrap();
        }
        p.reset().unwrap();
        let dir = logger.lock().unwrap().output_dir().to_path_buf();
        let lines = dat_lines(&dir);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "\"evaluations\" \"raw_y\" \"raw_y_best\"");
        assert_eq!(lines[3], "3 16 16");
        let info = fs::read_to_string(dir.join("IOHprofiler_f1_OneMax.info")).unwrap();
        assert_eq!(
            info,
            "suite = \"None\", funcId = 1, funcName = \"OneMax\", DIM = 16, maximization = \"T\", algId = \"test\", algInfo = \"unit test\"\n%\ndata_f1_OneMax/IOHprofiler_f1_DIM16.dat, 1:3|16\n"
        );
    }

    #[test]
    fn two_runs_share_one_file() {
        let tmp = tempfile::tempdir().unwrap();
        let logger = Arc::new(Mutex::new(
            AnalyzerLogger::new(config(tmp.path(), TriggerSet::always(), vec![])).unwrap(),
        ));
        let mut p = Registry::with_defaults().create(Domain::Boolean, 1, 1, 16).unwrap();
        p.attach_logger(logger.clone()).unwrap();
        for _ in 0..2 {
            p.evaluate(&[0u8; 16]).unwrap();
            p.evaluate(&[1u8; 16]).unwrap();
            p.reset().unwrap();
        }
        let dir = logger.lock().unwrap().output_dir().to_path_buf();
        let lines = dat_lines(&dir);
        let headers: Vec<usize> = lines
            .iter()
            .enumerate()
            .filter(|(_, l)| l.starts_with('"'))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(headers, vec![0, 3]);
        let info = fs::read_to_string(dir.join("IOHprofiler_f1_OneMax.info")).unwrap();
        assert!(info.ends_with(", 1:2|16, 1:2|16\n"));
    }

    #[test]
    fn folder_collision_gets_suffix() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = config(tmp.path(), TriggerSet::always(), vec![]);
        let a = AnalyzerLogger::new(cfg.clone()).unwrap();
        let b = AnalyzerLogger::new(cfg.clone()).unwrap();
        let c = AnalyzerLogger::new(cfg).unwrap();
        assert_eq!(a.output_dir(), tmp.path().join("run"));
        assert_eq!(b.output_dir(), tmp.path().join("run-1"));
        assert_eq!(c.output_dir(), tmp.path().join("run-2"));
    }

    #[test]
    fn final_evaluation_is_forced() {
        let tmp = tempfile::tempdir().unwrap();
        let triggers = TriggerSet::new(vec![Trigger::OnImprovement]).unwrap();
        let logger = Arc::new(Mutex::new(
            AnalyzerLogger::new(config(tmp.path(), triggers, vec![])).unwrap(),
        ));
        let mut p = Registry::with_defaults().create(Domain::Boolean, 1, 1, 16).unwrap();
        p.attach_logger(logger.clone()).unwrap();
        p.evaluate(&[1u8; 16]).unwrap();
        p.evaluate(&[0u8; 16]).unwrap();
        p.evaluate(&[0u8; 16]).unwrap();
        p.reset().unwrap();
        let dir = logger.lock().unwrap().output_dir().to_path_buf();
        assert_eq!(dat_lines(&dir)[1..], ["1 16 16", "3 0 16"]);
    }

    #[test]
    fn watcher_columns() {
        let tmp = tempfile::tempdir().unwrap();
        let params = Parameters::new();
        let watchers = vec![params.watcher("sigma").unwrap(), params.watcher("missing").unwrap()];
        let logger = Arc::new(Mutex::new(
            AnalyzerLogger::new(config(tmp.path(), TriggerSet::always(), watchers)).unwrap(),
        ));
        let mut p = Registry::with_defaults().create(Domain::Boolean, 1, 1, 16).unwrap();
        p.attach_logger(logger.clone()).unwrap();
        params.set("sigma", 0.5);
        p.evaluate(&[1u8; 16]).unwrap();
        p.reset().unwrap();
        let dir = logger.lock().unwrap().output_dir().to_path_buf();
        let lines = dat_lines(&dir);
        assert_eq!(lines[0], "\"evaluations\" \"raw_y\" \"raw_y_best\" \"sigma\" \"missing\"");
        assert_eq!(lines[1], "1 16 16 0.5 nan");
    }

    #[test]
    fn record_before_start_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let mut logger = AnalyzerLogger::new(config(tmp.path(), TriggerSet::always(), vec![])).unwrap();
        let record = LogRecord {
            evaluations: 1,
            raw_y: 1.0,
            raw_y_best: 1.0,
            improved: true,
        };
        assert!(matches!(logger.log(&record), Err(Error::RunNotStarted)));
    }

    #[test]
    fn detach_stops_rows() {
        let tmp = tempfile::tempdir().unwrap();
        let logger = Arc::new(Mutex::new(
            AnalyzerLogger::new(config(tmp.path(), TriggerSet::always(), vec![])).unwrap(),
        ));
        let mut p = Registry::with_defaults().create(Domain::Boolean, 1, 1, 16).unwrap();
        p.attach_logger(logger.clone()).unwrap();
        p.evaluate(&[1u8; 16]).unwrap();
        p.detach_logger(&logger).unwrap();
        p.evaluate(&[1u8; 16]).unwrap();
        p.reset().unwrap();
        let dir = logger.lock().unwrap().output_dir().to_path_buf();
        assert_eq!(dat_lines(&dir).len(), 2);
    }

    #[test]
    fn rejects_quoted_text() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config(tmp.path(), TriggerSet::always(), vec![]);
        cfg.algorithm_info = "say \"hi\"".into();
        assert!(AnalyzerLogger::new(cfg).is_err());
    }

    #[test]
    fn unwritable_root_reports_path() {
        let tmp = tempfile::tempdir().unwrap();
        let file = tmp.path().join("plain-file");
        fs::write(&file, "x").unwrap();
        let cfg = config(&file, TriggerSet::always(), vec![]);
        let err = AnalyzerLogger::new(cfg).unwrap_err();
        assert!(err.to_string().contains("plain-file"), "{err}");
    }
}
