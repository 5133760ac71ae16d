//! `ioh` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid config, 3 malformed data,
//! 64 usage error, 66 missing input file.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::functions::Registry;
use crate::logging::read_data_dir;
use crate::problem::Domain;
use crate::runner::{run_experiment_with, ExperimentConfig, ALGORITHMS};
use crate::suite::{BBOB_MINI, BBOB_MINI_IDS, PBO_MINI, PBO_MINI_IDS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_MALFORMED_DATA: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;

#[derive(Debug, Parser)]
#[command(name = "ioh", version, about = "Benchmark iterative optimization heuristics")]
struct Cli {
    /// Override the config's master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's output root directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Check a config against the schema and the registry without running it.
    Validate { config: PathBuf },
    /// Parse a data directory and summarize its runs.
    Inspect { data_dir: PathBuf },
    /// List registered functions, suites and algorithms.
    List,
}

/// Runs the CLI with `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            }
        }
    };
    let registry = Registry::with_defaults();
    match &cli.command {
        Command::Run { config } => match load_config(&cli, config, err) {
            Ok(config) => match run_experiment_with(&config, &registry) {
                Ok(summary) => {
                    let _ = writeln!(out, "runs: {}", summary.runs);
                    let _ = writeln!(out, "optima hit: {}", summary.optima_hit);
                    let _ = writeln!(out, "output: {}", summary.output_dir.display());
                    EXIT_OK
                }
                Err(e @ Error::Config { .. }) => {
                    let _ = writeln!(err, "invalid config: {e}");
                    EXIT_INVALID_CONFIG
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_FAILURE
                }
            },
            Err(code) => code,
        },
        Command::Validate { config } => match load_config(&cli, config, err) {
            Ok(config) => match config.validate(&registry) {
                Ok(v) => {
                    let _ = writeln!(
                        out,
                        "ok: {} runs ({} problem instances x {} repetitions)",
                        v.suite.size() * config.repetitions as usize,
                        v.suite.size(),
                        config.repetitions
                    );
                    EXIT_OK
                }
                Err(e) => {
                    let _ = writeln!(err, "invalid config: {e}");
                    EXIT_INVALID_CONFIG
                }
            },
            Err(code) => code,
        },
        Command::Inspect { data_dir } => inspect(data_dir, out, err),
        Command::List => {
            list(&registry, out);
            EXIT_OK
        }
    }
}

fn load_config(cli: &Cli, path: &Path, err: &mut dyn Write) -> Result<ExperimentConfig, i32> {
    if !path.is_file() {
        let _ = writeln!(err, "error: config file {} not found", path.display());
        return Err(EXIT_NO_INPUT);
    }
    let mut config = match ExperimentConfig::from_file(path) {
        Ok(c) => c,
        Err(e @ Error::Io { .. }) => {
            let _ = writeln!(err, "error: {e}");
            return Err(EXIT_NO_INPUT);
        }
        Err(e) => {
            let _ = writeln!(err, "invalid config: {e}");
            return Err(EXIT_INVALID_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(root) = &cli.output {
        config.output.root_dir = root.clone();
    }
    Ok(config)
}

fn inspect(dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if !dir.is_dir() {
        let _ = writeln!(err, "error: data directory {} not found", dir.display());
        return EXIT_NO_INPUT;
    }
    let data = match read_data_dir(dir) {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(err, "malformed data: {e}");
            return EXIT_MALFORMED_DATA;
        }
    };
    for p in &data.problems {
        let runs: usize = p.stanzas.iter().map(|s| s.runs.len()).sum();
        let maximize = p.stanzas.first().is_some_and(|s| s.maximization);
        let best = p
            .stanzas
            .iter()
            .flat_map(|s| s.runs.iter().map(|r| r.best))
            .reduce(|a, b| if (b > a) == maximize { b } else { a });
        let _ = writeln!(
            out,
            "f{} {}: {} runs, best {}",
            p.problem_id,
            p.name,
            runs,
            best.map(crate::logging::format_real).unwrap_or_else(|| "-".into())
        );
        for s in &p.stanzas {
            let bests: Vec<String> = s
                .runs
                .iter()
                .map(|r| format!("{}:{}", r.instance_id, crate::logging::format_real(r.best)))
                .collect();
            let _ = writeln!(out, "  DIM {}: {}", s.dimension, bests.join(" "));
        }
    }
    let _ = writeln!(out, "total runs: {}", data.run_count());
    EXIT_OK
}

fn list(registry: &Registry, out: &mut dyn Write) {
    for (domain, title) in [(Domain::Boolean, "boolean"), (Domain::Continuous, "continuous")] {
        let _ = writeln!(out, "{title} functions:");
        for id in registry.ids(domain) {
            let entry = registry.lookup(id, domain).expect("listed id");
            let _ = writeln!(out, "  {:>3}  {}", id, entry.name);
        }
    }
    let _ = writeln!(out, "suites:");
    let _ = writeln!(out, "  {PBO_MINI} (boolean): {PBO_MINI_IDS:?}");
    let _ = writeln!(out, "  {BBOB_MINI} (continuous): {BBOB_MINI_IDS:?}");
    let _ = writeln!(out, "algorithms:");
    for a in ALGORITHMS {
        let domains: Vec<String> = a.domains.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "  {} ({})", a.name, domains.join(", "));
    }
}
