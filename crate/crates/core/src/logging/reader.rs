//! Validating reader for data directories written by [`super::AnalyzerLogger`].

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::analyzer::BASE_COLUMNS;

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub evaluations: u64,
    pub raw_y: f64,
    pub raw_y_best: f64,
    pub parameters: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunData {
    pub instance_id: u32,
    pub evaluations: u64,
    pub best: f64,
    /// Watched parameter names, in column order.
    pub parameter_names: Vec<String>,
    pub rows: Vec<DataRow>,
}

/// One metadata block of an `.info` file with the runs it lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Stanza {
    pub suite: String,
    pub dimension: usize,
    pub maximization: bool,
    pub algorithm_id: String,
    pub algorithm_info: String,
    pub dat_path: String,
    pub runs: Vec<RunData>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub problem_id: u32,
    pub name: String,
    pub stanzas: Vec<Stanza>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataSet {
    pub problems: Vec<ProblemData>,
}

impl DataSet {
    /// Every run with its `(problem_id, dimension)`.
    pub fn runs(&self) -> impl Iterator<Item = (u32, usize, &RunData)> {
        self.problems.iter().flat_map(|p| {
            p.stanzas
                .iter()
                .flat_map(move |s| s.runs.iter().map(move |r| (p.problem_id, s.dimension, r)))
        })
    }

    pub fn run_count(&self) -> usize {
        self.runs().count()
    }

    /// Runs grouped by `(problem_id, dimension, instance_id)`.
    pub fn grouped(&self) -> BTreeMap<(u32, usize, u32), Vec<&RunData>> {
        let mut groups: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for (id, dim, run) in self.runs() {
            groups.entry((id, dim, run.instance_id)).or_default().push(run);
        }
        groups
    }
}

struct DatRun {
    line: usize,
    parameter_names: Vec<String>,
    rows: Vec<DataRow>,
}

/// Parses every `.info` file in `path` and the `.dat` files they reference.
pub fn read_data_dir(path: impl AsRef<Path>) -> Result<DataSet> {
    let root = path.as_ref();
    let mut info_files: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "info"))
        .collect();
    info_files.sort();

    let mut dat_cache: HashMap<String, (PathBuf, std::vec::IntoIter<DatRun>)> = HashMap::new();
    let mut problems = Vec::new();
    for info_path in &info_files {
        let text = fs::read_to_string(info_path).map_err(|e| Error::io(info_path, e))?;
        let lines: Vec<&str> = text.lines().collect();
        let mut problem: Option<ProblemData> = None;
        let mut i = 0;
        while i < lines.len() {
            if lines[i].trim().is_empty() {
                i += 1;
                continue;
            }
            let header_line = i + 1;
            let fields = parse_info_header(lines[i])
                .map_err(|m| Error::parse(info_path, header_line, m))?;
            let get = |key: &str| {
                fields
                    .get(key)
                    .cloned()
                    .ok_or_else(|| Error::parse(info_path, header_line, format!("missing key {key}")))
            };
            let number = |key: &str| -> Result<u64> {
                get(key)?.parse().map_err(|_| {
                    Error::parse(info_path, header_line, format!("{key} is not an integer"))
                })
            };
            let problem_id = number("funcId")? as u32;
            let name = get("funcName")?;
            let dimension = number("DIM")? as usize;
            let maximization = match get("maximization")?.as_str() {
                "T" => true,
                "F" => false,
                other => {
                    return Err(Error::parse(
                        info_path,
                        header_line,
                        format!("maximization must be T or F, got {other:?}"),
                    ))
                }
            };
            if lines.get(i + 1).map(|l| l.trim()) != Some("%") {
                return Err(Error::parse(info_path, i + 2, "expected '%' separator line"));
            }
            let Some(run_line) = lines.get(i + 2) else {
                return Err(Error::parse(info_path, i + 3, "missing run list line"));
            };
            let run_line_no = i + 3;
            let mut parts = run_line.split(',').map(str::trim);
            let dat_path = parts.next().unwrap_or_default().to_string();
            if dat_path.is_empty() {
                return Err(Error::parse(info_path, run_line_no, "missing .dat path"));
            }
            let entries = parts
                .map(|p| parse_run_entry(p).map_err(|m| Error::parse(info_path, run_line_no, m)))
                .collect::<Result<Vec<_>>>()?;

            if !dat_cache.contains_key(&dat_path) {
                let full = root.join(&dat_path);
                let runs = read_dat(&full)?;
                dat_cache.insert(dat_path.clone(), (full, runs.into_iter()));
            }
            let (dat_full, dat_runs) = dat_cache.get_mut(&dat_path).expect("inserted above");
            let mut runs = Vec::with_capacity(entries.len());
            for (instance_id, evaluations, best) in entries {
                let dat_run = dat_runs.next().ok_or_else(|| {
                    Error::parse(
                        info_path,
                        run_line_no,
                        format!("{} lists more runs than {} contains", info_path.display(), dat_full.display()),
                    )
                })?;
                let last = dat_run.rows.last().expect("dat runs are non-empty");
                if last.evaluations != evaluations || !same_value(last.raw_y_best, best) {
                    return Err(Error::parse(
                        info_path,
                        run_line_no,
                        format!(
                            "run {instance_id}:{evaluations} does not match the last row of the run at {}:{}",
                            dat_full.display(),
                            dat_run.line
                        ),
                    ));
                }
                runs.push(RunData {
                    instance_id,
                    evaluations,
                    best,
                    parameter_names: dat_run.parameter_names,
                    rows: dat_run.rows,
                });
            }

            let problem = problem.get_or_insert_with(|| ProblemData {
                problem_id,
                name: name.clone(),
                stanzas: Vec::new(),
            });
            if problem.problem_id != problem_id || problem.name != name {
                return Err(Error::parse(
                    info_path,
                    header_line,
                    format!(
                        "f{problem_id} {name} differs from f{} {} earlier in the file",
                        problem.problem_id, problem.name
                    ),
                ));
            }
            problem.stanzas.push(Stanza {
                suite: get("suite")?,
                dimension,
                maximization,
                algorithm_id: get("algId")?,
                algorithm_info: get("algInfo")?,
                dat_path,
                runs,
            });
            i += 3;
        }
        if let Some(p) = problem {
            problems.push(p);
        }
    }

    for (full, mut rest) in dat_cache.into_values() {
        if let Some(extra) = rest.next() {
            return Err(Error::parse(
                full,
                extra.line,
                "run is not listed in any .info file",
            ));
        }
    }
    problems.sort_by(|a, b| (a.problem_id, &a.name).cmp(&(b.problem_id, &b.name)));
    Ok(DataSet { problems })
}

fn same_value(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

fn parse_run_entry(entry: &str) -> std::result::Result<(u32, u64, f64), String> {
    let bad = || format!("malformed run entry {entry:?}, expected <instance>:<evaluations>|<best>");
    let (instance, rest) = entry.split_once(':').ok_or_else(bad)?;
    let (evaluations, best) = rest.split_once('|').ok_or_else(bad)?;
    Ok((
        instance.parse().map_err(|_| bad())?,
        evaluations.parse().map_err(|_| bad())?,
        best.parse().map_err(|_| bad())?,
    ))
}

/// `key = value, key = "quoted value", ...`
fn parse_info_header(line: &str) -> std::result::Result<HashMap<String, String>, String> {
    let mut fields = HashMap::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        let (key, after) = rest
            .split_once('=')
            .ok_or_else(|| format!("expected key = value near {rest:?}"))?;
        let key = key.trim();
        if key.is_empty() || key.contains([',', '"']) {
            return Err(format!("invalid key {key:?}"));
        }
        let after = after.trim_start();
        let (value, remainder) = if let Some(quoted) = after.strip_prefix('"') {
            let end = quoted
                .find('"')
                .ok_or_else(|| format!("unterminated quote in value of {key}"))?;
            (&quoted[..end], &quoted[end + 1..])
        } else {
            let end = after.find(',').unwrap_or(after.len());
            (after[..end].trim(), &after[end..])
        };
        fields.insert(key.to_string(), value.to_string());
        let remainder = remainder.trim_start();
        rest = match remainder.strip_prefix(',') {
            Some(r) => r.trim_start(),
            None if remainder.is_empty() => remainder,
            None => return Err(format!("expected ',' after value of {key}")),
        };
    }
    Ok(fields)
}

fn read_dat(path: &Path) -> Result<Vec<DatRun>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut runs: Vec<DatRun> = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('"') {
            if let Some(prev) = runs.last() {
                if prev.rows.is_empty() {
                    return Err(Error::parse(path, prev.line, "header without data rows"));
                }
            }
            let names = line
                .split_whitespace()
                .map(|tok| {
                    tok.strip_prefix('"')
                        .and_then(|t| t.strip_suffix('"'))
                        .filter(|t| !t.is_empty() && !t.contains('"'))
                        .map(str::to_string)
                        .ok_or_else(|| Error::parse(path, line_no, format!("malformed header token {tok}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if names.len() < BASE_COLUMNS.len() || names[..BASE_COLUMNS.len()] != BASE_COLUMNS {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("header must start with {BASE_COLUMNS:?}"),
                ));
            }
            runs.push(DatRun {
                line: line_no,
                parameter_names: names[BASE_COLUMNS.len()..].to_vec(),
                rows: Vec::new(),
            });
            continue;
        }
        let run = runs
            .last_mut()
            .ok_or_else(|| Error::parse(path, line_no, "data row before header"))?;
        let cells: Vec<&str> = line.split_whitespace().collect();
        let arity = BASE_COLUMNS.len() + run.parameter_names.len();
        if cells.len() != arity {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {arity} columns, found {}", cells.len()),
            ));
        }
        let evaluations: u64 = cells[0].parse().map_err(|_| {
            Error::parse(path, line_no, format!("evaluations {:?} is not an integer", cells[0]))
        })?;
        let mut reals = Vec::with_capacity(arity - 1);
        for cell in &cells[1..] {
            reals.push(cell.parse::<f64>().map_err(|_| {
                Error::parse(path, line_no, format!("{cell:?} is not a number"))
            })?);
        }
        if let Some(prev) = run.rows.last() {
            if evaluations <= prev.evaluations {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("evaluations {evaluations} not increasing"),
                ));
            }
        }
        run.rows.push(DataRow {
            evaluations,
            raw_y: reals[0],
            raw_y_best: reals[1],
            parameters: reals[2..].to_vec(),
        });
    }
    if let Some(prev) = runs.last() {
        if prev.rows.is_empty() {
            return Err(Error::parse(path, prev.line, "header without data rows"));
        }
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, rel: &str, text: &str) {
        let p = dir.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }

    const INFO: &str = "suite = \"S\", funcId = 1, funcName = \"OneMax\", DIM = 4, maximization = \"T\", algId = \"a\", algInfo = \"x, y\"\n%\ndata_f1_OneMax/IOHprofiler_f1_DIM4.dat, 1:2|3\n";

    #[test]
    fn parses_minimal_dir() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "IOHprofiler_f1_OneMax.info", INFO);
        write(
            tmp.path(),
            "data_f1_OneMax/IOHprofiler_f1_DIM4.dat",
            "\"evaluations\" \"raw_y\" \"raw_y_best\" \"p\"\n1 3 3 0.5\n2 1 3 nan\n",
        );
        let data = read_data_dir(tmp.path()).unwrap();
        assert_eq!(data.run_count(), 1);
        let s = &data.problems[0].stanzas[0];
        assert_eq!(s.algorithm_info, "x, y");
        assert_eq!(s.runs[0].parameter_names, vec!["p"]);
        assert!(s.runs[0].rows[1].parameters[0].is_nan());
    }

    #[test]
    fn short_row_names_line() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "IOHprofiler_f1_OneMax.info", INFO);
        write(
            tmp.path(),
            "data_f1_OneMax/IOHprofiler_f1_DIM4.dat",
            "\"evaluations\" \"raw_y\" \"raw_y_best\"\n1 3 3\n2 3\n",
        );
        let err = read_data_dir(tmp.path()).unwrap_err();
        match err {
            Error::Parse { line, message, path } => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 3 columns"), "{message}");
                assert!(path.ends_with("IOHprofiler_f1_DIM4.dat"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_numeric_cell() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "IOHprofiler_f1_OneMax.info", INFO);
        write(
            tmp.path(),
            "data_f1_OneMax/IOHprofiler_f1_DIM4.dat",
            "\"evaluations\" \"raw_y\" \"raw_y_best\"\n1 3 3\n2 abc 3\n",
        );
        assert!(matches!(read_data_dir(tmp.path()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn cross_reference_mismatch() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "IOHprofiler_f1_OneMax.info", INFO);
        write(
            tmp.path(),
            "data_f1_OneMax/IOHprofiler_f1_DIM4.dat",
            "\"evaluations\" \"raw_y\" \"raw_y_best\"\n1 3 3\n",
        );
        assert!(matches!(read_data_dir(tmp.path()), Err(Error::Parse { line: 3, .. })));

        write(
            tmp.path(),
            "data_f1_OneMax/IOHprofiler_f1_DIM4.dat",
            "\"evaluations\" \"raw_y\" \"raw_y_best\"\n1 3 3\n2 1 3\n\"evaluations\" \"raw_y\" \"raw_y_best\"\n1 0 0\n",
        );
        let err = read_data_dir(tmp.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn malformed_header() {
        let tmp = tempfile::tempdir().unwrap();
        write(
            tmp.path(),
            "IOHprofiler_f1_OneMax.info",
            "suite = \"S\", funcId = one\n%\nx.dat\n",
        );
        assert!(matches!(read_data_dir(tmp.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn header_parser() {
        let f = parse_info_header("a = 1, b = \"two, three\", c = \"\"").unwrap();
        assert_eq!(f["a"], "1");
        assert_eq!(f["b"], "two, three");
        assert_eq!(f["c"], "");
        assert!(parse_info_header("a = \"open").is_err());
        assert!(parse_info_header("novalue").is_err());
    }
}
