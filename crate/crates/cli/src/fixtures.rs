//! Shipped fixture configurations and their golden outputs.
//!
//! Layout: `<root>/configs/<name>.toml` and `<root>/golden/<name>/{report.json,
//! curves.csv, constants.csv}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

pub const TOLERANCE: f64 = 1e-9;
const ARTIFACTS: [&str; 3] = ["report.json", "curves.csv", "constants.csv"];

pub fn default_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub config: PathBuf,
    pub golden: PathBuf,
}

impl Fixture {
    pub fn golden_files(&self) -> Vec<&'static str> {
        ARTIFACTS.iter().copied().filter(|f| self.golden.join(f).is_file()).collect()
    }
}

/// Fixtures sorted by name.
pub fn list(root: &Path) -> Result<Vec<Fixture>, CliError> {
    let dir = root.join("configs");
    let mut out = Vec::new();
    for entry in fs::read_dir(&dir).map_err(|e| CliError::Fixture(format!("{}: {e}", dir.display())))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        out.push(Fixture {
            golden: root.join("golden").join(&name),
            name,
            config: path,
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diff {
    pub fixture: String,
    pub file: String,
    pub location: String,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for Diff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{} {}: expected {}, got {}",
            self.fixture, self.file, self.location, self.expected, self.actual
        )
    }
}

pub fn numbers_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TOLERANCE * 1f64.max(a.abs()).max(b.abs())
}

fn diff_json(expected: &Value, actual: &Value, path: &str, out: &mut Vec<(String, String, String)>) {
    match (expected, actual) {
        (Value::Number(a), Value::Number(b)) => {
            let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if !numbers_close(x, y) {
                out.push((path.to_string(), a.to_string(), b.to_string()));
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            for (k, va) in a {
                match b.get(k) {
                    Some(vb) => diff_json(va, vb, &format!("{path}.{k}"), out),
                    None => out.push((format!("{path}.{k}"), va.to_string(), "missing".into())),
                }
            }
            for (k, vb) in b {
                if !a.contains_key(k) {
                    out.push((format!("{path}.{k}"), "missing".into(), vb.to_string()));
                }
            }
        }
        (Value::Array(a), Value::Array(b)) if a.len() == b.len() => {
            for (i, (va, vb)) in a.iter().zip(b).enumerate() {
                diff_json(va, vb, &format!("{path}[{i}]"), out);
            }
        }
        (a, b) if a == b => {}
        (a, b) => out.push((path.to_string(), a.to_string(), b.to_string())),
    }
}

fn diff_csv(expected: &str, actual: &str, out: &mut Vec<(String, String, String)>) {
    let e: Vec<&str> = expected.lines().collect();
    let a: Vec<&str> = actual.lines().collect();
    if e.len() != a.len() {
        out.push(("rows".into(), e.len().to_string(), a.len().to_string()));
        return;
    }
    for (row, (le, la)) in e.iter().zip(&a).enumerate() {
        let fe: Vec<&str> = le.split(',').collect();
        let fa: Vec<&str> = la.split(',').collect();
        if fe.len() != fa.len() {
            out.push((format!("row {row}"), le.to_string(), la.to_string()));
            continue;
        }
        for (col, (x, y)) in fe.iter().zip(&fa).enumerate() {
            let same = match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(p), Ok(q)) => numbers_close(p, q),
                _ => x == y,
            };
            if !same {
                out.push((format!("row {row} col {col}"), x.to_string(), y.to_string()));
            }
        }
    }
}

/// Compares one artifact; numbers within [`TOLERANCE`] (relative above 1),
/// everything else, verdicts included, exactly.
pub fn diff_file(fixture: &str, file: &str, expected: &Path, actual: &Path) -> Result<Vec<Diff>, CliError> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| CliError::Fixture(format!("{}: {e}", p.display())));
    let (e, a) = (read(expected)?, read(actual)?);
    let mut raw = Vec::new();
    if file.ends_with(".json") {
        let parse = |s: &str, p: &Path| {
            serde_json::from_str::<Value>(s).map_err(|err| CliError::Fixture(format!("{}: {err}", p.display())))
        };
        diff_json(&parse(&e, expected)?, &parse(&a, actual)?, "$", &mut raw);
    } else {
        diff_csv(&e, &a, &mut raw);
    }
    Ok(raw
        .into_iter()
        .map(|(location, expected, actual)| Diff {
            fixture: fixture.to_string(),
            file: file.to_string(),
            location,
            expected,
            actual,
        })
        .collect())
}

/// Compares `<dir>/<name>/<artifact>` against the golden copy of every
/// fixture. A fixture without golden files, or a run missing an artifact the
/// golden copy has, is an error.
pub fn diff_dir(root: &Path, dir: &Path) -> Result<Vec<Diff>, CliError> {
    let mut diffs = Vec::new();
    for fx in list(root)? {
        let files = fx.golden_files();
        if files.is_empty() {
            return Err(CliError::Fixture(format!("no golden output for fixture {}", fx.name)));
        }
        for f in files {
            let actual = dir.join(&fx.name).join(f);
            if !actual.is_file() {
                return Err(CliError::Fixture(format!("missing {}", actual.display())));
            }
            diffs.extend(diff_file(&fx.name, f, &fx.golden.join(f), &actual)?);
        }
    }
    Ok(diffs)
}
