//! Deterministic artifact writers. Floats carry 17 significant digits; every
//! file starts with the tool version and the config hash.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const TOOL: &str = concat!("limitlab ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug)]
pub struct Metadata {
    pub subcommand: String,
    pub experiment: String,
    pub config_hash: String,
    /// Canonical form of the parsed config, echoed into JSON reports.
    pub config: Value,
}

/// `{:.16e}` for finite values; `NaN`, `inf`, `-inf` otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Opt(Option<f64>),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Opt(x)
    }
}

fn render_cell(c: &Cell) -> String {
    match c {
        Cell::F(x) => fmt_f64(*x),
        Cell::I(i) => i.to_string(),
        Cell::Opt(None) => String::new(),
        Cell::Opt(Some(x)) => fmt_f64(*x),
        Cell::S(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

/// Collects artifacts for one run, written under `dir`.
pub struct Artifacts {
    pub dir: PathBuf,
    pub meta: Metadata,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, meta: Metadata) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), meta, written: Vec::new() })
    }

    fn header_lines(&self) -> Vec<String> {
        vec![
            format!("tool: {TOOL}"),
            format!("config_sha256: {}", self.meta.config_hash),
            format!("subcommand: {}", self.meta.subcommand),
            format!("experiment: {}", self.meta.experiment),
        ]
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        f.write_all(bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    /// CSV with `#` metadata lines, then a header row.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<Cell>>) -> Result<(), CliError> {
        let mut out = String::new();
        for l in self.header_lines() {
            out.push_str("# ");
            out.push_str(&l);
            out.push('\n');
        }
        out.push_str(&columns.join(","));
        out.push('\n');
        for r in &rows {
            debug_assert_eq!(r.len(), columns.len());
            let line: Vec<String> = r.iter().map(render_cell).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        self.write(name, out.as_bytes())
    }

    /// `{"metadata": ..., "report": ...}` with fixed float formatting.
    pub fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<(), CliError> {
        let report = serde_json::to_value(report).map_err(|e| CliError::Numeric(format!("cannot serialize report: {e}")))?;
        let mut meta = serde_json::Map::new();
        meta.insert("tool".into(), Value::String(TOOL.into()));
        meta.insert("config_sha256".into(), Value::String(self.meta.config_hash.clone()));
        meta.insert("subcommand".into(), Value::String(self.meta.subcommand.clone()));
        meta.insert("experiment".into(), Value::String(self.meta.experiment.clone()));
        meta.insert("config".into(), self.meta.config.clone());
        let mut top = serde_json::Map::new();
        top.insert("metadata".into(), Value::Object(meta));
        top.insert("report".into(), report);
        let mut out = String::new();
        write_value(&Value::Object(top), 0, &mut out);
        out.push('\n');
        self.write(name, out.as_bytes())
    }

    /// Binary PGM (`P5`) with the metadata in a comment line.
    pub fn pgm(&mut self, name: &str, width: usize, height: usize, pixels: &[u8]) -> Result<(), CliError> {
        assert_eq!(pixels.len(), width * height);
        let mut out = Vec::with_capacity(pixels.len() + 256);
        out.extend_from_slice(b"P5\n");
        for l in self.header_lines() {
            out.extend_from_slice(format!("# {l}\n").as_bytes());
        }
        out.extend_from_slice(format!("{width} {height}\n255\n").as_bytes());
        out.extend_from_slice(pixels);
        self.write(name, &out)
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Pretty JSON with sorted keys (serde_json maps are ordered) and every
/// float printed as `{:.16e}`.
pub fn write_value(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64().filter(|_| !n.is_f64()) {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64().filter(|_| !n.is_f64()) {
                out.push_str(&u.to_string());
            } else {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if x.is_finite() {
                    out.push_str(&format!("{x:.16e}"));
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = a.iter().all(|x| !x.is_array() && !x.is_object());
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if flat {
                    if i > 0 {
                        out.push(' ');
                    }
                } else {
                    out.push('\n');
                    indent(level + 1, out);
                }
                write_value(x, level + 1, out);
            }
            if !flat {
                out.push('\n');
                indent(level, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                indent(level + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, level + 1, out);
            }
            out.push('\n');
            indent(level, out);
            out.push('}');
        }
    }
}
