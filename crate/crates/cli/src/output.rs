//! CSV and manifest writing. Floats are written with 17 significant digits
//! (`{:.16e}`) and LF line endings so that reruns are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// In-memory CSV table.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut n = 0;
        for (k, cell) in cells.into_iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            self.text.push_str(cell.as_ref());
            n += 1;
        }
        debug_assert_eq!(n, self.columns);
        self.text.push('\n');
    }

    pub fn float_row(&mut self, values: &[f64]) {
        self.row(values.iter().map(|&x| fmt_f64(x)));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<InputRecord>,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<OutputRecord>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            input: None,
            params: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.params.insert(name.into(), v);
    }
}

/// Output directory that records what was written into it.
pub struct OutputDir {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl OutputDir {
    pub fn create(dir: &Path, manifest: RunManifest) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(path.display().to_string(), e))?;
        self.manifest.outputs.push(OutputRecord {
            file: name.into(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(path)
    }

    /// Writes `manifest.json` and returns its path.
    pub fn finish(self) -> CliResult<PathBuf> {
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self.manifest).map_err(ionet::Error::from)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Ok(path)
    }
}

/// Reads a network file and returns its text and hash.
pub fn read_input(path: &Path) -> CliResult<(String, InputRecord)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let record = InputRecord {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Core(ionet::Error::Schema(format!("{}: not UTF-8", path.display()))))?;
    Ok((text, record))
}

pub fn complex_rows(m: &ionet::CMatrix<f64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Right-aligned plain-text table.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&width)
            .enumerate()
            .map(|(k, (c, w))| if k == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &mut header.iter().copied());
    for r in rows {
        line(&mut out, &mut r.iter().map(String::as_str));
    }
    out
}
