//! Output files and the points-file reader.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;

/// Config digest and seed, written into every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stamp {
    pub config_digest: String,
    pub seed: u64,
}

impl Stamp {
    /// `# config_digest=… seed=…`, used as the first line of CSV files and
    /// as the comment line of PNM headers.
    pub fn comment(&self) -> String {
        format!("# config_digest={} seed={}", self.config_digest, self.seed)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config_digest: &'a str,
    seed: u64,
    report: &'a T,
}

pub struct OutputDir {
    root: PathBuf,
    stamp: Stamp,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, stamp: Stamp) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            stamp,
            written: Vec::new(),
        })
    }

    pub fn stamp(&self) -> &Stamp {
        &self.stamp
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// JSON file `{"config_digest": …, "seed": …, "report": …}`.
    pub fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<(), CliError> {
        let env = Envelope {
            config_digest: &self.stamp.config_digest,
            seed: self.stamp.seed,
            report,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Numeric(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV file whose first line is the stamp comment.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("{}\n{body}", self.stamp.comment());
        self.write(name, text.as_bytes())
    }

    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        self.write(name, bytes)
    }
}

/// Reads points, one per line, comma- or whitespace-separated. Blank lines
/// and `#` comments are skipped. Each row yields its 1-based line number
/// and either `n` finite coordinates or a message.
pub fn parse_points(text: &str, n: usize) -> Vec<(usize, Result<Vec<f64>, String>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            Some((i + 1, parse_row(line, n)))
        })
        .collect()
}

fn parse_row(line: &str, n: usize) -> Result<Vec<f64>, String> {
    let fields: Vec<&str> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect();
    if fields.len() != n {
        return Err(format!("expected {n} coordinates, found {}", fields.len()));
    }
    fields
        .iter()
        .map(|f| match f.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("bad coordinate {f:?}")),
        })
        .collect()
}
