//! Deterministic file output and the run manifest.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Column-oriented numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Header line plus one line per row, `\n` terminated. Floats use the
    /// shortest decimal that parses back to the same binary64.
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// `{"columns": [...], "rows": [[...], ...]}`.
    pub fn to_json(&self) -> anyhow::Result<String> {
        #[derive(Serialize)]
        struct View<'a> {
            columns: &'a [String],
            rows: &'a [Vec<f64>],
        }
        Ok(serde_json::to_string(&View { columns: &self.header, rows: &self.rows })? + "\n")
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Parses a CSV written by [`Table::to_csv`].
pub fn read_csv(text: &str) -> anyhow::Result<Table> {
    let mut lines = text.lines();
    let header = lines.next().context("empty csv")?;
    let mut table = Table::new(&header.split(',').collect::<Vec<_>>());
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| v.parse::<f64>().with_context(|| format!("row {}: bad value {v:?}", i + 1)))
            .collect::<anyhow::Result<Vec<_>>>()?;
        anyhow::ensure!(row.len() == table.header.len(), "row {} has {} fields", i + 1, row.len());
        table.rows.push(row);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub resolved_config: serde_json::Value,
    pub version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<OutputEntry>,
}

/// Writes files into one directory and remembers their checksums.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    entries: Vec<OutputEntry>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), entries: Vec::new(), started: Instant::now() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.entries
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.root.join(name);
        write_atomic(&path, contents)?;
        log::info!("wrote {}", path.display());
        self.entries.push(OutputEntry { path: name.to_string(), sha256: hex::encode(Sha256::digest(contents)) });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<PathBuf> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, text.as_bytes())
    }

    /// Writes the manifest after every data file; consumes the directory.
    pub fn finish<C: Serialize>(self, command: &str, config: &C) -> anyhow::Result<Manifest> {
        let manifest = Manifest {
            command: command.to_string(),
            resolved_config: serde_json::to_value(config)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.entries,
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        write_atomic(&self.root.join(MANIFEST_NAME), text.as_bytes())?;
        Ok(manifest)
    }
}

/// Temp file in the target directory, then rename over the destination.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_exactly() {
        let mut t = Table::new(&["t", "F"]);
        for v in [0.0, 1.0, 0.1 + 0.2, 1e-300, 123456.789, 0.9988759823068176, f64::MIN_POSITIVE] {
            t.push(vec![v, 1.0 - v]);
        }
        let text = t.to_csv();
        assert!(text.starts_with("t,F\n0,1\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn integers_print_plainly() {
        let mut t = Table::new(&["N", "F"]);
        t.push(vec![101.0, 1.0]);
        assert_eq!(t.to_csv(), "N,F\n101,1\n");
    }

    #[test]
    fn manifest_lists_outputs_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("a.csv", b"x\n1\n").unwrap();
        out.write("b.csv", b"x\n2\n").unwrap();
        let m = out.finish("test", &serde_json::json!({"k": 1})).unwrap();
        assert_eq!(m.outputs.len(), 2);
        assert_eq!(m.outputs[0].sha256, sha256_hex(b"x\n1\n"));
        let on_disk: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap()).unwrap();
        assert_eq!(on_disk["outputs"][1]["path"], "b.csv");
        assert_eq!(on_disk["command"], "test");
        let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 3);
    }
}
