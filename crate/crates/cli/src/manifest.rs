//! Output directory bookkeeping: every artifact is written through
//! [`Outputs`], which records its SHA-256 for `manifest.csv`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.csv";

#[derive(Serialize)]
struct Row<'a> {
    kind: &'a str,
    name: &'a str,
    value: &'a str,
}

pub struct Outputs {
    dir: PathBuf,
    artifacts: Vec<(String, String)>,
    metrics: Vec<(String, String)>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), artifacts: Vec::new(), metrics: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.retain(|(n, _)| n != name);
        self.artifacts.push((name.to_string(), hex::encode(Sha256::digest(bytes))));
        log::info!("wrote {}", path.display());
        Ok(())
    }

    /// Serializes `rows` as CSV with a header and writes it.
    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().context("flushing csv")?;
        self.write(name, &bytes)
    }

    /// Runs a writer closure into memory, then writes the result.
    pub fn with<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> wetlab_core::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).with_context(|| format!("rendering {name}"))?;
        self.write(name, &buf)
    }

    pub fn metric(&mut self, name: &str, value: impl ToString) {
        self.metrics.push((name.to_string(), value.to_string()));
    }

    /// Writes `manifest.csv`; only the timestamp row varies between reruns.
    pub fn finish(self, config_hash: &str, scenario: &str) -> Result<PathBuf> {
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let stamp = stamp.to_string();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |kind, name, value| w.serialize(Row { kind, name, value });
        row("config", "sha256", config_hash)?;
        row("run", "scenario", scenario)?;
        row("run", "timestamp", &stamp)?;
        for (n, v) in &self.metrics {
            row("metric", n, v)?;
        }
        for (n, h) in &self.artifacts {
            row("artifact", n, h)?;
        }
        let bytes = w.into_inner().context("flushing manifest")?;
        let path = self.dir.join(MANIFEST);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
