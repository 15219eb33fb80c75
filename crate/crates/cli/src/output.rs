//! CSV files that open with a commented metadata block: the code version,
//! the command and the full resolved configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::Config;

pub struct OutDir {
    dir: PathBuf,
    header: String,
}

impl OutDir {
    pub fn create(dir: &Path, command: &str, cfg: &Config) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut header = format!("# legchain {}\n# command = {command}\n", env!("CARGO_PKG_VERSION"));
        for line in cfg.to_toml().lines() {
            header.push_str("# ");
            header.push_str(line);
            header.push('\n');
        }
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes the metadata block, then `extra` comment lines, then the table.
    pub fn csv(&self, name: &str, extra: &[String], columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        out.write_all(self.header.as_bytes())?;
        for line in extra {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Key-value summary file with the same metadata block.
    pub fn summary(&self, name: &str, pairs: &[(String, String)]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        out.write_all(self.header.as_bytes())?;
        for (k, v) in pairs {
            writeln!(out, "{k} = {v}")?;
        }
        out.flush()?;
        Ok(path)
    }
}

/// Shortest round-trip formatting.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Empty cell for a missing value.
pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}
