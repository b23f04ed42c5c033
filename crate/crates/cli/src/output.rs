//! Buffered outputs, committed all at once with the manifest last.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: usize,
}

/// Record of one run, enough to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<OutputEntry>,
    pub wall_time_s: f64,
    pub summary: serde_json::Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Files of one run, held in memory until every computation has succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

fn check_name(name: &str) -> CliResult<()> {
    let plain = !name.is_empty()
        && !name.starts_with('.')
        && name != MANIFEST_FILE
        && Path::new(name).file_name().is_some_and(|f| f == name);
    if plain {
        Ok(())
    } else {
        Err(CliError::Config(format!("output name `{name}` is not a plain file name")))
    }
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) -> CliResult<()> {
        let name = name.into();
        check_name(&name)?;
        if self.files.iter().any(|(n, _)| *n == name) {
            return Err(CliError::Config(format!("output `{name}` would be written twice")));
        }
        self.files.push((name, bytes));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file through a temporary name inside `dir`, renames them
    /// into place, then writes the manifest the same way. On failure the
    /// temporaries are removed and nothing is left behind.
    pub fn commit(self, dir: &Path, mut manifest: RunManifest, started: Instant) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let tmp = |name: &str| dir.join(format!(".{name}.{}.tmp", std::process::id()));
        let mut written: Vec<PathBuf> = Vec::new();
        for (name, bytes) in &self.files {
            let t = tmp(name);
            if let Err(e) = fs::write(&t, bytes) {
                written.iter().for_each(|p| drop(fs::remove_file(p)));
                drop(fs::remove_file(&t));
                return Err(e.into());
            }
            written.push(t);
        }
        let mut finals = Vec::new();
        for ((name, _), t) in self.files.iter().zip(&written) {
            let dest = dir.join(name);
            fs::rename(t, &dest)?;
            finals.push(dest);
        }
        manifest.outputs = self.files.iter().map(|(n, b)| OutputEntry { file: n.clone(), bytes: b.len() }).collect();
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        let t = tmp(MANIFEST_FILE);
        fs::write(&t, serde_json::to_string_pretty(&manifest)? + "\n")?;
        let dest = dir.join(MANIFEST_FILE);
        fs::rename(&t, &dest)?;
        finals.push(dest);
        Ok(finals)
    }
}
