//! Result files written under the output directory.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sqdopt_core::RunResult;

use crate::error::{CliError, CliResult};

pub const LOCK_FILE: &str = ".sqdopt.lock";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked { dir: dir.to_path_buf(), lock: path }),
            Err(e) => Err(CliError::Io { path, source: e }),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Contents of `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub config_hash: String,
    /// File stem of the fixture.
    pub fixture: String,
    pub fixture_hash: String,
    pub result: RunResult,
}

impl ResultFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }
}

pub fn fixture_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn run_dir_name(fixture: &str, method: &str, seed: u64) -> String {
    format!("{fixture}-{method}-seed{seed}")
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";")
}

/// Writes result.json, trace.json, trace.csv and config.toml into `dir`.
pub fn write_run(dir: &Path, file: &ResultFile, config_toml: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let json = serde_json::to_string_pretty(file).expect("result serializes");
    write_file(&dir.join("result.json"), &json)?;
    write_file(&dir.join("config.toml"), config_toml)?;

    let trace = file.result.trace.clone().unwrap_or_default();
    write_file(&dir.join("trace.json"), &serde_json::to_string_pretty(&trace).expect("trace serializes"))?;

    let path = dir.join("trace.csv");
    let mut w = csv::Writer::from_writer(File::create(&path).map_err(CliError::io(&path))?);
    w.write_record(["config_hash", "iteration", "cost", "best_cost", "rho", "seconds", "components", "parameters"])?;
    for r in &trace.records {
        w.write_record([
            file.config_hash.clone(),
            r.iteration.to_string(),
            format!("{:e}", r.cost),
            format!("{:e}", r.best_cost),
            format!("{:e}", r.rho),
            format!("{:.6}", r.seconds),
            join(&r.components),
            join(&r.parameters),
        ])?;
    }
    w.flush().map_err(CliError::io(&path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = std::env::temp_dir().join(format!("sqdopt-lock-{}", std::process::id()));
        let first = OutputLock::acquire(&dir).unwrap();
        assert!(matches!(OutputLock::acquire(&dir), Err(CliError::Locked { .. })));
        drop(first);
        let again = OutputLock::acquire(&dir).unwrap();
        drop(again);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn names() {
        assert_eq!(fixture_label(Path::new("a/h6_0.9.fcidump")), "h6_0.9");
        assert_eq!(run_dir_name("h6_0.9", "partial-vqe", 3), "h6_0.9-partial-vqe-seed3");
    }
}
