use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pucci_profile::Error;
use serde::Serialize;

pub const THREADS_VAR: &str = "PUCCI_PROFILE_THREADS";

/// A failed run: message plus exit code (1 numeric, 2 invalid input).
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_validation() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::numeric(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::numeric(format!("json: {e}"))
    }
}

/// Applies the thread cap from the environment, if any.
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    // A second initialization (only possible in tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// `dir/stem.ext` for an output path `dir/stem[.anything]`.
pub fn sibling(out: &Path, ext: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{ext}"))
}

pub fn ensure_parent(path: &Path) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Inputs, versions, tolerances and timing of one invocation; written next to
/// every output so that the job can be re-run.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub argv: Vec<String>,
    pub command: &'static str,
    pub inputs: serde_json::Value,
    pub tolerances: serde_json::Value,
    pub threads: usize,
    pub outputs: Vec<PathBuf>,
    pub status: String,
    pub wall_time_seconds: f64,
}

pub struct Recorder {
    start: Instant,
    manifest: Manifest,
}

impl Recorder {
    pub fn new(command: &'static str, inputs: serde_json::Value, tolerances: serde_json::Value) -> Self {
        Self {
            start: Instant::now(),
            manifest: Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                argv: std::env::args().collect(),
                command,
                inputs,
                tolerances,
                threads: rayon::current_num_threads(),
                outputs: Vec::new(),
                status: "ok".into(),
                wall_time_seconds: 0.0,
            },
        }
    }

    pub fn output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.to_path_buf());
    }

    pub fn status(&mut self, status: impl Into<String>) {
        self.manifest.status = status.into();
    }

    pub fn finish(mut self) -> Manifest {
        self.manifest.wall_time_seconds = self.start.elapsed().as_secs_f64();
        self.manifest
    }

    /// Writes the manifest to `path`.
    pub fn write(mut self, path: &Path) -> Result<(), Failure> {
        self.output(path);
        let manifest = self.finish();
        ensure_parent(path)?;
        fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}
