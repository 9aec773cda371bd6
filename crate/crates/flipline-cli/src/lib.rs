//! Batch front end for the flipline library: JSON run configurations,
//! CSV tables and SVG figures named by the config hash.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{run, Outputs};
pub use config::{parse_config, parse_with, Command, FigureId, Overrides, RunConfig};
pub use error::CliError;

/// Writes all outputs into `dir`; on any failure the files already written
/// (and temporaries) are removed.
pub fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut result = Ok(());
    for (name, text) in &outputs.files {
        let path = dir.join(name);
        let tmp = dir.join(format!(".{name}.partial"));
        let step = fs::write(&tmp, text).and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = step {
            let _ = fs::remove_file(&tmp);
            result = Err(CliError::io(&path, e));
            break;
        }
        written.push(path);
    }
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}

/// Caps the worker pool from `FLIPLINE_THREADS` (unset: rayon's default).
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Environment(format!("FLIPLINE_THREADS = {v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Environment(e.to_string()))
}
