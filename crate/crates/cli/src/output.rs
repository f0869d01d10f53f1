use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use pgacc_core::scenario::{write_trace_csv, SimTrace};
use serde::Serialize;

use crate::commands::CliError;

/// Provenance block embedded in every summary file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub parameters: serde_json::Value,
    pub dt_s: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub timestamp: String,
    pub version: &'static str,
}

/// Wall-clock time, or `SOURCE_DATE_EPOCH` when set so reruns are byte-identical.
pub fn run_time() -> DateTime<Utc> {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now)
}

pub fn output_dir(explicit: Option<&Path>, subcommand: &str, when: &DateTime<Utc>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from("runs").join(format!("{subcommand}-{}", when.format("%Y%m%dT%H%M%SZ"))),
    }
}

pub fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_trace(dir: &Path, name: &str, trace: &SimTrace) -> Result<(), CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    write_trace_csv(trace, BufWriter::new(file))
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("summary types serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}
