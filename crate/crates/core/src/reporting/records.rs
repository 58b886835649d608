//! JSONL run-record files: one [`RunRecord`] object per line.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::RunRecord;

pub fn write_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a JSONL file; blank lines are skipped and parse errors carry the
/// 1-based line number.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Reads every `*.jsonl` file in `dir` in file-name order.
pub fn read_records_dir(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    files.sort();
    let mut records = Vec::new();
    for f in files {
        records.extend(read_records(&f)?);
    }
    Ok(records)
}

/// Writes `task,optimizer,master_key,status,wall_time_secs` rows. Timings
/// live apart from the record files so those stay byte-reproducible.
pub fn write_timings(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut out = String::from("task,optimizer,master_key,status,wall_time_secs\n");
    for r in records {
        let status = if r.is_ok() { "ok" } else { "failed" };
        out.push_str(&format!(
            "{},{},{},{status},{}\n",
            r.task(),
            r.algorithm(),
            r.config.master_key.0,
            r.wall_time_secs
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
