use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;
use crate::error::CliResult;

pub const MANIFEST: &str = "manifest.txt";

/// Files produced by one command, held in memory until the run succeeds.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    /// Capture whatever `write` emits into a new file.
    pub fn with<F>(&mut self, name: impl Into<String>, write: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    /// Write every file atomically, then the manifest. Returns the written paths.
    pub fn commit(&self, dir: &Path, command: &str, config: &RunConfig) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, bytes) in &self.files {
            paths.push(write_atomic(dir, name, bytes)?);
        }
        paths.push(write_atomic(dir, MANIFEST, &self.manifest(command, config, SystemTime::now()))?);
        Ok(paths)
    }

    /// Command, timestamp, content hashes, then the configuration echo. The
    /// timestamp is the only line that changes between identical runs.
    fn manifest(&self, command: &str, config: &RunConfig, now: SystemTime) -> Vec<u8> {
        let secs = now.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut out = format!("vibdimer {}\ncommand {command}\ntimestamp {secs}\n", env!("CARGO_PKG_VERSION"));
        let mut sorted: Vec<&(String, Vec<u8>)> = self.files.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (name, bytes) in sorted {
            out += &format!("sha256 {} {name}\n", hex(&Sha256::digest(bytes)));
        }
        out += "config (output_dir and workers omitted)\n";
        out += &config.physics_only().to_toml();
        out.into_bytes()
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write to a temporary sibling, flush to disk, then rename over the target.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result?;
    Ok(target)
}

/// Comma-separated table with a header and 17 significant digits.
pub fn csv_table(header: &[String], rows: &[Vec<f64>]) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out += &cells.join(",");
        out.push('\n');
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_differs_only_in_timestamp() {
        let mut set = OutputSet::default();
        set.add("a.csv", b"x\n1\n".to_vec());
        let cfg = RunConfig::default();
        let a = String::from_utf8(set.manifest("dynamics", &cfg, UNIX_EPOCH)).unwrap();
        let b = String::from_utf8(set.manifest("dynamics", &RunConfig { workers: 7, ..cfg }, SystemTime::now())).unwrap();
        let diff: Vec<_> = a.lines().zip(b.lines()).filter(|(x, y)| x != y).collect();
        assert_eq!(diff.len(), 1);
        assert!(diff[0].0.starts_with("timestamp "));
        assert!(a.contains("sha256 "));
    }

    #[test]
    fn csv_rows_use_full_precision() {
        let bytes = csv_table(&["t".into(), "v".into()], &[vec![0.1, 1.0 / 3.0]]);
        let text = String::from_utf8(bytes).unwrap();
        let v: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }
}
