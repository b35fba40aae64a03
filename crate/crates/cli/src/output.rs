use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Collects the files written by one subcommand and records them in a
/// manifest next to the outputs.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    /// Writes `<subcommand>.manifest.json` describing this run.
    pub fn finish(self, manifest: Manifest) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}.manifest.json", manifest.subcommand));
        let record = ManifestRecord {
            subcommand: manifest.subcommand,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            arguments: std::env::args().collect(),
            config_path: manifest.config_path.map(|p| p.display().to_string()),
            seed: manifest.seed,
            parameters: manifest.parameters,
            outputs: self.written.iter().map(|p| p.display().to_string()).collect(),
        };
        let mut text = serde_json::to_string_pretty(&record)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub struct Manifest {
    pub subcommand: &'static str,
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub parameters: Value,
}

#[derive(Serialize)]
struct ManifestRecord {
    subcommand: &'static str,
    tool_version: &'static str,
    timestamp_unix: u64,
    arguments: Vec<String>,
    config_path: Option<String>,
    seed: Option<u64>,
    parameters: Value,
    outputs: Vec<String>,
}

/// Joins already formatted fields into one CSV line.
pub fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_line_joins_and_terminates() {
        assert_eq!(csv_line(&["a".into(), "1.5".into()]), "a,1.5\n");
    }

    #[test]
    fn manifest_lists_written_files() {
        let dir = tempfile::TempDir::new().unwrap();
        let mut out = Outputs::new(dir.path()).unwrap();
        out.write("a.csv", "x\n").unwrap();
        let path = out
            .finish(Manifest {
                subcommand: "demo",
                config_path: None,
                seed: Some(5),
                parameters: serde_json::json!({ "k": 0.1 }),
            })
            .unwrap();
        assert!(path.ends_with("demo.manifest.json"));
        let m: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(m["seed"], 5);
        assert_eq!(m["parameters"]["k"], 0.1);
        assert_eq!(m["outputs"][0], dir.path().join("a.csv").display().to_string());
    }
}
