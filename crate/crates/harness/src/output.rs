//! Result files. Every CSV starts with a `#` header block (version,
//! experiment, scenario fingerprint, seed, timestamp); the body after it is
//! what reruns reproduce byte for byte.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub version: String,
    pub experiment: String,
    pub scenario_fingerprint: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Header {
    pub fn new(experiment: &str, scenario_fingerprint: String, seed: u64) -> Self {
        Self {
            version: VERSION.to_string(),
            experiment: experiment.to_string(),
            scenario_fingerprint,
            seed,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn lines(&self) -> String {
        format!(
            "# ris-harness {}\n# experiment: {}\n# scenario_fingerprint: {}\n# seed: {}\n# timestamp: {}\n",
            self.version, self.experiment, self.scenario_fingerprint, self.seed, self.timestamp
        )
    }
}

/// The part of a result file that is compared between reruns.
pub fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| [l, "\n"])
        .collect()
}

/// Output directory that records every file written to it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    header: Header,
    files: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, header: Header) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| HarnessError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            header,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    fn write(&mut self, rel: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))?;
        self.files.push(PathBuf::from(rel));
        Ok(path)
    }

    /// CSV with the header block prepended.
    pub fn write_csv(&mut self, rel: &str, csv: &str) -> Result<PathBuf> {
        let text = format!("{}{csv}", self.header.lines());
        self.write(rel, &text)
    }

    pub fn write_text(&mut self, rel: &str, text: &str) -> Result<PathBuf> {
        self.write(rel, text)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).expect("plain data serializes") + "\n";
        self.write(rel, &text)
    }

    /// Metadata sidecar listing the header, all files written so far and an
    /// experiment summary.
    pub fn finish<T: Serialize>(mut self, summary: &T) -> Result<Vec<PathBuf>> {
        #[derive(Serialize)]
        struct Sidecar<'a, T> {
            header: &'a Header,
            files: Vec<String>,
            summary: &'a T,
        }
        let files = self.files.iter().map(|p| p.display().to_string()).collect();
        let sidecar = Sidecar {
            header: &self.header.clone(),
            files,
            summary,
        };
        self.write_json("metadata.json", &sidecar)?;
        Ok(self.files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_drops_header_lines() {
        let h = Header::new("sweep", "abc".into(), 7);
        let text = format!("{}a,b\n1,2\n", h.lines());
        assert!(text.contains("# seed: 7\n"));
        assert_eq!(body(&text), "a,b\n1,2\n");
    }
}
