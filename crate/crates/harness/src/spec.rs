//! Experiment specification: everything needed to rerun an experiment.

use std::path::{Path, PathBuf};

use ris_core::optimizer::Objective;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Pattern,
    Sweep,
    Freq,
    Oracle,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Pattern => "pattern",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Freq => "freq",
            ExperimentKind::Oracle => "oracle",
        }
    }
}

/// Where the experiment's codebook comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookSource {
    /// Column-row scan at every angle of the scenario's Rx grid.
    Scan,
    /// Quantized continuous optimum at every angle of the Rx grid.
    Model,
    /// Previously saved codebook JSON.
    File(PathBuf),
}

impl CodebookSource {
    /// `scan`, `model`, or a path to a codebook file.
    pub fn parse(s: &str) -> Self {
        match s {
            "scan" => CodebookSource::Scan,
            "model" => CodebookSource::Model,
            path => CodebookSource::File(PathBuf::from(path)),
        }
    }
}

fn default_iterations() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub experiment: ExperimentKind,
    pub scenario: PathBuf,
    pub codebook: CodebookSource,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Frequencies for the frequency experiment, Hz.
    #[serde(default)]
    pub frequencies_hz: Option<Vec<f64>>,
    /// Rows rewritten by the bottom-row extension in the pattern experiment.
    #[serde(default)]
    pub case2_rows: Option<usize>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.scenario.is_file() {
            return Err(HarnessError::Invalid(format!(
                "scenario file {} does not exist",
                self.scenario.display()
            )));
        }
        if let CodebookSource::File(p) = &self.codebook {
            if !p.is_file() {
                return Err(HarnessError::Invalid(format!("codebook file {} does not exist", p.display())));
            }
        }
        if self.iterations == 0 {
            return Err(HarnessError::Invalid("iterations must be >= 1".into()));
        }
        if let Some(f) = &self.frequencies_hz {
            if f.is_empty() || f.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(HarnessError::Invalid("frequencies must be positive and nonempty".into()));
            }
        }
        Ok(())
    }

    /// Copy with input paths made absolute, so the emitted spec reruns from
    /// any working directory.
    pub fn resolved(&self) -> Result<Self> {
        let abs = |p: &Path| std::fs::canonicalize(p).map_err(|e| HarnessError::io(p, e));
        let mut s = self.clone();
        s.scenario = abs(&self.scenario)?;
        if let CodebookSource::File(p) = &self.codebook {
            s.codebook = CodebookSource::File(abs(p)?);
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Invalid(format!("{}: malformed experiment spec: {e}", path.display())))
    }
}
