use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use qcut_core::cutplan::BoundaryEncoding;
use qcut_core::Encoding;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    #[default]
    Digits,
    Mnist,
}

impl FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "digits" => Ok(DatasetKind::Digits),
            "mnist" => Ok(DatasetKind::Mnist),
            other => Err(format!("unknown dataset `{other}` (expected digits or mnist)")),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Digits => "digits",
            DatasetKind::Mnist => "mnist",
        })
    }
}

/// One experiment: a circuit size, an optional device size and a training protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    /// Qubits of the original circuit.
    pub n: usize,
    /// Device qubits; 0 runs the original circuit uncut.
    pub m: usize,
    pub layers: usize,
    pub encoder: Encoding,
    pub boundary: BoundaryEncoding,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seeds: Vec<u64>,
    pub split_ratio: f64,
    /// Stratified subsample of the loaded dataset before splitting.
    pub subsample: Option<usize>,
    pub output: PathBuf,
    pub digits_csv: PathBuf,
    pub mnist_images: Option<PathBuf>,
    pub mnist_labels: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetKind::Digits,
            n: 8,
            m: 0,
            layers: 2,
            encoder: Encoding::Angle,
            boundary: BoundaryEncoding::Angle,
            epochs: 50,
            batch_size: 5,
            learning_rate: 0.01,
            seeds: vec![0, 1, 2, 3, 4],
            split_ratio: 0.8,
            subsample: None,
            output: PathBuf::from("results"),
            digits_csv: PathBuf::from("data/digits.csv"),
            mnist_images: None,
            mnist_labels: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Device size, `None` when uncut.
    pub fn device_qubits(&self) -> Option<usize> {
        (self.m != 0).then_some(self.m)
    }

    /// `<n>-<m>`, the tag used in output file names.
    pub fn tag(&self) -> String {
        format!("{}-{}", self.n, self.m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            bail!("n must be at least 2, got {}", self.n);
        }
        if self.m != 0 && !(2..=self.n).contains(&self.m) {
            bail!("m must be 0 (uncut) or lie in 2..={}, got {}", self.n, self.m);
        }
        if self.layers == 0 {
            bail!("layers must be at least 1");
        }
        if self.epochs == 0 {
            bail!("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            bail!("batch size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            bail!("learning rate must be positive, got {}", self.learning_rate);
        }
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if let Some(s) = self.seeds.iter().find(|&&s| s > i64::MAX as u64) {
            bail!("seed {s} does not fit a TOML integer (max {})", i64::MAX);
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            bail!("split ratio must lie strictly between 0 and 1");
        }
        if self.encoder == Encoding::Amplitude && self.m != 0 && self.m < self.n {
            bail!("amplitude-encoded circuits cannot be cut; use --encoder angle or --m 0");
        }
        Ok(())
    }
}
