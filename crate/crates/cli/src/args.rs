use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use qcut_core::cutplan::BoundaryEncoding;
use qcut_core::Encoding;

use crate::config::{DatasetKind, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "qcut", version, about = "Cut wide quantum layers of hybrid networks into small-device subcircuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design cutting points and write the plan as JSON (and DOT).
    Plan(PlanArgs),
    /// Train original and/or cut models and write learning curves.
    Train(TrainArgs),
    /// Print the forward/backward FLOPs table.
    Profile(ProfileArgs),
    /// Run the numerical self-checks.
    Verify(VerifyArgs),
}

/// Experiment settings shared by every subcommand; flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<DatasetKind>,
    /// Qubits of the original circuit.
    #[arg(long)]
    pub n: Option<usize>,
    /// Device qubits (0 = uncut).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub encoder: Option<Encoding>,
    /// Re-encoding of cut boundary values: angle or arccos.
    #[arg(long)]
    pub boundary: Option<BoundaryEncoding>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Stratified subsample size taken before the train/validation split.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub digits_csv: Option<PathBuf>,
    #[arg(long)]
    pub mnist_images: Option<PathBuf>,
    #[arg(long)]
    pub mnist_labels: Option<PathBuf>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = &self.$flag {
                    c.$field = v.clone();
                })*
            };
        }
        set!(
            dataset => dataset,
            n => n,
            m => m,
            layers => layers,
            encoder => encoder,
            boundary => boundary,
            epochs => epochs,
            seeds => seeds,
            lr => learning_rate,
            batch_size => batch_size,
            out => output,
            digits_csv => digits_csv,
        );
        if self.subsample.is_some() {
            c.subsample = self.subsample;
        }
        if self.mnist_images.is_some() {
            c.mnist_images = self.mnist_images.clone();
        }
        if self.mnist_labels.is_some() {
            c.mnist_labels = self.mnist_labels.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Plan this circuit (text format) instead of the benchmark ansatz.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Also write a Graphviz rendering of the subcircuit graph.
    #[arg(long)]
    pub dot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also train the uncut original with the same seeds for comparison.
    #[arg(long)]
    pub compare: bool,
    /// Write SVG learning curves next to the CSVs.
    #[arg(long)]
    pub plot: bool,
    /// Save a JSON checkpoint per seed.
    #[arg(long)]
    pub checkpoints: bool,
    /// Print per-epoch progress to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    /// Original circuit sizes.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
    pub qubits: Vec<usize>,
    /// Device sizes; only those smaller than the circuit are listed.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub devices: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Directory to write flops.csv into.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub oracle_cases: usize,
    #[arg(long, default_value_t = 200)]
    pub gradient_cases: usize,
}
