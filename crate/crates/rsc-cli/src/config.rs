//! Per-subcommand JSON configuration schemas. Unknown keys are rejected so a
//! typo never silently falls back to a default.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rsc_core::cluster::Measure;
use rsc_core::eval::{BenchmarkConfig, BenchmarkDesign};
use rsc_core::simulate::{ContaminationSpec, MixtureDesign};
use rsc_core::spectral::SmoothingConfig;

fn default_rate() -> f64 {
    1000.0
}

fn default_contamination() -> ContaminationSpec {
    ContaminationSpec::None
}

fn default_measure() -> Measure {
    Measure::Cr
}

fn default_k_min() -> usize {
    2
}

fn default_k_max() -> usize {
    10
}

/// `simulate`: generate a dataset, optionally eyeblink-contaminated at the
/// raw-signal level, and write it as channel CSVs plus truth and mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub design: BenchmarkDesign,
    #[serde(default = "default_contamination")]
    pub contamination: ContaminationSpec,
}

impl Default for SimulateConfig {
    /// The five-band benchmark design, uncontaminated.
    fn default() -> Self {
        SimulateConfig {
            design: BenchmarkDesign::Mixture(MixtureDesign::default()),
            contamination: ContaminationSpec::None,
        }
    }
}

/// `estimate`: run the spectral pipeline over a dataset directory and write
/// the log-periodogram ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// Directory of per-channel epoch CSVs (truth.csv optional).
    pub input: PathBuf,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    /// Number of retained frequency bins.
    pub t_freqs: usize,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
}

/// Where a clustering command reads its curves from: a dataset directory
/// (the pipeline runs first) or an ensemble JSON written by `estimate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSource {
    pub input: PathBuf,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    /// Required when `input` is a dataset directory; ignored for JSON input.
    #[serde(default)]
    pub t_freqs: Option<usize>,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
}

/// `cluster`: partition the channels at a fixed cluster count.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(flatten)]
    pub source: CurveSource,
    pub measure: Measure,
    pub k: usize,
}

/// `elbow`: run the full agglomeration and locate the knee of the
/// minimum-dissimilarity trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElbowConfig {
    #[serde(flatten)]
    pub source: CurveSource,
    #[serde(default = "default_measure")]
    pub measure: Measure,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

/// `benchmark`: the replicated simulate-contaminate-cluster-score table.
/// This is the core benchmark configuration verbatim; the `--seed` flag
/// overrides the `seed` field when given.
pub type BenchmarkCliConfig = BenchmarkConfig;

/// `windows`: moving-window stability over a long recording, either read
/// from disk or simulated from a design.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowsConfig {
    /// Dataset directory with the recording; mutually exclusive with `design`.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Simulation design for the recording; used when `input` is absent.
    #[serde(default)]
    pub design: Option<BenchmarkDesign>,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    pub window_epochs: usize,
    pub step_epochs: usize,
    pub k: usize,
    pub methods: Vec<Measure>,
    pub t_freqs: usize,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
    #[serde(default = "default_contamination")]
    pub contamination: ContaminationSpec,
}
