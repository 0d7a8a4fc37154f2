//! Partition scoring (adjusted Rand index) and the benchmark and
//! moving-window stability experiments.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{hierarchical_cluster, Measure};
use crate::error::{Error, Result};
use crate::simulate::{
    apply_shift_plan, bimodal_dataset, contaminate_eyeblink, contaminate_shift, draw_shift_plan,
    simulate_mixture, sub_seed, BimodalDesign, ContaminationSpec, MixtureDesign, RawDataset,
    ShiftPlan,
};
use crate::spectral::{build_ensemble, ChannelEnsemble, SmoothingConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn comb2(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Pair-counting adjusted Rand index between two partitions of the same
/// items. Returns 1 for identical partitions up to relabeling; the
/// degenerate denominator (both all-singletons or both one-cluster,
/// identically) also returns 1 by convention.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "partitions cover {} vs {} items",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InsufficientData("empty partitions".into()));
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let sum_cells: f64 = table
        .iter()
        .flat_map(|r| r.iter())
        .map(|&c| comb2(c))
        .sum();
    let sum_rows: f64 = row_sums.iter().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = col_sums.iter().map(|&c| comb2(c)).sum();
    let total = comb2(a.len() as u64);
    if total == 0.0 {
        // A single item: the partitions are trivially identical.
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index - expected).abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / (max_index - expected))
}

/// Which simulated dataset a benchmark run draws from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenchmarkDesign {
    Mixture(MixtureDesign),
    Bimodal(BimodalDesign),
}

impl BenchmarkDesign {
    fn generate(&self, seed: u64) -> Result<RawDataset> {
        match self {
            BenchmarkDesign::Mixture(d) => simulate_mixture(d, seed),
            BenchmarkDesign::Bimodal(d) => bimodal_dataset(d, seed),
        }
    }

    pub fn true_k(&self) -> usize {
        match self {
            BenchmarkDesign::Mixture(d) => d.n_clusters(),
            BenchmarkDesign::Bimodal(d) => d.channels_per_cluster.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub design: BenchmarkDesign,
    pub t_freqs: usize,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
    pub contaminations: Vec<ContaminationSpec>,
    pub methods: Vec<Measure>,
    /// Cluster count handed to every method; usually the design's true K.
    pub k_target: usize,
    pub replicates: usize,
    pub seed: u64,
}

/// One (contamination, method) cell of the benchmark table.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkRow {
    pub contamination: String,
    pub delta: f64,
    pub method: Measure,
    pub mean_ari: f64,
    pub sd_ari: f64,
    /// Summed clustering time across replicates, in seconds.
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub replicates: usize,
    pub rows: Vec<BenchmarkRow>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs the benchmark: per replicate, simulate, contaminate, run the
/// pipeline, cluster at `k_target` per method, and score against the truth.
/// Replicates run in parallel with per-replicate sub-seeds; aggregation
/// order is fixed, so reports are reproducible across thread counts.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if config.replicates == 0 {
        return Err(Error::InvalidInput("need at least one replicate".into()));
    }
    if config.methods.is_empty() || config.contaminations.is_empty() {
        return Err(Error::InvalidInput("need at least one method and contamination".into()));
    }
    // replicate -> contamination -> method -> (ari, seconds)
    let per_rep: Vec<Vec<Vec<(f64, f64)>>> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = sub_seed(config.seed, rep as u64);
            let base = config.design.generate(rep_seed)?;
            config
                .contaminations
                .iter()
                .enumerate()
                .map(|(ci, contamination)| {
                    let ensemble = contaminated_ensemble(
                        &base,
                        contamination,
                        config.t_freqs,
                        &config.smoothing,
                        sub_seed(rep_seed, 0xC0 + ci as u64),
                    )?;
                    config
                        .methods
                        .iter()
                        .map(|&method| {
                            let start = Instant::now();
                            let (partition, _) =
                                hierarchical_cluster(&ensemble, method, config.k_target)?;
                            let seconds = start.elapsed().as_secs_f64();
                            let ari = adjusted_rand_index(&partition.assignment, &base.truth)?;
                            Ok((ari, seconds))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (ci, contamination) in config.contaminations.iter().enumerate() {
        for (mi, &method) in config.methods.iter().enumerate() {
            let aris: Vec<f64> = per_rep.iter().map(|r| r[ci][mi].0).collect();
            let seconds: f64 = per_rep.iter().map(|r| r[ci][mi].1).sum();
            let (mean_ari, sd_ari) = mean_sd(&aris);
            rows.push(BenchmarkRow {
                contamination: contamination.label().to_string(),
                delta: contamination.delta(),
                method,
                mean_ari,
                sd_ari,
                seconds,
            });
        }
    }
    Ok(BenchmarkReport { seed: config.seed, replicates: config.replicates, rows })
}

/// Applies a contamination spec to a raw dataset and runs the spectral
/// pipeline. Shifts act on log-periodogram curves, eyeblinks on raw epochs.
pub fn contaminated_ensemble(
    base: &RawDataset,
    contamination: &ContaminationSpec,
    t_freqs: usize,
    smoothing: &SmoothingConfig,
    seed: u64,
) -> Result<ChannelEnsemble> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match contamination {
        ContaminationSpec::None => {
            build_ensemble(&base.epochs, Some(base.channel_labels.clone()), t_freqs, smoothing)
        }
        ContaminationSpec::Shift { delta, magnitude } => {
            let ensemble = build_ensemble(
                &base.epochs,
                Some(base.channel_labels.clone()),
                t_freqs,
                smoothing,
            )?;
            Ok(contaminate_shift(&ensemble, *delta, *magnitude, &mut rng)?.0)
        }
        ContaminationSpec::Eyeblink { delta, params } => {
            let (contaminated, _) = contaminate_eyeblink(base, *delta, params, &mut rng)?;
            build_ensemble(
                &contaminated.epochs,
                Some(base.channel_labels.clone()),
                t_freqs,
                smoothing,
            )
        }
    }
}

/// Pairwise agreement of clusterings across sliding windows of a long
/// recording.
#[derive(Debug, Clone, Serialize)]
pub struct WindowStabilityReport {
    pub method: Measure,
    /// W x W symmetric ARI matrix with unit diagonal.
    pub ari: Vec<Vec<f64>>,
    /// Median of the W(W-1)/2 off-diagonal entries.
    pub median: f64,
    /// Interquartile range of the off-diagonal entries.
    pub iqr: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Clusters every sliding window (length and step in epochs) at a fixed K
/// and fills the pairwise window-agreement ARI matrix per method.
///
/// Contamination is applied once at the recording level, so overlapping
/// windows see the same artifacts: eyeblinks are injected into the raw
/// recording up front, and the type 1 shift layout (hit epochs and signs)
/// is drawn over the whole recording, then applied to each window's
/// log-periodogram curves.
pub fn moving_window_experiment(
    dataset: &RawDataset,
    window_epochs: usize,
    step_epochs: usize,
    k: usize,
    methods: &[Measure],
    t_freqs: usize,
    smoothing: &SmoothingConfig,
    contamination: &ContaminationSpec,
    seed: u64,
) -> Result<Vec<WindowStabilityReport>> {
    if window_epochs == 0 || step_epochs == 0 {
        return Err(Error::Range("window and step must be positive".into()));
    }
    let total = dataset.n_epochs();
    let starts: Vec<usize> = (0..)
        .map(|i| i * step_epochs)
        .take_while(|s| s + window_epochs < total)
        .collect();
    if starts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "recording of {total} epochs yields {} windows of {window_epochs}",
            starts.len()
        )));
    }
    let w = starts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Recording-level contamination, drawn before any window is cut.
    let (recording, shift): (std::borrow::Cow<RawDataset>, Option<(ShiftPlan, f64)>) =
        match contamination {
            ContaminationSpec::None => (std::borrow::Cow::Borrowed(dataset), None),
            ContaminationSpec::Shift { delta, magnitude } => {
                let plan = draw_shift_plan(dataset.epochs.len(), total, *delta, &mut rng)?;
                (std::borrow::Cow::Borrowed(dataset), Some((plan, *magnitude)))
            }
            ContaminationSpec::Eyeblink { delta, params } => {
                let (contaminated, _) = contaminate_eyeblink(dataset, *delta, params, &mut rng)?;
                (std::borrow::Cow::Owned(contaminated), None)
            }
        };
    // window -> method -> assignment
    let assignments: Vec<Vec<Vec<usize>>> = starts
        .par_iter()
        .map(|&start| {
            let slice: Vec<Vec<_>> = recording
                .epochs
                .iter()
                .map(|channel| channel[start..start + window_epochs].to_vec())
                .collect();
            let mut ensemble = build_ensemble(
                &slice,
                Some(dataset.channel_labels.clone()),
                t_freqs,
                smoothing,
            )?;
            if let Some((plan, magnitude)) = &shift {
                ensemble = apply_shift_plan(&ensemble, plan, start, *magnitude)?.0;
            }
            methods
                .iter()
                .map(|&m| Ok(hierarchical_cluster(&ensemble, m, k)?.0.assignment))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let mut ari = vec![vec![1.0; w]; w];
            let mut off = Vec::with_capacity(w * (w - 1) / 2);
            for i in 0..w {
                for j in (i + 1)..w {
                    let v = adjusted_rand_index(&assignments[i][mi], &assignments[j][mi])?;
                    ari[i][j] = v;
                    ari[j][i] = v;
                    off.push(v);
                }
            }
            off.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = quantile(&off, 0.5);
            let iqr = quantile(&off, 0.75) - quantile(&off, 0.25);
            Ok(WindowStabilityReport { method, ari, median, iqr })
        })
        .collect()
}
