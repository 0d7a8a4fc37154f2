//! On-disk interchange formats: raw-epoch CSVs (one file per channel, rows =
//! epochs, columns = samples), the ensemble JSON, and the CSV reports.

use std::fs;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterPartition, MergeTrace};
use crate::error::{Error, Result};
use crate::eval::{BenchmarkReport, WindowStabilityReport};
use crate::simulate::RawDataset;
use crate::spectral::{ChannelEnsemble, Curve, Epoch, FrequencyGrid, ScaleTag};

/// Serialized form of a [`ChannelEnsemble`].
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub grid: FrequencyGrid,
    pub labels: Vec<String>,
    pub m: usize,
    pub n: usize,
    /// Channel-major, epoch-minor: values[ch * n + ep] is one curve.
    pub values: Vec<Vec<f64>>,
}

pub fn write_ensemble_json(path: &Path, ensemble: &ChannelEnsemble) -> Result<()> {
    let file = EnsembleFile {
        grid: ensemble.grid().as_ref().clone(),
        labels: ensemble.channel_labels().to_vec(),
        m: ensemble.n_channels(),
        n: ensemble.n_epochs(),
        values: ensemble.curves().iter().map(|c| c.values().to_vec()).collect(),
    };
    let out = File::create(path)?;
    serde_json::to_writer(BufWriter::new(out), &file)?;
    Ok(())
}

pub fn read_ensemble_json(path: &Path) -> Result<ChannelEnsemble> {
    let text = fs::read_to_string(path)?;
    let file: EnsembleFile = serde_json::from_str(&text)?;
    let grid = Arc::new(file.grid);
    let curves = file
        .values
        .into_iter()
        .map(|v| Curve::new(grid.clone(), v, ScaleTag::LogPeriodogram))
        .collect::<Result<Vec<_>>>()?;
    ChannelEnsemble::new(grid, file.labels, file.n, curves)
}

/// Writes one channel's epochs as a CSV without header: rows = epochs,
/// columns = samples.
pub fn write_channel_csv(path: &Path, epochs: &[Epoch]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for epoch in epochs {
        let row: Vec<String> = epoch.samples().iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_channel_csv(path: &Path, sample_rate_hz: f64) -> Result<Vec<Epoch>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut epochs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let samples = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("bad sample value {field:?} in {path:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        epochs.push(Epoch::new(samples, sample_rate_hz)?);
    }
    if epochs.is_empty() {
        return Err(Error::InvalidInput(format!("no epochs in {path:?}")));
    }
    Ok(epochs)
}

/// Writes a simulated dataset: one CSV per channel plus truth labels and,
/// when present, the contamination mask.
pub fn write_dataset(dir: &Path, dataset: &RawDataset, mask: Option<&[bool]>) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (label, epochs) in dataset.channel_labels.iter().zip(&dataset.epochs) {
        write_channel_csv(&dir.join(format!("{label}.csv")), epochs)?;
    }
    let mut truth = BufWriter::new(File::create(dir.join("truth.csv"))?);
    writeln!(truth, "channel_label,cluster_id")?;
    for (label, cluster) in dataset.channel_labels.iter().zip(&dataset.truth) {
        writeln!(truth, "{label},{cluster}")?;
    }
    if let Some(mask) = mask {
        let n = dataset.n_epochs();
        let mut out = BufWriter::new(File::create(dir.join("mask.csv"))?);
        writeln!(out, "channel_label,epoch,contaminated")?;
        for (ch, label) in dataset.channel_labels.iter().enumerate() {
            for ep in 0..n {
                writeln!(out, "{label},{ep},{}", u8::from(mask[ch * n + ep]))?;
            }
        }
    }
    Ok(())
}

/// Reads a dataset directory written by [`write_dataset`]; channel order
/// comes from truth.csv.
pub fn read_dataset(dir: &Path, sample_rate_hz: f64) -> Result<RawDataset> {
    let truth_path = dir.join("truth.csv");
    let text = fs::read_to_string(&truth_path)?;
    let mut labels = Vec::new();
    let mut truth = Vec::new();
    for line in text.lines().skip(1) {
        let (label, cluster) = line
            .split_once(',')
            .ok_or_else(|| Error::InvalidInput(format!("bad truth line {line:?}")))?;
        labels.push(label.to_string());
        truth.push(cluster.trim().parse::<usize>().map_err(|_| {
            Error::InvalidInput(format!("bad cluster id {cluster:?} in truth.csv"))
        })?);
    }
    let epochs = labels
        .iter()
        .map(|label| read_channel_csv(&dir.join(format!("{label}.csv")), sample_rate_hz))
        .collect::<Result<Vec<_>>>()?;
    Ok(RawDataset { epochs, truth, channel_labels: labels })
}

/// Reads a directory of bare channel CSVs (no truth file); channels are
/// ordered by file name.
pub fn read_raw_channels(dir: &Path, sample_rate_hz: f64) -> Result<RawDataset> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "csv")
                && p.file_stem().is_some_and(|s| s != "truth" && s != "mask")
        })
        .collect();
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!("no channel CSVs in {dir:?}")));
    }
    paths.sort();
    let labels: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    let epochs = paths
        .iter()
        .map(|p| read_channel_csv(p, sample_rate_hz))
        .collect::<Result<Vec<_>>>()?;
    let truth = vec![0; labels.len()];
    Ok(RawDataset { epochs, truth, channel_labels: labels })
}

pub fn write_partition_csv(
    path: &Path,
    labels: &[String],
    partition: &ClusterPartition,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "channel_label,cluster_id")?;
    for (label, cluster) in labels.iter().zip(&partition.assignment) {
        writeln!(out, "{label},{cluster}")?;
    }
    Ok(())
}

pub fn write_trace_csv(path: &Path, trace: &MergeTrace) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "n_clusters,min_dissimilarity,merged_a,merged_b")?;
    for step in &trace.steps {
        writeln!(
            out,
            "{},{},{},{}",
            step.n_before, step.dissimilarity, step.merged.0, step.merged.1
        )?;
    }
    Ok(())
}

/// Long-format curve dump: one row per (series, frequency index).
pub fn write_curves_csv(path: &Path, names: &[String], curves: &[Vec<f64>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "series,freq_index,value")?;
    for (name, values) in names.iter().zip(curves) {
        for (j, v) in values.iter().enumerate() {
            writeln!(out, "{name},{j},{v}")?;
        }
    }
    Ok(())
}

/// Benchmark table mirroring the (contamination, delta, method) layout; the
/// master seed rides in a header comment.
pub fn write_benchmark_csv(path: &Path, report: &BenchmarkReport) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# seed = {}, replicates = {}", report.seed, report.replicates)?;
    writeln!(out, "contamination,delta,method,mean_ari,sd_ari,seconds")?;
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.contamination,
            row.delta,
            row.method.as_str(),
            row.mean_ari,
            row.sd_ari,
            row.seconds
        )?;
    }
    Ok(())
}

/// W x W ARI matrix plus an off-diagonal quantile summary per method.
pub fn write_window_reports(dir: &Path, seed: u64, reports: &[WindowStabilityReport]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for report in reports {
        let name = report.method.as_str().to_lowercase();
        let mut out = BufWriter::new(File::create(dir.join(format!("ari_matrix_{name}.csv")))?);
        writeln!(out, "# seed = {seed}")?;
        for row in &report.ari {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
    }
    let mut summary = BufWriter::new(File::create(dir.join("summary.csv"))?);
    writeln!(summary, "# seed = {seed}")?;
    writeln!(summary, "method,median,iqr")?;
    for report in reports {
        writeln!(summary, "{},{},{}", report.method.as_str(), report.median, report.iqr)?;
    }
    Ok(())
}
