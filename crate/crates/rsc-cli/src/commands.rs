//! Implementations of the six subcommands over the core library.

use std::fs;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rsc_core::cluster::{agglomerate, elbow_trace, hierarchical_cluster};
use rsc_core::eval::{adjusted_rand_index, moving_window_experiment, run_benchmark};
use rsc_core::io::{
    read_dataset, read_ensemble_json, read_raw_channels, write_benchmark_csv, write_curves_csv,
    write_dataset, write_ensemble_json, write_partition_csv, write_trace_csv,
    write_window_reports,
};
use rsc_core::simulate::{
    bimodal_dataset, contaminate_eyeblink, simulate_mixture, sub_seed, ContaminationSpec,
    RawDataset,
};
use rsc_core::spectral::build_ensemble;
use rsc_core::{functional_median, ChannelEnsemble, Curve, Error, Result};

use crate::config::{
    BenchmarkCliConfig, ClusterConfig, CurveSource, ElbowConfig, EstimateConfig, SimulateConfig,
    WindowsConfig,
};
use crate::svg::write_line_chart;

fn generate(design: &rsc_core::eval::BenchmarkDesign, seed: u64) -> Result<RawDataset> {
    match design {
        rsc_core::eval::BenchmarkDesign::Mixture(d) => simulate_mixture(d, seed),
        rsc_core::eval::BenchmarkDesign::Bimodal(d) => bimodal_dataset(d, seed),
    }
}

pub fn cmd_simulate(config: &SimulateConfig, seed: u64, out: &Path) -> Result<()> {
    let dataset = generate(&config.design, seed)?;
    let (dataset, mask) = match &config.contamination {
        ContaminationSpec::None => (dataset, None),
        ContaminationSpec::Eyeblink { delta, params } => {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 1));
            let (contaminated, mask) = contaminate_eyeblink(&dataset, *delta, params, &mut rng)?;
            (contaminated, Some(mask))
        }
        ContaminationSpec::Shift { .. } => {
            return Err(Error::InvalidInput(
                "type 1 shift contamination acts on log-periodogram curves, not raw signals; \
                 apply it through the benchmark or windows command"
                    .into(),
            ));
        }
    };
    fs::create_dir_all(out)?;
    write_dataset(out, &dataset, mask.as_deref())?;
    echo_config(out, config, seed)?;
    println!(
        "wrote {} channels x {} epochs to {}",
        dataset.n_channels(),
        dataset.n_epochs(),
        out.display()
    );
    Ok(())
}

/// Echoes the resolved configuration (with the effective seed) next to the
/// outputs so a run is reproducible from its own artifacts.
fn echo_config<T: Serialize>(out: &Path, config: &T, seed: u64) -> Result<()> {
    #[derive(Serialize)]
    struct Echo<'a, T> {
        seed: u64,
        config: &'a T,
    }
    let mut file = BufWriter::new(File::create(out.join("config.json"))?);
    serde_json::to_writer_pretty(&mut file, &Echo { seed, config })?;
    writeln!(file)?;
    Ok(())
}

/// Loads a dataset directory: with truth.csv the truth labels come along,
/// otherwise the channel CSVs are read bare.
fn load_dataset(dir: &Path, sample_rate_hz: f64) -> Result<(RawDataset, bool)> {
    if dir.join("truth.csv").is_file() {
        Ok((read_dataset(dir, sample_rate_hz)?, true))
    } else {
        Ok((read_raw_channels(dir, sample_rate_hz)?, false))
    }
}

/// Resolves a curve source to an ensemble, plus truth labels when the
/// source carries them.
fn load_curves(source: &CurveSource) -> Result<(ChannelEnsemble, Option<Vec<usize>>)> {
    if source.input.is_file() {
        return Ok((read_ensemble_json(&source.input)?, None));
    }
    let (dataset, has_truth) = load_dataset(&source.input, source.sample_rate_hz)?;
    let t_freqs = source.t_freqs.ok_or_else(|| {
        Error::InvalidInput("t_freqs is required when clustering from a dataset directory".into())
    })?;
    let ensemble = build_ensemble(
        &dataset.epochs,
        Some(dataset.channel_labels.clone()),
        t_freqs,
        &source.smoothing,
    )?;
    Ok((ensemble, has_truth.then_some(dataset.truth)))
}

/// The deepest curve of a pooled set, or the lone curve of a singleton.
fn pooled_median(curves: &[&Curve]) -> Result<Vec<f64>> {
    match curves.len() {
        0 => Err(Error::InsufficientData("empty curve pool".into())),
        1 => Ok(curves[0].values().to_vec()),
        _ => Ok(curves[functional_median(curves)?].values().to_vec()),
    }
}

pub fn cmd_estimate(config: &EstimateConfig, out: &Path) -> Result<()> {
    let (dataset, _) = load_dataset(&config.input, config.sample_rate_hz)?;
    let ensemble = build_ensemble(
        &dataset.epochs,
        Some(dataset.channel_labels.clone()),
        config.t_freqs,
        &config.smoothing,
    )?;
    fs::create_dir_all(out)?;
    write_ensemble_json(&out.join("ensemble.json"), &ensemble)?;
    let mut names = Vec::new();
    let mut rows = Vec::new();
    for (ch, label) in ensemble.channel_labels().iter().enumerate() {
        for (ep, curve) in ensemble.channel_curves(ch).iter().enumerate() {
            names.push(format!("{label}:{ep}"));
            rows.push(curve.values().to_vec());
        }
    }
    write_curves_csv(&out.join("curves.csv"), &names, &rows)?;
    // One median curve per channel keeps the chart legible.
    let grid = ensemble.grid().clone();
    let series: Vec<(String, Vec<(f64, f64)>)> = ensemble
        .channel_labels()
        .iter()
        .enumerate()
        .map(|(ch, label)| {
            let pool: Vec<&Curve> = ensemble.channel_curves(ch).iter().collect();
            let median = pooled_median(&pool)?;
            let pts = median
                .iter()
                .enumerate()
                .map(|(j, &v)| (grid.freq(j), v))
                .collect();
            Ok((label.clone(), pts))
        })
        .collect::<Result<Vec<_>>>()?;
    write_line_chart(
        &out.join("curves.svg"),
        "Channel median log-periodograms",
        "frequency (cycles/sample)",
        "log spectral density",
        &series,
    )?;
    println!(
        "wrote ensemble of {} channels x {} epochs to {}",
        ensemble.n_channels(),
        ensemble.n_epochs(),
        out.display()
    );
    Ok(())
}

pub fn cmd_cluster(config: &ClusterConfig, out: &Path) -> Result<()> {
    let (ensemble, truth) = load_curves(&config.source)?;
    let (partition, trace) = hierarchical_cluster(&ensemble, config.measure, config.k)?;
    fs::create_dir_all(out)?;
    write_partition_csv(&out.join("partition.csv"), ensemble.channel_labels(), &partition)?;
    write_trace_csv(&out.join("trace.csv"), &trace)?;
    // Per-cluster pooled median curves, long format.
    let mut names = Vec::new();
    let mut rows = Vec::new();
    for cid in 0..partition.k {
        let pool: Vec<&Curve> = partition
            .assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == cid)
            .flat_map(|(ch, _)| ensemble.channel_curves(ch))
            .collect();
        names.push(format!("cluster{cid}"));
        rows.push(pooled_median(&pool)?);
    }
    write_curves_csv(&out.join("medians.csv"), &names, &rows)?;
    print!(
        "clustered {} channels into {} clusters with {}",
        ensemble.n_channels(),
        partition.k,
        partition.measure.as_str()
    );
    if let Some(truth) = truth {
        println!("; ARI vs truth = {}", adjusted_rand_index(&partition.assignment, &truth)?);
    } else {
        println!();
    }
    Ok(())
}

pub fn cmd_elbow(config: &ElbowConfig, out: &Path) -> Result<()> {
    let (ensemble, _) = load_curves(&config.source)?;
    let agg = agglomerate(&ensemble, config.measure, 1)?;
    let series = agg.min_dissimilarity_series();
    let elbow = elbow_trace(&series, config.k_min, config.k_max)?;
    fs::create_dir_all(out)?;
    let mut csv = BufWriter::new(File::create(out.join("elbow.csv"))?);
    writeln!(csv, "n_clusters,min_dissimilarity")?;
    for &(n, v) in &series {
        writeln!(csv, "{n},{v}")?;
    }
    drop(csv);
    #[derive(Serialize)]
    struct ElbowSummary {
        measure: &'static str,
        suggested_k: usize,
        distinct_knee: bool,
    }
    let summary = ElbowSummary {
        measure: config.measure.as_str(),
        suggested_k: elbow.suggested_k,
        distinct_knee: elbow.distinct_knee,
    };
    let mut json = BufWriter::new(File::create(out.join("elbow.json"))?);
    serde_json::to_writer_pretty(&mut json, &summary)?;
    writeln!(json)?;
    drop(json);
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, v)| (n as f64, v)).collect();
    write_line_chart(
        &out.join("elbow.svg"),
        &format!("{} elbow trace (suggested K = {})", config.measure.as_str(), elbow.suggested_k),
        "number of clusters",
        "minimum dissimilarity",
        &[("trace".to_string(), pts)],
    )?;
    println!(
        "suggested K = {} (distinct knee: {})",
        elbow.suggested_k, elbow.distinct_knee
    );
    Ok(())
}

pub fn cmd_benchmark(config: &BenchmarkCliConfig, out: &Path) -> Result<()> {
    let report = run_benchmark(config)?;
    fs::create_dir_all(out)?;
    write_benchmark_csv(&out.join("benchmark.csv"), &report)?;
    for row in &report.rows {
        println!(
            "{} delta={} {}: mean ARI {:.4} (sd {:.4}, {:.1}s)",
            row.contamination,
            row.delta,
            row.method.as_str(),
            row.mean_ari,
            row.sd_ari,
            row.seconds
        );
    }
    Ok(())
}

pub fn cmd_windows(config: &WindowsConfig, seed: u64, out: &Path) -> Result<()> {
    let dataset = match (&config.input, &config.design) {
        (Some(dir), _) => load_dataset(dir, config.sample_rate_hz)?.0,
        (None, Some(design)) => generate(design, sub_seed(seed, 0))?,
        (None, None) => {
            return Err(Error::InvalidInput(
                "windows needs either an input dataset directory or a design".into(),
            ));
        }
    };
    let reports = moving_window_experiment(
        &dataset,
        config.window_epochs,
        config.step_epochs,
        config.k,
        &config.methods,
        config.t_freqs,
        &config.smoothing,
        &config.contamination,
        sub_seed(seed, 1),
    )?;
    write_window_reports(out, seed, &reports)?;
    for report in &reports {
        println!(
            "{}: {} windows, off-diagonal ARI median {:.4}, IQR {:.4}",
            report.method.as_str(),
            report.ari.len(),
            report.median,
            report.iqr
        );
    }
    Ok(())
}
