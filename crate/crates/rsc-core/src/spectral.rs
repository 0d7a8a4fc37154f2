//! Spectral density estimation: DFT, periodogram, kernel smoothing and the
//! bias-corrected log-periodogram, evaluated on a truncated Fourier grid.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bias correction added to the log-periodogram.
pub const EULER_GAMMA: f64 = 0.57721;

/// Floor applied to periodogram values before taking logs, so that degenerate
/// (constant) epochs do not produce -inf.
pub const LOG_FLOOR: f64 = 1e-12;

/// One stationary raw segment of a recording.
#[derive(Debug, Clone)]
pub struct Epoch {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Epoch {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "epoch must have at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !samples.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("epoch contains non-finite samples".into()));
        }
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Returns a copy with the sample mean removed.
    pub fn demeaned(&self) -> Epoch {
        let mean = self.samples.iter().sum::<f64>() / self.samples.len() as f64;
        Epoch {
            samples: self.samples.iter().map(|x| x - mean).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// The truncated Fourier frequency grid omega_j = j / l, j = 0..T-1.
///
/// All curves that are compared or clustered must live on one identical grid.
/// Spacing between adjacent grid points is one frequency-index unit; areas and
/// distances are computed in these units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n_freqs: usize,
    pub series_len: usize,
    pub sample_rate_hz: Option<f64>,
}

impl FrequencyGrid {
    pub fn new(n_freqs: usize, series_len: usize, sample_rate_hz: Option<f64>) -> Result<Self> {
        if n_freqs == 0 || n_freqs > series_len {
            return Err(Error::Range(format!(
                "need 1 <= T <= l, got T={n_freqs}, l={series_len}"
            )));
        }
        Ok(Self { n_freqs, series_len, sample_rate_hz })
    }

    /// Frequency of bin j in cycles/sample.
    pub fn freq(&self, j: usize) -> f64 {
        j as f64 / self.series_len as f64
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n_freqs).map(|j| self.freq(j)).collect()
    }

    /// Frequency of bin j in Hz, when a sample rate is known.
    pub fn hz(&self, j: usize) -> Option<f64> {
        self.sample_rate_hz.map(|sr| self.freq(j) * sr)
    }
}

/// Units of a curve's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScaleTag {
    RawPeriodogram,
    SmoothedPeriodogram,
    LogPeriodogram,
}

/// A function sampled on a shared frequency grid.
#[derive(Debug, Clone)]
pub struct Curve {
    grid: Arc<FrequencyGrid>,
    values: Vec<f64>,
    scale: ScaleTag,
}

impl Curve {
    pub fn new(grid: Arc<FrequencyGrid>, values: Vec<f64>, scale: ScaleTag) -> Result<Self> {
        if values.len() != grid.n_freqs {
            return Err(Error::Shape(format!(
                "curve has {} values but grid has {} frequencies",
                values.len(),
                grid.n_freqs
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("curve contains non-finite values".into()));
        }
        if matches!(scale, ScaleTag::RawPeriodogram | ScaleTag::SmoothedPeriodogram)
            && values.iter().any(|&v| v < 0.0)
        {
            return Err(Error::InvalidInput("periodogram values must be nonnegative".into()));
        }
        Ok(Self { grid, values, scale })
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> ScaleTag {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Curve) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }
}

/// Checks that every curve in the slice shares one grid.
pub fn check_shared_grid(curves: &[&Curve]) -> Result<()> {
    if let Some(first) = curves.first() {
        for c in &curves[1..] {
            if !first.same_grid(c) {
                return Err(Error::Shape("curves do not share a common grid".into()));
            }
        }
    }
    Ok(())
}

/// m channels x n epochs of log-periodogram curves on one shared grid.
#[derive(Debug, Clone)]
pub struct ChannelEnsemble {
    grid: Arc<FrequencyGrid>,
    channel_labels: Vec<String>,
    n_epochs: usize,
    curves: Vec<Curve>,
}

impl ChannelEnsemble {
    pub fn new(
        grid: Arc<FrequencyGrid>,
        channel_labels: Vec<String>,
        n_epochs: usize,
        curves: Vec<Curve>,
    ) -> Result<Self> {
        let m = channel_labels.len();
        if m == 0 || n_epochs == 0 {
            return Err(Error::InvalidInput("ensemble must have m >= 1, n >= 1".into()));
        }
        if curves.len() != m * n_epochs {
            return Err(Error::Shape(format!(
                "expected {} curves ({} channels x {} epochs), got {}",
                m * n_epochs,
                m,
                n_epochs,
                curves.len()
            )));
        }
        for c in &curves {
            if c.scale() != ScaleTag::LogPeriodogram {
                return Err(Error::InvalidInput(
                    "ensemble curves must be log-periodograms".into(),
                ));
            }
            if !(Arc::ptr_eq(c.grid(), &grid) || *c.grid().as_ref() == *grid) {
                return Err(Error::Shape("ensemble curves must share the ensemble grid".into()));
            }
        }
        Ok(Self { grid, channel_labels, n_epochs, curves })
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn n_channels(&self) -> usize {
        self.channel_labels.len()
    }

    pub fn n_epochs(&self) -> usize {
        self.n_epochs
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn curve(&self, channel: usize, epoch: usize) -> &Curve {
        &self.curves[channel * self.n_epochs + epoch]
    }

    pub fn channel_curves(&self, channel: usize) -> &[Curve] {
        &self.curves[channel * self.n_epochs..(channel + 1) * self.n_epochs]
    }

    /// Replaces the curve at (channel, epoch); the new curve must match the
    /// ensemble grid and scale.
    pub fn set_curve(&mut self, channel: usize, epoch: usize, curve: Curve) -> Result<()> {
        if curve.scale() != ScaleTag::LogPeriodogram {
            return Err(Error::InvalidInput("ensemble curves must be log-periodograms".into()));
        }
        if !(Arc::ptr_eq(curve.grid(), &self.grid) || *curve.grid().as_ref() == *self.grid) {
            return Err(Error::Shape("curve grid does not match ensemble grid".into()));
        }
        self.curves[channel * self.n_epochs + epoch] = curve;
        Ok(())
    }
}

/// Discrete Fourier transform d(omega_j) = l^{-1/2} sum_{t=1..l} x_t e^{-2 pi i omega_j t},
/// for j = 0..l-1.
pub fn dft(epoch: &Epoch) -> Result<Vec<Complex<f64>>> {
    let l = epoch.len();
    let mut buf: Vec<Complex<f64>> =
        epoch.samples().iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(l).process(&mut buf);
    // The FFT computes sum_{s=0..l-1} x_{s+1} e^{-2 pi i j s / l}; the sum
    // over t = 1..l carries an extra phase of e^{-2 pi i j / l} per bin.
    let scale = 1.0 / (l as f64).sqrt();
    let out = buf
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            let phase = -2.0 * std::f64::consts::PI * j as f64 / l as f64;
            v * Complex::from_polar(scale, phase)
        })
        .collect();
    Ok(out)
}

/// Raw periodogram I(omega_j) = |d(omega_j)|^2 on the first `t_freqs` bins.
pub fn periodogram(epoch: &Epoch, t_freqs: usize) -> Result<Curve> {
    let grid = Arc::new(FrequencyGrid::new(
        t_freqs,
        epoch.len(),
        Some(epoch.sample_rate_hz()),
    )?);
    periodogram_on_grid(epoch, grid)
}

/// As [`periodogram`] but reusing a pre-built grid so that many curves share
/// one allocation.
pub fn periodogram_on_grid(epoch: &Epoch, grid: Arc<FrequencyGrid>) -> Result<Curve> {
    if grid.series_len != epoch.len() {
        return Err(Error::Shape(format!(
            "grid expects series length {}, epoch has {}",
            grid.series_len,
            epoch.len()
        )));
    }
    let coeffs = dft(epoch)?;
    let values = coeffs[..grid.n_freqs].iter().map(|c| c.norm_sqr()).collect();
    Curve::new(grid, values, ScaleTag::RawPeriodogram)
}

/// Smoothing configuration for the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingConfig {
    /// Skip smoothing entirely when false.
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Fixed kernel bandwidth in grid-index units; `None` selects by GCV.
    #[serde(default)]
    pub bandwidth: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self { enabled: true, bandwidth: None }
    }
}

/// Number of candidate bandwidths on the GCV grid.
const GCV_GRID_SIZE: usize = 20;

/// Gaussian Nadaraya-Watson smoothing of a raw periodogram across frequency.
///
/// The bandwidth is in grid-index units. When absent it is chosen by
/// generalized cross-validation over a geometric grid of `GCV_GRID_SIZE`
/// bandwidths spanning [1, (T-1)/4].
pub fn smooth_periodogram(curve: &Curve, bandwidth: Option<f64>) -> Result<Curve> {
    if curve.scale() != ScaleTag::RawPeriodogram {
        return Err(Error::InvalidInput(
            "smoothing expects a raw periodogram curve".into(),
        ));
    }
    if let Some(h) = bandwidth {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Range(format!("bandwidth must be positive, got {h}")));
        }
    }
    let t = curve.len();
    if t == 1 {
        return Curve::new(curve.grid().clone(), curve.values().to_vec(), ScaleTag::SmoothedPeriodogram);
    }
    let h = match bandwidth {
        Some(h) => h,
        None => select_bandwidth_gcv(curve.values()),
    };
    let smoothed = nw_smooth(curve.values(), h).0;
    Curve::new(curve.grid().clone(), smoothed, ScaleTag::SmoothedPeriodogram)
}

/// Nadaraya-Watson estimate with a Gaussian kernel on the index axis.
/// Returns the fitted values and the trace of the smoother matrix.
fn nw_smooth(values: &[f64], h: f64) -> (Vec<f64>, f64) {
    // Gaussian kernel average on the index axis; the kernel weight depends
    // only on |i - j|. A plain kernel average (rather than a local-linear
    // fit) keeps nonnegative inputs nonnegative, which the log transform
    // downstream depends on. Returns the fitted values and the trace of
    // the smoother matrix.
    let t = values.len();
    let kernel: Vec<f64> = (0..t)
        .map(|d| (-0.5 * (d as f64 / h).powi(2)).exp())
        .collect();
    let mut fitted = Vec::with_capacity(t);
    let mut trace = 0.0;
    for i in 0..t {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..t {
            let w = kernel[i.abs_diff(j)];
            num += w * values[j];
            den += w;
        }
        fitted.push(num / den);
        trace += kernel[0] / den;
    }
    (fitted, trace)
}

pub fn select_bandwidth_gcv(values: &[f64]) -> f64 {
    let t = values.len();
    let h_min = 1.0;
    let h_max = ((t - 1) as f64 / 2.0).max(h_min);
    let mut best_h = h_min;
    let mut best_score = f64::INFINITY;
    for k in 0..GCV_GRID_SIZE {
        let frac = k as f64 / (GCV_GRID_SIZE - 1) as f64;
        let h = h_min * (h_max / h_min).powf(frac);
        let (fitted, trace) = nw_smooth(values, h);
        let dof = 1.0 - trace / t as f64;
        if dof <= 0.0 {
            continue;
        }
        let rss: f64 = values
            .iter()
            .zip(&fitted)
            .map(|(y, f)| (y - f).powi(2))
            .sum();
        let score = rss / (t as f64 * dof * dof);
        if score < best_score {
            best_score = score;
            best_h = h;
        }
    }
    best_h
}

/// Bias-corrected log-periodogram y(omega_j) = log I(omega_j) + gamma, with
/// values floored at `LOG_FLOOR` before the log.
pub fn log_bias_correct(curve: &Curve) -> Result<Curve> {
    match curve.scale() {
        ScaleTag::RawPeriodogram | ScaleTag::SmoothedPeriodogram => {}
        ScaleTag::LogPeriodogram => {
            return Err(Error::InvalidInput("curve is already on the log scale".into()))
        }
    }
    let values = curve
        .values()
        .iter()
        .map(|&v| v.max(LOG_FLOOR).ln() + EULER_GAMMA)
        .collect();
    Curve::new(curve.grid().clone(), values, ScaleTag::LogPeriodogram)
}

/// Full pipeline: demean each epoch, take the periodogram on the first
/// `t_freqs` bins, smooth, and apply the log bias correction.
pub fn build_ensemble(
    raw: &[Vec<Epoch>],
    channel_labels: Option<Vec<String>>,
    t_freqs: usize,
    smoothing: &SmoothingConfig,
) -> Result<ChannelEnsemble> {
    use rayon::prelude::*;

    let m = raw.len();
    if m == 0 {
        return Err(Error::InvalidInput("no channels".into()));
    }
    let n = raw[0].len();
    if n == 0 {
        return Err(Error::InvalidInput("no epochs".into()));
    }
    let l = raw[0][0].len();
    let rate = raw[0][0].sample_rate_hz();
    for (ch, epochs) in raw.iter().enumerate() {
        if epochs.len() != n {
            return Err(Error::Shape(format!(
                "channel {ch} has {} epochs, expected {n}",
                epochs.len()
            )));
        }
        for (ep, e) in epochs.iter().enumerate() {
            if e.len() != l {
                return Err(Error::Shape(format!(
                    "epoch ({ch},{ep}) has length {}, expected {l}",
                    e.len()
                )));
            }
        }
    }
    let labels = match channel_labels {
        Some(labels) => {
            if labels.len() != m {
                return Err(Error::Shape(format!(
                    "got {} labels for {m} channels",
                    labels.len()
                )));
            }
            labels
        }
        None => (0..m).map(|i| format!("ch{i:02}")).collect(),
    };
    let grid = Arc::new(FrequencyGrid::new(t_freqs, l, Some(rate))?);
    let pgrams: Vec<Curve> = raw
        .par_iter()
        .flat_map_iter(|epochs| epochs.iter())
        .map(|epoch| periodogram_on_grid(&epoch.demeaned(), grid.clone()))
        .collect::<Result<Vec<_>>>()?;
    // One bandwidth for the whole ensemble keeps curves comparable; the
    // median of the per-curve GCV picks is robust to the occasional
    // degenerate selection.
    let bandwidth = if smoothing.enabled && smoothing.bandwidth.is_none() && t_freqs > 1 {
        let mut picks: Vec<f64> = pgrams
            .par_iter()
            .map(|p| select_bandwidth_gcv(p.values()))
            .collect();
        picks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some(picks[picks.len() / 2])
    } else {
        smoothing.bandwidth
    };
    let curves: Vec<Curve> = pgrams
        .into_par_iter()
        .map(|pgram| {
            let est = if smoothing.enabled {
                smooth_periodogram(&pgram, bandwidth)?
            } else {
                pgram
            };
            log_bias_correct(&est)
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelEnsemble::new(grid, labels, n, curves)
}
