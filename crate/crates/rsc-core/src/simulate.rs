//! Mixture AR(2) benchmark data generation and the two epoch contamination
//! models (log-periodogram shift, simulated eyeblink transient).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ChannelEnsemble, Curve, Epoch, ScaleTag};

/// Derives an independent sub-seed for a parallel task from a master seed.
pub fn sub_seed(master: u64, stream: u64) -> u64 {
    // splitmix64 over a golden-ratio stream offset.
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// A causal AR(2) process x_t = phi1 x_{t-1} + phi2 x_{t-2} + w_t.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar2Spec {
    pub phi1: f64,
    pub phi2: f64,
    #[serde(default = "default_sigma")]
    pub sigma_w: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_sigma() -> f64 {
    1.0
}

fn default_burn_in() -> usize {
    500
}

impl Ar2Spec {
    pub fn new(phi1: f64, phi2: f64) -> Self {
        Self { phi1, phi2, sigma_w: 1.0, burn_in: 500 }
    }

    /// The roots of 1 - phi1 z - phi2 z^2 lie outside the unit circle iff
    /// the coefficients sit inside the stationarity triangle.
    pub fn is_causal(&self) -> bool {
        self.phi2 + self.phi1 < 1.0 && self.phi2 - self.phi1 < 1.0 && self.phi2.abs() < 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi1.is_finite() || !self.phi2.is_finite() {
            return Err(Error::InvalidInput("AR coefficients must be finite".into()));
        }
        if !self.is_causal() {
            return Err(Error::InvalidInput(format!(
                "AR(2) coefficients ({}, {}) are not causal",
                self.phi1, self.phi2
            )));
        }
        if !(self.sigma_w > 0.0) && self.sigma_w != 0.0 {
            return Err(Error::InvalidInput(format!(
                "innovation s.d. must be nonnegative, got {}",
                self.sigma_w
            )));
        }
        Ok(())
    }
}

/// Closed-form AR(2) spectral density
/// f(omega) = sigma_w^2 / |1 - phi1 e^{-2 pi i omega} - phi2 e^{-4 pi i omega}|^2.
pub fn ar2_spectral_density(spec: &Ar2Spec, omega: f64) -> Result<f64> {
    spec.validate()?;
    let a1 = 2.0 * std::f64::consts::PI * omega;
    let a2 = 2.0 * a1;
    let re = 1.0 - spec.phi1 * a1.cos() - spec.phi2 * a2.cos();
    let im = spec.phi1 * a1.sin() + spec.phi2 * a2.sin();
    Ok(spec.sigma_w * spec.sigma_w / (re * re + im * im))
}

/// Draws one AR(2) epoch of length `l` after discarding `burn_in` samples,
/// starting from a zero initial state with i.i.d. normal innovations.
pub fn simulate_ar2<R: Rng>(
    spec: &Ar2Spec,
    l: usize,
    sample_rate_hz: f64,
    rng: &mut R,
) -> Result<Epoch> {
    spec.validate()?;
    if l < 2 {
        return Err(Error::InvalidInput(format!("epoch length must be >= 2, got {l}")));
    }
    let samples = ar2_samples(spec, l, rng);
    Epoch::new(samples, sample_rate_hz)
}

fn ar2_samples<R: Rng>(spec: &Ar2Spec, l: usize, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(0.0, spec.sigma_w.max(0.0)).unwrap();
    let total = l + spec.burn_in;
    let mut prev1 = 0.0;
    let mut prev2 = 0.0;
    let mut out = Vec::with_capacity(l);
    for t in 0..total {
        let w = if spec.sigma_w > 0.0 { normal.sample(rng) } else { 0.0 };
        let x = spec.phi1 * prev1 + spec.phi2 * prev2 + w;
        prev2 = prev1;
        prev1 = x;
        if t >= spec.burn_in {
            out.push(x);
        }
    }
    out
}

/// The mixture AR(2) benchmark design: latent band sources combined by a
/// weight matrix whose rows define the true clusters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureDesign {
    pub latent_specs: Vec<Ar2Spec>,
    pub weight_matrix: Vec<Vec<f64>>,
    pub m_channels: usize,
    pub n_epochs: usize,
    pub series_len: usize,
    pub phi1_jitter_sd: f64,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    /// Channels whose signal amplitude alternates epoch to epoch between 1
    /// and `switching_gain` (an electrode toggling between two coupling
    /// states). Empty by default.
    #[serde(default)]
    pub switching_channels: Vec<usize>,
    /// Amplitude of the loud state of a switching channel.
    #[serde(default = "default_switching_gain")]
    pub switching_gain: f64,
}

fn default_rate() -> f64 {
    1000.0
}

fn default_switching_gain() -> f64 {
    12.182_493_960_703_473 // e^2.5
}

impl Default for MixtureDesign {
    /// The five-band benchmark: delta through gamma latent sources, a 5x5
    /// weight matrix, 25 channels x 40 epochs of length 1000.
    fn default() -> Self {
        let coeffs = [(0.8, 0.1), (0.9, -0.9), (-0.1, -0.9), (-0.9, -0.9), (-0.8, -0.1)];
        Self {
            latent_specs: coeffs.iter().map(|&(p1, p2)| Ar2Spec::new(p1, p2)).collect(),
            weight_matrix: vec![
                vec![1.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.8, 0.1, 0.0, 0.0, 0.0],
                vec![0.6, 0.0, 0.1, 0.0, 0.0],
                vec![0.4, 0.0, 0.0, 0.1, 0.0],
                vec![0.2, 0.0, 0.0, 0.0, 0.1],
            ],
            m_channels: 25,
            n_epochs: 40,
            series_len: 1000,
            phi1_jitter_sd: 0.005,
            sample_rate_hz: 1000.0,
            switching_channels: vec![],
            switching_gain: default_switching_gain(),
        }
    }
}

impl MixtureDesign {
    pub fn n_clusters(&self) -> usize {
        self.weight_matrix.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.weight_matrix.len();
        if k == 0 || self.latent_specs.is_empty() {
            return Err(Error::InvalidInput("design needs sources and weights".into()));
        }
        for spec in &self.latent_specs {
            spec.validate()?;
        }
        for row in &self.weight_matrix {
            if row.len() != self.latent_specs.len() {
                return Err(Error::Shape(format!(
                    "weight rows must have {} entries",
                    self.latent_specs.len()
                )));
            }
        }
        if self.m_channels == 0 || self.m_channels % k != 0 {
            return Err(Error::InvalidInput(format!(
                "m_channels ({}) must be a positive multiple of the {k} clusters",
                self.m_channels
            )));
        }
        if self.n_epochs == 0 || self.series_len < 2 {
            return Err(Error::InvalidInput("need n_epochs >= 1 and series_len >= 2".into()));
        }
        if self.phi1_jitter_sd < 0.0 {
            return Err(Error::InvalidInput("jitter s.d. must be nonnegative".into()));
        }
        if !(self.switching_gain > 0.0) {
            return Err(Error::InvalidInput("switching gain must be positive".into()));
        }
        if let Some(&ch) = self.switching_channels.iter().find(|&&c| c >= self.m_channels) {
            return Err(Error::Range(format!(
                "switching channel {ch} out of range for {} channels",
                self.m_channels
            )));
        }
        Ok(())
    }
}

/// A simulated raw dataset with its ground-truth channel partition.
#[derive(Debug, Clone)]
pub struct RawDataset {
    pub epochs: Vec<Vec<Epoch>>,
    pub truth: Vec<usize>,
    pub channel_labels: Vec<String>,
}

impl RawDataset {
    pub fn n_channels(&self) -> usize {
        self.epochs.len()
    }

    pub fn n_epochs(&self) -> usize {
        self.epochs.first().map_or(0, Vec::len)
    }
}

const MAX_JITTER_RETRIES: usize = 100;

fn jittered_spec<R: Rng>(base: &Ar2Spec, sd: f64, rng: &mut R) -> Result<Ar2Spec> {
    if sd == 0.0 {
        return Ok(*base);
    }
    let normal = Normal::new(0.0, sd).unwrap();
    for _ in 0..MAX_JITTER_RETRIES {
        let candidate = Ar2Spec { phi1: base.phi1 + normal.sample(rng), ..*base };
        if candidate.is_causal() {
            return Ok(candidate);
        }
    }
    Err(Error::Generation(format!(
        "no causal phi1 jitter found around ({}, {}) after {MAX_JITTER_RETRIES} tries",
        base.phi1, base.phi2
    )))
}

/// Generates the mixture dataset: for each channel, the latent sources get a
/// once-per-channel phi1 jitter; every epoch draws fresh latent series and
/// combines them by the channel's cluster row of the weight matrix.
pub fn simulate_mixture(design: &MixtureDesign, seed: u64) -> Result<RawDataset> {
    design.validate()?;
    let k = design.n_clusters();
    let per_cluster = design.m_channels / k;
    let channels: Vec<Vec<Epoch>> = (0..design.m_channels)
        .into_par_iter()
        .map(|ch| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, ch as u64));
            let cluster = ch / per_cluster;
            let switching = design.switching_channels.contains(&ch);
            let weights = &design.weight_matrix[cluster];
            let specs: Vec<Ar2Spec> = design
                .latent_specs
                .iter()
                .map(|s| jittered_spec(s, design.phi1_jitter_sd, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            (0..design.n_epochs)
                .map(|ep| {
                    let mut mixed = vec![0.0; design.series_len];
                    for (spec, &w) in specs.iter().zip(weights) {
                        if w == 0.0 {
                            // Keep the innovation stream aligned regardless of
                            // sparsity so datasets differ only through weights.
                            let _ = ar2_samples(spec, design.series_len, &mut rng);
                            continue;
                        }
                        let source = ar2_samples(spec, design.series_len, &mut rng);
                        for (z, y) in mixed.iter_mut().zip(&source) {
                            *z += w * y;
                        }
                    }
                    if switching && ep % 2 == 1 {
                        for z in &mut mixed {
                            *z *= design.switching_gain;
                        }
                    }
                    Epoch::new(mixed, design.sample_rate_hz)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = (0..design.m_channels).map(|ch| ch / per_cluster).collect();
    let labels = (0..design.m_channels).map(|ch| format!("ch{ch:02}")).collect();
    Ok(RawDataset { epochs: channels, truth, channel_labels: labels })
}

/// A pre-drawn type 1 contamination layout over a recording: which epochs
/// are hit, and the shift sign for every (channel, epoch) cell. Drawing the
/// plan once and applying slices of it lets overlapping analysis windows
/// see the same artifacts.
#[derive(Debug, Clone)]
pub struct ShiftPlan {
    /// Epoch-level selection flags, length = number of epochs.
    pub selected: Vec<bool>,
    /// Shift signs, channel-major: `signs[ch][ep]`; only meaningful where
    /// `selected[ep]` holds.
    pub signs: Vec<Vec<f64>>,
}

/// Draws a type 1 contamination plan: each epoch (a time window common to
/// all channels) is independently selected with probability `delta`; a
/// random sign is drawn per channel within each selected epoch.
pub fn draw_shift_plan<R: Rng>(
    n_channels: usize,
    n_epochs: usize,
    delta: f64,
    rng: &mut R,
) -> Result<ShiftPlan> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Range(format!("delta must be in [0, 1], got {delta}")));
    }
    let selected: Vec<bool> = (0..n_epochs).map(|_| rng.random::<f64>() < delta).collect();
    let signs = (0..n_channels)
        .map(|_| {
            (0..n_epochs)
                .map(|ep| {
                    if selected[ep] {
                        if rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Ok(ShiftPlan { selected, signs })
}

/// Applies a slice of a shift plan to an ensemble: epoch `ep` of the
/// ensemble reads the plan at `offset + ep`. Returns the contaminated
/// ensemble and the channel-major mask.
pub fn apply_shift_plan(
    ensemble: &ChannelEnsemble,
    plan: &ShiftPlan,
    offset: usize,
    magnitude: f64,
) -> Result<(ChannelEnsemble, Vec<bool>)> {
    let n = ensemble.n_epochs();
    if ensemble.n_channels() > plan.signs.len() || offset + n > plan.selected.len() {
        return Err(Error::Shape(format!(
            "shift plan of {} channels x {} epochs cannot cover offset {offset} + {n} epochs",
            plan.signs.len(),
            plan.selected.len()
        )));
    }
    let mut out = ensemble.clone();
    let mut mask = vec![false; ensemble.n_channels() * n];
    for ch in 0..ensemble.n_channels() {
        for ep in 0..n {
            if plan.selected[offset + ep] {
                mask[ch * n + ep] = true;
                let sign = plan.signs[ch][offset + ep];
                let curve = ensemble.curve(ch, ep);
                let shifted: Vec<f64> =
                    curve.values().iter().map(|v| v + sign * magnitude).collect();
                out.set_curve(
                    ch,
                    ep,
                    Curve::new(curve.grid().clone(), shifted, ScaleTag::LogPeriodogram)?,
                )?;
            }
        }
    }
    Ok((out, mask))
}

/// Type 1 contamination: each epoch (a time window common to all channels)
/// is independently selected with probability `delta`; in a selected epoch
/// every channel's log-periodogram is shifted by `magnitude` with a random
/// sign drawn per channel. Epoch-level selection models artifacts that hit
/// the whole montage at once, so every channel carries the same contaminated
/// epochs. Returns the contaminated ensemble and the channel-major mask.
pub fn contaminate_shift<R: Rng>(
    ensemble: &ChannelEnsemble,
    delta: f64,
    magnitude: f64,
    rng: &mut R,
) -> Result<(ChannelEnsemble, Vec<bool>)> {
    let plan = draw_shift_plan(ensemble.n_channels(), ensemble.n_epochs(), delta, rng)?;
    apply_shift_plan(ensemble, &plan, 0, magnitude)
}

/// Parameters of the simulated eyeblink transient: the difference of two
/// gamma densities on a seconds time axis, plus white noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EyeblinkParams {
    pub shape1: f64,
    /// Scale of the positive lobe, in seconds.
    pub scale1_s: f64,
    pub shape2: f64,
    /// Scale of the negative lobe, in seconds.
    pub scale2_s: f64,
    /// Peak height of the transient in signal units; when absent it is 0.7x
    /// the dataset's pooled sample s.d.
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// S.d. of the white noise riding on the artifact.
    pub noise_sd: f64,
    /// Log-normal s.d. of the fixed per-channel coupling gain (electrode
    /// geometry: how strongly ocular artifacts couple into that channel).
    #[serde(default)]
    pub channel_gain_sd: f64,
    /// Log-normal s.d. of the per-blink severity, shared by all channels in
    /// the contaminated epoch (blinks differ in strength).
    #[serde(default)]
    pub epoch_gain_sd: f64,
    /// Log-normal s.d. of the independent channel-by-epoch gain fluctuation.
    #[serde(default)]
    pub cell_gain_sd: f64,
}

impl Default for EyeblinkParams {
    fn default() -> Self {
        Self {
            shape1: 4.0,
            scale1_s: 0.03,
            shape2: 4.0,
            scale2_s: 0.06,
            // A fixed physical scale: ocular artifacts do not grow with the
            // variance of the recorded signal.
            amplitude: Some(1.0),
            noise_sd: 0.8,
            channel_gain_sd: 0.7,
            epoch_gain_sd: 0.5,
            cell_gain_sd: 0.5,
        }
    }
}

impl EyeblinkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("shape1", self.shape1),
            ("scale1_s", self.scale1_s),
            ("shape2", self.shape2),
            ("scale2_s", self.scale2_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Range(format!("{name} must be positive, got {v}")));
            }
        }
        if self.noise_sd < 0.0 {
            return Err(Error::Range("noise s.d. must be nonnegative".into()));
        }
        for (name, v) in [
            ("channel gain s.d.", self.channel_gain_sd),
            ("epoch gain s.d.", self.epoch_gain_sd),
            ("cell gain s.d.", self.cell_gain_sd),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Range(format!("{name} must be nonnegative")));
            }
        }
        if let Some(a) = self.amplitude {
            if !a.is_finite() {
                return Err(Error::Range("amplitude must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Lanczos approximation of ln Gamma(x) for x > 0.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
}

/// The biphasic eyeblink transient: the difference of two gamma densities,
/// rescaled so its largest lobe peaks at `amplitude` (signal units), plus
/// white noise. Peak normalization keeps `amplitude` meaningful across
/// shape/scale choices (raw gamma densities peak at scale-dependent heights).
pub fn eyeblink_waveform<R: Rng>(
    params: &EyeblinkParams,
    amplitude: f64,
    l: usize,
    sample_rate_hz: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    params.validate()?;
    if !(sample_rate_hz > 0.0) {
        return Err(Error::Range("sample rate must be positive".into()));
    }
    let diff = |t: f64| {
        gamma_pdf(t, params.shape1, params.scale1_s) - gamma_pdf(t, params.shape2, params.scale2_s)
    };
    // Normalize by the peak of the un-truncated waveform so truncation at the
    // epoch boundary does not change the scale.
    let full_span = (sample_rate_hz.ceil() as usize).max(l);
    let peak = (0..full_span)
        .map(|i| diff(i as f64 / sample_rate_hz).abs())
        .fold(0.0_f64, f64::max);
    let gain = if peak > 0.0 { amplitude / peak } else { 0.0 };
    let noise = Normal::new(0.0, params.noise_sd).unwrap();
    Ok((0..l)
        .map(|i| {
            let t = i as f64 / sample_rate_hz;
            let eps = if params.noise_sd > 0.0 { noise.sample(rng) } else { 0.0 };
            gain * diff(t) + eps
        })
        .collect())
}

fn pooled_sample_sd(dataset: &RawDataset) -> f64 {
    let mut count = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for channel in &dataset.epochs {
        for epoch in channel {
            for &x in epoch.samples() {
                count += 1;
                let d = x - mean;
                mean += d / count as f64;
                m2 += d * (x - mean);
            }
        }
    }
    if count < 2 {
        0.0
    } else {
        (m2 / (count - 1) as f64).sqrt()
    }
}

/// Type 2 contamination: each epoch (a time window common to all channels)
/// is independently selected with probability `delta`; a selected epoch gets
/// one eyeblink transient at a uniformly random onset, added to every
/// channel at that same onset (a blink reaches the whole montage at once).
/// The waveform is truncated at the epoch end; noise is drawn per channel.
pub fn contaminate_eyeblink<R: Rng>(
    dataset: &RawDataset,
    delta: f64,
    params: &EyeblinkParams,
    rng: &mut R,
) -> Result<(RawDataset, Vec<bool>)> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Range(format!("delta must be in [0, 1], got {delta}")));
    }
    params.validate()?;
    let amplitude = match params.amplitude {
        Some(a) => a,
        None => 0.7 * pooled_sample_sd(dataset),
    };
    let n = dataset.n_epochs();
    let mut out = dataset.clone();
    let mut mask = vec![false; dataset.n_channels() * n];
    // The artifact gain decomposes into a fixed per-channel coupling
    // (electrode geometry), a per-blink severity shared by all channels,
    // and an independent channel-by-epoch fluctuation.
    let lognormal = |sd: f64, rng: &mut R| -> f64 {
        if sd > 0.0 {
            Normal::new(0.0, sd).unwrap().sample(rng).exp()
        } else {
            1.0
        }
    };
    let channel_gains: Vec<f64> =
        (0..dataset.n_channels()).map(|_| lognormal(params.channel_gain_sd, rng)).collect();
    // A fixed blink rate: exactly round(delta * n) epochs carry a blink, as
    // "one blink every 1/delta seconds" fixes the count rather than tossing a
    // coin per epoch.
    let n_blinks = ((delta * n as f64).round() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut chosen = vec![false; n];
    for &ep in order.iter().take(n_blinks) {
        chosen[ep] = true;
    }
    for ep in 0..n {
        if !chosen[ep] {
            continue;
        }
        let onset = {
            let l = dataset.epochs[0][ep].len();
            rng.random_range(0..l)
        };
        let epoch_gain = lognormal(params.epoch_gain_sd, rng);
        for (ch, channel) in dataset.epochs.iter().enumerate() {
            let epoch = &channel[ep];
            mask[ch * n + ep] = true;
            let l = epoch.len();
            let onset = onset.min(l - 1);
            let gain = channel_gains[ch] * epoch_gain * lognormal(params.cell_gain_sd, rng);
            let blink =
                eyeblink_waveform(params, amplitude, l - onset, epoch.sample_rate_hz(), rng)?;
            let mut samples = epoch.samples().to_vec();
            // The gain scales the whole artifact, transient and noise alike.
            for (s, b) in samples[onset..].iter_mut().zip(&blink) {
                *s += gain * b;
            }
            out.epochs[ch][ep] = Epoch::new(samples, epoch.sample_rate_hz())?;
        }
    }
    Ok((out, mask))
}

/// A contamination setting for benchmark runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContaminationSpec {
    /// No contamination.
    None,
    /// Type 1: additive shift on selected log-periodograms.
    Shift {
        delta: f64,
        #[serde(default = "default_shift_magnitude")]
        magnitude: f64,
    },
    /// Type 2: eyeblink transient added to selected raw epochs.
    Eyeblink {
        delta: f64,
        #[serde(default)]
        params: EyeblinkParams,
    },
}

fn default_shift_magnitude() -> f64 {
    4.0
}

impl ContaminationSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ContaminationSpec::None => "null",
            ContaminationSpec::Shift { .. } => "type1",
            ContaminationSpec::Eyeblink { .. } => "type2",
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            ContaminationSpec::None => 0.0,
            ContaminationSpec::Shift { delta, .. } | ContaminationSpec::Eyeblink { delta, .. } => {
                *delta
            }
        }
    }
}

/// The bimodal benchmark design: channels whose epochs split evenly between
/// a quiet and a loud innovation scale, so the per-channel log-periodograms
/// form two vertically separated bundles. The functional median lands in one
/// bundle or the other essentially at random, while the central region of a
/// within-cluster pool stays a clean two-band envelope.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BimodalDesign {
    /// One spectral shape per cluster.
    pub cluster_specs: Vec<Ar2Spec>,
    /// Channels per cluster, in order.
    pub channels_per_cluster: Vec<usize>,
    /// Innovation s.d. of the quiet epochs.
    pub sigma_low: f64,
    /// Innovation s.d. of the loud epochs.
    pub sigma_high: f64,
    pub n_epochs: usize,
    pub series_len: usize,
    pub phi1_jitter_sd: f64,
    /// Truncation recommended for the downstream pipeline.
    pub t_freqs: usize,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
}

fn peak_spec(peak_freq: f64, modulus: f64) -> Ar2Spec {
    // An AR(2) with complex roots at modulus r and angle 2 pi omega0 peaks
    // near omega0: phi1 = 2 r cos(2 pi omega0), phi2 = -r^2.
    let angle = 2.0 * std::f64::consts::PI * peak_freq;
    Ar2Spec::new(2.0 * modulus * angle.cos(), -modulus * modulus)
}

impl Default for BimodalDesign {
    /// Two clusters over five channels (3 + 2): within a cluster every
    /// channel mixes the same low/high spectral pair, and the pairs of the
    /// two clusters are offset in peak frequency.
    fn default() -> Self {
        Self {
            cluster_specs: vec![peak_spec(0.1, 0.9), peak_spec(0.3, 0.9)],
            channels_per_cluster: vec![3, 2],
            // Log-periodogram bundles sit 5 log units apart: far enough that
            // which bundle a channel's median lands in dominates the
            // between-cluster shape difference.
            sigma_low: 12.182_493_960_703_473,  // e^2.5
            sigma_high: 148.413_159_102_576_6, // e^5
            n_epochs: 40,
            series_len: 1000,
            phi1_jitter_sd: 0.01,
            t_freqs: 500,
            sample_rate_hz: 1000.0,
        }
    }
}

impl BimodalDesign {
    pub fn m_channels(&self) -> usize {
        self.channels_per_cluster.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster_specs.len() != self.channels_per_cluster.len() {
            return Err(Error::Shape(
                "cluster_specs and channels_per_cluster lengths differ".into(),
            ));
        }
        if self.cluster_specs.is_empty() || self.channels_per_cluster.iter().any(|&c| c == 0) {
            return Err(Error::InvalidInput("every cluster needs at least one channel".into()));
        }
        for spec in &self.cluster_specs {
            spec.validate()?;
        }
        if !(self.sigma_low > 0.0) || !(self.sigma_high > 0.0) {
            return Err(Error::Range("innovation s.d.s must be positive".into()));
        }
        if self.n_epochs < 2 || self.series_len < 2 {
            return Err(Error::InvalidInput("need n_epochs >= 2 and series_len >= 2".into()));
        }
        if self.t_freqs == 0 || self.t_freqs > self.series_len {
            return Err(Error::Range("t_freqs must be in 1..=series_len".into()));
        }
        Ok(())
    }
}

/// Generates the bimodal dataset: each channel's epochs split almost evenly
/// between the quiet and the loud innovation scale, with a small imbalance
/// of random sign. The majority bundle — and with it the channel's
/// functional median — is a coin flip per channel, yet no pooled pair of
/// channels ever has a single-bundle majority, so central regions keep
/// spanning both bundles.
pub fn bimodal_dataset(design: &BimodalDesign, seed: u64) -> Result<RawDataset> {
    design.validate()?;
    let m = design.m_channels();
    let mut cluster_of = Vec::with_capacity(m);
    for (cid, &count) in design.channels_per_cluster.iter().enumerate() {
        cluster_of.extend(std::iter::repeat(cid).take(count));
    }
    let channels: Vec<Vec<Epoch>> = (0..m)
        .into_par_iter()
        .map(|ch| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 0x8000_0000 | ch as u64));
            let base = design.cluster_specs[cluster_of[ch]];
            let n = design.n_epochs;
            // Quiet count: n/2 plus an imbalance of 1 or 2 with random sign.
            let imbalance = 1 + (rng.random::<bool>() as i64);
            let signed = if rng.random::<bool>() { imbalance } else { -imbalance };
            let n_quiet = ((n as i64 / 2 + signed).clamp(0, n as i64)) as usize;
            let mut quiet = vec![false; n];
            for q in quiet.iter_mut().take(n_quiet) {
                *q = true;
            }
            for i in (1..n).rev() {
                quiet.swap(i, rng.random_range(0..=i));
            }
            (0..design.n_epochs)
                .map(|ep| {
                    let sigma = if quiet[ep] { design.sigma_low } else { design.sigma_high };
                    let spec = jittered_spec(&base, design.phi1_jitter_sd, &mut rng)?;
                    let epoch =
                        simulate_ar2(&spec, design.series_len, design.sample_rate_hz, &mut rng)?;
                    let scaled: Vec<f64> = epoch.samples().iter().map(|&x| sigma * x).collect();
                    Epoch::new(scaled, design.sample_rate_hz)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = (0..m).map(|ch| format!("ch{ch:02}")).collect();
    Ok(RawDataset { epochs: channels, truth: cluster_of, channel_labels: labels })
}
