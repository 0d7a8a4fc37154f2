//! End-to-end acceptance gate for the pipeline. One test walks through the
//! eight release criteria, prints a pass/fail line per criterion, and fails
//! at the end if any criterion missed its bar.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to watch the lines
//! stream by; the full gate takes several minutes because the benchmark
//! criteria replay the simulation designs at their published sizes.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rsc_core::cluster::{agglomerate, elbow_trace, hierarchical_cluster, Measure};
use rsc_core::eval::{
    adjusted_rand_index, moving_window_experiment, run_benchmark, BenchmarkConfig,
    BenchmarkDesign, BenchmarkReport,
};
use rsc_core::simulate::{
    simulate_mixture, sub_seed, Ar2Spec, BimodalDesign, ContaminationSpec, EyeblinkParams,
    MixtureDesign,
};
use rsc_core::spectral::build_ensemble;

/// Master seed of the acceptance runs.
const SEED: u64 = 20260823;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Gate { failures: Vec::new() }
    }

    fn report(&mut self, criterion: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("[{criterion}] {verdict} - {detail}");
        if !pass {
            self.failures.push(format!("{criterion}: {detail}"));
        }
    }
}

fn cell(report: &BenchmarkReport, label: &str, method: Measure) -> f64 {
    report
        .rows
        .iter()
        .find(|r| r.contamination == label && r.method == method)
        .map(|r| r.mean_ari)
        .expect("benchmark cell missing")
}

#[test]
fn acceptance_gate() {
    let mut gate = Gate::new();
    criteria_benchmarks(&mut gate);
    criterion_bimodal(&mut gate);
    criterion_elbow(&mut gate);
    criterion_windows(&mut gate);
    criterion_oracles(&mut gate);
    criterion_invariances(&mut gate);
    assert!(
        gate.failures.is_empty(),
        "acceptance criteria failed:\n{}",
        gate.failures.join("\n")
    );
}

/// Criteria 1-3: the three-contamination benchmark on the five-band mixture
/// design (25 channels x 40 epochs x 1000 samples, T = 50, K = 5, R = 20).
fn criteria_benchmarks(gate: &mut Gate) {
    let config = BenchmarkConfig {
        design: BenchmarkDesign::Mixture(MixtureDesign::default()),
        t_freqs: 50,
        smoothing: Default::default(),
        contaminations: vec![
            ContaminationSpec::None,
            ContaminationSpec::Shift { delta: 0.2, magnitude: 4.0 },
            ContaminationSpec::Eyeblink { delta: 0.3, params: EyeblinkParams::default() },
        ],
        methods: vec![Measure::Fm, Measure::Cr, Measure::Mean],
        k_target: 5,
        replicates: 20,
        seed: SEED,
    };
    let start = Instant::now();
    let report = run_benchmark(&config).expect("benchmark run");
    let elapsed = start.elapsed().as_secs_f64();

    // Criterion 1: clean data, all methods near-perfect, within the budget.
    let (fm, cr, mean) = (
        cell(&report, "null", Measure::Fm),
        cell(&report, "null", Measure::Cr),
        cell(&report, "null", Measure::Mean),
    );
    gate.report(
        "criterion 1: null benchmark",
        fm >= 0.98 && mean >= 0.98 && cr >= 0.95 && elapsed <= 600.0,
        format!(
            "FM {fm:.4} (>= 0.98), MEAN {mean:.4} (>= 0.98), CR {cr:.4} (>= 0.95), \
             all three contaminations in {elapsed:.0}s (<= 600s)"
        ),
    );

    // Criterion 2: type 1 shift contamination degrades MEAN, not FM or CR.
    let (fm, cr, mean) = (
        cell(&report, "type1", Measure::Fm),
        cell(&report, "type1", Measure::Cr),
        cell(&report, "type1", Measure::Mean),
    );
    gate.report(
        "criterion 2: type 1 shift, delta 0.2",
        fm >= 0.95 && cr >= 0.88 && mean <= 0.80,
        format!("FM {fm:.4} (>= 0.95), CR {cr:.4} (>= 0.88), MEAN {mean:.4} (<= 0.80)"),
    );

    // Criterion 3: type 2 eyeblink contamination, plus the FM > MEAN
    // ordering across ten independent replicate batches.
    let (fm, cr, mean) = (
        cell(&report, "type2", Measure::Fm),
        cell(&report, "type2", Measure::Cr),
        cell(&report, "type2", Measure::Mean),
    );
    let mut ordered = usize::from(fm > mean);
    for batch in 1..10u64 {
        let batch_config = BenchmarkConfig {
            contaminations: vec![ContaminationSpec::Eyeblink {
                delta: 0.3,
                params: EyeblinkParams::default(),
            }],
            methods: vec![Measure::Fm, Measure::Mean],
            seed: sub_seed(SEED, 0xBA7C + batch),
            ..config.clone()
        };
        let batch_report = run_benchmark(&batch_config).expect("batch benchmark");
        if cell(&batch_report, "type2", Measure::Fm) > cell(&batch_report, "type2", Measure::Mean)
        {
            ordered += 1;
        }
    }
    gate.report(
        "criterion 3: type 2 eyeblink, delta 0.3",
        fm >= 0.92 && cr >= 0.88 && ordered >= 9,
        format!(
            "FM {fm:.4} (>= 0.92), CR {cr:.4} (>= 0.88), \
             FM > MEAN in {ordered}/10 batches (>= 9)"
        ),
    );
}

/// Criterion 4: the bimodal design breaks FM while CR stays near-perfect,
/// clean and under type 2 contamination at delta 0.25.
fn criterion_bimodal(gate: &mut Gate) {
    let mut results = Vec::new();
    for delta in [0.0, 0.25] {
        let contamination = if delta == 0.0 {
            ContaminationSpec::None
        } else {
            ContaminationSpec::Eyeblink { delta, params: EyeblinkParams::default() }
        };
        let config = BenchmarkConfig {
            design: BenchmarkDesign::Bimodal(BimodalDesign::default()),
            t_freqs: 500,
            smoothing: Default::default(),
            contaminations: vec![contamination.clone()],
            methods: vec![Measure::Fm, Measure::Cr],
            k_target: 2,
            replicates: 20,
            seed: SEED,
        };
        let report = run_benchmark(&config).expect("bimodal benchmark");
        let label = contamination.label();
        results.push((
            delta,
            cell(&report, label, Measure::Cr),
            cell(&report, label, Measure::Fm),
        ));
    }
    let pass = results.iter().all(|&(_, cr, fm)| cr >= 0.95 && fm <= 0.60);
    let detail = results
        .iter()
        .map(|(d, cr, fm)| format!("delta {d}: CR {cr:.4} (>= 0.95), FM {fm:.4} (<= 0.60)"))
        .collect::<Vec<_>>()
        .join("; ");
    gate.report("criterion 4: bimodal channels", pass, detail);
}

/// Criterion 5: the CR elbow recovers K = 5 on clean five-band data in at
/// least 40 of 50 runs.
fn criterion_elbow(gate: &mut Gate) {
    let design = MixtureDesign::default();
    let hits: usize = (0..50u64)
        .into_par_iter()
        .map(|run| {
            let data = simulate_mixture(&design, sub_seed(777, run)).expect("simulate");
            let ensemble = build_ensemble(
                &data.epochs,
                Some(data.channel_labels.clone()),
                50,
                &Default::default(),
            )
            .expect("ensemble");
            let agg = agglomerate(&ensemble, Measure::Cr, 1).expect("agglomerate");
            let elbow = elbow_trace(&agg.min_dissimilarity_series(), 2, 10).expect("elbow");
            usize::from(elbow.distinct_knee && elbow.suggested_k == 5)
        })
        .sum();
    gate.report(
        "criterion 5: elbow selects K = 5",
        hits >= 40,
        format!("{hits}/50 clean runs (>= 40)"),
    );
}

/// Criterion 6: moving-window stability on a contaminated 3-minute
/// recording. CR's off-diagonal window-agreement ARI must have a median at
/// least as high as FM's and MEAN's, with a strictly smaller IQR.
fn criterion_windows(gate: &mut Gate) {
    let peaks = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40];
    let specs: Vec<Ar2Spec> = peaks
        .iter()
        .map(|&f| {
            let angle = 2.0 * std::f64::consts::PI * f;
            Ar2Spec::new(2.0 * 0.95 * angle.cos(), -0.9025)
        })
        .collect();
    let identity: Vec<Vec<f64>> = (0..7)
        .map(|i| (0..7).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let design = MixtureDesign {
        latent_specs: specs,
        weight_matrix: identity,
        m_channels: 21,
        n_epochs: 180,
        series_len: 500,
        switching_channels: (0..21).collect(),
        ..MixtureDesign::default()
    };
    let data = simulate_mixture(&design, sub_seed(SEED, 0)).expect("simulate recording");
    let reports = moving_window_experiment(
        &data,
        30,
        10,
        7,
        &[Measure::Fm, Measure::Cr, Measure::Mean],
        250,
        &Default::default(),
        &ContaminationSpec::Shift { delta: 0.2, magnitude: 8.0 },
        sub_seed(SEED, 0x57A0),
    )
    .expect("window experiment");
    let find = |m: Measure| reports.iter().find(|r| r.method == m).unwrap();
    let (fm, cr, mean) = (find(Measure::Fm), find(Measure::Cr), find(Measure::Mean));
    let pass = cr.median >= fm.median
        && cr.median >= mean.median
        && cr.iqr < fm.iqr
        && cr.iqr < mean.iqr;
    gate.report(
        "criterion 6: moving-window stability",
        pass,
        format!(
            "CR median {:.4} / IQR {:.4}; FM median {:.4} / IQR {:.4}; \
             MEAN median {:.4} / IQR {:.4} (CR median >= both, CR IQR < both)",
            cr.median, cr.iqr, fm.median, fm.iqr, mean.median, mean.iqr
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: numerical oracles.
// ---------------------------------------------------------------------------

fn make_curves(rows: &[Vec<f64>]) -> Vec<rsc_core::Curve> {
    let t = rows[0].len();
    let grid = Arc::new(rsc_core::FrequencyGrid::new(t, 2 * t, None).unwrap());
    rows.iter()
        .map(|r| {
            rsc_core::Curve::new(grid.clone(), r.clone(), rsc_core::ScaleTag::LogPeriodogram)
                .unwrap()
        })
        .collect()
}

fn refs(curves: &[rsc_core::Curve]) -> Vec<&rsc_core::Curve> {
    curves.iter().collect()
}

/// Brute-force modified band depth: every pair, every grid point.
fn mbd_brute(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let t = rows[0].len();
    let total = (n * (n - 1) / 2) as f64;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                for k in (j + 1)..n {
                    let mut inside = 0usize;
                    for g in 0..t {
                        let lo = rows[j][g].min(rows[k][g]);
                        let hi = rows[j][g].max(rows[k][g]);
                        if lo <= rows[i][g] && rows[i][g] <= hi {
                            inside += 1;
                        }
                    }
                    acc += inside as f64 / t as f64;
                }
            }
            acc / total
        })
        .collect()
}

/// All set partitions of n items as assignment vectors in restricted-growth
/// form.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let max_used = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for label in 0..=max_used {
            prefix.push(label);
            extend(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), n, &mut out);
    out
}

/// Independent pair-counting ARI: classify every item pair into the four
/// agreement cells and apply the closed form.
fn ari_pair_counting(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut n11, mut n00, mut n10, mut n01) = (0.0f64, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (false, false) => n00 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
            }
        }
    }
    let num = 2.0 * (n11 * n00 - n10 * n01);
    let den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

fn criterion_oracles(gate: &mut Gate) {
    let mut detail = Vec::new();
    let mut pass = true;

    // MBD agrees with the brute-force definition on random curve sets up to
    // 8 curves x 20 grid points.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mbd_worst = 0.0f64;
    for n in [2usize, 3, 5, 8] {
        for t in [5usize, 12, 20] {
            for _ in 0..25 {
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..t).map(|_| rng.random_range(-5.0..5.0)).collect())
                    .collect();
                let curves = make_curves(&rows);
                let got = rsc_core::modified_band_depth(&refs(&curves)).unwrap();
                for (a, b) in got.depths.iter().zip(mbd_brute(&rows)) {
                    mbd_worst = mbd_worst.max((a - b).abs());
                }
            }
        }
    }
    pass &= mbd_worst <= 1e-12;
    detail.push(format!("MBD vs brute force, worst abs err {mbd_worst:.2e} (<= 1e-12)"));

    // ARI agrees with pair counting on every pair of partitions of up to 6
    // items, and reproduces the exact -0.5 case.
    let mut ari_worst = 0.0f64;
    for n in 1..=6usize {
        let partitions = all_partitions(n);
        for a in &partitions {
            for b in &partitions {
                let got = adjusted_rand_index(a, b).unwrap();
                ari_worst = ari_worst.max((got - ari_pair_counting(a, b)).abs());
            }
        }
    }
    let neg_case = adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    pass &= ari_worst <= 1e-12 && (neg_case + 0.5).abs() <= 1e-15;
    detail.push(format!(
        "ARI vs pair counting on all partitions of <= 6 items, worst abs err {ari_worst:.2e} \
         (<= 1e-12), crossed-pairs case {neg_case:.4} (= -0.5)"
    ));

    // DFT and periodogram agree with direct O(l^2) sums.
    let mut dft_worst = 0.0f64;
    let mut pgram_worst = 0.0f64;
    for l in [8usize, 37, 100, 257] {
        let samples: Vec<f64> = (0..l).map(|_| rng.random_range(-3.0..3.0)).collect();
        let epoch = rsc_core::Epoch::new(samples.clone(), 100.0).unwrap();
        let coeffs = rsc_core::dft(&epoch).unwrap();
        let scale = 1.0 / (l as f64).sqrt();
        let mut err_sq = 0.0;
        let mut ref_sq = 0.0;
        let mut direct_sq = Vec::with_capacity(l);
        for (j, c) in coeffs.iter().enumerate() {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for (s, &x) in samples.iter().enumerate() {
                // Sum over t = 1..l of x_t e^{-2 pi i j t / l}.
                let phase = -2.0 * std::f64::consts::PI * j as f64 * (s + 1) as f64 / l as f64;
                re += x * phase.cos();
                im += x * phase.sin();
            }
            re *= scale;
            im *= scale;
            err_sq += (c.re - re).powi(2) + (c.im - im).powi(2);
            ref_sq += re * re + im * im;
            direct_sq.push(re * re + im * im);
        }
        dft_worst = dft_worst.max((err_sq / ref_sq).sqrt());
        let t_freqs = l / 2;
        let pgram = rsc_core::periodogram(&epoch, t_freqs).unwrap();
        let num: f64 = pgram
            .values()
            .iter()
            .zip(&direct_sq)
            .map(|(g, d)| (g - d).powi(2))
            .sum();
        let den: f64 = direct_sq[..t_freqs].iter().map(|d| d * d).sum();
        pgram_worst = pgram_worst.max((num / den).sqrt());
    }
    pass &= dft_worst <= 1e-9 && pgram_worst <= 1e-9;
    detail.push(format!(
        "DFT / periodogram vs direct sums, worst rel err {dft_worst:.2e} / {pgram_worst:.2e} \
         (<= 1e-9)"
    ));

    // Parseval: the normalized DFT preserves total power on 1000 random
    // epochs.
    let mut parseval_worst = 0.0f64;
    for _ in 0..1000 {
        let l = rng.random_range(4..=64);
        let samples: Vec<f64> = (0..l).map(|_| rng.random_range(-4.0..4.0)).collect();
        let epoch = rsc_core::Epoch::new(samples.clone(), 250.0).unwrap();
        let spectral_power: f64 = rsc_core::dft(&epoch).unwrap().iter().map(|c| c.norm_sqr()).sum();
        let time_power: f64 = samples.iter().map(|x| x * x).sum();
        parseval_worst = parseval_worst.max((spectral_power - time_power).abs() / time_power);
    }
    pass &= parseval_worst <= 1e-10;
    detail.push(format!(
        "Parseval on 1000 random epochs, worst rel err {parseval_worst:.2e} (<= 1e-10)"
    ));

    gate.report("criterion 7: numerical oracles", pass, detail.join("; "));
}

// ---------------------------------------------------------------------------
// Criterion 8: invariance suites.
// ---------------------------------------------------------------------------

fn criterion_invariances(gate: &mut Gate) {
    let mut detail = Vec::new();
    let mut pass = true;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED.wrapping_add(8));

    // MBD ranking is invariant under strictly increasing transforms.
    let transforms: [fn(f64) -> f64; 3] =
        [|v| 2.0 * v + 1.0, |v| v.powi(3) + 3.0 * v, |v| (0.4 * v).exp()];
    let mut mbd_ok = true;
    for _ in 0..100 {
        let n = rng.random_range(3..9);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..10).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let base = rsc_core::modified_band_depth(&refs(&make_curves(&rows))).unwrap();
        for f in transforms {
            let mapped: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| r.iter().map(|&v| f(v)).collect())
                .collect();
            let t = rsc_core::modified_band_depth(&refs(&make_curves(&mapped))).unwrap();
            mbd_ok &= base.order == t.order;
        }
    }
    pass &= mbd_ok;
    detail.push(format!(
        "MBD order under increasing transforms: {}",
        if mbd_ok { "invariant" } else { "VIOLATED" }
    ));

    // Central-region area: translation invariance and scaling homogeneity.
    let mut region_worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(4..10);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..12).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let shift = rng.random_range(-20.0..20.0);
        let scale = rng.random_range(0.1..10.0);
        let area = rsc_core::central_region(&refs(&make_curves(&rows)), 0.5).unwrap().area;
        let shifted: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v + shift).collect())
            .collect();
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v * scale).collect())
            .collect();
        let shifted_area =
            rsc_core::central_region(&refs(&make_curves(&shifted)), 0.5).unwrap().area;
        let scaled_area =
            rsc_core::central_region(&refs(&make_curves(&scaled)), 0.5).unwrap().area;
        region_worst = region_worst
            .max((shifted_area - area).abs() / area.max(1e-12))
            .max((scaled_area - scale * area).abs() / (scale * area).max(1e-12));
    }
    pass &= region_worst <= 1e-9;
    detail.push(format!(
        "central-region translation/scaling, worst rel err {region_worst:.2e} (<= 1e-9)"
    ));

    // ARI is invariant under relabeling either partition.
    let mut ari_worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..15);
        let k = rng.random_range(1..5usize);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        // Random permutation of b's labels.
        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let relabeled: Vec<usize> = b.iter().map(|&x| perm[x]).collect();
        let base = adjusted_rand_index(&a, &b).unwrap();
        let after = adjusted_rand_index(&a, &relabeled).unwrap();
        ari_worst = ari_worst.max((base - after).abs());
    }
    pass &= ari_worst <= 1e-12;
    detail.push(format!("ARI relabeling, worst abs err {ari_worst:.2e} (<= 1e-12)"));

    // The full pipeline is bit-for-bit deterministic across thread counts.
    let design = MixtureDesign {
        m_channels: 10,
        n_epochs: 8,
        series_len: 256,
        ..MixtureDesign::default()
    };
    let run_with = |threads: usize| -> (Vec<usize>, u64) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| {
            let data = simulate_mixture(&design, 42).unwrap();
            let ensemble = build_ensemble(
                &data.epochs,
                Some(data.channel_labels.clone()),
                32,
                &Default::default(),
            )
            .unwrap();
            let (partition, trace) =
                hierarchical_cluster(&ensemble, Measure::Cr, 5).unwrap();
            let mut hash = 0xcbf2_9ce4_8422_2325u64;
            for step in &trace.steps {
                hash = hash
                    .rotate_left(7)
                    .wrapping_add(step.dissimilarity.to_bits())
                    .wrapping_add(step.merged.0 as u64);
            }
            (partition.assignment, hash)
        })
    };
    let single = run_with(1);
    let quad = run_with(4);
    let deterministic = single == quad;
    pass &= deterministic;
    detail.push(format!(
        "thread-count determinism (1 vs 4 threads): {}",
        if deterministic { "bit-identical" } else { "DIVERGED" }
    ));

    gate.report("criterion 8: invariance suites", pass, detail.join("; "));
}
