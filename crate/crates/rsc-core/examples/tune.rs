//! Scratch experiment driver used while calibrating benchmark designs.
//! Run: cargo run --release -p rsc-core --example tune -- <experiment> [reps]

use rsc_core::cluster::{agglomerate, elbow_trace, Measure};
use rsc_core::eval::{
    moving_window_experiment, run_benchmark, BenchmarkConfig, BenchmarkDesign,
};
use rsc_core::simulate::{
    simulate_mixture, sub_seed, BimodalDesign, ContaminationSpec, EyeblinkParams, MixtureDesign,
};
use rsc_core::spectral::{build_ensemble, SmoothingConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("null");
    let reps: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5);
    let t0 = std::time::Instant::now();
    match which {
        "null" | "type1" | "type2" => {
            let contamination = match which {
                "null" => ContaminationSpec::None,
                "type1" => ContaminationSpec::Shift { delta: 0.2, magnitude: 4.0 },
                _ => ContaminationSpec::Eyeblink { delta: 0.3, params: EyeblinkParams::default() },
            };
            let config = BenchmarkConfig {
                design: BenchmarkDesign::Mixture(MixtureDesign::default()),
                t_freqs: 50,
                smoothing: SmoothingConfig::default(),
                contaminations: vec![contamination],
                methods: vec![Measure::Fm, Measure::Cr, Measure::Mean],
                k_target: 5,
                replicates: reps,
                seed: 20260823,
            };
            let report = run_benchmark(&config).unwrap();
            for row in &report.rows {
                println!(
                    "{} d={} {:?}: mean_ari={:.4} sd={:.4} sec={:.1}",
                    row.contamination, row.delta, row.method, row.mean_ari, row.sd_ari, row.seconds
                );
            }
        }
        "bimodal" => {
            for delta in [0.0, 0.25] {
                let config = BenchmarkConfig {
                    design: BenchmarkDesign::Bimodal(BimodalDesign::default()),
                    t_freqs: 500,
                    smoothing: SmoothingConfig::default(),
                    contaminations: vec![if delta == 0.0 {
                        ContaminationSpec::None
                    } else {
                        ContaminationSpec::Eyeblink { delta, params: EyeblinkParams::default() }
                    }],
                    methods: vec![Measure::Fm, Measure::Cr],
                    k_target: 2,
                    replicates: reps,
                    seed: 20260823,
                };
                let report = run_benchmark(&config).unwrap();
                for row in &report.rows {
                    println!(
                        "bimodal d={} {:?}: mean_ari={:.4} sd={:.4} sec={:.1}",
                        delta, row.method, row.mean_ari, row.sd_ari, row.seconds
                    );
                }
            }
        }
        "elbow" => {
            let design = MixtureDesign::default();
            let mut hits = 0;
            for run in 0..reps {
                let data = simulate_mixture(&design, sub_seed(777, run as u64)).unwrap();
                let ens = build_ensemble(
                    &data.epochs,
                    Some(data.channel_labels.clone()),
                    50,
                    &SmoothingConfig::default(),
                )
                .unwrap();
                let agg = agglomerate(&ens, Measure::Cr, 1).unwrap();
                let series = agg.min_dissimilarity_series();
                let elbow = elbow_trace(&series, 2, 10).unwrap();
                if elbow.suggested_k == 5 {
                    hits += 1;
                } else {
                    let s: Vec<String> = elbow
                        .series
                        .iter()
                        .filter(|(n, _)| *n <= 12)
                        .map(|(n, v)| format!("{n}:{v:.0}"))
                        .collect();
                    println!(
                        "MISS run {run}: suggested_k={} knee={} series={}",
                        elbow.suggested_k,
                        elbow.distinct_knee,
                        s.join(" ")
                    );
                }
            }
            println!("hit rate {hits}/{reps}");
        }
        "windows" => {
            let design = {
                let peaks = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40];
                let specs: Vec<rsc_core::simulate::Ar2Spec> = peaks
                    .iter()
                    .map(|&f| {
                        let angle = 2.0 * std::f64::consts::PI * f;
                        rsc_core::simulate::Ar2Spec::new(2.0 * 0.95 * angle.cos(), -0.9025)
                    })
                    .collect();
                let eye: Vec<Vec<f64>> = (0..7)
                    .map(|i| (0..7).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect();
                MixtureDesign {
                    latent_specs: specs,
                    weight_matrix: eye,
                    m_channels: 21,
                    n_epochs: 180,
                    series_len: 500,
                    switching_channels: (0..21).collect(),
                    ..MixtureDesign::default()
                }
            };
            for rep in 0..reps.max(1) {
                let data = simulate_mixture(&design, sub_seed(20260823, rep as u64)).unwrap();
                let reports = moving_window_experiment(
                    &data,
                    30,
                    10,
                    7,
                    &[Measure::Fm, Measure::Cr, Measure::Mean],
                    250,
                    &SmoothingConfig::default(),
                    &ContaminationSpec::Shift { delta: 0.2, magnitude: 8.0 },
                    sub_seed(20260823, 0x57A0 + rep as u64),
                )
                .unwrap();
                for r in &reports {
                    println!(
                        "rep {rep} {:?}: median={:.4} iqr={:.4} windows={}",
                        r.method,
                        r.median,
                        r.iqr,
                        r.ari.len()
                    );
                }
            }
        }
        "win7" => {
            use rsc_core::simulate::{bimodal_dataset, Ar2Spec};
            for gain_sd in [1.0_f64] {
                let peaks = [0.05, 0.11, 0.17, 0.23, 0.29, 0.35, 0.41];
                let design = BimodalDesign {
                    cluster_specs: peaks
                        .iter()
                        .map(|&f| {
                            let angle = 2.0 * std::f64::consts::PI * f;
                            Ar2Spec::new(2.0 * 0.9 * angle.cos(), -0.81)
                        })
                        .collect(),
                    channels_per_cluster: vec![3; 7],
                    n_epochs: 180,
                    ..BimodalDesign::default()
                };
                for rep in 0..reps.max(1) {
                    let data =
                        bimodal_dataset(&design, sub_seed(20260823, rep as u64)).unwrap();
                    let reports = moving_window_experiment(
                        &data,
                        30,
                        10,
                        7,
                        &[Measure::Fm, Measure::Cr, Measure::Mean],
                        500,
                        &SmoothingConfig::default(),
                        &ContaminationSpec::Shift { delta: 0.2, magnitude: 4.0 },
                        sub_seed(20260823, 0x57A0 + rep as u64),
                    )
                    .unwrap();
                    for r in &reports {
                        println!(
                            "gsd={gain_sd} rep {rep} {:?}: median={:.4} iqr={:.4}",
                            r.method, r.median, r.iqr
                        );
                    }
                }
            }
        }
        "windebug" => {
            use rand::SeedableRng;
            use rsc_core::simulate::{apply_shift_plan, draw_shift_plan};
            let design = MixtureDesign {
                n_epochs: 180,
                switching_channels: vec![7, 17],
                ..MixtureDesign::default()
            };
            let data = simulate_mixture(&design, sub_seed(20260823, 0)).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sub_seed(20260823, 0x57A0));
            let plan = draw_shift_plan(25, 180, 0.2, &mut rng).unwrap();
            for wi in 0..15 {
                let start = wi * 10;
                let slice: Vec<Vec<_>> = data
                    .epochs
                    .iter()
                    .map(|channel| channel[start..start + 30].to_vec())
                    .collect();
                let ens = build_ensemble(
                    &slice,
                    Some(data.channel_labels.clone()),
                    50,
                    &SmoothingConfig::default(),
                )
                .unwrap();
                let ens = apply_shift_plan(&ens, &plan, start, 4.0).unwrap().0;
                let mut line = format!("w{wi:02}");
                for m in [Measure::Cr, Measure::Fm] {
                    let (part, _) = rsc_core::cluster::hierarchical_cluster(&ens, m, 7).unwrap();
                    line.push_str(&format!(" {:?}={:?}", m, part.assignment));
                }
                println!("{line}");
            }
        }
        "crdebug" => {
            use rand::SeedableRng;
            use rsc_core::depth::central_region;
            use rsc_core::eval::adjusted_rand_index;
            use rsc_core::simulate::contaminate_eyeblink;
            let design = MixtureDesign::default();
            for rep in 0..reps {
                let data = simulate_mixture(&design, sub_seed(42, rep as u64)).unwrap();
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sub_seed(9, rep as u64));
                let (cont, _mask) =
                    contaminate_eyeblink(&data, 0.3, &EyeblinkParams::default(), &mut rng)
                        .unwrap();
                let ens = build_ensemble(
                    &cont.epochs,
                    Some(data.channel_labels.clone()),
                    50,
                    &SmoothingConfig::default(),
                )
                .unwrap();
                // Initial pairwise pool areas: same-cluster vs cross-cluster.
                let m = ens.n_channels();
                let mut worst_same: f64 = 0.0;
                let mut best_cross = f64::INFINITY;
                let mut same_areas = vec![];
                let mut cross_areas = vec![];
                for a in 0..m {
                    for b in (a + 1)..m {
                        let pool: Vec<&rsc_core::spectral::Curve> = ens
                            .channel_curves(a)
                            .iter()
                            .chain(ens.channel_curves(b).iter())
                            .collect();
                        let area = central_region(&pool, 0.5).unwrap().area;
                        if data.truth[a] == data.truth[b] {
                            worst_same = worst_same.max(area);
                            same_areas.push(area);
                        } else {
                            best_cross = best_cross.min(area);
                            cross_areas.push(area);
                        }
                    }
                }
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                let (part, trace) =
                    rsc_core::cluster::hierarchical_cluster(&ens, Measure::Cr, 5).unwrap();
                let ari = adjusted_rand_index(&part.assignment, &data.truth).unwrap();
                println!(
                    "rep {rep} ari={ari:.4} same mean={:.1} max={:.1} | cross mean={:.1} min={:.1}",
                    mean(&same_areas), worst_same, mean(&cross_areas), best_cross
                );
                if ari < 0.95 {
                    println!("  assign={:?}", part.assignment);
                    for s in trace.steps.iter().filter(|s| s.n_before <= 9) {
                        println!(
                            "  N={} d={:.2} merge ({},{})",
                            s.n_before, s.dissimilarity, s.merged.0, s.merged.1
                        );
                    }
                }
            }
        }
        "bidebug" => {
            use rsc_core::depth::central_region;
            use rsc_core::eval::adjusted_rand_index;
            use rsc_core::simulate::bimodal_dataset;
            let design = BimodalDesign::default();
            let data = bimodal_dataset(&design, sub_seed(20260823, 0)).unwrap();
            println!("truth={:?}", data.truth);
            let ens = build_ensemble(
                &data.epochs,
                Some(data.channel_labels.clone()),
                design.t_freqs,
                &SmoothingConfig::default(),
            )
            .unwrap();
            let m = ens.n_channels();
            for a in 0..m {
                let curves = ens.channel_curves(a);
                let head: Vec<f64> = (0..6).map(|b| curves[0].values()[b * 80]).collect();
                println!("ch{a} curve0 sampled: {head:?}");
                let own = central_region(&curves.iter().collect::<Vec<_>>(), 0.5).unwrap();
                println!("ch{a} own area={:.1}", own.area);
            }
            for a in 0..m {
                for b in (a + 1)..m {
                    let pool: Vec<&rsc_core::spectral::Curve> = ens
                        .channel_curves(a)
                        .iter()
                        .chain(ens.channel_curves(b).iter())
                        .collect();
                    let area = central_region(&pool, 0.5).unwrap().area;
                    println!("pool ({a},{b}) area={area:.1}");
                }
            }
            let (part, _) = rsc_core::cluster::hierarchical_cluster(&ens, Measure::Cr, 2).unwrap();
            let ari = adjusted_rand_index(&part.assignment, &data.truth).unwrap();
            println!("CR assign={:?} ari={ari:.4}", part.assignment);
        }
        "bieye" => {
            use rand::SeedableRng;
            use rsc_core::depth::{functional_median, modified_band_depth};
            use rsc_core::eval::adjusted_rand_index;
            use rsc_core::simulate::{bimodal_dataset, contaminate_eyeblink};
            let design = BimodalDesign::default();
            for rep in 0..reps {
                let data = bimodal_dataset(&design, sub_seed(555, rep as u64)).unwrap();
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sub_seed(556, rep as u64));
                let (cont, mask) =
                    contaminate_eyeblink(&data, 0.25, &EyeblinkParams::default(), &mut rng)
                        .unwrap();
                let ens = build_ensemble(
                    &cont.epochs,
                    Some(data.channel_labels.clone()),
                    design.t_freqs,
                    &SmoothingConfig::default(),
                )
                .unwrap();
                let n = ens.n_epochs();
                let mut med_info = vec![];
                for ch in 0..ens.n_channels() {
                    let curves: Vec<&rsc_core::spectral::Curve> =
                        ens.channel_curves(ch).iter().collect();
                    let _depths = modified_band_depth(&curves).unwrap();
                    let med = functional_median(&curves).unwrap();
                    let contaminated = mask[ch * n + med];
                    let level = curves[med].values().iter().sum::<f64>()
                        / curves[med].values().len() as f64;
                    med_info.push(format!("{med}{}@{level:.1}", if contaminated { "c" } else { "" }));
                }
                let (part, _) =
                    rsc_core::cluster::hierarchical_cluster(&ens, Measure::Fm, 2).unwrap();
                let ari = adjusted_rand_index(&part.assignment, &data.truth).unwrap();
                println!("rep {rep} FM ari={ari:.4} medians={med_info:?}");
            }
        }
        "sd" => {
            let design = MixtureDesign::default();
            let data = simulate_mixture(&design, 123).unwrap();
            let mut count = 0usize;
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for channel in &data.epochs {
                for epoch in channel {
                    for &x in epoch.samples() {
                        count += 1;
                        let d = x - mean;
                        mean += d / count as f64;
                        m2 += d * (x - mean);
                    }
                }
            }
            println!("pooled sd = {:.3}", (m2 / (count - 1) as f64).sqrt());
        }
        "eye" => {
            use rand::SeedableRng;
            use rsc_core::depth::central_region;
            use rsc_core::eval::adjusted_rand_index;
            use rsc_core::simulate::contaminate_eyeblink;
            let design = MixtureDesign::default();
            let data = simulate_mixture(&design, 123).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
            let (cont, mask) =
                contaminate_eyeblink(&data, 0.3, &EyeblinkParams::default(), &mut rng).unwrap();
            let ens = build_ensemble(
                &cont.epochs,
                Some(data.channel_labels.clone()),
                50,
                &SmoothingConfig::default(),
            )
            .unwrap();
            let n = ens.n_epochs();
            for (a, b) in [(0usize, 1usize), (0, 5), (0, 10), (5, 6)] {
                let pool: Vec<&rsc_core::spectral::Curve> = ens
                    .channel_curves(a)
                    .iter()
                    .chain(ens.channel_curves(b).iter())
                    .collect();
                let flags: Vec<bool> = (0..n)
                    .map(|e| mask[a * n + e])
                    .chain((0..n).map(|e| mask[b * n + e]))
                    .collect();
                let region = central_region(&pool, 0.5).unwrap();
                let n_cont_members =
                    region.member_indices.iter().filter(|&&i| flags[i]).count();
                println!(
                    "pool ({a},{b}): area={:.1} members={} contaminated_in_region={} total_cont={}",
                    region.area,
                    region.member_indices.len(),
                    n_cont_members,
                    flags.iter().filter(|&&f| f).count()
                );
            }
            let (part, trace) =
                rsc_core::cluster::hierarchical_cluster(&ens, Measure::Cr, 5).unwrap();
            let ari = adjusted_rand_index(&part.assignment, &data.truth).unwrap();
            println!("CR ari={ari:.4} assign={:?}", part.assignment);
            for s in trace.steps.iter().filter(|s| s.n_before <= 10) {
                println!("  N={} d={:.2} merge ({},{})", s.n_before, s.dissimilarity, s.merged.0, s.merged.1);
            }
        }
        "mag" => {
            let mut conts = vec![];
            for (amp, noise, chg) in [
                (1.0, 0.8, 0.6),
                (1.0, 0.8, 0.7),
                (1.0, 0.8, 0.8),
                (1.0, 0.9, 0.7),
                (1.1, 0.8, 0.6),
                (1.2, 0.8, 0.7),
            ] {
                conts.push(ContaminationSpec::Eyeblink {
                    delta: 0.3,
                    params: EyeblinkParams {
                        amplitude: Some(amp),
                        noise_sd: noise,
                        channel_gain_sd: chg,
                        epoch_gain_sd: 0.5,
                        cell_gain_sd: 0.5,
                        ..EyeblinkParams::default()
                    },
                });
            }
            for bw in [None] {
                let config = BenchmarkConfig {
                    design: BenchmarkDesign::Mixture(MixtureDesign::default()),
                    t_freqs: 50,
                    smoothing: SmoothingConfig { enabled: true, bandwidth: bw },
                    contaminations: conts.clone(),
                    methods: vec![Measure::Fm, Measure::Cr, Measure::Mean],
                    k_target: 5,
                    replicates: reps,
                    seed: 20260823,
                };
                let report = run_benchmark(&config).unwrap();
                for row in &report.rows {
                    println!(
                        "bw={bw:?} {} d={} {:?}: mean_ari={:.4} sd={:.4}",
                        row.contamination, row.delta, row.method, row.mean_ari, row.sd_ari
                    );
                }
            }
        }
        "fmerr" => {
            use rsc_core::eval::adjusted_rand_index;
            let design = MixtureDesign::default();
            for rep in 0..reps {
                let seed = sub_seed(7, rep as u64);
                let data = simulate_mixture(&design, seed).unwrap();
                let ens = build_ensemble(
                    &data.epochs,
                    Some(data.channel_labels.clone()),
                    50,
                    &SmoothingConfig { enabled: true, bandwidth: Some(9.0) },
                )
                .unwrap();
                for measure in [Measure::Fm, Measure::Cr] {
                    let (part, _) =
                        rsc_core::cluster::hierarchical_cluster(&ens, measure, 5).unwrap();
                    let ari = adjusted_rand_index(&part.assignment, &data.truth).unwrap();
                    if ari < 0.999 {
                        println!("rep {rep} {measure:?} ari={ari:.4} assign={:?}", part.assignment);
                    }
                }
            }
        }
        "gcv" => {
            use rsc_core::spectral::{periodogram, select_bandwidth_gcv};
            let design = MixtureDesign::default();
            let data = simulate_mixture(&design, 123).unwrap();
            let mut picks = Vec::new();
            for ch in [0usize, 6, 12, 18, 24] {
                for ep in 0..4 {
                    let curve = periodogram(&data.epochs[ch][ep], 50).unwrap();
                    picks.push(select_bandwidth_gcv(curve.values()));
                }
            }
            println!("selected bandwidths: {picks:.3?}");
        }
        "bw" => {
            for jitter in [0.0075, 0.005] {
                for seed in [7u64, 20260823] {
                    let config = BenchmarkConfig {
                        design: BenchmarkDesign::Mixture(MixtureDesign {
                            phi1_jitter_sd: jitter,
                            ..MixtureDesign::default()
                        }),
                        t_freqs: 50,
                        smoothing: SmoothingConfig { enabled: true, bandwidth: None },
                        contaminations: vec![ContaminationSpec::None],
                        methods: vec![Measure::Fm, Measure::Cr, Measure::Mean],
                        k_target: 5,
                        replicates: reps,
                        seed,
                    };
                    let report = run_benchmark(&config).unwrap();
                    for row in &report.rows {
                        println!(
                            "jit={jitter} seed={seed} {:?}: mean_ari={:.4} sd={:.4}",
                            row.method, row.mean_ari, row.sd_ari
                        );
                    }
                }
            }
        }
        "debug" => {
            let design = MixtureDesign::default();
            let data = simulate_mixture(&design, 123).unwrap();
            println!("truth: {:?}", data.truth);
            let ens = build_ensemble(
                &data.epochs,
                Some(data.channel_labels.clone()),
                50,
                &SmoothingConfig::default(),
            )
            .unwrap();
            // Mean log-curve per channel, then pairwise distances.
            let m = ens.n_channels();
            let t = ens.grid().n_freqs;
            let means: Vec<Vec<f64>> = (0..m)
                .map(|c| {
                    let curves = ens.channel_curves(c);
                    let mut acc = vec![0.0; t];
                    for cu in curves {
                        for (a, v) in acc.iter_mut().zip(cu.values()) {
                            *a += v / curves.len() as f64;
                        }
                    }
                    acc
                })
                .collect();
            for c in [0usize, 1, 5, 10, 15, 20] {
                let head: Vec<String> =
                    means[c].iter().take(8).map(|v| format!("{v:.2}")).collect();
                println!("ch{c:02} mean log-curve head: {}", head.join(" "));
            }
            println!("pairwise mean-curve distances (chans 0,5,10,15,20 and 0,1):");
            let dist = |a: &Vec<f64>, b: &Vec<f64>| -> f64 {
                a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
            };
            for &(i, j) in &[(0usize, 1usize), (0, 2), (0, 5), (0, 10), (5, 6), (5, 10), (10, 15), (15, 20)] {
                println!("  d(ch{i:02}, ch{j:02}) = {:.3}", dist(&means[i], &means[j]));
            }
            for measure in [Measure::Fm, Measure::Cr, Measure::Mean] {
                let (part, trace) =
                    rsc_core::cluster::hierarchical_cluster(&ens, measure, 5).unwrap();
                println!("{measure:?} assignment: {:?}", part.assignment);
                let last: Vec<String> = trace
                    .steps
                    .iter()
                    .rev()
                    .take(6)
                    .map(|s| format!("N={} d={:.3} ({},{})", s.n_before, s.dissimilarity, s.merged.0, s.merged.1))
                    .collect();
                println!("  last merges: {}", last.join("  "));
            }
        }
        other => eprintln!("unknown experiment {other}"),
    }
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
