//! Black-box tests of the `rsc` binary: file formats, determinism, and exit
//! codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rsc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsc"))
}

fn small_design() -> &'static str {
    r#"{
        "design": "mixture",
        "latent_specs": [
            {"phi1": 0.8, "phi2": 0.1, "sigma_w": 1.0, "burn_in": 200},
            {"phi1": -0.1, "phi2": -0.9, "sigma_w": 1.0, "burn_in": 200}
        ],
        "weight_matrix": [[1.0, 0.0], [0.0, 1.0]],
        "m_channels": 4,
        "n_epochs": 6,
        "series_len": 256,
        "phi1_jitter_sd": 0.02
    }"#
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().unwrap();
    assert!(
        output.status.success(),
        "command failed: {}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

/// Byte-compares every file in two directories.
fn assert_dirs_identical(a: &Path, b: &Path) {
    let mut names: Vec<String> = fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let left = fs::read(a.join(&name)).unwrap();
        let right = fs::read(b.join(&name)).unwrap();
        assert_eq!(left, right, "file {name} differs between runs");
    }
}

#[test]
fn simulate_is_deterministic_and_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    write(&config, &format!(r#"{{"design": {}}}"#, small_design()));
    for out in ["a", "b"] {
        run_ok(rsc().args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "11",
            "--out",
            dir.path().join(out).to_str().unwrap(),
        ]));
    }
    assert_dirs_identical(&dir.path().join("a"), &dir.path().join("b"));
    let truth = fs::read_to_string(dir.path().join("a/truth.csv")).unwrap();
    assert!(truth.starts_with("channel_label,cluster_id\n"));
    let echoed = fs::read_to_string(dir.path().join("a/config.json")).unwrap();
    assert!(echoed.contains("\"seed\": 11"));
    let channel = fs::read_to_string(dir.path().join("a/ch00.csv")).unwrap();
    assert_eq!(channel.lines().count(), 6);
    assert_eq!(channel.lines().next().unwrap().split(',').count(), 256);
}

#[test]
fn simulate_rejects_noncausal_coefficients_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    write(
        &config,
        r#"{"design": {"design": "mixture",
            "latent_specs": [{"phi1": 1.5, "phi2": 0.9, "sigma_w": 1.0, "burn_in": 200}],
            "weight_matrix": [[1.0]], "m_channels": 2, "n_epochs": 2,
            "series_len": 64, "phi1_jitter_sd": 0.0}}"#,
    );
    let output = rsc()
        .args(["simulate", "--config", config.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("causal"));
}

#[test]
fn missing_input_path_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cluster.json");
    write(
        &config,
        &format!(
            r#"{{"input": "{}", "t_freqs": 16, "measure": "FM", "k": 2}}"#,
            dir.path().join("no_such_dir").display()
        ),
    );
    let output = rsc()
        .args(["cluster", "--config", config.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    write(&config, &format!(r#"{{"design": {}, "typo_key": 1}}"#, small_design()));
    let output = rsc()
        .args(["simulate", "--config", config.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn pipeline_simulate_estimate_cluster_elbow() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.json");
    write(&sim, &format!(r#"{{"design": {}}}"#, small_design()));
    let data = dir.path().join("data");
    run_ok(rsc().args(["simulate", "--config", sim.to_str().unwrap(), "--seed", "7", "--out"]).arg(&data));

    let est = dir.path().join("est.json");
    write(&est, &format!(r#"{{"input": "{}", "t_freqs": 32}}"#, data.display()));
    let est_out = dir.path().join("est");
    run_ok(rsc().args(["estimate", "--config", est.to_str().unwrap(), "--out"]).arg(&est_out));
    assert!(est_out.join("ensemble.json").is_file());
    assert!(fs::read_to_string(est_out.join("curves.csv"))
        .unwrap()
        .starts_with("series,freq_index,value\n"));
    let svg = fs::read_to_string(est_out.join("curves.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));

    // Cluster from the dataset directory; truth is available, so the clean
    // two-group design must recover it exactly.
    let clu = dir.path().join("clu.json");
    write(
        &clu,
        &format!(r#"{{"input": "{}", "t_freqs": 32, "measure": "FM", "k": 2}}"#, data.display()),
    );
    let clu_out = dir.path().join("clu");
    let output = run_ok(rsc().args(["cluster", "--config", clu.to_str().unwrap(), "--out"]).arg(&clu_out));
    assert!(String::from_utf8_lossy(&output.stdout).contains("ARI vs truth = 1"));
    let partition = fs::read_to_string(clu_out.join("partition.csv")).unwrap();
    assert_eq!(partition, "channel_label,cluster_id\nch00,0\nch01,0\nch02,1\nch03,1\n");
    assert!(fs::read_to_string(clu_out.join("trace.csv"))
        .unwrap()
        .starts_with("n_clusters,min_dissimilarity,merged_a,merged_b\n"));
    let medians = fs::read_to_string(clu_out.join("medians.csv")).unwrap();
    assert!(medians.contains("cluster0,") && medians.contains("cluster1,"));

    // Elbow from the saved ensemble: two well-separated groups.
    let elb = dir.path().join("elb.json");
    write(
        &elb,
        &format!(
            r#"{{"input": "{}", "measure": "CR", "k_min": 2, "k_max": 3}}"#,
            est_out.join("ensemble.json").display()
        ),
    );
    let elb_out = dir.path().join("elb");
    run_ok(rsc().args(["elbow", "--config", elb.to_str().unwrap(), "--out"]).arg(&elb_out));
    let summary = fs::read_to_string(elb_out.join("elbow.json")).unwrap();
    assert!(summary.contains("\"suggested_k\": 2"));
    assert!(fs::read_to_string(elb_out.join("elbow.csv"))
        .unwrap()
        .starts_with("n_clusters,min_dissimilarity\n"));
    assert!(elb_out.join("elbow.svg").is_file());
}

fn benchmark_config(dir: &Path) -> std::path::PathBuf {
    let config = dir.join("bench.json");
    write(
        &config,
        &format!(
            r#"{{"design": {}, "t_freqs": 32,
                "contaminations": [{{"kind": "none"}}, {{"kind": "shift", "delta": 0.3, "magnitude": 4.0}}],
                "methods": ["FM", "MEAN"], "k_target": 2, "replicates": 2, "seed": 1}}"#,
            small_design()
        ),
    );
    config
}

#[test]
fn benchmark_csv_format_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = benchmark_config(dir.path());
    let out = dir.path().join("bench");
    run_ok(rsc().args([
        "benchmark",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]));
    let csv = fs::read_to_string(out.join("benchmark.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# seed = 9, replicates = 2");
    assert_eq!(lines.next().unwrap(), "contamination,delta,method,mean_ari,sd_ari,seconds");
    // 2 contaminations x 2 methods.
    assert_eq!(lines.count(), 4);
}

#[test]
fn benchmark_reruns_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = benchmark_config(dir.path());
    let mut tables = Vec::new();
    for (out, threads) in [("t1", "1"), ("t4", "4")] {
        let out = dir.path().join(out);
        run_ok(rsc().args([
            "benchmark",
            "--config",
            config.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]));
        // The seconds column is wall time; compare the statistical columns.
        let csv = fs::read_to_string(out.join("benchmark.csv")).unwrap();
        let stats: Vec<String> = csv
            .lines()
            .map(|l| l.rsplit_once(',').map_or_else(|| l.to_string(), |(head, _)| head.to_string()))
            .collect();
        tables.push(stats);
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn rsc_threads_env_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let config = benchmark_config(dir.path());
    let out = dir.path().join("env");
    let mut cmd = rsc();
    cmd.env("RSC_THREADS", "2");
    run_ok(cmd.args(["benchmark", "--config", config.to_str().unwrap(), "--out"]).arg(&out));
    let mut bad = rsc();
    bad.env("RSC_THREADS", "zero");
    let output = bad
        .args(["benchmark", "--config", config.to_str().unwrap(), "--out"])
        .arg(dir.path().join("env2"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn windows_reports_matrix_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("win.json");
    write(
        &config,
        &format!(
            r#"{{"design": {}, "window_epochs": 10, "step_epochs": 10, "k": 2,
                "methods": ["FM", "CR"], "t_freqs": 16}}"#,
            small_design().replace(r#""n_epochs": 6"#, r#""n_epochs": 40"#)
        ),
    );
    let out = dir.path().join("win");
    run_ok(rsc().args(["windows", "--config", config.to_str().unwrap(), "--seed", "3", "--out"]).arg(&out));
    for method in ["fm", "cr"] {
        let matrix = fs::read_to_string(out.join(format!("ari_matrix_{method}.csv"))).unwrap();
        let rows: Vec<Vec<f64>> = matrix
            .lines()
            .skip(1) // seed header
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        // 40 epochs, 10-epoch windows at step 10 -> starts 0,10,20.
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), 3);
            assert_eq!(row[i], 1.0);
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, rows[j][i]);
            }
        }
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("# seed = 3\nmethod,median,iqr\n"));
}
