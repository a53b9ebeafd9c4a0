//! End-to-end acceptance gates that drive the compiled binary: planted
//! coordination recovery on the full-size synthetic corpus, and
//! byte-determinism of the artifacts across thread counts and reruns.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coordscope"))
}

fn run_ok(mut cmd: Command) -> std::process::Output {
    let output = cmd.output().expect("spawn coordscope");
    assert!(
        output.status.success(),
        "command failed: {:?}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

#[test]
fn criterion_2_planted_coordination_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let manifest_path = dir.path().join("manifest.json");
    let out_dir = dir.path().join("out");

    let mut synth = binary();
    synth
        .args(["synth", "--stars", "5", "--spokes", "20", "--pastas", "5"])
        .args(["--copies", "10", "--mutation-rate", "0.02", "--noise", "50000"])
        .args(["--seed", "42"])
        .arg("--out")
        .arg(&corpus)
        .arg("--manifest")
        .arg(&manifest_path);
    run_ok(synth);

    let started = Instant::now();
    let mut all = binary();
    all.arg("all")
        .arg("--corpus")
        .arg(&corpus)
        .arg("--out-dir")
        .arg(&out_dir)
        .args(["--seed", "42"]);
    run_ok(all);
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "`all` took {elapsed:?}, budget is 60 s"
    );

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("rapid_report.json")).unwrap())
            .unwrap();
    let clusters: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("copypasta_clusters.json")).unwrap(),
    )
    .unwrap();

    // hub recovery: precision = recall = 1.0 against the manifest
    let planted_hubs: BTreeSet<String> = manifest["stars"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["hub_author"].as_str().unwrap().to_string())
        .collect();
    let found_hubs: BTreeSet<String> = report["hubs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["author_id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(planted_hubs, found_hubs, "hub precision/recall must be 1.0");
    assert_eq!(planted_hubs.len(), 5);

    // cluster recovery: member sets match the manifest exactly
    let planted_clusters: BTreeSet<BTreeSet<String>> = manifest["pastas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            p["member_tweet_ids"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_str().unwrap().to_string())
                .collect()
        })
        .collect();
    let found_clusters: BTreeSet<BTreeSet<String>> = clusters["clusters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            c["members"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_str().unwrap().to_string())
                .collect()
        })
        .collect();
    assert_eq!(
        planted_clusters, found_clusters,
        "cluster precision/recall must be 1.0"
    );
    assert_eq!(planted_clusters.len(), 5);

    println!(
        "[PASS] criterion 2: 5/5 hubs and 5/5 clusters recovered exactly on the 50k-noise corpus; `all` ran in {elapsed:?}"
    );
}

fn artifact_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        // wall time differs run to run by design
        .filter(|n| n != "run_summary.json")
        .collect();
    names.sort();
    names
}

fn assert_dirs_identical(a: &Path, b: &Path) {
    let names_a = artifact_files(a);
    let names_b = artifact_files(b);
    assert_eq!(names_a, names_b, "artifact sets differ");
    for name in &names_a {
        let bytes_a = std::fs::read(a.join(name)).unwrap();
        let bytes_b = std::fs::read(b.join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "artifact {name} differs");
    }
}

#[test]
fn criterion_8_artifacts_are_byte_identical_across_threads_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let mut synth = binary();
    synth
        .args(["synth", "--stars", "2", "--spokes", "12", "--pastas", "2"])
        .args(["--copies", "8", "--noise", "3000", "--seed", "11"])
        .arg("--out")
        .arg(&corpus)
        .arg("--manifest")
        .arg(dir.path().join("manifest.json"));
    run_ok(synth);

    let out_t1 = dir.path().join("out_t1");
    let out_t8 = dir.path().join("out_t8");
    let out_rerun = dir.path().join("out_rerun");
    for (out, threads) in [(&out_t1, "1"), (&out_t8, "8"), (&out_rerun, "1")] {
        let mut all = binary();
        all.arg("all")
            .arg("--corpus")
            .arg(&corpus)
            .arg("--out-dir")
            .arg(out)
            .args(["--seed", "42", "--threads", threads]);
        run_ok(all);
    }

    assert_dirs_identical(&out_t1, &out_t8);
    assert_dirs_identical(&out_t1, &out_rerun);

    // the summary still exists in each run directory
    for out in [&out_t1, &out_t8, &out_rerun] {
        assert!(out.join("run_summary.json").exists());
    }

    println!(
        "[PASS] criterion 8: artifacts byte-identical at --threads 1 vs --threads 8 and across reruns (summary excepted)"
    );
}

#[test]
fn missing_input_exits_2_naming_the_field() {
    let mut cmd = binary();
    cmd.args(["all", "--corpus", "/definitely/absent.jsonl"]);
    let output = cmd.output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("input.corpus"),
        "stderr must name the field: {stderr}"
    );
}

#[test]
fn pipeline_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("broken.jsonl");
    std::fs::write(&corpus, "this is not json\n").unwrap();
    let mut cmd = binary();
    cmd.arg("ingest-stats")
        .arg("--corpus")
        .arg(&corpus)
        .arg("--out")
        .arg(dir.path().join("stats.json"));
    let output = cmd.output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn bad_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[rapid_retweet]\nwindows = 1\n").unwrap();
    let mut cmd = binary();
    cmd.arg("--config")
        .arg(&config)
        .args(["synth", "--noise", "1"])
        .arg("--out")
        .arg(dir.path().join("c.jsonl"))
        .arg("--manifest")
        .arg(dir.path().join("m.json"));
    let output = cmd.output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_file_values_flow_into_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let mut synth = binary();
    synth
        .args(["synth", "--stars", "1", "--spokes", "6", "--pastas", "0"])
        .args(["--noise", "200", "--seed", "5"])
        .arg("--out")
        .arg(&corpus)
        .arg("--manifest")
        .arg(dir.path().join("m.json"));
    run_ok(synth);

    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "[input]\ncorpus = {:?}\n[output]\ndir = {:?}\n[rapid_retweet]\nmin_spokes = 6\n",
            corpus,
            dir.path().join("cfg_out")
        ),
    )
    .unwrap();
    let mut all = binary();
    all.arg("--config").arg(&config).arg("all");
    run_ok(all);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cfg_out").join("rapid_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["hubs"].as_array().unwrap().len(), 1);
}

#[test]
fn standalone_subcommands_produce_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let mut synth = binary();
    synth
        .args(["synth", "--stars", "1", "--spokes", "12", "--pastas", "1"])
        .args(["--copies", "6", "--noise", "400", "--seed", "21"])
        .arg("--out")
        .arg(&corpus)
        .arg("--manifest")
        .arg(dir.path().join("manifest.json"));
    run_ok(synth);

    let stats = dir.path().join("stats.json");
    let mut cmd = binary();
    cmd.arg("ingest-stats").arg("--corpus").arg(&corpus).arg("--out").arg(&stats);
    run_ok(cmd);
    assert!(stats.exists());

    let edges = dir.path().join("rapid_edges.csv");
    let report = dir.path().join("rapid_report.json");
    let gexf = dir.path().join("rapid.gexf");
    let mut cmd = binary();
    cmd.args(["rapid-retweets", "--window", "60", "--min-weight", "2"])
        .arg("--corpus")
        .arg(&corpus)
        .arg("--out")
        .arg(&edges)
        .arg("--report")
        .arg(&report)
        .arg("--gexf")
        .arg(&gexf);
    run_ok(cmd);
    assert!(edges.exists() && report.exists() && gexf.exists());
    let gexf_body = std::fs::read_to_string(&gexf).unwrap();
    assert!(gexf_body.contains("in_degree"));

    let clusters = dir.path().join("clusters.json");
    let cp_edges = dir.path().join("cp_edges.csv");
    let hist = dir.path().join("hist.csv");
    let mut cmd = binary();
    cmd.args(["copypasta", "--window", "10", "--threshold", "0.7"])
        .arg("--corpus")
        .arg(&corpus)
        .arg("--out")
        .arg(&clusters)
        .arg("--edges")
        .arg(&cp_edges)
        .arg("--hist")
        .arg(&hist);
    run_ok(cmd);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&clusters).unwrap()).unwrap();
    assert_eq!(parsed["threshold"], 0.7);
    assert_eq!(parsed["clusters"].as_array().unwrap().len(), 1);
    let hist_body = std::fs::read_to_string(&hist).unwrap();
    assert!(hist_body.starts_with("population,bin_lo,bin_hi,count"));

    let htemap_gexf = dir.path().join("htemap.gexf");
    let nwk = dir.path().join("htemap.nwk");
    let htemap_report = dir.path().join("htemap.json");
    let mut cmd = binary();
    cmd.arg("htemap")
        .arg("--corpus")
        .arg(&corpus)
        .arg("--out")
        .arg(&htemap_gexf)
        .arg("--dendrogram")
        .arg(&nwk)
        .arg("--report")
        .arg(&htemap_report);
    run_ok(cmd);
    assert!(htemap_gexf.exists() && nwk.exists() && htemap_report.exists());
    let nwk_body = std::fs::read_to_string(&nwk).unwrap();
    assert!(nwk_body.trim_end().ends_with(';'));
}

#[test]
fn synth_same_seed_same_bytes_cli() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let mut synth = binary();
        synth
            .args(["synth", "--noise", "300", "--seed", "99"])
            .arg("--out")
            .arg(dir.path().join(format!("{name}.jsonl")))
            .arg("--manifest")
            .arg(dir.path().join(format!("{name}.json")));
        run_ok(synth);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_hash_tracks_semantic_parameters_only() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let mut synth = binary();
    synth
        .args(["synth", "--stars", "0", "--pastas", "0", "--noise", "120", "--seed", "3"])
        .arg("--out")
        .arg(&corpus)
        .arg("--manifest")
        .arg(dir.path().join("m.json"));
    run_ok(synth);

    let hash_of = |out: &Path, extra: &[&str]| -> String {
        let mut all = binary();
        all.arg("all").arg("--corpus").arg(&corpus).arg("--out-dir").arg(out);
        for arg in extra {
            all.arg(arg);
        }
        run_ok(all);
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("run_summary.json")).unwrap(),
        )
        .unwrap();
        summary["config_hash"].as_str().unwrap().to_string()
    };

    let base = hash_of(&dir.path().join("o1"), &[]);
    let thread_change = hash_of(&dir.path().join("o2"), &["--threads", "4"]);
    let window_change = hash_of(&dir.path().join("o3"), &["--window", "30"]);
    assert_eq!(base, thread_change, "thread count is not semantic");
    assert_ne!(base, window_change, "window is semantic");
}
