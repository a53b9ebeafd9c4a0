//! Pipeline execution and artifact assembly. Every artifact is written
//! atomically (temp file + rename) and each run drops a machine-readable
//! summary with the tool version, a semantic config hash, input digests,
//! and wall time.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use coordscope::copypasta::{
    self, build_copypasta_network, fringe_and_generic_samples, scan_population, select_threshold,
    sharing_activity_proportions, sliding_window_scan_binned, SimilarityHistogram,
    FALLBACK_THRESHOLD,
};
use coordscope::export::{edges_to_csv, gexf_for_digraph, gexf_for_graph, AttrValue};
use coordscope::htemap::{bridge_edges, htemap_dendrogram, run_htemap as htemap_pipeline, HtemapParams};
use coordscope::ingest::{
    join_annotations, load_corpus, AnnotationStore, Corpus, CorpusStats, CoverageReport, FieldMap,
    HashtagVocabulary, LoadOptions, LoadReport,
};
use coordscope::rapid_retweet::{
    amplification_report, build_rapid_retweet_network, RapidRetweetConfig,
};
use coordscope::synth::{generate, to_jsonl, SynthConfig};

use crate::config::{RunConfig, ThresholdChoice};

/// Write bytes to `path` via a temp sibling and an atomic rename, so the
/// artifact is either complete or absent.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_atomic(path, body.as_bytes())
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config_hash: String,
    input_digests: BTreeMap<String, String>,
    seed: u64,
    threads: usize,
    wall_time_ms: u128,
}

fn write_summary(
    dir: &Path,
    subcommand: &str,
    config: &RunConfig,
    inputs: &[&Path],
    started: Instant,
) -> Result<()> {
    let mut input_digests = BTreeMap::new();
    for path in inputs {
        input_digests.insert(path.display().to_string(), sha256_file(path)?);
    }
    let summary = RunSummary {
        tool: "coordscope",
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        config_hash: config_hash(config),
        input_digests,
        seed: config.seed,
        threads: config.threads,
        wall_time_ms: started.elapsed().as_millis(),
    };
    write_json(&dir.join("run_summary.json"), &summary)
}

/// Everything the analysis subcommands need in memory.
pub struct LoadedInputs {
    pub corpus: Corpus,
    pub stats: CorpusStats,
    pub load_report: LoadReport,
    pub vocabulary: HashtagVocabulary,
    pub annotations: AnnotationStore,
    pub coverage: Option<CoverageReport>,
}

pub fn load_inputs(config: &RunConfig) -> Result<LoadedInputs> {
    let vocabulary = match &config.vocabulary_path {
        Some(path) => {
            let raw = fs::read_to_string(path)
                .with_context(|| format!("reading vocabulary {}", path.display()))?;
            HashtagVocabulary::from_lines(&raw)?
        }
        None => HashtagVocabulary::new(config.vocabulary_tags.clone())?,
    };
    let field_map = match &config.field_map_path {
        Some(path) => {
            let raw = fs::read_to_string(path)
                .with_context(|| format!("reading field map {}", path.display()))?;
            toml::from_str::<FieldMap>(&raw)
                .with_context(|| format!("parsing field map {}", path.display()))?
        }
        None => FieldMap::default(),
    };
    let corpus_path = config
        .corpus
        .as_ref()
        .expect("validated: corpus path present");
    let options = LoadOptions {
        bad_line_budget: config.bad_line_budget,
        field_map,
    };
    let (corpus, mut stats, load_report) = load_corpus(corpus_path, &vocabulary, &options)?;
    log_line!(
        info,
        "loaded {} records from {} ({} bad lines tolerated)",
        corpus.len(),
        corpus_path.display(),
        load_report.bad_lines.len()
    );

    let (annotations, coverage) =
        if config.user_labels.is_some() || config.tweet_stories.is_some() {
            let (store, coverage) = join_annotations(
                &corpus,
                config.user_labels.as_deref(),
                config.tweet_stories.as_deref(),
            )?;
            stats.labeled_user_coverage = Some(coverage.user_coverage);
            (store, Some(coverage))
        } else {
            (AnnotationStore::default(), None)
        };

    Ok(LoadedInputs {
        corpus,
        stats,
        load_report,
        vocabulary,
        annotations,
        coverage,
    })
}

fn input_paths(config: &RunConfig) -> Vec<&Path> {
    let mut paths = Vec::new();
    for p in [
        &config.corpus,
        &config.vocabulary_path,
        &config.user_labels,
        &config.tweet_stories,
        &config.field_map_path,
    ]
    .into_iter()
    .flatten()
    {
        paths.push(p.as_path());
    }
    paths
}

#[derive(Debug, Serialize)]
struct IngestStatsArtifact<'a> {
    stats: &'a CorpusStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    coverage: &'a Option<CoverageReport>,
    bad_lines: &'a [String],
}

pub fn run_ingest_stats(config: &RunConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let inputs = load_inputs(config)?;
    write_json(
        out,
        &IngestStatsArtifact {
            stats: &inputs.stats,
            coverage: &inputs.coverage,
            bad_lines: &inputs.load_report.bad_lines,
        },
    )?;
    let dir = out.parent().unwrap_or(Path::new("."));
    write_summary(dir, "ingest-stats", config, &input_paths(config), started)?;
    log_line!(info, "wrote {}", out.display());
    Ok(())
}

pub struct RapidOutputs {
    pub edges_csv: PathBuf,
    pub report_json: PathBuf,
    pub gexf: Option<PathBuf>,
}

pub fn run_rapid_retweets(config: &RunConfig, outs: &RapidOutputs) -> Result<()> {
    let started = Instant::now();
    let inputs = load_inputs(config)?;
    rapid_retweets_with(config, &inputs, outs)?;
    let dir = outs.report_json.parent().unwrap_or(Path::new("."));
    write_summary(dir, "rapid-retweets", config, &input_paths(config), started)?;
    Ok(())
}

fn rapid_retweets_with(config: &RunConfig, inputs: &LoadedInputs, outs: &RapidOutputs) -> Result<()> {
    let rapid_config = RapidRetweetConfig {
        window_seconds: config.window_seconds,
        min_edge_weight: config.min_edge_weight,
    };
    let network = build_rapid_retweet_network(&inputs.corpus, &rapid_config)?;
    let report = amplification_report(
        &network,
        &inputs.corpus,
        &inputs.annotations,
        &inputs.vocabulary,
        config.min_spokes,
    );
    log_line!(
        info,
        "rapid-retweet network: {} nodes, {} edges, {} hubs",
        report.nodes,
        report.edges,
        report.hubs.len()
    );
    write_atomic(&outs.edges_csv, edges_to_csv(&network.graph.edges()).as_bytes())?;
    write_json(&outs.report_json, &report)?;
    if let Some(gexf_path) = &outs.gexf {
        let graph = &network.graph;
        let doc = gexf_for_digraph(graph, &["in_degree", "label"], |id| {
            let in_degree = graph
                .index_of(id)
                .map(|i| graph.in_degree(i) as i64)
                .unwrap_or(0);
            vec![
                AttrValue::Long(in_degree),
                AttrValue::Str(inputs.annotations.user_label(id).as_str().to_string()),
            ]
        });
        write_atomic(gexf_path, doc.as_bytes())?;
    }
    Ok(())
}

pub struct CopypastaOutputs {
    pub clusters_json: PathBuf,
    pub edges_csv: PathBuf,
    pub hist_csv: PathBuf,
    pub gexf: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CopypastaReport<'a> {
    threshold: f64,
    threshold_mode: &'static str,
    scanned_tweets: usize,
    scored_pairs: u64,
    clusters: &'a [copypasta::CopypastaCluster],
    sharing_activity: BTreeMap<String, BTreeMap<String, f64>>,
}

pub fn run_copypasta(config: &RunConfig, outs: &CopypastaOutputs) -> Result<()> {
    let started = Instant::now();
    let inputs = load_inputs(config)?;
    copypasta_with(config, &inputs, outs)?;
    let dir = outs.clusters_json.parent().unwrap_or(Path::new("."));
    write_summary(dir, "copypasta", config, &input_paths(config), started)?;
    Ok(())
}

fn copypasta_with(config: &RunConfig, inputs: &LoadedInputs, outs: &CopypastaOutputs) -> Result<()> {
    let population = scan_population(&inputs.corpus);
    // collect every scored pair once; the edge cut is applied afterwards so
    // auto-selection can look at the full histogram
    let (all_pairs, histogram) =
        sliding_window_scan_binned(&population, config.copypasta_window, 0.0, config.histogram_bins)?;
    let (threshold, mode) = match config.copypasta_threshold {
        ThresholdChoice::Fixed(value) => (value, "fixed"),
        ThresholdChoice::Auto if histogram.total() == 0 => {
            log_line!(
                warn,
                "no scored pairs; falling back to threshold {FALLBACK_THRESHOLD}"
            );
            (FALLBACK_THRESHOLD, "fallback")
        }
        ThresholdChoice::Auto => {
            let selection = select_threshold(&histogram)?;
            if !selection.bimodal {
                log_line!(
                    warn,
                    "similarity histogram is not bimodal; falling back to threshold {}",
                    selection.threshold
                );
                (selection.threshold, "fallback")
            } else {
                (selection.threshold, "auto")
            }
        }
    };
    log_line!(
        info,
        "copypasta scan: {} tweets, {} pairs, threshold {threshold} ({mode})",
        population.len(),
        histogram.total()
    );
    let edges: Vec<_> = all_pairs
        .into_iter()
        .filter(|e| e.score > threshold)
        .collect();
    let (graph, clusters) =
        build_copypasta_network(&edges, &inputs.corpus, &inputs.annotations, &inputs.vocabulary);

    // Fig-4a-style comparison histograms over fringe tweets and an
    // equal-size seeded sample of non-fringe tweets.
    let (fringe, generic) =
        fringe_and_generic_samples(&population, &inputs.corpus, &inputs.vocabulary, config.seed);
    let fringe_hist = if fringe.len() >= 2 {
        sliding_window_scan_binned(&fringe, config.copypasta_window, 2.0, config.histogram_bins)?.1
    } else {
        SimilarityHistogram::new(config.histogram_bins)
    };
    let generic_hist = if generic.len() >= 2 {
        sliding_window_scan_binned(&generic, config.copypasta_window, 2.0, config.histogram_bins)?.1
    } else {
        SimilarityHistogram::new(config.histogram_bins)
    };

    // sharing-activity proportions for the non-empty populations
    let copypasta_ids: std::collections::BTreeSet<&str> = clusters
        .iter()
        .flat_map(|c| c.members.iter().map(|s| s.as_str()))
        .collect();
    let copypasta_tweets: Vec<_> = population
        .iter()
        .copied()
        .filter(|r| copypasta_ids.contains(r.tweet_id.as_str()))
        .collect();
    let mut sets: Vec<(&str, &[&coordscope::TweetRecord])> = Vec::new();
    if !generic.is_empty() {
        sets.push(("generic", &generic));
    }
    if !fringe.is_empty() {
        sets.push(("fringe", &fringe));
    }
    if !copypasta_tweets.is_empty() {
        sets.push(("copypasta", &copypasta_tweets));
    }
    let sharing_activity = sharing_activity_proportions(&sets)?;

    let edge_rows: Vec<(String, String, f64)> = edges
        .iter()
        .map(|e| (e.tweet_id_a.clone(), e.tweet_id_b.clone(), e.score))
        .collect();
    write_atomic(&outs.edges_csv, edges_to_csv(&edge_rows).as_bytes())?;
    write_atomic(
        &outs.hist_csv,
        histograms_to_csv(&[
            ("scanned", &histogram),
            ("fringe", &fringe_hist),
            ("generic", &generic_hist),
        ])
        .as_bytes(),
    )?;
    write_json(
        &outs.clusters_json,
        &CopypastaReport {
            threshold,
            threshold_mode: mode,
            scanned_tweets: population.len(),
            scored_pairs: histogram.total(),
            clusters: &clusters,
            sharing_activity,
        },
    )?;
    if let Some(gexf_path) = &outs.gexf {
        let doc = gexf_for_graph(&graph, &[], |_| Vec::new());
        write_atomic(gexf_path, doc.as_bytes())?;
    }
    log_line!(info, "copypasta: {} edges, {} clusters", edges.len(), clusters.len());
    Ok(())
}

fn histograms_to_csv(populations: &[(&str, &SimilarityHistogram)]) -> String {
    let mut out = String::from("population,bin_lo,bin_hi,count\n");
    for (name, hist) in populations {
        let width = 1.0 / hist.bins as f64;
        for (idx, &count) in hist.counts.iter().enumerate() {
            let lo = idx as f64 * width;
            let hi = (idx + 1) as f64 * width;
            out.push_str(&format!("{name},{lo},{hi},{count}\n"));
        }
    }
    out
}

pub struct HtemapOutputs {
    pub gexf: PathBuf,
    pub dendrogram_nwk: PathBuf,
    pub report_json: PathBuf,
}

#[derive(Debug, Serialize)]
struct HtemapReport {
    nodes: usize,
    edges: usize,
    communities: BTreeMap<String, usize>,
    centrality_ranking: Vec<CentralityEntry>,
    median_dates: BTreeMap<String, String>,
    bridge_edges: Vec<BridgeEdge>,
}

#[derive(Debug, Serialize)]
struct CentralityEntry {
    hashtag: String,
    score: f64,
}

#[derive(Debug, Serialize)]
struct BridgeEdge {
    a: String,
    b: String,
    weight: f64,
}

pub fn run_htemap(config: &RunConfig, outs: &HtemapOutputs) -> Result<()> {
    let started = Instant::now();
    let inputs = load_inputs(config)?;
    htemap_with(config, &inputs, outs)?;
    let dir = outs.report_json.parent().unwrap_or(Path::new("."));
    write_summary(dir, "htemap", config, &input_paths(config), started)?;
    Ok(())
}

fn htemap_with(config: &RunConfig, inputs: &LoadedInputs, outs: &HtemapOutputs) -> Result<()> {
    let params = HtemapParams {
        louvain_seed: config.seed,
        resolution: config.resolution,
        ..Default::default()
    };
    let (network, _tagsets, _trees) = htemap_pipeline(&inputs.corpus, &inputs.vocabulary, &params)?;
    log_line!(
        info,
        "htemap network: {} hashtags, {} edges",
        network.graph.node_count(),
        network.graph.edge_count()
    );

    let doc = gexf_for_graph(&network.graph, &["centrality", "community", "median_date"], |id| {
        vec![
            AttrValue::Double(network.centrality.get(id).copied().unwrap_or(0.0)),
            AttrValue::Long(network.communities.get(id).map(|&c| c as i64).unwrap_or(-1)),
            AttrValue::Str(
                network
                    .median_dates
                    .get(id)
                    .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
                    .unwrap_or_default(),
            ),
        ]
    });
    write_atomic(&outs.gexf, doc.as_bytes())?;

    match htemap_dendrogram(&network, config.linkage, config.metric) {
        Ok(dendrogram) => {
            let mut newick = dendrogram.to_newick();
            newick.push('\n');
            write_atomic(&outs.dendrogram_nwk, newick.as_bytes())?;
        }
        Err(err) => {
            // an undersized network is reportable, not fatal
            log_line!(warn, "dendrogram skipped: {err}");
        }
    }

    let mut centrality_ranking: Vec<CentralityEntry> = network
        .centrality
        .iter()
        .map(|(hashtag, &score)| CentralityEntry {
            hashtag: hashtag.clone(),
            score,
        })
        .collect();
    centrality_ranking.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| a.hashtag.cmp(&b.hashtag))
    });
    let report = HtemapReport {
        nodes: network.graph.node_count(),
        edges: network.graph.edge_count(),
        communities: network.communities.clone(),
        centrality_ranking,
        median_dates: network
            .median_dates
            .iter()
            .map(|(k, v)| (k.clone(), v.format("%Y-%m-%dT%H:%M:%SZ").to_string()))
            .collect(),
        bridge_edges: bridge_edges(&network)
            .into_iter()
            .map(|(a, b, weight)| BridgeEdge { a, b, weight })
            .collect(),
    };
    write_json(&outs.report_json, &report)?;
    Ok(())
}

pub struct SynthOutputs {
    pub corpus_jsonl: PathBuf,
    pub manifest_json: PathBuf,
}

pub fn run_synth(config: &RunConfig, synth: &SynthConfig, outs: &SynthOutputs) -> Result<()> {
    let started = Instant::now();
    let (records, manifest) = generate(synth)?;
    write_atomic(&outs.corpus_jsonl, to_jsonl(&records).as_bytes())?;
    write_json(&outs.manifest_json, &manifest)?;
    log_line!(
        info,
        "synthesized {} tweets ({} stars, {} chains, {} noise)",
        manifest.total_tweets,
        manifest.stars.len(),
        manifest.pastas.len(),
        manifest.noise_tweets
    );
    let dir = outs.corpus_jsonl.parent().unwrap_or(Path::new("."));
    write_summary(dir, "synth", config, &[], started)?;
    Ok(())
}

/// Run every analysis pipeline into one output directory.
pub fn run_all(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let started = Instant::now();
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let inputs = load_inputs(config)?;

    write_json(
        &out_dir.join("stats.json"),
        &IngestStatsArtifact {
            stats: &inputs.stats,
            coverage: &inputs.coverage,
            bad_lines: &inputs.load_report.bad_lines,
        },
    )?;
    rapid_retweets_with(
        config,
        &inputs,
        &RapidOutputs {
            edges_csv: out_dir.join("rapid_edges.csv"),
            report_json: out_dir.join("rapid_report.json"),
            gexf: Some(out_dir.join("rapid_network.gexf")),
        },
    )?;
    copypasta_with(
        config,
        &inputs,
        &CopypastaOutputs {
            clusters_json: out_dir.join("copypasta_clusters.json"),
            edges_csv: out_dir.join("copypasta_edges.csv"),
            hist_csv: out_dir.join("copypasta_hist.csv"),
            gexf: Some(out_dir.join("copypasta_network.gexf")),
        },
    )?;
    htemap_with(
        config,
        &inputs,
        &HtemapOutputs {
            gexf: out_dir.join("htemap.gexf"),
            dendrogram_nwk: out_dir.join("htemap.nwk"),
            report_json: out_dir.join("htemap.json"),
        },
    )?;
    write_summary(out_dir, "all", config, &input_paths(config), started)?;
    log_line!(info, "all artifacts written to {}", out_dir.display());
    Ok(())
}
