//! coordscope: batch coordination forensics over tweet dumps.
//!
//! Exit codes: 0 success, 1 pipeline error, 2 configuration error.

mod config;
#[macro_use]
mod logging;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, FileConfig, RunConfig, ThresholdChoice};
use coordscope::synth::SynthConfig;
use runner::{CopypastaOutputs, HtemapOutputs, RapidOutputs, SynthOutputs};

#[derive(Debug, Parser)]
#[command(name = "coordscope", version, about = "Coordination forensics for social-media corpora")]
struct Cli {
    /// TOML config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for the similarity scan (0 = automatic). Never
    /// changes outputs.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed driving every randomized step (Louvain order, sampling, synth).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct InputArgs {
    /// Newline-delimited JSON corpus (optionally .gz).
    #[arg(long)]
    corpus: Option<PathBuf>,

    /// Hashtag vocabulary file, one tag per line (default: built-in 19).
    #[arg(long)]
    vocab: Option<PathBuf>,

    /// user_id,label CSV (labels: promoter / detractor).
    #[arg(long)]
    user_labels: Option<PathBuf>,

    /// tweet_id,story CSV.
    #[arg(long)]
    tweet_stories: Option<PathBuf>,

    /// TOML file remapping the corpus JSON field names.
    #[arg(long)]
    field_map: Option<PathBuf>,

    /// Unparseable lines tolerated before the load aborts.
    #[arg(long)]
    bad_line_budget: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a corpus and emit counts, kind fractions, and coverage.
    IngestStats {
        #[command(flatten)]
        input: InputArgs,
        /// Output stats JSON.
        #[arg(long, default_value = "stats.json")]
        out: PathBuf,
    },
    /// Build the rapid-retweet network and its amplification report.
    RapidRetweets {
        #[command(flatten)]
        input: InputArgs,
        /// Rapid window in seconds.
        #[arg(long)]
        window: Option<i64>,
        /// Minimum surviving edge weight.
        #[arg(long)]
        min_weight: Option<u64>,
        /// In-degree floor for star hubs.
        #[arg(long)]
        min_spokes: Option<usize>,
        /// Edge list CSV.
        #[arg(long, default_value = "edges.csv")]
        out: PathBuf,
        /// Amplification report JSON.
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
        /// Optional GEXF export with {in_degree, label} attributes.
        #[arg(long)]
        gexf: Option<PathBuf>,
    },
    /// Detect near-duplicate chains and build the copypasta network.
    Copypasta {
        #[command(flatten)]
        input: InputArgs,
        /// Sliding window size in tweets.
        #[arg(long)]
        window: Option<usize>,
        /// `auto` or a fixed similarity threshold in [0,1].
        #[arg(long)]
        threshold: Option<ThresholdChoice>,
        /// Clusters JSON.
        #[arg(long, default_value = "clusters.json")]
        out: PathBuf,
        /// Similarity edge list CSV.
        #[arg(long, default_value = "edges.csv")]
        edges: PathBuf,
        /// Score histograms CSV (scanned / fringe / generic populations).
        #[arg(long, default_value = "hist.csv")]
        hist: PathBuf,
        /// Optional GEXF export of the tweet similarity network.
        #[arg(long)]
        gexf: Option<PathBuf>,
    },
    /// Map hashtag relationships and temporal evolution.
    Htemap {
        #[command(flatten)]
        input: InputArgs,
        /// GEXF export with {centrality, community, median_date}.
        #[arg(long, default_value = "htemap.gexf")]
        out: PathBuf,
        /// Newick dendrogram.
        #[arg(long, default_value = "htemap.nwk")]
        dendrogram: PathBuf,
        /// Report JSON (communities, centrality ranking, bridges).
        #[arg(long, default_value = "htemap.json")]
        report: PathBuf,
        /// Louvain resolution.
        #[arg(long)]
        resolution: Option<f64>,
        /// Dendrogram linkage: average, single, complete.
        #[arg(long)]
        linkage: Option<String>,
        /// Dendrogram metric: euclidean, cityblock.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Generate a synthetic corpus with planted coordination.
    Synth {
        /// Planted star bursts.
        #[arg(long, default_value_t = 5)]
        stars: usize,
        /// Spoke accounts per star.
        #[arg(long, default_value_t = 20)]
        spokes: usize,
        /// Source tweets per star (the surviving edge weight).
        #[arg(long, default_value_t = 2)]
        sources: usize,
        /// Planted copypasta chains.
        #[arg(long, default_value_t = 5)]
        pastas: usize,
        /// Copies per chain.
        #[arg(long, default_value_t = 10)]
        copies: usize,
        /// Per-character mutation probability for copies.
        #[arg(long, default_value_t = 0.02)]
        mutation_rate: f64,
        /// Background tweets.
        #[arg(long, default_value_t = 1000)]
        noise: usize,
        /// Author pool size for noise and copies.
        #[arg(long, default_value_t = 1000)]
        authors: usize,
        /// Corpus JSONL path.
        #[arg(long, default_value = "corpus.jsonl")]
        out: PathBuf,
        /// Ground-truth manifest path.
        #[arg(long, default_value = "manifest.json")]
        manifest: PathBuf,
    },
    /// Run ingest-stats, rapid-retweets, copypasta, and htemap into one
    /// output directory.
    All {
        #[command(flatten)]
        input: InputArgs,
        /// Output directory for every artifact (default: `out`, or the
        /// config file's [output] dir).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Rapid window in seconds.
        #[arg(long)]
        window: Option<i64>,
        /// Minimum surviving rapid edge weight.
        #[arg(long)]
        min_weight: Option<u64>,
        /// Copypasta threshold: `auto` or fixed.
        #[arg(long)]
        threshold: Option<ThresholdChoice>,
    },
}

fn apply_input_args(config: &mut RunConfig, input: &InputArgs) {
    if let Some(v) = &input.corpus {
        config.corpus = Some(v.clone());
    }
    if let Some(v) = &input.vocab {
        config.vocabulary_path = Some(v.clone());
    }
    if let Some(v) = &input.user_labels {
        config.user_labels = Some(v.clone());
    }
    if let Some(v) = &input.tweet_stories {
        config.tweet_stories = Some(v.clone());
    }
    if let Some(v) = &input.field_map {
        config.field_map_path = Some(v.clone());
    }
    if let Some(v) = input.bad_line_budget {
        config.bad_line_budget = v;
    }
}

fn resolve_config(cli: &Cli) -> Result<(RunConfig, Option<PathBuf>), ConfigError> {
    let mut config = RunConfig::default();
    let mut file_out_dir = None;
    if let Some(path) = &cli.config {
        let file = FileConfig::load(path)?;
        config.apply_file(&file)?;
        file_out_dir = file.output.dir.clone();
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match &cli.command {
        Command::IngestStats { input, .. } => apply_input_args(&mut config, input),
        Command::RapidRetweets {
            input,
            window,
            min_weight,
            min_spokes,
            ..
        } => {
            apply_input_args(&mut config, input);
            if let Some(v) = window {
                config.window_seconds = *v;
            }
            if let Some(v) = min_weight {
                config.min_edge_weight = *v;
            }
            if let Some(v) = min_spokes {
                config.min_spokes = *v;
            }
        }
        Command::Copypasta {
            input,
            window,
            threshold,
            ..
        } => {
            apply_input_args(&mut config, input);
            if let Some(v) = window {
                config.copypasta_window = *v;
            }
            if let Some(v) = threshold {
                config.copypasta_threshold = *v;
            }
        }
        Command::Htemap {
            input,
            resolution,
            linkage,
            metric,
            ..
        } => {
            apply_input_args(&mut config, input);
            if let Some(v) = resolution {
                config.resolution = *v;
            }
            if let Some(v) = linkage {
                config.linkage = v.parse().map_err(|e: String| ConfigError {
                    field: "htemap.linkage".into(),
                    message: e,
                })?;
            }
            if let Some(v) = metric {
                config.metric = v.parse().map_err(|e: String| ConfigError {
                    field: "htemap.metric".into(),
                    message: e,
                })?;
            }
        }
        Command::Synth { .. } => {}
        Command::All {
            input,
            window,
            min_weight,
            threshold,
            ..
        } => {
            apply_input_args(&mut config, input);
            if let Some(v) = window {
                config.window_seconds = *v;
            }
            if let Some(v) = min_weight {
                config.min_edge_weight = *v;
            }
            if let Some(v) = threshold {
                config.copypasta_threshold = *v;
            }
        }
    }
    Ok((config, file_out_dir))
}

fn run(cli: &Cli, config: &RunConfig, file_out_dir: Option<PathBuf>) -> anyhow::Result<()> {
    coordscope::configure_threads(config.threads);
    match &cli.command {
        Command::IngestStats { out, .. } => runner::run_ingest_stats(config, out),
        Command::RapidRetweets {
            out, report, gexf, ..
        } => runner::run_rapid_retweets(
            config,
            &RapidOutputs {
                edges_csv: out.clone(),
                report_json: report.clone(),
                gexf: gexf.clone(),
            },
        ),
        Command::Copypasta {
            out,
            edges,
            hist,
            gexf,
            ..
        } => runner::run_copypasta(
            config,
            &CopypastaOutputs {
                clusters_json: out.clone(),
                edges_csv: edges.clone(),
                hist_csv: hist.clone(),
                gexf: gexf.clone(),
            },
        ),
        Command::Htemap {
            out,
            dendrogram,
            report,
            ..
        } => runner::run_htemap(
            config,
            &HtemapOutputs {
                gexf: out.clone(),
                dendrogram_nwk: dendrogram.clone(),
                report_json: report.clone(),
            },
        ),
        Command::Synth {
            stars,
            spokes,
            sources,
            pastas,
            copies,
            mutation_rate,
            noise,
            authors,
            out,
            manifest,
        } => {
            let synth = SynthConfig {
                stars: *stars,
                spokes_per_star: *spokes,
                sources_per_star: *sources,
                window_seconds: config.window_seconds,
                pastas: *pastas,
                copies_per_pasta: *copies,
                mutation_rate: *mutation_rate,
                noise: *noise,
                authors: *authors,
                seed: config.seed,
            };
            runner::run_synth(
                config,
                &synth,
                &SynthOutputs {
                    corpus_jsonl: out.clone(),
                    manifest_json: manifest.clone(),
                },
            )
        }
        Command::All { out_dir, .. } => {
            let dir = out_dir
                .clone()
                .or(file_out_dir)
                .unwrap_or_else(|| PathBuf::from("out"));
            runner::run_all(config, &dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, file_out_dir) = match resolve_config(&cli) {
        Ok(resolved) => resolved,
        Err(err) => {
            log_line!(error, "{err}");
            return ExitCode::from(2);
        }
    };
    let corpus_required = !matches!(cli.command, Command::Synth { .. });
    if let Err(err) = config.validate(corpus_required) {
        log_line!(error, "{err}");
        return ExitCode::from(2);
    }
    match run(&cli, &config, file_out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            log_line!(error, "{err:#}");
            ExitCode::from(1)
        }
    }
}
