//! Rapid-retweet coordination network: retweets landing within a narrow
//! window of their source tweet's creation, aggregated into a weighted
//! digraph (retweeter -> original author), with star-hub detection and a
//! composition report over the participating users and tweets.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::WeightedDigraph;
use crate::ingest::{AnnotationStore, Corpus, HashtagVocabulary, TweetKind, TweetRecord};

#[derive(Debug, Error)]
pub enum RapidRetweetError {
    #[error("window_seconds must be positive, got {0}")]
    BadWindow(i64),
    #[error("min_edge_weight must be at least 1, got {0}")]
    BadMinWeight(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct RapidRetweetConfig {
    pub window_seconds: i64,
    pub min_edge_weight: u64,
}

impl Default for RapidRetweetConfig {
    fn default() -> Self {
        RapidRetweetConfig {
            window_seconds: 60,
            min_edge_weight: 2,
        }
    }
}

impl RapidRetweetConfig {
    pub fn validate(&self) -> Result<(), RapidRetweetError> {
        if self.window_seconds <= 0 {
            return Err(RapidRetweetError::BadWindow(self.window_seconds));
        }
        if self.min_edge_weight < 1 {
            return Err(RapidRetweetError::BadMinWeight(self.min_edge_weight));
        }
        Ok(())
    }
}

/// Retweets that could not contribute an edge and why.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SkipReport {
    /// Source tweet ids absent from the corpus with no embedded source
    /// timestamp on the retweet record.
    pub unresolved_sources: Vec<String>,
    /// Self-retweets (author re-sharing their own tweet) never form edges.
    pub self_retweets: usize,
}

/// The network plus the retweet events behind each surviving edge.
#[derive(Debug)]
pub struct RapidRetweetNetwork {
    pub graph: WeightedDigraph,
    pub skip_report: SkipReport,
    /// Indices into the corpus of the rapid retweets whose edge survived
    /// the weight filter.
    pub surviving_events: Vec<usize>,
}

/// Build the rapid-retweet network.
///
/// An edge retweeter -> original author accumulates one unit of weight per
/// retweet whose delay from the source creation is within
/// `window_seconds` (inclusive). Quote tweets never contribute. Source
/// timestamps come from the in-corpus source tweet, falling back to the
/// retweet record's embedded source timestamp; retweets with neither are
/// skipped and reported. Edges below `min_edge_weight` are removed along
/// with the nodes they isolate.
pub fn build_rapid_retweet_network(
    corpus: &Corpus,
    config: &RapidRetweetConfig,
) -> Result<RapidRetweetNetwork, RapidRetweetError> {
    config.validate()?;
    let mut skip_report = SkipReport::default();
    let mut unresolved: BTreeSet<String> = BTreeSet::new();

    // (retweeter, author) -> (weight, event corpus indices)
    let mut counts: BTreeMap<(String, String), (u64, Vec<usize>)> = BTreeMap::new();
    for (idx, record) in corpus.records().iter().enumerate() {
        if record.kind != TweetKind::Retweet {
            continue;
        }
        let (source_id, source_author) = match (&record.retweeted_tweet_id, &record.retweeted_author_id)
        {
            (Some(id), Some(author)) => (id, author),
            // unreachable per record invariant, but cheap to tolerate
            _ => continue,
        };
        if *source_author == record.author_id {
            skip_report.self_retweets += 1;
            continue;
        }
        let source_created = match corpus.get(source_id) {
            Some(source) => source.created_at,
            None => match record.retweeted_created_at {
                Some(ts) => ts,
                None => {
                    unresolved.insert(source_id.clone());
                    continue;
                }
            },
        };
        let delay = (record.created_at - source_created).num_seconds();
        if delay >= 0 && delay <= config.window_seconds {
            let key = (record.author_id.clone(), source_author.clone());
            let entry = counts.entry(key).or_insert((0, Vec::new()));
            entry.0 += 1;
            entry.1.push(idx);
        }
    }

    let mut graph = WeightedDigraph::new();
    let mut surviving_events = Vec::new();
    for ((retweeter, author), (weight, events)) in counts {
        if weight >= config.min_edge_weight {
            graph
                .add_edge(&retweeter, &author, weight as f64)
                .expect("validated edge");
            surviving_events.extend(events);
        }
    }
    surviving_events.sort_unstable();
    skip_report.unresolved_sources = unresolved.into_iter().collect();
    Ok(RapidRetweetNetwork {
        graph,
        skip_report,
        surviving_events,
    })
}

/// A node receiving rapid retweets from many distinct accounts.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StarHub {
    pub author_id: String,
    /// Distinct retweeters pointing at this hub.
    pub spokes: usize,
    /// Fraction of the spokes whose only out-neighbor is this hub.
    pub purity: f64,
}

/// Hubs with in-degree >= `min_spokes`, descending (ties by id).
pub fn star_hubs(graph: &WeightedDigraph, min_spokes: usize) -> Vec<StarHub> {
    let mut hubs = Vec::new();
    for idx in 0..graph.node_count() {
        let spokes = graph.in_degree(idx);
        if spokes < min_spokes {
            continue;
        }
        let exclusive = graph
            .in_neighbors(idx)
            .filter(|&(spoke, _)| graph.out_degree(spoke) == 1)
            .count();
        hubs.push(StarHub {
            author_id: graph.id_of(idx).to_string(),
            spokes,
            purity: exclusive as f64 / spokes as f64,
        });
    }
    hubs.sort_by(|a, b| b.spokes.cmp(&a.spokes).then_with(|| a.author_id.cmp(&b.author_id)));
    hubs
}

/// Composition of the rapid-retweet network: who amplified and what.
#[derive(Debug, Clone, Serialize)]
pub struct AmplificationReport {
    pub nodes: usize,
    pub edges: usize,
    pub hubs: Vec<StarHub>,
    /// promoter / detractor / unlabeled fractions over participating users.
    pub label_fractions: BTreeMap<String, f64>,
    /// Vocabulary-tag shares over the surviving rapid retweets' sources.
    pub hashtag_distribution: BTreeMap<String, f64>,
    /// Story-label counts over the surviving rapid retweets' sources.
    pub story_counts: BTreeMap<String, usize>,
    pub story_fractions: BTreeMap<String, f64>,
    pub skipped_unresolved_sources: usize,
}

/// Profile the network against annotations and the hashtag vocabulary.
///
/// The hashtag distribution is computed over the source tweets of the
/// surviving rapid retweets; each occurrence of a vocabulary tag counts.
pub fn amplification_report(
    network: &RapidRetweetNetwork,
    corpus: &Corpus,
    annotations: &AnnotationStore,
    vocabulary: &HashtagVocabulary,
    min_spokes: usize,
) -> AmplificationReport {
    let graph = &network.graph;

    let mut label_counts: BTreeMap<String, usize> = BTreeMap::new();
    for id in graph.node_ids() {
        let label = annotations.user_label(id).as_str().to_string();
        *label_counts.entry(label).or_insert(0) += 1;
    }
    let participants: usize = label_counts.values().sum();
    let label_fractions = label_counts
        .iter()
        .map(|(k, &v)| (k.clone(), fraction(v, participants)))
        .collect();

    // Each surviving event contributes its source tweet once; sources are
    // looked up in-corpus, falling back to the retweet's own hashtag fields.
    let mut tag_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut story_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen_sources: HashSet<&str> = HashSet::new();
    for &event_idx in &network.surviving_events {
        let retweet = &corpus.records()[event_idx];
        for tag in source_hashtags(corpus, retweet) {
            if vocabulary.contains(tag) {
                *tag_counts.entry(tag.to_string()).or_insert(0) += 1;
            }
        }
        if let Some(source_id) = &retweet.retweeted_tweet_id {
            if seen_sources.insert(source_id) {
                if let Some(story) = annotations.story(source_id) {
                    *story_counts.entry(story.to_string()).or_insert(0) += 1;
                }
            }
        }
    }
    let tag_total: usize = tag_counts.values().sum();
    let hashtag_distribution = tag_counts
        .iter()
        .map(|(k, &v)| (k.clone(), fraction(v, tag_total)))
        .collect();
    let story_total: usize = story_counts.values().sum();
    let story_fractions = story_counts
        .iter()
        .map(|(k, &v)| (k.clone(), fraction(v, story_total)))
        .collect();

    AmplificationReport {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        hubs: star_hubs(graph, min_spokes),
        label_fractions,
        hashtag_distribution,
        story_counts,
        story_fractions,
        skipped_unresolved_sources: network.skip_report.unresolved_sources.len(),
    }
}

fn source_hashtags<'a>(corpus: &'a Corpus, retweet: &'a TweetRecord) -> &'a [String] {
    if let Some(source_id) = &retweet.retweeted_tweet_id {
        if let Some(source) = corpus.get(source_id) {
            return &source.hashtags;
        }
    }
    &retweet.hashtags
}

fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::UserLabel;
    use chrono::{DateTime, Duration, Utc};

    fn base() -> DateTime<Utc> {
        DateTime::parse_from_rfc3339("2020-11-03T00:00:00Z")
            .unwrap()
            .with_timezone(&Utc)
    }

    fn original(id: &str, author: &str, offset_s: i64, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: author.into(),
            created_at: base() + Duration::seconds(offset_s),
            kind: TweetKind::Original,
            text: text.into(),
            hashtags: crate::ingest::extract_hashtags(text),
            retweeted_tweet_id: None,
            retweeted_author_id: None,
            retweeted_created_at: None,
            replied_tweet_id: None,
            quoted_tweet_id: None,
        }
    }

    fn retweet(id: &str, author: &str, offset_s: i64, src_id: &str, src_author: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: author.into(),
            created_at: base() + Duration::seconds(offset_s),
            kind: TweetKind::Retweet,
            text: String::new(),
            hashtags: Vec::new(),
            retweeted_tweet_id: Some(src_id.into()),
            retweeted_author_id: Some(src_author.into()),
            retweeted_created_at: None,
            replied_tweet_id: None,
            quoted_tweet_id: None,
        }
    }

    fn quote(id: &str, author: &str, offset_s: i64, quoted: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: author.into(),
            created_at: base() + Duration::seconds(offset_s),
            kind: TweetKind::Quote,
            text: "hm".into(),
            hashtags: Vec::new(),
            retweeted_tweet_id: None,
            retweeted_author_id: None,
            retweeted_created_at: None,
            replied_tweet_id: None,
            quoted_tweet_id: Some(quoted.into()),
        }
    }

    #[test]
    fn two_rapid_retweets_keep_a_weight_two_edge() {
        // hand count: A retweets T1 at +10s and T2 at +55s (delay 50s)
        let corpus = Corpus::from_records(vec![
            original("t1", "u", 0, "one"),
            original("t2", "u", 5, "two"),
            retweet("r1", "A", 10, "t1", "u"),
            retweet("r2", "A", 55, "t2", "u"),
        ]);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        assert_eq!(net.graph.weight("A", "u"), Some(2.0));
        assert_eq!(net.surviving_events.len(), 2);
    }

    #[test]
    fn weight_one_edges_are_removed_with_their_nodes() {
        let corpus = Corpus::from_records(vec![
            original("t1", "u", 0, "one"),
            retweet("r1", "A", 10, "t1", "u"),
        ]);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        assert!(net.graph.is_empty());
        assert!(!net.graph.contains("A"));
        assert!(!net.graph.contains("u"));
    }

    #[test]
    fn window_boundary_is_inclusive_and_61_is_out() {
        let corpus = Corpus::from_records(vec![
            original("t1", "u", 0, "one"),
            original("t2", "u", 1, "two"),
            retweet("r1", "A", 61, "t1", "u"),  // delay 61 > 60
            retweet("r2", "A", 61, "t2", "u"),  // delay 60, inclusive
        ]);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        // only one rapid event -> weight 1 -> filtered
        assert!(net.graph.is_empty());

        let corpus2 = Corpus::from_records(vec![
            original("t1", "u", 0, "one"),
            original("t2", "u", 1, "two"),
            retweet("r1", "A", 60, "t1", "u"),
            retweet("r2", "A", 61, "t2", "u"),
        ]);
        let net2 = build_rapid_retweet_network(&corpus2, &RapidRetweetConfig::default()).unwrap();
        assert_eq!(net2.graph.weight("A", "u"), Some(2.0));
    }

    #[test]
    fn quotes_never_contribute() {
        let corpus = Corpus::from_records(vec![
            original("t1", "u", 0, "one"),
            quote("q1", "A", 5, "t1"),
            quote("q2", "A", 6, "t1"),
        ]);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        assert!(net.graph.is_empty());
    }

    #[test]
    fn out_of_corpus_sources_use_embedded_timestamp_or_skip() {
        let mut rt_with_ts = retweet("r1", "A", 10, "gone1", "u");
        rt_with_ts.retweeted_created_at = Some(base());
        let mut rt_with_ts2 = retweet("r2", "A", 20, "gone2", "u");
        rt_with_ts2.retweeted_created_at = Some(base());
        let rt_without = retweet("r3", "B", 30, "gone3", "v");
        let corpus = Corpus::from_records(vec![rt_with_ts, rt_with_ts2, rt_without]);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        assert_eq!(net.graph.weight("A", "u"), Some(2.0));
        assert_eq!(net.skip_report.unresolved_sources, vec!["gone3".to_string()]);
    }

    #[test]
    fn self_retweets_are_skipped() {
        let corpus = Corpus::from_records(vec![
            original("t1", "u", 0, "one"),
            original("t2", "u", 1, "two"),
            retweet("r1", "u", 5, "t1", "u"),
            retweet("r2", "u", 6, "t2", "u"),
        ]);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        assert!(net.graph.is_empty());
        assert_eq!(net.skip_report.self_retweets, 2);
    }

    #[test]
    fn shrinking_window_never_adds_edges() {
        let corpus = Corpus::from_records(vec![
            original("t1", "u", 0, "one"),
            original("t2", "u", 5, "two"),
            original("t3", "v", 10, "three"),
            original("t4", "v", 12, "four"),
            retweet("r1", "A", 10, "t1", "u"),
            retweet("r2", "A", 50, "t2", "u"),
            retweet("r3", "B", 45, "t3", "v"),
            retweet("r4", "B", 55, "t4", "v"),
        ]);
        let wide = build_rapid_retweet_network(
            &corpus,
            &RapidRetweetConfig { window_seconds: 60, min_edge_weight: 2 },
        )
        .unwrap();
        let narrow = build_rapid_retweet_network(
            &corpus,
            &RapidRetweetConfig { window_seconds: 30, min_edge_weight: 2 },
        )
        .unwrap();
        for (s, t, w) in narrow.graph.edges() {
            let wide_w = wide.graph.weight(&s, &t).unwrap_or(0.0);
            assert!(w <= wide_w, "narrow edge {s}->{t} ({w}) exceeds wide ({wide_w})");
        }
    }

    #[test]
    fn star_hub_with_exclusive_spokes_has_purity_one() {
        let mut records = vec![original("t1", "hub", 0, "a"), original("t2", "hub", 1, "b")];
        for i in 0..12 {
            records.push(retweet(&format!("ra{i}"), &format!("s{i}"), 10, "t1", "hub"));
            records.push(retweet(&format!("rb{i}"), &format!("s{i}"), 20, "t2", "hub"));
        }
        let corpus = Corpus::from_records(records);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        let hubs = star_hubs(&net.graph, 10);
        assert_eq!(hubs.len(), 1);
        assert_eq!(hubs[0].author_id, "hub");
        assert_eq!(hubs[0].spokes, 12);
        assert_eq!(hubs[0].purity, 1.0);
    }

    #[test]
    fn empty_graph_has_no_hubs() {
        let graph = WeightedDigraph::new();
        assert!(star_hubs(&graph, 10).is_empty());
    }

    #[test]
    fn report_fractions_from_labeled_fixture() {
        // participants: A,B promoters, C detractor, u unlabeled
        let corpus = Corpus::from_records(vec![
            original("t1", "u", 0, "#stopthesteal now"),
            original("t2", "u", 1, "#stopthesteal again"),
            retweet("r1", "A", 10, "t1", "u"),
            retweet("r2", "A", 11, "t2", "u"),
            retweet("r3", "B", 12, "t1", "u"),
            retweet("r4", "B", 13, "t2", "u"),
            retweet("r5", "C", 14, "t1", "u"),
            retweet("r6", "C", 15, "t2", "u"),
        ]);
        let net = build_rapid_retweet_network(&corpus, &RapidRetweetConfig::default()).unwrap();
        let mut annotations = AnnotationStore::default();
        annotations.insert_user_label("A", UserLabel::Promoter);
        annotations.insert_user_label("B", UserLabel::Promoter);
        annotations.insert_user_label("C", UserLabel::Detractor);
        annotations.insert_story("t1", "Stop the Steal Pushed");
        let vocab = HashtagVocabulary::default_fringe();
        let report = amplification_report(&net, &corpus, &annotations, &vocab, 3);

        assert_eq!(report.label_fractions["promoter"], 0.5);
        assert_eq!(report.label_fractions["detractor"], 0.25);
        assert_eq!(report.label_fractions["unlabeled"], 0.25);
        let sum: f64 = report.label_fractions.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);

        assert_eq!(report.hashtag_distribution["stopthesteal"], 1.0);
        assert_eq!(report.story_counts["Stop the Steal Pushed"], 1);
        assert_eq!(report.hubs.len(), 1);
        assert_eq!(report.hubs[0].spokes, 3);
    }

    #[test]
    fn config_validation() {
        assert!(RapidRetweetConfig { window_seconds: 0, min_edge_weight: 2 }
            .validate()
            .is_err());
        assert!(RapidRetweetConfig { window_seconds: 60, min_edge_weight: 0 }
            .validate()
            .is_err());
        assert!(RapidRetweetConfig::default().validate().is_ok());
    }
}
