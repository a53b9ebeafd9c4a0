//! Near-duplicate detection over chronologically adjacent tweets.
//!
//! Texts are compared with Ratcliff/Obershelp gestalt matching: take the
//! longest common substring, recurse on both flanks, and score
//! 2*matched/(len_a+len_b). The scan slides a fixed-size tweet window over
//! the corpus (stride 1) and scores every unordered pair at index distance
//! below the window size exactly once, accumulating a score histogram from
//! which the edge threshold can be selected at the valley between the two
//! dominant modes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{connected_components, WeightedGraph};
use crate::ingest::{AnnotationStore, Corpus, HashtagVocabulary, TweetKind, TweetRecord};

#[derive(Debug, Error)]
pub enum CopypastaError {
    #[error("window_size must be at least 2, got {0}")]
    BadWindow(usize),
    #[error("cannot select a threshold from an empty histogram")]
    EmptyHistogram,
    #[error("sharing-activity set `{0}` is empty")]
    EmptySet(String),
}

/// Leftmost-longest common substring of `a[alo..ahi]` and `b[blo..bhi]`.
///
/// Among maximal matches the one starting earliest in `a` wins, then
/// earliest in `b`. `b_positions` maps each scalar value of `b` to its
/// ascending positions.
fn longest_match(
    a: &[char],
    b_positions: &HashMap<char, Vec<u32>>,
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> (usize, usize, usize) {
    let mut best_i = alo;
    let mut best_j = blo;
    let mut best_size = 0usize;
    // run lengths ending at each b position for the previous row
    let mut lengths: HashMap<u32, usize> = HashMap::new();
    let mut next_lengths: HashMap<u32, usize> = HashMap::new();
    for (i, &c) in a[alo..ahi].iter().enumerate() {
        let i = alo + i;
        if let Some(positions) = b_positions.get(&c) {
            for &j in positions {
                let j_usize = j as usize;
                if j_usize < blo {
                    continue;
                }
                if j_usize >= bhi {
                    break;
                }
                let k = if j_usize > blo {
                    lengths.get(&(j - 1)).copied().unwrap_or(0) + 1
                } else {
                    1
                };
                next_lengths.insert(j, k);
                if k > best_size {
                    best_i = i + 1 - k;
                    best_j = j_usize + 1 - k;
                    best_size = k;
                }
            }
        }
        std::mem::swap(&mut lengths, &mut next_lengths);
        next_lengths.clear();
    }
    (best_i, best_j, best_size)
}

/// Ratcliff/Obershelp similarity of two already-normalized texts, compared
/// at unicode-scalar level. Both empty scores 1.0.
pub fn ratcliff_obershelp(a: &str, b: &str) -> f64 {
    let a_chars: Vec<char> = a.chars().collect();
    let b_chars: Vec<char> = b.chars().collect();
    ratcliff_obershelp_chars(&a_chars, &b_chars)
}

pub(crate) fn ratcliff_obershelp_chars(a: &[char], b: &[char]) -> f64 {
    let total_len = a.len() + b.len();
    if total_len == 0 {
        return 1.0;
    }
    let mut b_positions: HashMap<char, Vec<u32>> = HashMap::new();
    for (j, &c) in b.iter().enumerate() {
        b_positions.entry(c).or_default().push(j as u32);
    }
    let mut matched = 0usize;
    let mut pending = vec![(0usize, a.len(), 0usize, b.len())];
    while let Some((alo, ahi, blo, bhi)) = pending.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, k) = longest_match(a, &b_positions, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        matched += k;
        pending.push((alo, i, blo, j));
        pending.push((i + k, ahi, j + k, bhi));
    }
    2.0 * matched as f64 / total_len as f64
}

/// Scoring-side text normalization: drop URL tokens, collapse whitespace
/// runs, trim. Case is preserved.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for token in text.split_whitespace() {
        if token.starts_with("http://") || token.starts_with("https://") {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// A scored pair of tweets; `tweet_id_a` is the chronologically earlier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityEdge {
    pub tweet_id_a: String,
    pub tweet_id_b: String,
    pub score: f64,
}

/// Fixed uniform binning of similarity scores on [0, 1].
#[derive(Debug, Clone, Serialize)]
pub struct SimilarityHistogram {
    pub bins: usize,
    pub counts: Vec<u64>,
}

impl SimilarityHistogram {
    pub fn new(bins: usize) -> Self {
        SimilarityHistogram {
            bins,
            counts: vec![0; bins],
        }
    }

    pub fn add(&mut self, score: f64) {
        let idx = ((score * self.bins as f64) as usize).min(self.bins - 1);
        self.counts[idx] += 1;
    }

    pub fn merge(&mut self, other: &SimilarityHistogram) {
        debug_assert_eq!(self.bins, other.bins);
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            *mine += theirs;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, idx: usize) -> f64 {
        (idx as f64 + 0.5) / self.bins as f64
    }

    pub fn from_scores(scores: &[f64], bins: usize) -> Self {
        let mut hist = SimilarityHistogram::new(bins);
        for &s in scores {
            hist.add(s);
        }
        hist
    }
}

pub const DEFAULT_HISTOGRAM_BINS: usize = 100;
pub const DEFAULT_SCAN_WINDOW: usize = 10;
pub const FALLBACK_THRESHOLD: f64 = 0.7;

/// Outcome of threshold selection over a score histogram.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSelection {
    pub threshold: f64,
    /// False when the fallback fired because no two modes were found.
    pub bimodal: bool,
}

/// Pick the valley between the two largest local maxima of the smoothed
/// histogram (moving average, width 5). When the histogram is not bimodal
/// the fallback threshold 0.7 is returned with `bimodal: false`.
pub fn select_threshold(
    histogram: &SimilarityHistogram,
) -> Result<ThresholdSelection, CopypastaError> {
    if histogram.total() == 0 {
        return Err(CopypastaError::EmptyHistogram);
    }
    let smoothed = moving_average(&histogram.counts, 5);

    // local maxima with plateau handling: compare against the nearest
    // differing neighbor on each side
    let n = smoothed.len();
    let mut maxima: Vec<(usize, f64)> = Vec::new();
    for i in 0..n {
        let value = smoothed[i];
        if value <= 0.0 {
            continue;
        }
        let mut left = i;
        while left > 0 && smoothed[left - 1] == value {
            left -= 1;
        }
        let mut right = i;
        while right + 1 < n && smoothed[right + 1] == value {
            right += 1;
        }
        // only the plateau's first bin represents the peak
        if left != i {
            continue;
        }
        let rises_left = left == 0 || smoothed[left - 1] < value;
        let falls_right = right + 1 == n || smoothed[right + 1] < value;
        if rises_left && falls_right {
            maxima.push((i, value));
        }
    }
    if maxima.len() < 2 {
        return Ok(ThresholdSelection {
            threshold: FALLBACK_THRESHOLD,
            bimodal: false,
        });
    }
    maxima.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    let mut first = maxima[0].0;
    let mut second = maxima[1].0;
    if first > second {
        std::mem::swap(&mut first, &mut second);
    }
    if second - first < 2 {
        return Ok(ThresholdSelection {
            threshold: FALLBACK_THRESHOLD,
            bimodal: false,
        });
    }

    // valley: midpoint of the argmin plateau strictly between the peaks
    let between = &smoothed[first + 1..second];
    let min_value = between.iter().cloned().fold(f64::INFINITY, f64::min);
    let argmin: Vec<usize> = between
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == min_value)
        .map(|(off, _)| first + 1 + off)
        .collect();
    let valley = argmin[argmin.len() / 2];
    Ok(ThresholdSelection {
        threshold: histogram.bin_center(valley),
        bimodal: true,
    })
}

fn moving_average(counts: &[u64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let n = counts.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let sum: u64 = counts[lo..hi].iter().sum();
            sum as f64 / (hi - lo) as f64
        })
        .collect()
}

/// Tweets eligible for the scan: everything but retweets, which re-share
/// text verbatim and cannot count as copypasta.
pub fn scan_population<'a>(corpus: &'a Corpus) -> Vec<&'a TweetRecord> {
    corpus
        .records()
        .iter()
        .filter(|r| r.kind != TweetKind::Retweet)
        .collect()
}

/// Score every unordered pair of tweets co-resident in a sliding window of
/// `window_size` tweets (stride 1, each pair scored once), emit edges with
/// score above `threshold`, and accumulate all scored pairs into a
/// histogram.
pub fn sliding_window_scan(
    tweets: &[&TweetRecord],
    window_size: usize,
    threshold: f64,
) -> Result<(Vec<SimilarityEdge>, SimilarityHistogram), CopypastaError> {
    sliding_window_scan_binned(tweets, window_size, threshold, DEFAULT_HISTOGRAM_BINS)
}

pub fn sliding_window_scan_binned(
    tweets: &[&TweetRecord],
    window_size: usize,
    threshold: f64,
    bins: usize,
) -> Result<(Vec<SimilarityEdge>, SimilarityHistogram), CopypastaError> {
    if window_size < 2 {
        return Err(CopypastaError::BadWindow(window_size));
    }
    let normalized: Vec<Vec<char>> = tweets
        .iter()
        .map(|t| normalize_text(&t.text).chars().collect())
        .collect();

    // Pairs (i, j) with j - i < window_size; chunked over j for parallelism.
    let results: Vec<(Vec<SimilarityEdge>, SimilarityHistogram)> = (0..tweets.len())
        .collect::<Vec<_>>()
        .par_chunks(256)
        .map(|chunk| {
            let mut edges = Vec::new();
            let mut hist = SimilarityHistogram::new(bins);
            for &j in chunk {
                let lo = j.saturating_sub(window_size - 1);
                for i in lo..j {
                    let score = ratcliff_obershelp_chars(&normalized[i], &normalized[j]);
                    hist.add(score);
                    if score > threshold {
                        edges.push(SimilarityEdge {
                            tweet_id_a: tweets[i].tweet_id.clone(),
                            tweet_id_b: tweets[j].tweet_id.clone(),
                            score,
                        });
                    }
                }
            }
            (edges, hist)
        })
        .collect();

    let mut edges = Vec::new();
    let mut histogram = SimilarityHistogram::new(bins);
    for (chunk_edges, chunk_hist) in results {
        edges.extend(chunk_edges);
        histogram.merge(&chunk_hist);
    }
    edges.sort_by(|a, b| {
        (&a.tweet_id_a, &a.tweet_id_b).cmp(&(&b.tweet_id_a, &b.tweet_id_b))
    });
    Ok((edges, histogram))
}

/// A connected chain of near-duplicate tweets, profiled.
#[derive(Debug, Clone, Serialize)]
pub struct CopypastaCluster {
    pub members: Vec<String>,
    /// Text of the chronologically earliest member.
    pub representative_text: String,
    pub hashtag_profile: BTreeMap<String, usize>,
    pub story_profile: BTreeMap<String, usize>,
    pub kind_fractions: BTreeMap<String, f64>,
    pub participants: Vec<String>,
}

/// Build the copypasta network from scan edges and profile its connected
/// components against annotations and the vocabulary.
pub fn build_copypasta_network(
    edges: &[SimilarityEdge],
    corpus: &Corpus,
    annotations: &AnnotationStore,
    vocabulary: &HashtagVocabulary,
) -> (WeightedGraph, Vec<CopypastaCluster>) {
    let mut graph = WeightedGraph::new();
    for edge in edges {
        if edge.tweet_id_a == edge.tweet_id_b {
            continue;
        }
        // similarity is the weight; a pair is scored once so no folding occurs
        graph
            .add_edge(&edge.tweet_id_a, &edge.tweet_id_b, edge.score.max(f64::MIN_POSITIVE))
            .expect("scan edges are loop-free and positive");
    }

    let mut clusters = Vec::new();
    for members in connected_components(&graph) {
        if members.len() < 2 {
            continue;
        }
        clusters.push(profile_cluster(members, corpus, annotations, vocabulary));
    }
    // largest first, ties by first member id
    clusters.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.members[0].cmp(&b.members[0]))
    });
    (graph, clusters)
}

fn profile_cluster(
    members: Vec<String>,
    corpus: &Corpus,
    annotations: &AnnotationStore,
    vocabulary: &HashtagVocabulary,
) -> CopypastaCluster {
    let mut hashtag_profile: BTreeMap<String, usize> = BTreeMap::new();
    let mut story_profile: BTreeMap<String, usize> = BTreeMap::new();
    let mut kind_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut participants: BTreeSet<String> = BTreeSet::new();
    let mut earliest: Option<&TweetRecord> = None;
    for id in &members {
        let Some(record) = corpus.get(id) else {
            continue;
        };
        for tag in &record.hashtags {
            if vocabulary.contains(tag) {
                *hashtag_profile.entry(tag.clone()).or_insert(0) += 1;
            }
        }
        if let Some(story) = annotations.story(id) {
            *story_profile.entry(story.to_string()).or_insert(0) += 1;
        }
        *kind_counts.entry(record.kind.as_str().to_string()).or_insert(0) += 1;
        participants.insert(record.author_id.clone());
        let is_earlier = earliest
            .map(|e| (record.created_at, &record.tweet_id) < (e.created_at, &e.tweet_id))
            .unwrap_or(true);
        if is_earlier {
            earliest = Some(record);
        }
    }
    let total: usize = kind_counts.values().sum();
    let kind_fractions = ["original", "reply", "quote"]
        .iter()
        .map(|&k| {
            let count = kind_counts.get(k).copied().unwrap_or(0);
            let f = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            (k.to_string(), f)
        })
        .collect();
    CopypastaCluster {
        members,
        representative_text: earliest.map(|e| e.text.clone()).unwrap_or_default(),
        hashtag_profile,
        story_profile,
        kind_fractions,
        participants: participants.into_iter().collect(),
    }
}

/// Per-set {original, reply, quote} fractions for the named tweet sets.
/// Retweets must already be excluded; an empty set is an error naming it.
pub fn sharing_activity_proportions(
    sets: &[(&str, &[&TweetRecord])],
) -> Result<BTreeMap<String, BTreeMap<String, f64>>, CopypastaError> {
    let mut out = BTreeMap::new();
    for (name, records) in sets {
        if records.is_empty() {
            return Err(CopypastaError::EmptySet(name.to_string()));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for record in *records {
            debug_assert_ne!(record.kind, TweetKind::Retweet);
            *counts.entry(record.kind.as_str()).or_insert(0) += 1;
        }
        let total: usize = counts.values().sum();
        let fractions = ["original", "reply", "quote"]
            .iter()
            .map(|&k| {
                (
                    k.to_string(),
                    counts.get(k).copied().unwrap_or(0) as f64 / total as f64,
                )
            })
            .collect();
        out.insert(name.to_string(), fractions);
    }
    Ok(out)
}

/// Split the scan population into fringe tweets and a seeded
/// uniformly-random sample of non-fringe tweets of equal size.
pub fn fringe_and_generic_samples<'a>(
    tweets: &[&'a TweetRecord],
    corpus: &Corpus,
    vocabulary: &HashtagVocabulary,
    seed: u64,
) -> (Vec<&'a TweetRecord>, Vec<&'a TweetRecord>) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let mut fringe = Vec::new();
    let mut generic = Vec::new();
    for &record in tweets {
        let is_fringe = corpus
            .effective_hashtags(record)
            .iter()
            .any(|t| vocabulary.contains(t));
        if is_fringe {
            fringe.push(record);
        } else {
            generic.push(record);
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    generic.shuffle(&mut rng);
    generic.truncate(fringe.len().min(generic.len()));
    generic.sort_by(|a, b| (a.created_at, &a.tweet_id).cmp(&(b.created_at, &b.tweet_id)));
    (fringe, generic)
}
