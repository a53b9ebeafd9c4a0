//! Hashtag temporal-evolution mapping.
//!
//! Four steps: (1) per-hashtag tagsets of tweets sorted
//! reverse-chronologically, each tweet carried as a vector of vocabulary
//! hashtag counts; (2) cosine similarity between those vectors; (3) an
//! evolution tree per hashtag attaching every tweet to its most similar
//! strictly-older tweet, edges oriented older -> newer; (4) a bipartite
//! tweet/hashtag network whose hashtag-side co-occurrence projection is
//! annotated with eigenvector centrality, Louvain communities, and the
//! median tagset creation date.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{
    eigenvector_centrality, hierarchical_cluster, louvain, Dendrogram, GraphError, Linkage,
    Metric, WeightedGraph,
};
use crate::ingest::{Corpus, HashtagVocabulary, TweetRecord};

#[derive(Debug, Error)]
pub enum HtemapError {
    #[error("hashtag `{0}` is not in the vocabulary")]
    UnknownHashtag(String),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("median of an empty tagset is undefined")]
    EmptyTagset,
    #[error("htemap network has {0} hashtags; at least 2 are required")]
    TooFewHashtags(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Vocabulary hashtag occurrence counts for one tweet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashtagVector(pub Vec<u32>);

impl HashtagVector {
    pub fn for_tweet(
        corpus: &Corpus,
        record: &TweetRecord,
        vocabulary: &HashtagVocabulary,
    ) -> HashtagVector {
        let mut counts = vec![0u32; vocabulary.len()];
        for tag in corpus.effective_hashtags(record) {
            if let Some(pos) = vocabulary.position(tag) {
                counts[pos] += 1;
            }
        }
        HashtagVector(counts)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }
}

/// Cosine similarity of two non-zero count vectors.
pub fn cosine(u: &HashtagVector, v: &HashtagVector) -> Result<f64, HtemapError> {
    if u.is_zero() || v.is_zero() {
        return Err(HtemapError::ZeroVector);
    }
    if u.0 == v.0 {
        return Ok(1.0);
    }
    let dot: u64 = u
        .0
        .iter()
        .zip(&v.0)
        .map(|(&a, &b)| a as u64 * b as u64)
        .sum();
    Ok(dot as f64 / (u.norm() * v.norm()))
}

/// One member of a tagset.
#[derive(Debug, Clone)]
pub struct TagsetMember {
    pub tweet_id: String,
    pub created_at: DateTime<Utc>,
    pub vector: HashtagVector,
}

/// All tweets embedding a target hashtag, newest first.
#[derive(Debug, Clone)]
pub struct Tagset {
    pub hashtag: String,
    /// Reverse-chronological: members[0] is the newest tweet.
    pub members: Vec<TagsetMember>,
}

impl Tagset {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members oldest first.
    pub fn chronological(&self) -> impl Iterator<Item = &TagsetMember> {
        self.members.iter().rev()
    }

    /// Dense cosine similarity matrix in reverse-chronological member
    /// order; intended for small tagsets and verification.
    pub fn similarity_matrix(&self) -> Result<Vec<Vec<f64>>, HtemapError> {
        let m = self.members.len();
        let mut matrix = vec![vec![0.0; m]; m];
        for i in 0..m {
            matrix[i][i] = 1.0;
            for j in (i + 1)..m {
                let s = cosine(&self.members[i].vector, &self.members[j].vector)?;
                matrix[i][j] = s;
                matrix[j][i] = s;
            }
        }
        Ok(matrix)
    }
}

/// Collect every corpus tweet embedding `hashtag` (retweets resolved to
/// their source's hashtags) into a reverse-chronological tagset.
pub fn build_tagset(
    corpus: &Corpus,
    hashtag: &str,
    vocabulary: &HashtagVocabulary,
) -> Result<Tagset, HtemapError> {
    let target = hashtag.trim_start_matches('#').to_lowercase();
    let position = vocabulary
        .position(&target)
        .ok_or_else(|| HtemapError::UnknownHashtag(target.clone()))?;
    let mut members = Vec::new();
    for record in corpus.records() {
        let vector = HashtagVector::for_tweet(corpus, record, vocabulary);
        if vector.0[position] >= 1 {
            members.push(TagsetMember {
                tweet_id: record.tweet_id.clone(),
                created_at: record.created_at,
                vector,
            });
        }
    }
    // corpus order is (created_at, tweet_id) ascending; reverse it
    members.reverse();
    Ok(Tagset {
        hashtag: target,
        members,
    })
}

/// Per-hashtag directed tree over tagset tweets, edges older -> newer.
#[derive(Debug, Clone)]
pub struct EvolutionTree {
    pub hashtag: String,
    /// (parent tweet id, child tweet id); the parent is strictly older in
    /// the corpus total order (created_at, tweet_id).
    pub edges: Vec<(String, String)>,
    /// Ids of every tagset member, oldest first.
    pub nodes: Vec<String>,
}

/// Attach each tweet (except the oldest) to its most similar
/// strictly-older tweet. Similarity ties prefer the chronologically
/// nearest older tweet, then the smaller tweet id.
pub fn build_evolution_tree(tagset: &Tagset) -> EvolutionTree {
    let chrono: Vec<&TagsetMember> = tagset.chronological().collect();
    let mut edges = Vec::new();
    for (idx, member) in chrono.iter().enumerate() {
        // candidates strictly older in the (created_at, tweet_id) order;
        // corpus ordering makes these exactly the earlier positions
        if idx == 0 {
            continue;
        }
        let mut best: Option<(f64, &TagsetMember)> = None;
        for older in &chrono[..idx] {
            let score = cosine(&member.vector, &older.vector)
                .expect("tagset members embed the target hashtag");
            let better = match &best {
                None => true,
                Some((best_score, best_member)) => {
                    if score > *best_score {
                        true
                    } else if score < *best_score {
                        false
                    } else {
                        // nearest in time, then smaller id
                        (older.created_at, std::cmp::Reverse(&older.tweet_id))
                            > (best_member.created_at, std::cmp::Reverse(&best_member.tweet_id))
                    }
                }
            };
            if better {
                best = Some((score, older));
            }
        }
        let parent = best.expect("idx > 0 guarantees an older candidate").1;
        edges.push((parent.tweet_id.clone(), member.tweet_id.clone()));
    }
    EvolutionTree {
        hashtag: tagset.hashtag.clone(),
        edges,
        nodes: chrono.iter().map(|m| m.tweet_id.clone()).collect(),
    }
}

/// Tweet layer + hashtag layer. Tweets enter the layer by appearing in at
/// least one evolution tree; tree edges are kept as metadata.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    /// Tweet ids, sorted, deduplicated across trees.
    pub tweet_layer: Vec<String>,
    /// Union of tree edges over the tweet layer.
    pub tree_edges: Vec<(String, String)>,
    /// Vocabulary tags (the hashtag layer).
    pub hashtag_layer: Vec<String>,
    /// (tweet id, vocabulary position) -> occurrence count.
    pub cross_edges: BTreeMap<(String, usize), u32>,
}

/// Combine all evolution trees into the bipartite tweet-hashtag network.
pub fn build_bipartite(
    trees: &[EvolutionTree],
    corpus: &Corpus,
    vocabulary: &HashtagVocabulary,
) -> BipartiteGraph {
    let mut tweet_ids: BTreeSet<String> = BTreeSet::new();
    let mut tree_edges: BTreeSet<(String, String)> = BTreeSet::new();
    for tree in trees {
        tweet_ids.extend(tree.nodes.iter().cloned());
        tree_edges.extend(tree.edges.iter().cloned());
    }
    let mut cross_edges = BTreeMap::new();
    for tweet_id in &tweet_ids {
        let record = corpus.get(tweet_id).expect("tree nodes come from the corpus");
        let vector = HashtagVector::for_tweet(corpus, record, vocabulary);
        for (pos, &count) in vector.0.iter().enumerate() {
            if count > 0 {
                cross_edges.insert((tweet_id.clone(), pos), count);
            }
        }
    }
    BipartiteGraph {
        tweet_layer: tweet_ids.into_iter().collect(),
        tree_edges: tree_edges.into_iter().collect(),
        hashtag_layer: vocabulary.tags().to_vec(),
        cross_edges,
    }
}

/// The hashtag co-occurrence network with structural and temporal
/// attributes.
#[derive(Debug)]
pub struct HtemapNetwork {
    pub graph: WeightedGraph,
    pub centrality: BTreeMap<String, f64>,
    pub communities: BTreeMap<String, usize>,
    pub median_dates: BTreeMap<String, DateTime<Utc>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HtemapParams {
    pub louvain_seed: u64,
    pub resolution: f64,
    pub centrality_tol: f64,
    pub centrality_max_iter: usize,
}

impl Default for HtemapParams {
    fn default() -> Self {
        HtemapParams {
            louvain_seed: 42,
            resolution: 1.0,
            centrality_tol: 1e-9,
            centrality_max_iter: 1000,
        }
    }
}

/// Project the bipartite graph onto hashtags: two tags are connected with
/// weight equal to the number of tweet-layer tweets embedding both. Nodes
/// are the tags appearing in the tweet layer.
pub fn project_htemap(
    bipartite: &BipartiteGraph,
    tagsets: &[Tagset],
    params: &HtemapParams,
) -> Result<HtemapNetwork, HtemapError> {
    // per-tweet tag membership, then pairwise co-occurrence counts
    let mut present: HashMap<&str, Vec<usize>> = HashMap::new();
    for ((tweet_id, pos), _count) in &bipartite.cross_edges {
        present.entry(tweet_id.as_str()).or_default().push(*pos);
    }
    let mut co_occurrence: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut seen_tags: BTreeSet<usize> = BTreeSet::new();
    for positions in present.values() {
        seen_tags.extend(positions.iter().copied());
        for (i, &a) in positions.iter().enumerate() {
            for &b in &positions[i + 1..] {
                let key = (a.min(b), a.max(b));
                *co_occurrence.entry(key).or_insert(0) += 1;
            }
        }
    }

    let mut graph = WeightedGraph::new();
    for &pos in &seen_tags {
        graph.add_node(&bipartite.hashtag_layer[pos]);
    }
    for (&(a, b), &count) in &co_occurrence {
        graph.add_edge(
            &bipartite.hashtag_layer[a],
            &bipartite.hashtag_layer[b],
            count as f64,
        )?;
    }

    let centrality = if graph.is_empty() {
        BTreeMap::new()
    } else {
        eigenvector_centrality(&graph, params.centrality_tol, params.centrality_max_iter)?
    };
    let communities = louvain(&graph, params.resolution, params.louvain_seed);
    let mut median_dates = BTreeMap::new();
    for tagset in tagsets {
        if !tagset.is_empty() && graph.contains(&tagset.hashtag) {
            median_dates.insert(tagset.hashtag.clone(), median_timestamp(tagset)?);
        }
    }
    Ok(HtemapNetwork {
        graph,
        centrality,
        communities,
        median_dates,
    })
}

/// Lower median of the member creation times.
pub fn median_timestamp(tagset: &Tagset) -> Result<DateTime<Utc>, HtemapError> {
    if tagset.is_empty() {
        return Err(HtemapError::EmptyTagset);
    }
    let mut times: Vec<DateTime<Utc>> = tagset.members.iter().map(|m| m.created_at).collect();
    times.sort_unstable();
    Ok(times[(times.len() - 1) / 2])
}

/// Run the full pipeline: tagsets, trees, bipartite combination, and the
/// annotated projection. Tree builds are independent per hashtag and run
/// in parallel; the outcome does not depend on scheduling.
pub fn run_htemap(
    corpus: &Corpus,
    vocabulary: &HashtagVocabulary,
    params: &HtemapParams,
) -> Result<(HtemapNetwork, Vec<Tagset>, Vec<EvolutionTree>), HtemapError> {
    let tagsets: Vec<Tagset> = vocabulary
        .tags()
        .iter()
        .map(|tag| build_tagset(corpus, tag, vocabulary))
        .collect::<Result<_, _>>()?;
    let trees: Vec<EvolutionTree> = tagsets
        .par_iter()
        .filter(|t| !t.is_empty())
        .map(build_evolution_tree)
        .collect();
    let bipartite = build_bipartite(&trees, corpus, vocabulary);
    let network = project_htemap(&bipartite, &tagsets, params)?;
    Ok((network, tagsets, trees))
}

/// Delegate to hierarchical clustering on the network's weighted
/// adjacency matrix; leaves are the hashtags.
pub fn htemap_dendrogram(
    network: &HtemapNetwork,
    linkage: Linkage,
    metric: Metric,
) -> Result<Dendrogram, HtemapError> {
    let mut labels: Vec<String> = network.graph.node_ids().to_vec();
    labels.sort();
    if labels.len() < 2 {
        return Err(HtemapError::TooFewHashtags(labels.len()));
    }
    let matrix = network.graph.adjacency_matrix(&labels);
    Ok(hierarchical_cluster(&matrix, &labels, linkage, metric)?)
}

/// Edges whose endpoints sit in different Louvain communities.
pub fn bridge_edges(network: &HtemapNetwork) -> Vec<(String, String, f64)> {
    network
        .graph
        .edges()
        .into_iter()
        .filter(|(a, b, _)| network.communities.get(a) != network.communities.get(b))
        .collect()
}
