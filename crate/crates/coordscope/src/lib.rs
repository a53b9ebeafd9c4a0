//! Coordination forensics for social-media corpora.
//!
//! The toolkit ingests newline-delimited JSON tweet dumps and surfaces two
//! families of inauthentic amplification — rapid-retweet stars and
//! near-duplicate "copypasta" chains — then maps how a fixed vocabulary of
//! fringe hashtags relates and evolves over time via a weighted
//! co-occurrence network with community, centrality, and temporal
//! attributes.

#![forbid(unsafe_code)]

pub mod copypasta;
pub mod export;
pub mod graph;
pub mod htemap;
pub mod ingest;
pub mod rapid_retweet;
pub mod synth;

pub use graph::{WeightedDigraph, WeightedGraph};
pub use ingest::{Corpus, HashtagVocabulary, TweetKind, TweetRecord};

/// Cap the worker pool used by the parallel scans. Thread count never
/// affects results; calling this more than once keeps the first size.
pub fn configure_threads(threads: usize) {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
}
