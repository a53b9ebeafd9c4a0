//! Synthetic corpora with planted coordination and a ground-truth
//! manifest: star retweet bursts, near-duplicate chains, and hashtagged
//! background noise. Generation is single-threaded and fully determined
//! by the seed so the same config always produces the same bytes.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{extract_hashtags, TweetKind, TweetRecord, DEFAULT_FRINGE_HASHTAGS};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible config: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Planted star bursts.
    pub stars: usize,
    /// Spoke accounts retweeting each hub.
    pub spokes_per_star: usize,
    /// Source tweets per hub; every spoke retweets each one, so the edge
    /// weight equals this count.
    pub sources_per_star: usize,
    /// Rapid-retweet window the bursts must land inside.
    pub window_seconds: i64,
    /// Planted copypasta chains.
    pub pastas: usize,
    /// Near-copies per chain.
    pub copies_per_pasta: usize,
    /// Per-character substitution probability for copies.
    pub mutation_rate: f64,
    /// Background tweets.
    pub noise: usize,
    /// Author pool for noise and copy authors.
    pub authors: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            stars: 5,
            spokes_per_star: 20,
            sources_per_star: 2,
            window_seconds: 60,
            pastas: 5,
            copies_per_pasta: 10,
            mutation_rate: 0.02,
            noise: 1000,
            authors: 1000,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(0.0..1.0).contains(&self.mutation_rate) {
            return Err(SynthError::Infeasible(format!(
                "mutation_rate must be in [0, 1), got {}",
                self.mutation_rate
            )));
        }
        if self.stars > 0 {
            if self.spokes_per_star == 0 {
                return Err(SynthError::Infeasible("stars need at least one spoke".into()));
            }
            if self.sources_per_star < 2 {
                return Err(SynthError::Infeasible(
                    "sources_per_star must be at least 2 so edge weights survive the filter".into(),
                ));
            }
            if self.window_seconds < 1 {
                return Err(SynthError::Infeasible("window_seconds must be positive".into()));
            }
        }
        if self.pastas > 0 && self.copies_per_pasta < 2 {
            return Err(SynthError::Infeasible("chains need at least two copies".into()));
        }
        if self.authors == 0 && (self.noise > 0 || self.pastas > 0) {
            return Err(SynthError::Infeasible("author pool is empty".into()));
        }
        if self.spokes_per_star > self.authors.max(1) * 64 {
            return Err(SynthError::Infeasible(format!(
                "spokes_per_star {} exceeds what {} authors can provide",
                self.spokes_per_star, self.authors
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedStar {
    pub hub_author: String,
    pub spoke_authors: Vec<String>,
    pub source_tweet_ids: Vec<String>,
    pub retweet_tweet_ids: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedPasta {
    pub template_text: String,
    pub mutation_rate: f64,
    pub member_tweet_ids: Vec<String>,
}

/// Ground truth for recovery checks; fully determines the corpus for a
/// fixed seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthManifest {
    pub seed: u64,
    pub config: SynthConfig,
    pub stars: Vec<PlantedStar>,
    pub pastas: Vec<PlantedPasta>,
    pub noise_tweets: usize,
    pub total_tweets: usize,
}

const NON_FRINGE_TAGS: [&str; 10] = [
    "election2020", "vote", "debate", "maga", "bidenharris", "georgia",
    "pennsylvania", "arizona", "breaking", "news",
];

fn word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(3..10);
    (0..len)
        .map(|_| (b'a' + rng.gen_range(0..26u8)) as char)
        .collect()
}

fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
}

struct Generator {
    rng: ChaCha8Rng,
    clock: DateTime<Utc>,
    next_id: u64,
    records: Vec<TweetRecord>,
    fringe_weights: WeightedIndex<f64>,
    fringe_order: Vec<&'static str>,
}

impl Generator {
    fn new(seed: u64) -> Generator {
        // skewed popularity over the vocabulary, most-shared tags first
        let fringe_order: Vec<&'static str> = [
            "stopthesteal", "dobbs", "obamagate", "qanon", "wwg1wga", "dominion",
            "plandemic", "civilwar",
        ]
        .into_iter()
        .chain(
            DEFAULT_FRINGE_HASHTAGS
                .iter()
                .map(|(t, _)| *t)
                .filter(|t| {
                    ![
                        "stopthesteal", "dobbs", "obamagate", "qanon", "wwg1wga",
                        "dominion", "plandemic", "civilwar",
                    ]
                    .contains(t)
                }),
        )
        .collect();
        let weights: Vec<f64> = (1..=fringe_order.len()).map(|r| 1.0 / r as f64).collect();
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            clock: Utc.with_ymd_and_hms(2020, 7, 1, 0, 0, 0).unwrap(),
            next_id: 1,
            records: Vec::new(),
            fringe_weights: WeightedIndex::new(weights).expect("positive weights"),
            fringe_order,
        }
    }

    fn take_id(&mut self) -> String {
        let id = self.next_id;
        self.next_id += 1;
        format!("{id:09}")
    }

    fn advance(&mut self, min_s: i64, max_s: i64) -> DateTime<Utc> {
        let step = if max_s > min_s {
            self.rng.gen_range(min_s..=max_s)
        } else {
            min_s
        };
        self.clock += Duration::seconds(step);
        self.clock
    }

    fn noise_author(&mut self, pool: usize) -> String {
        format!("user_{:05}", self.rng.gen_range(0..pool.max(1)))
    }

    fn noise_text(&mut self, pool_hint: usize) -> String {
        let words = self.rng.gen_range(8..15);
        let mut text = sentence(&mut self.rng, words);
        // sometimes hashtags: fringe (skewed) or generic
        if self.rng.gen_bool(0.45) {
            let tags = self.rng.gen_range(1..=3);
            for _ in 0..tags {
                let tag = if self.rng.gen_bool(0.6) {
                    self.fringe_order[self.fringe_weights.sample(&mut self.rng)].to_string()
                } else {
                    NON_FRINGE_TAGS[self.rng.gen_range(0..NON_FRINGE_TAGS.len())].to_string()
                };
                text.push_str(&format!(" #{tag}"));
            }
        }
        if self.rng.gen_bool(0.2) {
            let slug: String = (0..8)
                .map(|_| {
                    let set = b"abcdefghijklmnopqrstuvwxyz0123456789";
                    set[self.rng.gen_range(0..set.len())] as char
                })
                .collect();
            text.push_str(&format!(" https://t.co/{slug}"));
        }
        let _ = pool_hint;
        text
    }

    fn push_original(&mut self, author: String, created_at: DateTime<Utc>, kind: TweetKind, text: String) -> String {
        let id = self.take_id();
        let (replied, quoted) = match kind {
            TweetKind::Reply => (self.last_noise_target(), None),
            TweetKind::Quote => (None, self.last_noise_target()),
            _ => (None, None),
        };
        self.records.push(TweetRecord {
            tweet_id: id.clone(),
            author_id: author,
            created_at,
            kind,
            hashtags: extract_hashtags(&text),
            text,
            retweeted_tweet_id: None,
            retweeted_author_id: None,
            retweeted_created_at: None,
            replied_tweet_id: replied,
            quoted_tweet_id: quoted,
        });
        id
    }

    fn last_noise_target(&mut self) -> Option<String> {
        if self.records.is_empty() {
            return None;
        }
        let idx = self.rng.gen_range(0..self.records.len());
        Some(self.records[idx].tweet_id.clone())
    }
}

/// Generate a corpus and its manifest. Tweets are emitted with strictly
/// increasing timestamps; star bursts and chains occupy dedicated time
/// slices so planted structure survives sorting exactly.
pub fn generate(config: &SynthConfig) -> Result<(Vec<TweetRecord>, SynthManifest), SynthError> {
    config.validate()?;
    let mut generator = Generator::new(config.seed);
    let mut stars = Vec::new();
    let mut pastas = Vec::new();

    // interleave plan: event positions among the noise stream
    let total_events = config.stars + config.pastas;
    let mut event_slots: Vec<usize> = if total_events > 0 && config.noise > 0 {
        (0..total_events)
            .map(|k| (k + 1) * config.noise / (total_events + 1))
            .collect()
    } else {
        (0..total_events).collect()
    };
    event_slots.reverse(); // pop from the back in ascending order

    let mut emitted_noise = 0usize;
    let mut pending_stars = config.stars;
    let mut pending_pastas = config.pastas;
    let mut spoke_cursor = 0usize;

    while emitted_noise < config.noise || pending_stars > 0 || pending_pastas > 0 {
        let due = event_slots
            .last()
            .map(|&slot| emitted_noise >= slot)
            .unwrap_or(false);
        let force_events = emitted_noise >= config.noise;
        if (due || force_events) && (pending_stars > 0 || pending_pastas > 0) {
            event_slots.pop();
            if pending_stars > 0 {
                let star_idx = config.stars - pending_stars;
                pending_stars -= 1;
                stars.push(emit_star(&mut generator, config, star_idx, &mut spoke_cursor));
            } else {
                let pasta_idx = config.pastas - pending_pastas;
                pending_pastas -= 1;
                pastas.push(emit_pasta(&mut generator, config, pasta_idx));
            }
            continue;
        }
        if emitted_noise >= config.noise {
            continue;
        }
        let created = generator.advance(1, 4);
        let author = generator.noise_author(config.authors);
        let kind = match generator.rng.gen_range(0..10) {
            0..=5 => TweetKind::Original,
            6..=7 => TweetKind::Reply,
            _ => TweetKind::Quote,
        };
        let text = generator.noise_text(config.authors);
        generator.push_original(author, created, kind, text);
        emitted_noise += 1;
    }

    let manifest = SynthManifest {
        seed: config.seed,
        config: config.clone(),
        stars,
        pastas,
        noise_tweets: config.noise,
        total_tweets: generator.records.len(),
    };
    Ok((generator.records, manifest))
}

fn emit_star(
    generator: &mut Generator,
    config: &SynthConfig,
    star_idx: usize,
    spoke_cursor: &mut usize,
) -> PlantedStar {
    let hub = format!("hub_{star_idx:03}");
    let spokes: Vec<String> = (0..config.spokes_per_star)
        .map(|k| format!("spoke_{:05}", *spoke_cursor + k))
        .collect();
    *spoke_cursor += config.spokes_per_star;

    let mut source_ids = Vec::new();
    let mut retweet_ids = Vec::new();
    for _ in 0..config.sources_per_star {
        // the burst occupies its own slice: source, then spokes inside the window
        let source_created = generator.advance(120, 180);
        let text = format!("{} #stopthesteal", sentence(&mut generator.rng, 10));
        let source_id = generator.push_original(hub.clone(), source_created, TweetKind::Original, text);

        let mut delays: Vec<i64> = (0..config.spokes_per_star)
            .map(|_| generator.rng.gen_range(1..=config.window_seconds))
            .collect();
        delays.sort_unstable();
        for (spoke, delay) in spokes.iter().zip(delays) {
            let id = generator.take_id();
            generator.records.push(TweetRecord {
                tweet_id: id.clone(),
                author_id: spoke.clone(),
                created_at: source_created + Duration::seconds(delay),
                kind: TweetKind::Retweet,
                text: String::new(),
                hashtags: Vec::new(),
                retweeted_tweet_id: Some(source_id.clone()),
                retweeted_author_id: Some(hub.clone()),
                retweeted_created_at: Some(source_created),
                replied_tweet_id: None,
                quoted_tweet_id: None,
            });
            retweet_ids.push(id);
        }
        // move the clock past the burst so later tweets cannot interleave
        generator.clock = source_created + Duration::seconds(config.window_seconds + 60);
        source_ids.push(source_id);
    }

    PlantedStar {
        hub_author: hub,
        spoke_authors: spokes,
        source_tweet_ids: source_ids,
        retweet_tweet_ids: retweet_ids,
    }
}

fn emit_pasta(generator: &mut Generator, config: &SynthConfig, pasta_idx: usize) -> PlantedPasta {
    let template = format!(
        "{} sign and share #stopthesteal {}",
        sentence(&mut generator.rng, 7),
        sentence(&mut generator.rng, 6),
    );
    let mut members = Vec::new();
    // dedicated slice: copies are 1s apart so they stay window-adjacent
    generator.advance(120, 180);
    for copy_idx in 0..config.copies_per_pasta {
        let created = generator.clock + Duration::seconds(copy_idx as i64);
        let author = generator.noise_author(config.authors);
        let text = mutate(&template, config.mutation_rate, &mut generator.rng);
        let id = generator.push_original(author, created, TweetKind::Original, text);
        members.push(id);
    }
    generator.clock += Duration::seconds(config.copies_per_pasta as i64 + 60);
    let _ = pasta_idx;
    PlantedPasta {
        template_text: template,
        mutation_rate: config.mutation_rate,
        member_tweet_ids: members,
    }
}

/// Per-character substitution over alphabetic characters only, so hashtag
/// markers and whitespace survive.
fn mutate(template: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    template
        .chars()
        .map(|c| {
            if c.is_ascii_lowercase() && rng.gen_bool(rate) {
                (b'a' + rng.gen_range(0..26u8)) as char
            } else {
                c
            }
        })
        .collect()
}

/// Render records as newline-delimited JSON (generation order).
pub fn to_jsonl(records: &[TweetRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&record.to_json_line());
        out.push('\n');
    }
    out
}
