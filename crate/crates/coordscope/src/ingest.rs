//! Corpus ingestion: newline-delimited JSON tweet records, hashtag
//! extraction, annotation joins, and one-pass corpus statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Default fringe hashtag vocabulary, grouped by narrative category.
/// Order is fixed: vector indices used throughout the toolkit depend on it.
pub const DEFAULT_FRINGE_HASHTAGS: [(&str, &str); 19] = [
    ("hammerandscorecard", "US Election"),
    ("sharpiegate", "US Election"),
    ("qsnatch", "US Election"),
    ("stopthesteal", "US Election"),
    ("dobbs", "US Election"),
    ("dominionsoftware", "US Election"),
    ("dominion", "US Election"),
    ("hammer", "US Election"),
    ("scorecard", "US Election"),
    ("pizzagate", "QAnon"),
    ("qanon", "QAnon"),
    ("qarmy", "QAnon"),
    ("taketheoath", "QAnon"),
    ("wwg1wga", "QAnon"),
    ("projectveritas", "QAnon"),
    ("thegreatawakening", "QAnon"),
    ("civilwar", "QAnon"),
    ("obamagate", "QAnon"),
    ("plandemic", "COVID-19"),
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed JSON: {message}")]
    MalformedJson { line: usize, message: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: unparseable timestamp `{value}` in field `{field}`")]
    BadTimestamp {
        line: usize,
        field: String,
        value: String,
    },
    #[error("line {line}: kind `{kind}` inconsistent with retweet linkage fields")]
    InconsistentKind { line: usize, kind: String },
    #[error("line {line}: unknown kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("bad-line budget exhausted ({budget} allowed): {source}")]
    BudgetExhausted {
        budget: usize,
        source: Box<IngestError>,
    },
    #[error("vocabulary contains duplicate tag `{0}`")]
    DuplicateTag(String),
    #[error("{path}: row {row}: unknown user label `{label}` (expected promoter or detractor)")]
    UnknownLabel {
        path: String,
        row: usize,
        label: String,
    },
    #[error("{path}: row {row}: empty {field}")]
    EmptyAnnotationField {
        path: String,
        row: usize,
        field: String,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        source: csv::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// The four sharing activities a record can represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetKind {
    Original,
    Retweet,
    Reply,
    Quote,
}

impl TweetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TweetKind::Original => "original",
            TweetKind::Retweet => "retweet",
            TweetKind::Reply => "reply",
            TweetKind::Quote => "quote",
        }
    }

    fn parse(s: &str) -> Option<TweetKind> {
        match s.to_ascii_lowercase().as_str() {
            "original" | "tweet" => Some(TweetKind::Original),
            "retweet" => Some(TweetKind::Retweet),
            "reply" => Some(TweetKind::Reply),
            "quote" | "quoted" => Some(TweetKind::Quote),
            _ => None,
        }
    }
}

/// One post, validated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub created_at: DateTime<Utc>,
    pub kind: TweetKind,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_tweet_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_author_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_created_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replied_tweet_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quoted_tweet_id: Option<String>,
}

impl TweetRecord {
    /// Serialize back to one JSON line using the default field names.
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), Value::String(self.tweet_id.clone()));
        obj.insert("author".into(), Value::String(self.author_id.clone()));
        obj.insert(
            "created_at".into(),
            Value::String(self.created_at.format("%Y-%m-%dT%H:%M:%SZ").to_string()),
        );
        obj.insert("kind".into(), Value::String(self.kind.as_str().into()));
        if !self.text.is_empty() {
            obj.insert("text".into(), Value::String(self.text.clone()));
        }
        if !self.hashtags.is_empty() {
            obj.insert(
                "hashtags".into(),
                Value::Array(self.hashtags.iter().cloned().map(Value::String).collect()),
            );
        }
        let mut put_opt = |key: &str, v: &Option<String>| {
            if let Some(v) = v {
                obj.insert(key.into(), Value::String(v.clone()));
            }
        };
        put_opt("retweeted_tweet_id", &self.retweeted_tweet_id);
        put_opt("retweeted_author_id", &self.retweeted_author_id);
        put_opt("replied_tweet_id", &self.replied_tweet_id);
        put_opt("quoted_tweet_id", &self.quoted_tweet_id);
        if let Some(ts) = self.retweeted_created_at {
            obj.insert(
                "retweeted_created_at".into(),
                Value::String(ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()),
            );
        }
        Value::Object(obj).to_string()
    }
}

/// Maps the toolkit's record fields onto the JSON keys of a concrete dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMap {
    pub tweet_id: String,
    pub author_id: String,
    pub created_at: String,
    pub kind: String,
    pub text: String,
    pub hashtags: String,
    pub retweeted_tweet_id: String,
    pub retweeted_author_id: String,
    pub retweeted_created_at: String,
    pub replied_tweet_id: String,
    pub quoted_tweet_id: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            tweet_id: "id".into(),
            author_id: "author".into(),
            created_at: "created_at".into(),
            kind: "kind".into(),
            text: "text".into(),
            hashtags: "hashtags".into(),
            retweeted_tweet_id: "retweeted_tweet_id".into(),
            retweeted_author_id: "retweeted_author_id".into(),
            retweeted_created_at: "retweeted_created_at".into(),
            replied_tweet_id: "replied_tweet_id".into(),
            quoted_tweet_id: "quoted_tweet_id".into(),
        }
    }
}

/// Extract `#tag` tokens: `#` followed by letters, digits, or underscores.
/// Lowercased, in order of appearance, multiplicity preserved.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '#' {
            continue;
        }
        let mut tag = String::new();
        while let Some(&next) = chars.peek() {
            if next.is_alphanumeric() || next == '_' {
                tag.extend(next.to_lowercase());
                chars.next();
            } else {
                break;
            }
        }
        if !tag.is_empty() {
            tags.push(tag);
        }
    }
    tags
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        let utc = ts.with_timezone(&Utc);
        return Utc.timestamp_opt(utc.timestamp(), 0).single();
    }
    // Classic platform format: "Tue Nov 03 00:00:00 +0000 2020"
    if let Ok(ts) = DateTime::parse_from_str(raw, "%a %b %d %H:%M:%S %z %Y") {
        let utc = ts.with_timezone(&Utc);
        return Utc.timestamp_opt(utc.timestamp(), 0).single();
    }
    None
}

fn get_str(obj: &serde_json::Map<String, Value>, key: &str) -> Option<String> {
    match obj.get(key) {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Number(n)) => Some(n.to_string()),
        _ => None,
    }
}

/// Parse one JSON line into a validated record. `line_no` is 1-based and
/// only used for error reporting.
pub fn parse_tweet_record(
    line: &str,
    line_no: usize,
    fields: &FieldMap,
) -> Result<TweetRecord, IngestError> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| IngestError::MalformedJson {
            line: line_no,
            message: e.to_string(),
        })?;
    let obj = value.as_object().ok_or_else(|| IngestError::MalformedJson {
        line: line_no,
        message: "expected a JSON object".into(),
    })?;

    let tweet_id = get_str(obj, &fields.tweet_id).ok_or_else(|| IngestError::MissingField {
        line: line_no,
        field: fields.tweet_id.clone(),
    })?;
    let author_id = get_str(obj, &fields.author_id).ok_or_else(|| IngestError::MissingField {
        line: line_no,
        field: fields.author_id.clone(),
    })?;
    let created_raw = get_str(obj, &fields.created_at).ok_or_else(|| IngestError::MissingField {
        line: line_no,
        field: fields.created_at.clone(),
    })?;
    let created_at = parse_timestamp(&created_raw).ok_or_else(|| IngestError::BadTimestamp {
        line: line_no,
        field: fields.created_at.clone(),
        value: created_raw.clone(),
    })?;

    let text = get_str(obj, &fields.text).unwrap_or_default();
    let retweeted_tweet_id = get_str(obj, &fields.retweeted_tweet_id);
    let retweeted_author_id = get_str(obj, &fields.retweeted_author_id);
    let replied_tweet_id = get_str(obj, &fields.replied_tweet_id);
    let quoted_tweet_id = get_str(obj, &fields.quoted_tweet_id);
    let retweeted_created_at = match get_str(obj, &fields.retweeted_created_at) {
        Some(raw) => Some(parse_timestamp(&raw).ok_or_else(|| IngestError::BadTimestamp {
            line: line_no,
            field: fields.retweeted_created_at.clone(),
            value: raw.clone(),
        })?),
        None => None,
    };

    let has_retweet_linkage = retweeted_tweet_id.is_some() && retweeted_author_id.is_some();
    let kind = match get_str(obj, &fields.kind) {
        Some(raw) => TweetKind::parse(&raw).ok_or_else(|| IngestError::UnknownKind {
            line: line_no,
            kind: raw.clone(),
        })?,
        None => {
            if has_retweet_linkage {
                TweetKind::Retweet
            } else if replied_tweet_id.is_some() {
                TweetKind::Reply
            } else if quoted_tweet_id.is_some() {
                TweetKind::Quote
            } else {
                TweetKind::Original
            }
        }
    };
    // kind == retweet iff both retweet linkage fields are present
    if (kind == TweetKind::Retweet) != has_retweet_linkage {
        return Err(IngestError::InconsistentKind {
            line: line_no,
            kind: kind.as_str().into(),
        });
    }

    let hashtags = match obj.get(&fields.hashtags) {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|v| v.as_str())
            .map(|s| s.trim_start_matches('#').to_lowercase())
            .filter(|s| !s.is_empty())
            .collect(),
        _ => extract_hashtags(&text),
    };

    Ok(TweetRecord {
        tweet_id,
        author_id,
        created_at,
        kind,
        text,
        hashtags,
        retweeted_tweet_id,
        retweeted_author_id,
        retweeted_created_at,
        replied_tweet_id,
        quoted_tweet_id,
    })
}

/// Fixed, ordered list of tags under analysis. Positions are stable for
/// the lifetime of the vocabulary and index the hashtag count vectors.
#[derive(Debug, Clone)]
pub struct HashtagVocabulary {
    tags: Vec<String>,
    categories: Vec<String>,
    index: HashMap<String, usize>,
}

impl HashtagVocabulary {
    pub fn new<S: Into<String>>(tags: Vec<S>) -> Result<Self, IngestError> {
        let tags: Vec<String> = tags
            .into_iter()
            .map(|t| t.into().trim_start_matches('#').to_lowercase())
            .collect();
        let mut index = HashMap::new();
        for (i, tag) in tags.iter().enumerate() {
            if index.insert(tag.clone(), i).is_some() {
                return Err(IngestError::DuplicateTag(tag.clone()));
            }
        }
        let categories = vec![String::new(); tags.len()];
        Ok(HashtagVocabulary {
            tags,
            categories,
            index,
        })
    }

    /// The default 19-tag fringe vocabulary with category metadata.
    pub fn default_fringe() -> Self {
        let mut vocab = HashtagVocabulary::new(
            DEFAULT_FRINGE_HASHTAGS
                .iter()
                .map(|(t, _)| t.to_string())
                .collect::<Vec<_>>(),
        )
        .expect("default vocabulary has no duplicates");
        vocab.categories = DEFAULT_FRINGE_HASHTAGS
            .iter()
            .map(|(_, c)| c.to_string())
            .collect();
        vocab
    }

    /// One tag per non-empty line; `#` prefixes and case are normalized.
    pub fn from_lines(content: &str) -> Result<Self, IngestError> {
        let tags: Vec<String> = content
            .lines()
            .map(|l| l.trim())
            .filter(|l| !l.is_empty() && !l.starts_with("//"))
            .map(|l| l.to_string())
            .collect();
        HashtagVocabulary::new(tags)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn category(&self, position: usize) -> &str {
        &self.categories[position]
    }

    pub fn position(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.index.contains_key(tag)
    }
}

/// User stance labels joined from external annotation files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserLabel {
    Promoter,
    Detractor,
    Unlabeled,
}

impl UserLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            UserLabel::Promoter => "promoter",
            UserLabel::Detractor => "detractor",
            UserLabel::Unlabeled => "unlabeled",
        }
    }
}

/// Third-party user and tweet annotations. Absent keys are "unlabeled".
#[derive(Debug, Clone, Default)]
pub struct AnnotationStore {
    user_labels: HashMap<String, UserLabel>,
    tweet_stories: HashMap<String, String>,
}

impl AnnotationStore {
    pub fn user_label(&self, author_id: &str) -> UserLabel {
        self.user_labels
            .get(author_id)
            .copied()
            .unwrap_or(UserLabel::Unlabeled)
    }

    pub fn story(&self, tweet_id: &str) -> Option<&str> {
        self.tweet_stories.get(tweet_id).map(|s| s.as_str())
    }

    pub fn insert_user_label(&mut self, author_id: impl Into<String>, label: UserLabel) {
        self.user_labels.insert(author_id.into(), label);
    }

    pub fn insert_story(&mut self, tweet_id: impl Into<String>, story: impl Into<String>) {
        self.tweet_stories.insert(tweet_id.into(), story.into());
    }

    pub fn labeled_users(&self) -> usize {
        self.user_labels.len()
    }

    pub fn labeled_tweets(&self) -> usize {
        self.tweet_stories.len()
    }
}

/// Fraction of corpus users / tweets covered by the annotation files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub users_labeled: usize,
    pub users_total: usize,
    pub user_coverage: f64,
    pub tweets_labeled: usize,
    pub tweets_total: usize,
    pub tweet_coverage: f64,
    /// Among labeled corpus users, the fraction labeled promoter.
    pub promoter_fraction_of_labeled: f64,
}

/// One-pass corpus statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub kind_counts: BTreeMap<String, usize>,
    pub kind_fractions: BTreeMap<String, f64>,
    /// Occurrences of each vocabulary tag, retweets resolved to their source.
    pub hashtag_counts: BTreeMap<String, usize>,
    pub distinct_users: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labeled_user_coverage: Option<f64>,
}

/// A chronologically sorted corpus with an id index.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<TweetRecord>,
    by_id: HashMap<String, usize>,
}

/// Skips and rejections accumulated while loading.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LoadReport {
    pub bad_lines: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Number of unparseable lines tolerated before loading aborts.
    pub bad_line_budget: usize,
    pub field_map: FieldMap,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            bad_line_budget: 0,
            field_map: FieldMap::default(),
        }
    }
}

impl Corpus {
    /// Build a corpus from records: sorts ascending by (created_at, tweet_id)
    /// and indexes by id.
    pub fn from_records(mut records: Vec<TweetRecord>) -> Corpus {
        records.sort_by(|a, b| {
            (a.created_at, a.tweet_id.as_str()).cmp(&(b.created_at, b.tweet_id.as_str()))
        });
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.tweet_id.clone(), i))
            .collect();
        Corpus { records, by_id }
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, tweet_id: &str) -> Option<&TweetRecord> {
        self.by_id.get(tweet_id).map(|&i| &self.records[i])
    }

    /// Hashtags of a record with retweets resolved: a pure retweet carries
    /// its source tweet's hashtags when the source is in-corpus, otherwise
    /// whatever hashtag fields the record itself carries.
    pub fn effective_hashtags<'a>(&'a self, record: &'a TweetRecord) -> &'a [String] {
        if record.kind == TweetKind::Retweet {
            if let Some(src_id) = &record.retweeted_tweet_id {
                if let Some(src) = self.get(src_id) {
                    return &src.hashtags;
                }
            }
        }
        &record.hashtags
    }

    pub fn stats(&self, vocabulary: &HashtagVocabulary) -> CorpusStats {
        let mut kind_counts: BTreeMap<String, usize> = BTreeMap::new();
        for kind in [
            TweetKind::Original,
            TweetKind::Retweet,
            TweetKind::Reply,
            TweetKind::Quote,
        ] {
            kind_counts.insert(kind.as_str().into(), 0);
        }
        let mut hashtag_counts: BTreeMap<String, usize> = vocabulary
            .tags()
            .iter()
            .map(|t| (t.clone(), 0))
            .collect();
        let mut users: HashSet<&str> = HashSet::new();
        for record in &self.records {
            *kind_counts.get_mut(record.kind.as_str()).unwrap() += 1;
            users.insert(&record.author_id);
            for tag in self.effective_hashtags(record) {
                if let Some(count) = hashtag_counts.get_mut(tag) {
                    *count += 1;
                }
            }
        }
        let total = self.records.len();
        let kind_fractions = kind_counts
            .iter()
            .map(|(k, &c)| {
                let f = if total == 0 { 0.0 } else { c as f64 / total as f64 };
                (k.clone(), f)
            })
            .collect();
        CorpusStats {
            total,
            kind_counts,
            kind_fractions,
            hashtag_counts,
            distinct_users: users.len(),
            labeled_user_coverage: None,
        }
    }
}

fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read>, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    if path.extension().map(|e| e == "gz").unwrap_or(false) {
        Ok(Box::new(flate2::read::GzDecoder::new(file)))
    } else {
        Ok(Box::new(file))
    }
}

/// Load a newline-delimited JSON corpus (optionally gzip-compressed),
/// sort it, and compute stats in one pass.
pub fn load_corpus(
    path: &Path,
    vocabulary: &HashtagVocabulary,
    options: &LoadOptions,
) -> Result<(Corpus, CorpusStats, LoadReport), IngestError> {
    let reader = BufReader::new(open_maybe_gz(path)?);
    let mut records = Vec::new();
    let mut report = LoadReport::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_tweet_record(&line, idx + 1, &options.field_map) {
            Ok(record) => records.push(record),
            Err(err) => {
                if report.bad_lines.len() >= options.bad_line_budget {
                    return Err(IngestError::BudgetExhausted {
                        budget: options.bad_line_budget,
                        source: Box::new(err),
                    });
                }
                report.bad_lines.push(err.to_string());
            }
        }
    }
    let corpus = Corpus::from_records(records);
    let stats = corpus.stats(vocabulary);
    Ok((corpus, stats, report))
}

/// Join user-label and tweet-story CSVs against a corpus.
///
/// Both files are RFC-4180 with a header row: `user_id,label` and
/// `tweet_id,story`. Unknown user labels are rejected with their row number.
pub fn join_annotations(
    corpus: &Corpus,
    user_csv: Option<&Path>,
    story_csv: Option<&Path>,
) -> Result<(AnnotationStore, CoverageReport), IngestError> {
    let mut store = AnnotationStore::default();
    if let Some(path) = user_csv {
        let mut reader = csv::Reader::from_path(path).map_err(|e| IngestError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        for (row_idx, row) in reader.records().enumerate() {
            let row = row.map_err(|e| IngestError::Csv {
                path: path.display().to_string(),
                source: e,
            })?;
            // data rows start after the header
            let row_no = row_idx + 2;
            let user_id = row.get(0).unwrap_or("").trim().to_string();
            let label_raw = row.get(1).unwrap_or("").trim();
            if user_id.is_empty() {
                return Err(IngestError::EmptyAnnotationField {
                    path: path.display().to_string(),
                    row: row_no,
                    field: "user_id".into(),
                });
            }
            let label = match label_raw.to_ascii_lowercase().as_str() {
                "promoter" => UserLabel::Promoter,
                "detractor" => UserLabel::Detractor,
                other => {
                    return Err(IngestError::UnknownLabel {
                        path: path.display().to_string(),
                        row: row_no,
                        label: other.into(),
                    })
                }
            };
            store.insert_user_label(user_id, label);
        }
    }
    if let Some(path) = story_csv {
        let mut reader = csv::Reader::from_path(path).map_err(|e| IngestError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        for (row_idx, row) in reader.records().enumerate() {
            let row = row.map_err(|e| IngestError::Csv {
                path: path.display().to_string(),
                source: e,
            })?;
            let row_no = row_idx + 2;
            let tweet_id = row.get(0).unwrap_or("").trim().to_string();
            let story = row.get(1).unwrap_or("").trim().to_string();
            if tweet_id.is_empty() {
                return Err(IngestError::EmptyAnnotationField {
                    path: path.display().to_string(),
                    row: row_no,
                    field: "tweet_id".into(),
                });
            }
            if story.is_empty() {
                return Err(IngestError::EmptyAnnotationField {
                    path: path.display().to_string(),
                    row: row_no,
                    field: "story".into(),
                });
            }
            store.insert_story(tweet_id, story);
        }
    }

    let mut users: HashSet<&str> = HashSet::new();
    for record in corpus.records() {
        users.insert(&record.author_id);
    }
    let users_total = users.len();
    let users_labeled = users
        .iter()
        .filter(|u| store.user_label(u) != UserLabel::Unlabeled)
        .count();
    let promoters = users
        .iter()
        .filter(|u| store.user_label(u) == UserLabel::Promoter)
        .count();
    let tweets_total = corpus.len();
    let tweets_labeled = corpus
        .records()
        .iter()
        .filter(|r| store.story(&r.tweet_id).is_some())
        .count();
    let report = CoverageReport {
        users_labeled,
        users_total,
        user_coverage: ratio(users_labeled, users_total),
        tweets_labeled,
        tweets_total,
        tweet_coverage: ratio(tweets_labeled, tweets_total),
        promoter_fraction_of_labeled: ratio(promoters, users_labeled),
    };
    Ok((store, report))
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
