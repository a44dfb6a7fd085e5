//! Corpus data model, JSONL ingestion, and dataset splitting.
//!
//! A corpus file is line-delimited JSON: an optional header object carrying
//! `activity_name` and `keyword_set`, followed by one [`UserRecord`] per
//! line. Missing description/location are encoded as `null`; labels are
//! lowercase strings.

mod preprocess;
mod split;

pub use preprocess::{
    concat_activity_tweets, concat_activity_tweets_filtered, is_retweet, preprocess_text,
};
pub use split::{split_corpus, SplitAssignment};

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why an account posts about the activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserType {
    Practitioner,
    Promotional,
    Others,
}

/// The user's stated reason for the activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Motivation {
    Health,
    Spiritual,
    Others,
}

impl UserType {
    pub const NAMES: [&'static str; 3] = ["practitioner", "promotional", "others"];

    pub fn class_index(self) -> usize {
        match self {
            UserType::Practitioner => 0,
            UserType::Promotional => 1,
            UserType::Others => 2,
        }
    }
}

impl Motivation {
    pub const NAMES: [&'static str; 3] = ["health", "spiritual", "others"];

    pub fn class_index(self) -> usize {
        match self {
            Motivation::Health => 0,
            Motivation::Spiritual => 1,
            Motivation::Others => 2,
        }
    }
}

/// Which label a run predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    UserType,
    Motivation,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::UserType => "user_type",
            Task::Motivation => "motivation",
        }
    }

    pub fn num_classes(self) -> usize {
        3
    }

    pub fn class_names(self) -> [&'static str; 3] {
        match self {
            Task::UserType => UserType::NAMES,
            Task::Motivation => Motivation::NAMES,
        }
    }

    pub fn label_of(self, record: &UserRecord) -> Option<usize> {
        match self {
            Task::UserType => record.user_type_label.map(UserType::class_index),
            Task::Motivation => record.motivation_label.map(Motivation::class_index),
        }
    }

    pub fn class_index(self, name: &str) -> Option<usize> {
        self.class_names().iter().position(|c| *c == name)
    }

    pub fn parse(name: &str) -> Option<Task> {
        match name {
            "user_type" => Some(Task::UserType),
            "motivation" => Some(Task::Motivation),
            _ => None,
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One user's raw material: activity tweets, profile metadata, mention
/// targets, and gold labels when annotated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    #[serde(default)]
    pub activity_tweets: Vec<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub user_type_label: Option<UserType>,
    #[serde(default)]
    pub motivation_label: Option<Motivation>,
}

impl UserRecord {
    pub fn new(user_id: impl Into<String>, activity_tweets: Vec<String>) -> Self {
        UserRecord {
            user_id: user_id.into(),
            activity_tweets,
            description: None,
            location: None,
            mentions: Vec::new(),
            user_type_label: None,
            motivation_label: None,
        }
    }

    /// A record is labeled if it carries at least one gold label.
    pub fn is_labeled(&self) -> bool {
        self.user_type_label.is_some() || self.motivation_label.is_some()
    }
}

/// Corpus file header. Optional; when absent the activity name defaults to
/// the file stem and the keyword set to that single word.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CorpusHeader {
    activity_name: String,
    keyword_set: Vec<String>,
}

/// A keyword-defined collection of user records.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub activity_name: String,
    pub keyword_set: Vec<String>,
    records: Vec<UserRecord>,
    index: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn from_records(
        activity_name: impl Into<String>,
        keyword_set: Vec<String>,
        records: Vec<UserRecord>,
    ) -> Result<Self> {
        let activity_name = activity_name.into();
        if keyword_set.is_empty() {
            return Err(Error::InvalidConfig("keyword_set must be non-empty".into()));
        }
        for kw in &keyword_set {
            if kw != &kw.to_lowercase() {
                return Err(Error::InvalidConfig(format!(
                    "keyword `{kw}` must be lowercase"
                )));
            }
        }
        let mut index = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            if rec.user_id.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "record {i} has an empty user_id"
                )));
            }
            if index.insert(rec.user_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(rec.user_id.clone()));
            }
        }
        Ok(Corpus {
            activity_name,
            keyword_set,
            records,
            index,
        })
    }

    pub fn records(&self) -> &[UserRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, user_id: &str) -> Option<&UserRecord> {
        self.index.get(user_id).map(|&i| &self.records[i])
    }

    pub fn contains(&self, user_id: &str) -> bool {
        self.index.contains_key(user_id)
    }

    /// All user ids, sorted.
    pub fn user_ids(&self) -> Vec<&str> {
        self.index.keys().map(|s| s.as_str()).collect()
    }

    /// Ids of records carrying at least one gold label, sorted.
    pub fn labeled_ids(&self) -> Vec<&str> {
        self.index
            .keys()
            .filter(|id| self.get(id).map(UserRecord::is_labeled).unwrap_or(false))
            .map(|s| s.as_str())
            .collect()
    }
}

/// Supported on-disk corpus formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
}

/// Load a corpus from a line-delimited file. Malformed lines are reported
/// with their 1-based line number; duplicate user ids are rejected.
pub fn load_corpus(path: impl AsRef<Path>, _format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = BufReader::new(file);

    let mut header: Option<CorpusHeader> = None;
    let mut records = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if lineno == 1 {
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(&line) {
                if value.get("activity_name").is_some() {
                    let h: CorpusHeader = serde_json::from_value(value)
                        .map_err(|e| Error::parse(&display, lineno, e.to_string()))?;
                    header = Some(h);
                    continue;
                }
            }
        }
        let rec: UserRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&display, lineno, e.to_string()))?;
        if rec.user_id.is_empty() {
            return Err(Error::parse(&display, lineno, "empty user_id"));
        }
        if !seen.insert(rec.user_id.clone()) {
            return Err(Error::DuplicateId(rec.user_id));
        }
        records.push(rec);
    }

    let (activity_name, keyword_set) = match header {
        Some(h) => (h.activity_name, h.keyword_set),
        None => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("activity")
                .to_lowercase();
            (stem.clone(), vec![stem])
        }
    };
    Corpus::from_records(activity_name, keyword_set, records)
}

/// Write a corpus as a header line plus one record per line.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut out = std::fs::File::create(path).map_err(|e| Error::io(&display, e))?;
    let header = CorpusHeader {
        activity_name: corpus.activity_name.clone(),
        keyword_set: corpus.keyword_set.clone(),
    };
    let mut buf = serde_json::to_string(&header).expect("header serializes");
    buf.push('\n');
    for rec in corpus.records() {
        buf.push_str(&serde_json::to_string(rec).expect("record serializes"));
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())
        .map_err(|e| Error::io(&display, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        use std::io::Write as _;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn loads_three_records() {
        let f = write_lines(&[
            r#"{"user_id":"a","activity_tweets":["t1"]}"#,
            r#"{"user_id":"b","activity_tweets":["t2"],"location":"london"}"#,
            r#"{"user_id":"c","activity_tweets":["t3"],"user_type_label":"practitioner"}"#,
        ]);
        let corpus = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(
            corpus.get("c").unwrap().user_type_label,
            Some(UserType::Practitioner)
        );
    }

    #[test]
    fn unknown_label_reports_line() {
        let f = write_lines(&[
            r#"{"user_id":"a","activity_tweets":["t1"]}"#,
            r#"{"user_id":"b","activity_tweets":["t2"],"user_type_label":"guru"}"#,
        ]);
        match load_corpus(f.path(), CorpusFormat::Jsonl) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        let f = write_lines(&[
            r#"{"user_id":"a","activity_tweets":["t1"]}"#,
            r#"{"user_id":"a","activity_tweets":["t2"]}"#,
        ]);
        assert!(matches!(
            load_corpus(f.path(), CorpusFormat::Jsonl),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn header_line_sets_activity() {
        let f = write_lines(&[
            r#"{"activity_name":"yoga","keyword_set":["yoga","yogi"]}"#,
            r#"{"user_id":"a","activity_tweets":["t1"]}"#,
        ]);
        let corpus = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(corpus.activity_name, "yoga");
        assert_eq!(corpus.keyword_set, vec!["yoga", "yogi"]);
        assert_eq!(corpus.len(), 1);
    }

    #[test]
    fn save_load_round_trip() {
        let mut rec = UserRecord::new("a", vec!["#yoga now".into()]);
        rec.description = Some("teacher".into());
        rec.motivation_label = Some(Motivation::Health);
        let corpus =
            Corpus::from_records("yoga", vec!["yoga".into()], vec![rec]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_corpus(&corpus, f.path()).unwrap();
        let loaded = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(loaded, corpus);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_corpus("/nonexistent/corpus.jsonl", CorpusFormat::Jsonl),
            Err(Error::Io { .. })
        ));
    }
}
