//! Corpus analytics behind the figure data: hashtag frequencies,
//! class-conditional term frequencies, and geocoded location
//! distributions. Everything emits plain data; plotting stays external.

mod geo;
mod stopwords;

pub use geo::{
    class_geo_distribution, geo_distribution_csv, geocode_locations, GeoAggregate, GeoPoint,
    Geocoder, OfflineGazetteer, UnavailableGeocoder,
};
pub use stopwords::{is_stopword, STOPWORDS};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{preprocess_text, Corpus};
use crate::error::{Error, Result};

/// Term counts sorted by descending count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFrequencyTable {
    pub entries: Vec<(String, usize)>,
    pub filtered_terms: Vec<String>,
}

impl TermFrequencyTable {
    fn from_counts(counts: BTreeMap<String, usize>, filtered: Vec<String>, k: usize) -> Self {
        let mut entries: Vec<(String, usize)> = counts.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(k);
        TermFrequencyTable {
            entries,
            filtered_terms: filtered,
        }
    }

    pub fn count_of(&self, term: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|(t, _)| t == term)
            .map(|(_, c)| *c)
    }

    /// `term,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,count\n");
        for (term, count) in &self.entries {
            out.push_str(&format!("{term},{count}\n"));
        }
        out
    }
}

/// Top-k `#hashtag` tokens over all activity tweets, case-folded by the
/// shared preprocessing pass.
pub fn top_hashtags(corpus: &Corpus, k: usize) -> TermFrequencyTable {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for record in corpus.records() {
        for tweet in &record.activity_tweets {
            for token in preprocess_text(tweet).split_whitespace() {
                if token.starts_with('#') && token.len() > 1 {
                    *counts.entry(token.to_string()).or_insert(0) += 1;
                }
            }
        }
    }
    TermFrequencyTable::from_counts(counts, Vec::new(), k)
}

/// Whitespace-token frequencies over one class's activity tweets, minus
/// the stopword list and the caller's filter terms (typically the
/// activity keyword).
pub fn class_term_frequency(
    corpus: &Corpus,
    labels: &BTreeMap<String, String>,
    class: &str,
    filter: &[String],
    k: usize,
) -> Result<TermFrequencyTable> {
    let members: Vec<&str> = labels
        .iter()
        .filter(|(_, c)| c.as_str() == class)
        .map(|(id, _)| id.as_str())
        .collect();
    if members.is_empty() {
        return Err(Error::EmptyClass(class.into()));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for id in members {
        let record = match corpus.get(id) {
            Some(r) => r,
            None => continue,
        };
        for tweet in &record.activity_tweets {
            for token in preprocess_text(tweet).split_whitespace() {
                if is_stopword(token) || filter.iter().any(|f| f == token) {
                    continue;
                }
                *counts.entry(token.to_string()).or_insert(0) += 1;
            }
        }
    }
    Ok(TermFrequencyTable::from_counts(
        counts,
        filter.to_vec(),
        k,
    ))
}

/// Gold labels of one task as class-name strings, keyed by user id.
pub fn gold_labels(corpus: &Corpus, task: crate::corpus::Task) -> BTreeMap<String, String> {
    let names = task.class_names();
    corpus
        .records()
        .iter()
        .filter_map(|r| {
            task.label_of(r)
                .map(|c| (r.user_id.clone(), names[c].to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Task, UserRecord, UserType};

    fn corpus(tweets_per_user: &[(&str, &[&str], UserType)]) -> Corpus {
        let records = tweets_per_user
            .iter()
            .map(|(id, tweets, label)| {
                let mut r =
                    UserRecord::new(*id, tweets.iter().map(|t| t.to_string()).collect());
                r.user_type_label = Some(*label);
                r
            })
            .collect();
        Corpus::from_records("yoga", vec!["yoga".into()], records).unwrap()
    }

    #[test]
    fn hashtags_counted_and_sorted() {
        let c = corpus(&[(
            "a",
            &["#yoga now", "#Yoga #namaste"],
            UserType::Practitioner,
        )]);
        let table = top_hashtags(&c, 20);
        assert_eq!(
            table.entries,
            vec![("#yoga".to_string(), 2), ("#namaste".to_string(), 1)]
        );
    }

    #[test]
    fn hashtag_k_truncates_and_tolerates_excess() {
        let c = corpus(&[("a", &["#a #b #b #c"], UserType::Practitioner)]);
        let table = top_hashtags(&c, 2);
        assert_eq!(table.entries.len(), 2);
        assert_eq!(table.entries[0], ("#b".to_string(), 2));
        let all = top_hashtags(&c, 99);
        assert_eq!(all.entries.len(), 3);
    }

    #[test]
    fn no_hashtags_empty_table() {
        let c = corpus(&[("a", &["plain tweet"], UserType::Practitioner)]);
        assert!(top_hashtags(&c, 5).entries.is_empty());
    }

    #[test]
    fn filter_removes_activity_word() {
        let c = corpus(&[(
            "a",
            &["yoga practice yoga love"],
            UserType::Practitioner,
        )]);
        let labels = gold_labels(&c, Task::UserType);
        let table =
            class_term_frequency(&c, &labels, "practitioner", &["yoga".into()], 50).unwrap();
        assert!(table.count_of("yoga").is_none());
        assert_eq!(table.count_of("practice"), Some(1));
        assert_eq!(table.count_of("love"), Some(1));
    }

    #[test]
    fn counting_matches_brute_force_without_filters() {
        let c = corpus(&[
            ("a", &["love love flow", "flow pose"], UserType::Practitioner),
            ("b", &["ignore this"], UserType::Promotional),
        ]);
        let labels = gold_labels(&c, Task::UserType);
        // brute force over the practitioner tweets only
        let mut expected: BTreeMap<&str, usize> = BTreeMap::new();
        for tok in "love love flow flow pose".split_whitespace() {
            *expected.entry(tok).or_insert(0) += 1;
        }
        let table = class_term_frequency(&c, &labels, "practitioner", &[], 50).unwrap();
        for (term, count) in expected {
            assert_eq!(table.count_of(term), Some(count), "term {term}");
        }
        assert_eq!(table.count_of("ignore"), None);
    }

    #[test]
    fn empty_class_is_an_error() {
        let c = corpus(&[("a", &["t"], UserType::Practitioner)]);
        let labels = gold_labels(&c, Task::UserType);
        assert!(matches!(
            class_term_frequency(&c, &labels, "promotional", &[], 5),
            Err(Error::EmptyClass(_))
        ));
    }

    #[test]
    fn class_counts_partition_the_unfiltered_tally() {
        let c = corpus(&[
            ("a", &["flow pose flow"], UserType::Practitioner),
            ("b", &["offer mat offer"], UserType::Promotional),
            ("c", &["flow news"], UserType::Others),
        ]);
        let labels = gold_labels(&c, Task::UserType);
        let mut merged: BTreeMap<String, usize> = BTreeMap::new();
        for class in ["practitioner", "promotional", "others"] {
            let t = class_term_frequency(&c, &labels, class, &[], 100).unwrap();
            for (term, count) in t.entries {
                *merged.entry(term).or_insert(0) += count;
            }
        }
        // whole-corpus tally with no class split
        let mut whole: BTreeMap<String, usize> = BTreeMap::new();
        for rec in c.records() {
            for tweet in &rec.activity_tweets {
                for tok in preprocess_text(tweet).split_whitespace() {
                    if !is_stopword(tok) {
                        *whole.entry(tok.to_string()).or_insert(0) += 1;
                    }
                }
            }
        }
        assert_eq!(merged, whole);
    }
}
