//! Deterministic 60/20/20 splitting of the labeled subset.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Train/validation/test partition of a corpus's labeled records.
///
/// Membership depends only on the labeled id set and the seed, not on
/// record order in the file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub seed: u64,
}

impl SplitAssignment {
    pub fn total(&self) -> usize {
        self.train_ids.len() + self.val_ids.len() + self.test_ids.len()
    }
}

/// Shuffle the labeled ids and cut 60/20/20. Train size is floored; the
/// one or two leftover records go to validation first, then test.
pub fn split_corpus(corpus: &Corpus, seed: u64) -> Result<SplitAssignment> {
    let mut ids: Vec<String> = corpus
        .labeled_ids()
        .into_iter()
        .map(str::to_owned)
        .collect();
    let n = ids.len();
    if n < 5 {
        return Err(Error::TooFewRecords { need: 5, found: n });
    }
    // labeled_ids is sorted, so the shuffle sees a canonical order
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let (train_n, val_n, test_n) = split_sizes(n);
    let train_ids = ids[..train_n].to_vec();
    let val_ids = ids[train_n..train_n + val_n].to_vec();
    let test_ids = ids[train_n + val_n..train_n + val_n + test_n].to_vec();
    Ok(SplitAssignment {
        train_ids,
        val_ids,
        test_ids,
        seed,
    })
}

/// Floor all three proportions, then hand leftovers to val, then test.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = (n as f64 * 0.6).floor() as usize;
    let mut val = (n as f64 * 0.2).floor() as usize;
    let mut test = (n as f64 * 0.2).floor() as usize;
    let mut leftover = n - train - val - test;
    if leftover > 0 {
        val += 1;
        leftover -= 1;
    }
    if leftover > 0 {
        test += 1;
    }
    (train, val, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{UserRecord, UserType};
    use std::collections::BTreeSet;

    fn labeled_corpus(n: usize) -> Corpus {
        let records = (0..n)
            .map(|i| {
                let mut r = UserRecord::new(format!("u{i:04}"), vec!["t".into()]);
                r.user_type_label = Some(UserType::Practitioner);
                r
            })
            .collect();
        Corpus::from_records("yoga", vec!["yoga".into()], records).unwrap()
    }

    #[test]
    fn ten_records_split_6_2_2() {
        let split = split_corpus(&labeled_corpus(10), 7).unwrap();
        assert_eq!(split.train_ids.len(), 6);
        assert_eq!(split.val_ids.len(), 2);
        assert_eq!(split.test_ids.len(), 2);
    }

    #[test]
    fn sizes_1298() {
        assert_eq!(split_sizes(1298), (778, 260, 260));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let corpus = labeled_corpus(23);
        let a = split_corpus(&corpus, 42).unwrap();
        let b = split_corpus(&corpus, 42).unwrap();
        assert_eq!(a, b);
        let c = split_corpus(&corpus, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn partitions_labeled_set() {
        for n in [5usize, 7, 11, 40, 101] {
            let corpus = labeled_corpus(n);
            for seed in 0..100u64 {
                let split = split_corpus(&corpus, seed).unwrap();
                let mut all: BTreeSet<&String> = BTreeSet::new();
                for id in split
                    .train_ids
                    .iter()
                    .chain(&split.val_ids)
                    .chain(&split.test_ids)
                {
                    assert!(all.insert(id), "id {id} assigned twice (n={n})");
                }
                assert_eq!(all.len(), n);
                let (t, v, s) = split_sizes(n);
                assert_eq!(split.train_ids.len(), t);
                assert_eq!(split.val_ids.len(), v);
                assert_eq!(split.test_ids.len(), s);
            }
        }
    }

    #[test]
    fn too_few_records() {
        assert!(matches!(
            split_corpus(&labeled_corpus(4), 0),
            Err(Error::TooFewRecords { .. })
        ));
    }

    #[test]
    fn proportions_within_one_record() {
        for n in 5..400usize {
            let (t, v, s) = split_sizes(n);
            assert_eq!(t + v + s, n);
            assert!((t as f64 - n as f64 * 0.6).abs() <= 1.0);
            assert!((v as f64 - n as f64 * 0.2).abs() <= 1.0);
            assert!((s as f64 - n as f64 * 0.2).abs() <= 1.0);
        }
    }
}
