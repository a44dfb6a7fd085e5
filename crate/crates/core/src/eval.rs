//! Classification metrics, confusion breakdowns, and annotator agreement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Precision/recall/F1 and gold support for one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Full evaluation record: accuracy, per-class metrics, macro-F1, and the
/// confusion matrix (rows = gold, columns = predicted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub confusion: Vec<Vec<usize>>,
    pub n: usize,
}

/// Score predictions against gold labels.
///
/// Classes with zero gold and zero predicted support contribute F1 = 0 to
/// the macro average.
pub fn evaluate(gold: &[usize], predicted: &[usize], num_classes: usize) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: predicted.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (&g, &p) in gold.iter().zip(predicted) {
        if g >= num_classes {
            return Err(Error::InvalidClass {
                index: g,
                num_classes,
            });
        }
        if p >= num_classes {
            return Err(Error::InvalidClass {
                index: p,
                num_classes,
            });
        }
        confusion[g][p] += 1;
    }
    Ok(report_from_confusion(confusion))
}

/// Build a report directly from a gold-by-predicted count matrix.
pub fn report_from_confusion(confusion: Vec<Vec<usize>>) -> EvalReport {
    let num_classes = confusion.len();
    let n: usize = confusion.iter().map(|row| row.iter().sum::<usize>()).sum();
    let correct: usize = (0..num_classes).map(|c| confusion[c][c]).sum();
    let accuracy = correct as f64 / n as f64;

    let mut per_class = Vec::with_capacity(num_classes);
    for (c, row) in confusion.iter().enumerate() {
        let support: usize = row.iter().sum();
        let predicted_c: usize = (0..num_classes).map(|g| confusion[g][c]).sum();
        let tp = row[c];
        let precision = if predicted_c == 0 {
            0.0
        } else {
            tp as f64 / predicted_c as f64
        };
        let recall = if support == 0 {
            0.0
        } else {
            tp as f64 / support as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / num_classes as f64;
    EvalReport {
        accuracy,
        per_class,
        macro_f1,
        confusion,
        n,
    }
}

impl EvalReport {
    pub fn num_classes(&self) -> usize {
        self.confusion.len()
    }

    pub fn correct(&self) -> usize {
        (0..self.num_classes()).map(|c| self.confusion[c][c]).sum()
    }

    pub fn errors(&self) -> usize {
        self.n - self.correct()
    }

    /// Aligned text table: one row per class plus accuracy/macro-F1 footer.
    pub fn render_table(&self, class_names: &[&str]) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14} {:>9} {:>9} {:>9} {:>9}\n",
            "class", "precision", "recall", "f1", "support"
        ));
        for (c, m) in self.per_class.iter().enumerate() {
            let name = class_names.get(c).copied().unwrap_or("?");
            out.push_str(&format!(
                "{:<14} {:>9.3} {:>9.3} {:>9.3} {:>9}\n",
                name, m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str(&format!(
            "accuracy {:.3}  macro-f1 {:.3}  n {}\n",
            self.accuracy, self.macro_f1, self.n
        ));
        out
    }
}

/// Per-gold-class misclassification counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionBreakdown {
    pub gold_class: String,
    pub correct: usize,
    pub misclassified_as: BTreeMap<String, usize>,
    pub total: usize,
}

/// Expand a report's confusion matrix into named per-class breakdowns.
pub fn confusion_report(report: &EvalReport, class_names: &[&str]) -> Vec<ConfusionBreakdown> {
    let k = report.num_classes();
    let name = |c: usize| -> String {
        class_names
            .get(c)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("class{c}"))
    };
    (0..k)
        .map(|g| {
            let mut mis = BTreeMap::new();
            for p in 0..k {
                if p != g && report.confusion[g][p] > 0 {
                    mis.insert(name(p), report.confusion[g][p]);
                }
            }
            ConfusionBreakdown {
                gold_class: name(g),
                correct: report.confusion[g][g],
                misclassified_as: mis,
                total: report.confusion[g].iter().sum(),
            }
        })
        .collect()
}

/// Chance-corrected inter-annotator agreement over two aligned label lists.
pub fn cohens_kappa<T: Eq + Ord + Clone>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let p_o = agree / n;

    let mut marg_a: BTreeMap<&T, f64> = BTreeMap::new();
    let mut marg_b: BTreeMap<&T, f64> = BTreeMap::new();
    for x in a {
        *marg_a.entry(x).or_insert(0.0) += 1.0;
    }
    for y in b {
        *marg_b.entry(y).or_insert(0.0) += 1.0;
    }
    let p_e: f64 = marg_a
        .iter()
        .map(|(label, ca)| {
            let cb = marg_b.get(label).copied().unwrap_or(0.0);
            (ca / n) * (cb / n)
        })
        .sum();

    if (1.0 - p_e).abs() < 1e-12 {
        if (p_o - 1.0).abs() < 1e-12 {
            return Ok(1.0);
        }
        return Err(Error::DegenerateMarginals);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let gold = [0, 1, 2, 1, 0];
        let report = evaluate(&gold, &gold, 3).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.macro_f1, 1.0);
    }

    #[test]
    fn hand_computed_two_class() {
        // confusion [[1,1],[0,2]]: gold {0,0,1,1}, predicted {0,1,1,1}
        let gold = [0, 0, 1, 1];
        let predicted = [0, 1, 1, 1];
        let report = evaluate(&gold, &predicted, 2).unwrap();
        assert_eq!(report.confusion, vec![vec![1, 1], vec![0, 2]]);
        assert!((report.accuracy - 0.75).abs() < 1e-12);
        assert!((report.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.per_class[1].f1 - 0.8).abs() < 1e-12);
        assert!((report.macro_f1 - 0.7333333333333334).abs() < 1e-9);
    }

    #[test]
    fn confusion_breakdown_names_misses() {
        let gold = [0, 0, 1, 1];
        let predicted = [0, 1, 1, 1];
        let report = evaluate(&gold, &predicted, 2).unwrap();
        let breakdown = confusion_report(&report, &["a", "b"]);
        assert_eq!(breakdown[0].misclassified_as.get("b"), Some(&1));
        assert!(breakdown[1].misclassified_as.is_empty());
        assert_eq!(breakdown[1].correct, 2);
    }

    #[test]
    fn diagonal_confusion_has_no_misses() {
        let report = evaluate(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        for b in confusion_report(&report, &["x", "y", "z"]) {
            assert!(b.misclassified_as.is_empty());
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            evaluate(&[0, 1], &[0], 2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn invalid_class_rejected() {
        assert!(matches!(
            evaluate(&[0, 5], &[0, 1], 2),
            Err(Error::InvalidClass { .. })
        ));
    }

    #[test]
    fn kappa_identical_lists() {
        let a = ["x", "y", "x"];
        assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn kappa_hand_formula() {
        // p_o = 0.5, p_e = 0.5 -> kappa = 0
        let a = ["x", "x", "y", "y"];
        let b = ["x", "y", "x", "y"];
        assert!(cohens_kappa(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn kappa_symmetric() {
        let a = ["x", "y", "y", "z", "x", "z"];
        let b = ["x", "y", "z", "z", "y", "x"];
        let k1 = cohens_kappa(&a, &b).unwrap();
        let k2 = cohens_kappa(&b, &a).unwrap();
        assert!((k1 - k2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_marginals_with_agreement() {
        let a = ["x", "x"];
        assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
    }
}
