//! Confusion matrices and the reports built from them: accuracy, macro
//! precision/recall/F1 over the full relation vocabulary, per-relation
//! correct rates, and the most frequent wrong predictions per gold relation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::ClozeExample;
use crate::error::{Error, Result};

/// Rows are gold classes, columns predicted classes, both in vocabulary order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_predictions(labels: Vec<String>, gold: &[usize], predicted: &[usize]) -> Result<Self> {
        if gold.len() != predicted.len() {
            return Err(Error::InvalidArgument(format!(
                "{} gold labels for {} predictions",
                gold.len(),
                predicted.len()
            )));
        }
        let mut cm = ConfusionMatrix::new(labels);
        for (&g, &p) in gold.iter().zip(predicted) {
            cm.record(g, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, gold: usize, predicted: usize) -> Result<()> {
        let n = self.size();
        if gold >= n || predicted >= n {
            return Err(Error::InvalidArgument(format!(
                "class ({gold}, {predicted}) outside vocabulary of {n}"
            )));
        }
        self.counts[gold][predicted] += 1;
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.size()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.trace(), self.total())
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class metrics with zero for empty denominators.
pub fn class_metrics(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..cm.size())
        .map(|c| {
            let tp = cm.counts[c][c];
            let precision = ratio(tp, cm.col_sum(c));
            let recall = ratio(tp, cm.row_sum(c));
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub relation: String,
    pub correct: u64,
    pub rate: f64,
    pub top_wrong: Vec<(String, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: u64,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_relation: Vec<RelationRow>,
}

/// Correct count and rate for every relation that occurs in the gold labels.
pub fn per_relation_report(cm: &ConfusionMatrix) -> Vec<(String, u64, f64)> {
    (0..cm.size())
        .filter(|&c| cm.row_sum(c) > 0)
        .map(|c| {
            let correct = cm.counts[c][c];
            (cm.labels[c].clone(), correct, ratio(correct, cm.row_sum(c)))
        })
        .collect()
}

/// The `k` largest off-diagonal entries of each occurring gold row,
/// descending, ties to the smaller class index. Zero entries are omitted.
pub fn top_confusions(cm: &ConfusionMatrix, k: usize) -> Vec<(String, Vec<(String, u64)>)> {
    (0..cm.size())
        .filter(|&c| cm.row_sum(c) > 0)
        .map(|c| {
            let mut wrong: Vec<(usize, u64)> = cm.counts[c]
                .iter()
                .enumerate()
                .filter(|&(p, &n)| p != c && n > 0)
                .map(|(p, &n)| (p, n))
                .collect();
            wrong.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            wrong.truncate(k);
            (
                cm.labels[c].clone(),
                wrong.into_iter().map(|(p, n)| (cm.labels[p].clone(), n)).collect(),
            )
        })
        .collect()
}

pub fn report_from_matrix(cm: &ConfusionMatrix) -> EvalReport {
    let per_class = class_metrics(cm);
    let n = cm.size().max(1) as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / n;
    let wrong = top_confusions(cm, 3);
    let per_relation = per_relation_report(cm)
        .into_iter()
        .zip(wrong)
        .map(|((relation, correct, rate), (_, top_wrong))| RelationRow {
            relation,
            correct,
            rate,
            top_wrong,
        })
        .collect();
    EvalReport {
        total: cm.total(),
        accuracy: cm.accuracy(),
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        per_relation,
    }
}

pub fn evaluate_predictions(
    labels: &[String],
    gold: &[usize],
    predicted: &[usize],
) -> Result<(EvalReport, ConfusionMatrix)> {
    if gold.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let cm = ConfusionMatrix::from_predictions(labels.to_vec(), gold, predicted)?;
    Ok((report_from_matrix(&cm), cm))
}

/// Run `predictor` over every test example and score it.
pub fn evaluate<F>(labels: &[String], test: &[ClozeExample], mut predictor: F) -> Result<(EvalReport, ConfusionMatrix)>
where
    F: FnMut(usize, &ClozeExample) -> Result<usize>,
{
    let mut gold = Vec::with_capacity(test.len());
    let mut predicted = Vec::with_capacity(test.len());
    for (i, ex) in test.iter().enumerate() {
        let g = labels
            .iter()
            .position(|l| *l == ex.target)
            .ok_or_else(|| Error::InvalidArgument(format!("gold relation {:?} not in vocabulary", ex.target)))?;
        gold.push(g);
        predicted.push(predictor(i, ex)?);
    }
    evaluate_predictions(labels, &gold, &predicted)
}

/// Recall, precision, F1 and accuracy per method, one row each.
pub fn render_metric_table(rows: &[(String, EvalReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("Method".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}",
        "Method", "Recall", "Precision", "F1 Score", "Accuracy"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}",
            name, r.macro_recall, r.macro_precision, r.macro_f1, r.accuracy
        );
    }
    out
}

/// Relation, correct count and rate.
pub fn render_correct_table(report: &EvalReport) -> String {
    let width = report
        .per_relation
        .iter()
        .map(|r| r.relation.len())
        .max()
        .unwrap_or(0)
        .max("Relation".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>7}  {:>7}", "Relation", "Correct", "Rate");
    for r in &report.per_relation {
        let _ = writeln!(out, "{:<width$}  {:>7}  {:>7.3}", r.relation, r.correct, r.rate);
    }
    out
}

/// Relation, correct count and rate, then up to three wrong relations with counts.
pub fn render_confusion_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Relation\tCorrect\tRate\tWrong 1\t#\tWrong 2\t#\tWrong 3\t#"
    );
    for r in &report.per_relation {
        let _ = write!(out, "{}\t{}\t{:.3}", r.relation, r.correct, r.rate);
        for i in 0..3 {
            match r.top_wrong.get(i) {
                Some((name, n)) => {
                    let _ = write!(out, "\t{name}\t{n}");
                }
                None => out.push_str("\t-\t-"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i}")).collect()
    }

    fn hand() -> ConfusionMatrix {
        ConfusionMatrix {
            labels: labels(3),
            counts: vec![vec![2, 1, 0], vec![0, 3, 0], vec![1, 0, 3]],
        }
    }

    #[test]
    fn hand_matrix() {
        let cm = hand();
        let r = report_from_matrix(&cm);
        assert_eq!(r.accuracy, 0.8);
        let m = class_metrics(&cm);
        let p = [2.0 / 3.0, 3.0 / 4.0, 1.0];
        let rc = [2.0 / 3.0, 1.0, 3.0 / 4.0];
        for c in 0..3 {
            assert!((m[c].precision - p[c]).abs() < 1e-15);
            assert!((m[c].recall - rc[c]).abs() < 1e-15);
        }
        let f1: Vec<f64> = (0..3).map(|c| 2.0 * p[c] * rc[c] / (p[c] + rc[c])).collect();
        assert!((r.macro_precision - p.iter().sum::<f64>() / 3.0).abs() < 1e-15);
        assert!((r.macro_recall - rc.iter().sum::<f64>() / 3.0).abs() < 1e-15);
        assert!((r.macro_f1 - f1.iter().sum::<f64>() / 3.0).abs() < 1e-15);

        let rates: Vec<f64> = per_relation_report(&cm).iter().map(|r| r.2).collect();
        assert_eq!(rates, vec![2.0 / 3.0, 1.0, 0.75]);
    }

    #[test]
    fn perfect_predictor_on_partial_vocab() {
        let gold = vec![0, 1, 1, 3];
        let (r, _) = evaluate_predictions(&labels(5), &gold, &gold).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_precision, 3.0 / 5.0);
        assert_eq!(r.macro_recall, 3.0 / 5.0);
        assert_eq!(r.macro_f1, 3.0 / 5.0);
        assert!(r.per_relation.iter().all(|row| row.rate == 1.0));
        assert!(r.per_relation.iter().all(|row| row.top_wrong.is_empty()));
    }

    #[test]
    fn confusion_ranking() {
        let mut cm = ConfusionMatrix::new(labels(4));
        cm.counts[0] = vec![1, 5, 2, 0];
        let top = top_confusions(&cm, 3);
        assert_eq!(top[0].1, vec![("r1".to_string(), 5), ("r2".to_string(), 2)]);
        cm.counts[0] = vec![1, 2, 2, 2];
        let top = top_confusions(&cm, 2);
        assert_eq!(top[0].1, vec![("r1".to_string(), 2), ("r2".to_string(), 2)]);
    }

    #[test]
    fn out_of_vocab_predictions_rejected() {
        assert!(evaluate_predictions(&labels(2), &[0], &[2]).is_err());
        assert!(evaluate_predictions(&labels(2), &[], &[]).is_err());
    }

    #[test]
    fn tables_render() {
        let r = report_from_matrix(&hand());
        let t = render_metric_table(&[("Unigram".into(), r.clone())]);
        assert!(t.starts_with("Method "));
        assert!(t.contains("0.8000"));
        let c = render_confusion_table(&r);
        assert_eq!(c.lines().count(), 4);
        assert!(c.lines().nth(1).unwrap().starts_with("r0\t2\t0.667\tr1\t1"));
        assert!(render_correct_table(&r).contains("r1"));
    }

    fn arb_matrix() -> impl Strategy<Value = ConfusionMatrix> {
        (2usize..7).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(0u64..20, n), n).prop_map(move |counts| ConfusionMatrix {
                labels: labels(n),
                counts,
            })
        })
    }

    proptest! {
        #[test]
        fn metric_identities(cm in arb_matrix()) {
            prop_assume!(cm.total() > 0);
            let r = report_from_matrix(&cm);
            prop_assert_eq!(r.accuracy, cm.trace() as f64 / cm.total() as f64);
            let micro_recall = (0..cm.size()).map(|c| cm.counts[c][c]).sum::<u64>() as f64
                / (0..cm.size()).map(|c| cm.row_sum(c)).sum::<u64>() as f64;
            prop_assert!((micro_recall - r.accuracy).abs() < 1e-15);
            for v in [r.macro_precision, r.macro_recall, r.macro_f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let max_f1 = class_metrics(&cm).iter().map(|m| m.f1).fold(0.0, f64::max);
            prop_assert!(r.macro_f1 <= max_f1 + 1e-15);
        }

        #[test]
        fn permuting_vocab_permutes_rows(cm in arb_matrix()) {
            prop_assume!(cm.total() > 0);
            let n = cm.size();
            let perm: Vec<usize> = (0..n).rev().collect();
            let permuted = ConfusionMatrix {
                labels: perm.iter().map(|&i| cm.labels[i].clone()).collect(),
                counts: perm.iter().map(|&i| perm.iter().map(|&j| cm.counts[i][j]).collect()).collect(),
            };
            let a = report_from_matrix(&cm);
            let b = report_from_matrix(&permuted);
            prop_assert_eq!(a.accuracy, b.accuracy);
            prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
            prop_assert!((a.macro_precision - b.macro_precision).abs() < 1e-12);
            let mut ra: Vec<_> = a.per_relation.iter().map(|r| (r.relation.clone(), r.correct)).collect();
            let mut rb: Vec<_> = b.per_relation.iter().map(|r| (r.relation.clone(), r.correct)).collect();
            ra.sort();
            rb.sort();
            prop_assert_eq!(ra, rb);
        }
    }
}
