use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};
use crate::groundtruth::Label;

/// Rank-statistic AUC: the chance that a random positive scores above a
/// random negative, ties counting one half. `None` when either side is empty.
pub fn auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let (mut negatives_below, mut doubled) = (0u128, 0u128);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if positive[order[j]] {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        doubled += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        i = j;
    }
    let p = positive.iter().filter(|&&b| b).count() as u128;
    let n = positive.len() as u128 - p;
    if p == 0 || n == 0 {
        return None;
    }
    Some(doubled as f64 / (2 * p * n) as f64)
}

/// All-pairs count, kept as the reference the sort-based version must match.
pub fn auc_brute_force(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let mut sum = 0.0;
    let mut pairs = 0u64;
    for (i, &si) in scores.iter().enumerate() {
        if !positive[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if positive[j] {
                continue;
            }
            pairs += 1;
            if si > sj {
                sum += 1.0;
            } else if si == sj {
                sum += 0.5;
            }
        }
    }
    (pairs > 0).then(|| sum / pairs as f64)
}

/// Rows are true classes, columns predicted classes.
pub fn confusion_matrix(truth: &[usize], predicted: &[usize], n_classes: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        m[t][p] += 1;
    }
    m
}

fn total(confusion: &[Vec<u64>]) -> u64 {
    confusion.iter().flatten().sum()
}

pub fn accuracy(confusion: &[Vec<u64>]) -> f64 {
    let diag: u64 = (0..confusion.len()).map(|i| confusion[i][i]).sum();
    diag as f64 / total(confusion).max(1) as f64
}

/// Cohen's kappa with chance agreement from the row and column marginals.
/// When chance agreement is already 1 the result is 1 for perfect agreement
/// and 0 otherwise.
pub fn cohen_kappa(confusion: &[Vec<u64>]) -> f64 {
    let n = total(confusion) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let k = confusion.len();
    let observed = accuracy(confusion);
    let expected: f64 = (0..k)
        .map(|c| {
            let row: u64 = confusion[c].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[c]).sum();
            (row as f64 / n) * (col as f64 / n)
        })
        .sum();
    if expected >= 1.0 {
        return if observed >= 1.0 { 1.0 } else { 0.0 };
    }
    (observed - expected) / (1.0 - expected)
}

/// Root mean squared error over every (instance, class) pair against one-hot truth.
pub fn rmse(probabilities: &[Vec<f64>], truth: &[usize]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, &t) in probabilities.iter().zip(truth) {
        for (c, &pc) in p.iter().enumerate() {
            let target = if c == t { 1.0 } else { 0.0 };
            sum += (pc - target) * (pc - target);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        libm::sqrt(sum / count as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: Label,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub auc: Option<f64>,
    /// Set when nothing was predicted as this class; precision is then 0.
    pub no_predicted_positives: bool,
}

/// Metrics of one scored set (a fold or a holdout split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub per_class: Vec<ClassMetrics>,
    pub precision: f64,
    pub recall: f64,
    pub auc: Option<f64>,
    pub accuracy: f64,
    pub kappa: f64,
    pub rmse: f64,
    pub confusion: Vec<Vec<u64>>,
}

fn weighted(values: impl Iterator<Item = (f64, u64)>) -> Option<f64> {
    let (num, den) = values.fold((0.0, 0u64), |(n, d), (v, w)| (n + v * w as f64, d + w));
    (den > 0).then(|| num / den as f64)
}

/// Score a set of probability vectors. Predictions are the argmax with ties
/// to the lowest class index. Overall precision, recall and AUC are weighted
/// by class support; classes whose AUC is undefined drop out of the AUC mean.
pub fn evaluate(classes: &[Label], truth: &[usize], probabilities: &[Vec<f64>]) -> Result<FoldMetrics> {
    if truth.is_empty() {
        return Err(Error::UndefinedInput("no scored instances"));
    }
    let k = classes.len();
    let predicted: Vec<usize> = probabilities.iter().map(|p| argmax(p)).collect();
    let confusion = confusion_matrix(truth, &predicted, k);
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let support: u64 = confusion[c].iter().sum();
            let predicted_pos: u64 = confusion.iter().map(|r| r[c]).sum();
            let tp = confusion[c][c];
            let scores: Vec<f64> = probabilities.iter().map(|p| p[c]).collect();
            let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
            ClassMetrics {
                label: classes[c],
                support,
                precision: if predicted_pos == 0 { 0.0 } else { tp as f64 / predicted_pos as f64 },
                recall: if support == 0 { 0.0 } else { tp as f64 / support as f64 },
                auc: auc(&scores, &positive),
                no_predicted_positives: predicted_pos == 0,
            }
        })
        .collect();
    Ok(FoldMetrics {
        precision: weighted(per_class.iter().map(|m| (m.precision, m.support))).unwrap_or(0.0),
        recall: weighted(per_class.iter().map(|m| (m.recall, m.support))).unwrap_or(0.0),
        auc: weighted(per_class.iter().filter_map(|m| m.auc.map(|a| (a, m.support)))),
        accuracy: accuracy(&confusion),
        kappa: cohen_kappa(&confusion),
        rmse: rmse(probabilities, truth),
        per_class,
        confusion,
    })
}

/// Mean and sample standard deviation across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
        };
        Some(Self { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: Label,
    /// Row sum of the pooled confusion matrix.
    pub support: u64,
    pub precision: Spread,
    pub recall: Spread,
    pub auc: Option<Spread>,
    pub folds_without_predicted_positives: usize,
}

/// Fold metrics averaged over every (repeat, fold) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<Label>,
    pub folds: usize,
    pub repeats: usize,
    pub per_class: Vec<ClassReport>,
    pub precision: Spread,
    pub recall: Spread,
    pub auc: Option<Spread>,
    pub accuracy: Spread,
    pub kappa: Spread,
    pub rmse: Spread,
    /// Summed over all folds and repeats.
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    pub fn from_folds(classes: &[Label], folds: usize, repeats: usize, results: &[FoldMetrics]) -> Result<Self> {
        let spread = |f: &dyn Fn(&FoldMetrics) -> f64| {
            Spread::of(&results.iter().map(f).collect::<Vec<_>>()).ok_or(Error::UndefinedInput("no folds to summarize"))
        };
        let k = classes.len();
        let mut confusion = vec![vec![0u64; k]; k];
        for r in results {
            for (row, fold_row) in confusion.iter_mut().zip(&r.confusion) {
                for (a, b) in row.iter_mut().zip(fold_row) {
                    *a += b;
                }
            }
        }
        let per_class = (0..k)
            .map(|c| {
                let aucs: Vec<f64> = results.iter().filter_map(|r| r.per_class[c].auc).collect();
                Ok(ClassReport {
                    label: classes[c],
                    support: confusion[c].iter().sum(),
                    precision: spread(&|r| r.per_class[c].precision)?,
                    recall: spread(&|r| r.per_class[c].recall)?,
                    auc: Spread::of(&aucs),
                    folds_without_predicted_positives: results
                        .iter()
                        .filter(|r| r.per_class[c].no_predicted_positives)
                        .count(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let aucs: Vec<f64> = results.iter().filter_map(|r| r.auc).collect();
        Ok(Self {
            classes: classes.to_vec(),
            folds,
            repeats,
            per_class,
            precision: spread(&|r| r.precision)?,
            recall: spread(&|r| r.recall)?,
            auc: Spread::of(&aucs),
            accuracy: spread(&|r| r.accuracy)?,
            kappa: spread(&|r| r.kappa)?,
            rmse: spread(&|r| r.rmse)?,
            confusion,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_confusion_two_classes() {
        // Rows truth, columns prediction.
        let m = vec![vec![2, 1], vec![0, 3]];
        assert!((accuracy(&m) - 5.0 / 6.0).abs() < 1e-12);
        // Chance agreement (3*2 + 3*4)/36 = 1/2, so kappa = (5/6 - 1/2) / (1/2) = 2/3.
        assert!((cohen_kappa(&m) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hand_confusion_three_classes() {
        let m = vec![vec![3, 1, 0], vec![0, 2, 2], vec![1, 0, 3]];
        // Observed 8/12; chance (4*4 + 4*3 + 4*5)/144 = 1/3.
        assert!((cohen_kappa(&m) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rmse_hand_values() {
        let probs = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        // Squared errors 0, 0, 0.25, 0.25 over four cells.
        assert!((rmse(&probs, &[0, 1]) - libm::sqrt(0.125)).abs() < 1e-15);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.9], &[false, true]), Some(1.0));
        assert_eq!(auc(&[0.5, 0.5], &[false, true]), Some(0.5));
        assert_eq!(auc(&[0.9, 0.1], &[false, true]), Some(0.0));
        assert_eq!(auc(&[0.3], &[true]), None);
        let s = [0.2, 0.4, 0.4, 0.8, 0.1];
        let p = [true, false, true, true, false];
        assert_eq!(auc(&s, &p), auc_brute_force(&s, &p));
    }

    #[test]
    fn perfect_classifier_metrics() {
        let classes = [Label::Bully, Label::Normal];
        let m = evaluate(&classes, &[0, 1, 1], &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.2, 0.8]]).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.kappa, 1.0);
        assert_eq!(m.auc, Some(1.0));
    }

    #[test]
    fn missing_prediction_flags_precision() {
        let classes = [Label::Bully, Label::Normal];
        let m = evaluate(&classes, &[0, 1], &[vec![0.1, 0.9], vec![0.0, 1.0]]).unwrap();
        assert!(m.per_class[0].no_predicted_positives);
        assert_eq!(m.per_class[0].precision, 0.0);
    }
}
