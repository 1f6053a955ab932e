use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::entropy;
use super::Dataset;

pub const DEFAULT_BINS: usize = 10;

/// Cut points for equal-frequency binning: the sorted values at positions
/// `i * n / bins`, deduplicated. A value falls in bin `#{cuts <= v}`.
pub fn equal_frequency_cuts(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut cuts: Vec<f64> = (1..bins).map(|i| i * n / bins).filter(|&p| p > 0 && p < n).map(|p| sorted[p]).collect();
    cuts.dedup();
    // A cut at the minimum leaves bin 0 empty and adds nothing.
    if cuts.first() == sorted.first() {
        cuts.remove(0);
    }
    cuts
}

fn bin_of(cuts: &[f64], v: f64) -> usize {
    cuts.partition_point(|&c| c <= v)
}

/// Label entropy minus its expectation after binning `column`.
pub fn info_gain(column: &[f64], labels: &[usize], n_classes: usize, bins: usize) -> f64 {
    let n = labels.len() as u32;
    let mut all = vec![0u32; n_classes];
    for &l in labels {
        all[l] += 1;
    }
    let cuts = equal_frequency_cuts(column, bins);
    let mut per_bin = vec![vec![0u32; n_classes]; cuts.len() + 1];
    for (&v, &l) in column.iter().zip(labels) {
        per_bin[bin_of(&cuts, v)][l] += 1;
    }
    let conditional: f64 = per_bin
        .iter()
        .map(|h| {
            let size: u32 = h.iter().sum();
            f64::from(size) / f64::from(n) * entropy(h, size)
        })
        .sum();
    (entropy(&all, n) - conditional).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGain {
    pub feature: String,
    pub gain: f64,
    /// Percentage of the summed gain over all features.
    pub share: f64,
}

/// Features ordered by decreasing information gain; ties keep column order.
/// A constant label vector gives every feature zero gain and zero share.
pub fn info_gain_ranking(data: &Dataset) -> Vec<FeatureGain> {
    let classes = data.classes();
    let y = data.encode(&classes);
    let gains: Vec<f64> = (0..data.width())
        .map(|f| {
            let column: Vec<f64> = data.rows.iter().map(|r| r[f]).collect();
            info_gain(&column, &y, classes.len(), DEFAULT_BINS)
        })
        .collect();
    let total: f64 = gains.iter().sum();
    let mut out: Vec<FeatureGain> = data
        .features
        .iter()
        .zip(&gains)
        .map(|(name, &gain)| FeatureGain {
            feature: name.clone(),
            gain,
            share: if total > 0.0 { 100.0 * gain / total } else { 0.0 },
        })
        .collect();
    out.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundtruth::Label;

    #[test]
    fn cuts_for_uniform_values() {
        let v: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(equal_frequency_cuts(&v, 10), (1..10).map(|i| f64::from(i * 10)).collect::<Vec<_>>());
        assert!(equal_frequency_cuts(&[3.0; 20], 10).is_empty());
    }

    #[test]
    fn label_copy_ranks_first_and_constant_scores_zero() {
        let labels: Vec<Label> = (0..40).map(|i| if i % 2 == 0 { Label::Bully } else { Label::Normal }).collect();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| alloc::vec![7.0, f64::from(u8::from(*l == Label::Normal)), (i % 7) as f64])
            .collect();
        let data = Dataset::new(alloc::vec!["const".into(), "copy".into(), "noise".into()], rows, labels).unwrap();
        let ranking = info_gain_ranking(&data);
        assert_eq!(ranking[0].feature, "copy");
        assert!((ranking[0].gain - 1.0).abs() < 1e-12);
        let constant = ranking.iter().find(|g| g.feature == "const").unwrap();
        assert_eq!(constant.gain, 0.0);
        assert!((ranking.iter().map(|g| g.share).sum::<f64>() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn constant_labels_give_zero() {
        let data = Dataset::new(
            alloc::vec!["a".into()],
            (0..10).map(|i| alloc::vec![f64::from(i)]).collect(),
            alloc::vec![Label::Normal; 10],
        )
        .unwrap();
        assert!(info_gain_ranking(&data).iter().all(|g| g.gain == 0.0 && g.share == 0.0));
    }
}
