//! Random forest classifier, evaluation metrics, repeated stratified
//! cross-validation, SMOTE balancing and information-gain ranking.

mod balance;
mod cv;
mod forest;
mod infogain;
mod metrics;
mod tree;

pub use balance::{balance, default_targets, stratified_holdout, BalanceOutcome, Synthetic};
pub use cv::{
    cross_validate, holdout_evaluate, stratified_folds, CvConfig, CvOutcome, HoldoutOutcome, OutOfFold,
};
pub use forest::{train_forest, ForestConfig, ForestModel, Prediction};
pub use infogain::{equal_frequency_cuts, info_gain, info_gain_ranking, FeatureGain};
pub use metrics::{
    accuracy, auc, auc_brute_force, cohen_kappa, confusion_matrix, evaluate, rmse, ClassMetrics, ClassReport,
    EvalReport, FoldMetrics, Spread,
};
pub use tree::{Node, Tree};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groundtruth::Label;

/// Labeled feature matrix. Rows are instances; `features` names the columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl Dataset {
    pub fn new(features: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::UndefinedInput("dataset has no rows"));
        }
        for row in &rows {
            if row.len() != features.len() {
                return Err(Error::WidthMismatch {
                    expected: features.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| v.is_nan()) {
                return Err(Error::UndefinedInput("dataset contains NaN"));
            }
        }
        Ok(Self { features, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.len()
    }

    /// Distinct labels in lexicographic order.
    pub fn classes(&self) -> Vec<Label> {
        self.labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Label of every row as an index into `classes`.
    pub fn encode(&self, classes: &[Label]) -> Vec<usize> {
        self.labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label listed in classes"))
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
