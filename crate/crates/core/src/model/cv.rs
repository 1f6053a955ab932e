use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::balance::{balance, stratified_holdout, BalanceOutcome};
use super::forest::{train_forest, ForestConfig, ForestModel};
use super::metrics::{evaluate, EvalReport, FoldMetrics};
use super::{argmax, Dataset};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::groundtruth::Label;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub forest: ForestConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            repeats: 10,
            forest: ForestConfig::default(),
        }
    }
}

/// Fold index of every row. Each class is shuffled and dealt round-robin,
/// continuing the deal where the previous class stopped so fold sizes stay
/// within one of each other.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64, repeat: u64) -> Vec<usize> {
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng::rng_for(rng::derive(seed, repeat), c as u64));
        for m in members {
            fold_of[m] = next;
            next = (next + 1) % folds;
        }
    }
    fold_of
}

/// Out-of-fold class probabilities of one row, averaged over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutOfFold {
    pub index: usize,
    pub truth: Label,
    pub predicted: Label,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub report: EvalReport,
    pub out_of_fold: Vec<OutOfFold>,
}

/// Repeated stratified k-fold cross-validation without resampling. Every
/// (repeat, fold) task trains with its own derived seed, so results do not
/// depend on how the executor schedules tasks.
pub fn cross_validate(data: &Dataset, config: &CvConfig, seed: u64, exec: &impl Executor) -> Result<CvOutcome> {
    if config.folds < 2 || config.repeats == 0 {
        return Err(Error::InvalidConfig("need folds >= 2 and repeats >= 1".into()));
    }
    let classes = data.classes();
    let y = data.encode(&classes);
    for (c, class) in classes.iter().enumerate() {
        let count = y.iter().filter(|&&t| t == c).count();
        if count < config.folds {
            return Err(Error::Stratification {
                class: class.as_str().to_string(),
                count,
                folds: config.folds,
            });
        }
    }
    let assignments: Vec<Vec<usize>> = (0..config.repeats as u64)
        .map(|r| stratified_folds(&y, classes.len(), config.folds, seed, r))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..config.repeats)
        .flat_map(|r| (0..config.folds).map(move |f| (r, f)))
        .collect();
    let results = exec.map(&tasks, |&(r, f)| -> Result<(Vec<usize>, Vec<Vec<f64>>, FoldMetrics)> {
        let fold_of = &assignments[r];
        let train: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == f).collect();
        let task_seed = rng::derive(seed, (r * config.folds + f) as u64);
        let model = train_forest(&data.subset(&train), &config.forest, task_seed, &Sequential)?;
        let probs = aligned_probabilities(&model, &classes, data, &test)?;
        let truth: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        let metrics = evaluate(&classes, &truth, &probs)?;
        Ok((test, probs, metrics))
    });
    let mut folds = Vec::with_capacity(results.len());
    let mut summed = vec![vec![0.0; classes.len()]; data.len()];
    for result in results {
        let (test, probs, metrics) = result?;
        for (i, p) in test.into_iter().zip(probs) {
            for (s, v) in summed[i].iter_mut().zip(p) {
                *s += v;
            }
        }
        folds.push(metrics);
    }
    let out_of_fold = summed
        .into_iter()
        .enumerate()
        .map(|(index, mut p)| {
            p.iter_mut().for_each(|v| *v /= config.repeats as f64);
            OutOfFold {
                index,
                truth: data.labels[index],
                predicted: classes[argmax(&p)],
                probabilities: p,
            }
        })
        .collect();
    Ok(CvOutcome {
        report: EvalReport::from_folds(&classes, config.folds, config.repeats, &folds)?,
        out_of_fold,
    })
}

/// Model probabilities re-indexed onto `classes`; a training split can miss a class.
fn aligned_probabilities(model: &ForestModel, classes: &[Label], data: &Dataset, rows: &[usize]) -> Result<Vec<Vec<f64>>> {
    let position: Vec<usize> = model
        .classes
        .iter()
        .map(|c| classes.binary_search(c).expect("model classes come from the data"))
        .collect();
    rows.iter()
        .map(|&i| {
            let p = model.probabilities(&data.rows[i])?;
            let mut full = vec![0.0; classes.len()];
            for (&pos, v) in position.iter().zip(p) {
                full[pos] = v;
            }
            Ok(full)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutOutcome {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub balanced: BalanceOutcome,
    pub metrics: FoldMetrics,
}

/// Stratified holdout split, SMOTE/undersampling on the training side only,
/// then a single forest scored on the untouched test rows.
pub fn holdout_evaluate(
    data: &Dataset,
    test_fraction: f64,
    targets: &BTreeMap<Label, usize>,
    k_neighbors: usize,
    forest: &ForestConfig,
    seed: u64,
    exec: &impl Executor,
) -> Result<HoldoutOutcome> {
    let classes = data.classes();
    let (train_indices, test_indices) = stratified_holdout(data, test_fraction, seed)?;
    if test_indices.is_empty() {
        return Err(Error::UndefinedInput("holdout split left no test rows"));
    }
    let balanced = balance(&data.subset(&train_indices), targets, k_neighbors, seed)?;
    let model = train_forest(&balanced.data, forest, seed, exec)?;
    let probs = aligned_probabilities(&model, &classes, data, &test_indices)?;
    let y = data.encode(&classes);
    let truth: Vec<usize> = test_indices.iter().map(|&i| y[i]).collect();
    let metrics = evaluate(&classes, &truth, &probs)?;
    Ok(HoldoutOutcome {
        train_indices,
        test_indices,
        balanced,
        metrics,
    })
}
