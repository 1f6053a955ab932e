use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::groundtruth::Label;
use crate::rng;

/// A generated row and the two original rows it interpolates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synthetic {
    pub row: usize,
    pub parents: (usize, usize),
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceOutcome {
    pub data: Dataset,
    /// For every output row taken from the input, its input index.
    pub kept: Vec<(usize, usize)>,
    pub synthetic: Vec<Synthetic>,
}

/// Equal targets at the mean class size (rounded).
pub fn default_targets(data: &Dataset) -> BTreeMap<Label, usize> {
    let classes = data.classes();
    let mean = libm::round(data.len() as f64 / classes.len() as f64) as usize;
    classes.into_iter().map(|c| (c, mean)).collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` nearest same-class rows of `members[at]`, ties by input order.
fn neighbors(data: &Dataset, members: &[usize], at: usize, k: usize) -> Vec<usize> {
    let origin = &data.rows[members[at]];
    let mut others: Vec<(f64, usize)> = members
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != at)
        .map(|(_, &m)| (squared_distance(origin, &data.rows[m]), m))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().take(k).map(|(_, m)| m).collect()
}

/// SMOTE oversampling combined with random undersampling.
///
/// Classes below their target keep every row and gain synthetic rows on the
/// segment between a random member and one of its `k` nearest same-class
/// neighbors. Classes above their target keep a random subset. Classes absent
/// from `targets` pass through unchanged. Output rows are grouped by class.
pub fn balance(data: &Dataset, targets: &BTreeMap<Label, usize>, k: usize, seed: u64) -> Result<BalanceOutcome> {
    if k == 0 {
        return Err(Error::InvalidConfig("SMOTE needs k >= 1".into()));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut kept = Vec::new();
    let mut synthetic = Vec::new();
    for class in data.classes() {
        let members: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == class).collect();
        let target = targets.get(&class).copied().unwrap_or(members.len());
        let mut rng = rng::rng_for_str(seed, class.as_str());
        let chosen: Vec<usize> = if target < members.len() {
            let mut pick = members.clone();
            pick.shuffle(&mut rng);
            pick.truncate(target);
            pick.sort_unstable();
            pick
        } else {
            members.clone()
        };
        for &i in &chosen {
            kept.push((rows.len(), i));
            rows.push(data.rows[i].clone());
            labels.push(class);
        }
        let missing = target.saturating_sub(members.len());
        if missing == 0 {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::TooFewToOversample(class.as_str().to_string()));
        }
        let k_eff = k.min(members.len() - 1);
        let mut cache: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for _ in 0..missing {
            let at = rng.random_range(0..members.len());
            let near = cache.entry(at).or_insert_with(|| neighbors(data, &members, at, k_eff));
            let other = near[rng.random_range(0..near.len())];
            let gap: f64 = rng.random();
            let (a, b) = (&data.rows[members[at]], &data.rows[other]);
            let point: Vec<f64> = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x + gap * (y - x)).clamp(x.min(y), x.max(y)))
                .collect();
            synthetic.push(Synthetic {
                row: rows.len(),
                parents: (members[at], other),
                gap,
            });
            rows.push(point);
            labels.push(class);
        }
    }
    Ok(BalanceOutcome {
        data: Dataset {
            features: data.features.clone(),
            rows,
            labels,
        },
        kept,
        synthetic,
    })
}

/// Stratified split: each class contributes `round(count * test_fraction)`
/// rows to the test side. Returns `(train, test)` input indices, both sorted.
pub fn stratified_holdout(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidConfig("test fraction must lie in [0, 1)".into()));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in data.classes() {
        let mut members: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == class).collect();
        members.shuffle(&mut rng::rng_for_str(seed, class.as_str()));
        let n_test = libm::round(members.len() as f64 * test_fraction) as usize;
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
