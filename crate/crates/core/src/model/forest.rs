use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::Tree;
use super::{argmax, Dataset};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::groundtruth::Label;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    /// `None` uses `floor(log2(d)) + 1`.
    pub features_per_split: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 10,
            max_depth: None,
            features_per_split: None,
        }
    }
}

impl ForestConfig {
    pub fn mtry(&self, width: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (usize::BITS - 1 - width.max(1).leading_zeros()) as usize + 1)
            .clamp(1, width.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub classes: Vec<Label>,
    pub features: Vec<String>,
    pub n_trees: usize,
    pub features_per_split: usize,
    pub seed: u64,
    pub config: ForestConfig,
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Aligned with the model's `classes`.
    pub probabilities: Vec<f64>,
}

/// Train `config.n_trees` trees, each on its own bootstrap sample drawn from
/// a stream derived from `(seed, tree index)`.
pub fn train_forest(data: &Dataset, config: &ForestConfig, seed: u64, exec: &impl Executor) -> Result<ForestModel> {
    if data.is_empty() {
        return Err(Error::UndefinedInput("cannot train on an empty dataset"));
    }
    if config.n_trees == 0 {
        return Err(Error::InvalidConfig("forest needs at least one tree".into()));
    }
    let classes = data.classes();
    let y = data.encode(&classes);
    let mtry = config.mtry(data.width());
    let n = data.len();
    let tree_ids: Vec<u64> = (0..config.n_trees as u64).collect();
    let trees = exec.map(&tree_ids, |&t| {
        let mut rng = rng::rng_for(seed, t);
        let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        Tree::grow(&data.rows, &y, classes.len(), sample, mtry, config.max_depth, &mut rng)
    });
    Ok(ForestModel {
        classes,
        features: data.features.clone(),
        n_trees: config.n_trees,
        features_per_split: mtry,
        seed,
        config: *config,
        trees,
    })
}

impl ForestModel {
    pub fn width(&self) -> usize {
        self.features.len()
    }

    /// Mean of the normalized leaf histograms, renormalized to sum to one.
    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.width() {
            return Err(Error::WidthMismatch {
                expected: self.width(),
                got: x.len(),
            });
        }
        let mut acc = vec![0.0; self.classes.len()];
        for tree in &self.trees {
            let h = tree.leaf(x);
            let total: u32 = h.iter().sum();
            if total == 0 {
                continue;
            }
            for (a, &c) in acc.iter_mut().zip(h) {
                *a += f64::from(c) / f64::from(total);
            }
        }
        let sum: f64 = acc.iter().sum();
        if sum > 0.0 {
            for a in &mut acc {
                *a /= sum;
            }
        } else {
            let uniform = 1.0 / acc.len() as f64;
            acc.iter_mut().for_each(|a| *a = uniform);
        }
        Ok(acc)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let probabilities = self.probabilities(x)?;
        Ok(Prediction {
            label: self.classes[argmax(&probabilities)],
            probabilities,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::string::ToString;

    fn toy() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let v = f64::from(i);
            rows.push(vec![v, 40.0 - v]);
            labels.push(if i < 20 { Label::Bully } else { Label::Normal });
        }
        Dataset::new(vec!["a".to_string(), "b".to_string()], rows, labels).unwrap()
    }

    #[test]
    fn mtry_default() {
        let c = ForestConfig::default();
        assert_eq!(c.mtry(1), 1);
        assert_eq!(c.mtry(2), 2);
        assert_eq!(c.mtry(18), 5);
        assert_eq!(c.mtry(30), 5);
        assert_eq!(c.mtry(32), 6);
    }

    #[test]
    fn single_class_predicts_that_class() {
        let data = Dataset::new(vec!["a".into()], vec![vec![1.0], vec![2.0]], vec![Label::Normal; 2]).unwrap();
        let m = train_forest(&data, &ForestConfig::default(), 3, &Sequential).unwrap();
        let p = m.predict(&[10.0]).unwrap();
        assert_eq!(p.label, Label::Normal);
        assert_eq!(p.probabilities, vec![1.0]);
    }

    #[test]
    fn width_mismatch() {
        let m = train_forest(&toy(), &ForestConfig::default(), 1, &Sequential).unwrap();
        assert_eq!(m.predict(&[1.0]), Err(Error::WidthMismatch { expected: 2, got: 1 }));
        assert_eq!(m.n_trees, 10);
        assert_eq!(m.trees.len(), 10);
    }

    #[test]
    fn separable_training_accuracy() {
        let data = toy();
        let m = train_forest(&data, &ForestConfig::default(), 9, &Sequential).unwrap();
        for (row, label) in data.rows.iter().zip(&data.labels) {
            let p = m.predict(row).unwrap();
            assert_eq!(p.label, *label);
            assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_go_to_first_class() {
        let model = ForestModel {
            classes: vec![Label::Bully, Label::Normal],
            features: vec!["a".into()],
            n_trees: 1,
            features_per_split: 1,
            seed: 0,
            config: ForestConfig::default(),
            trees: vec![Tree {
                nodes: vec![super::super::Node::Leaf { histogram: vec![3, 3] }],
            }],
        };
        assert_eq!(model.predict(&[0.0]).unwrap().label, Label::Bully);
    }
}
