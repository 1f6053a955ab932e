//! Aggregation of per-worker batch judgments into batch and user labels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sessionizer::Batch;

/// Number of workers labeling each batch.
pub const DEFAULT_PANEL: usize = 5;

/// Behavior classes. Variant order is lexicographic by name, which is also the
/// tie-break order used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Aggressive,
    Bully,
    Normal,
    Spammer,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Aggressive, Label::Bully, Label::Normal, Label::Spammer];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Aggressive => "aggressive",
            Label::Bully => "bully",
            Label::Normal => "normal",
            Label::Spammer => "spammer",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown label `{s}`")))
    }
}

/// Serialize `Option<Label>` as the label name or `"UNRESOLVED"`.
pub mod final_label {
    use super::Label;
    use alloc::string::String;
    use serde::{Deserialize, Deserializer, Serializer};

    pub const UNRESOLVED: &str = "UNRESOLVED";

    pub fn serialize<S: Serializer>(value: &Option<Label>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(value.map(Label::as_str).unwrap_or(UNRESOLVED))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Label>, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == UNRESOLVED {
            return Ok(None);
        }
        raw.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub worker_id: String,
    pub batch_id: String,
    pub label: Label,
    pub submitted_at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    #[serde(default = "unknown")]
    pub gender: String,
    #[serde(default = "unknown")]
    pub age_band: String,
    #[serde(default = "unknown")]
    pub nationality: String,
    #[serde(default = "unknown")]
    pub education: String,
    #[serde(default = "unknown")]
    pub income_band: String,
}

fn unknown() -> String {
    String::from("unknown")
}

impl Default for Demographics {
    fn default() -> Self {
        Self {
            gender: unknown(),
            age_band: unknown(),
            nationality: unknown(),
            education: unknown(),
            income_band: unknown(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerProfile {
    pub worker_id: String,
    #[serde(flatten)]
    pub demographics: Demographics,
    pub control_correct: u32,
    pub control_seen: u32,
}

/// Share of control batches a worker labeled like the gold label.
pub fn control_accuracy(worker: &WorkerProfile) -> Result<f64> {
    if worker.control_seen == 0 {
        return Err(Error::UndefinedInput("worker has seen no control batch"));
    }
    Ok(f64::from(worker.control_correct) / f64::from(worker.control_seen))
}

/// Pooled accuracy over every control answer of every worker.
pub fn overall_control_accuracy(workers: &[WorkerProfile]) -> Result<f64> {
    let seen: u64 = workers.iter().map(|w| u64::from(w.control_seen)).sum();
    let correct: u64 = workers.iter().map(|w| u64::from(w.control_correct)).sum();
    if seen == 0 {
        return Err(Error::UndefinedInput("no control answers recorded"));
    }
    Ok(correct as f64 / seen as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    #[serde(with = "final_label")]
    pub final_label: Option<Label>,
    pub vote_histogram: BTreeMap<Label, u32>,
}

/// Plurality vote. A tie for first place is unresolved.
pub fn majority_vote(labels: &[Label]) -> Vote {
    let mut histogram: BTreeMap<Label, u32> = BTreeMap::new();
    for &label in labels {
        *histogram.entry(label).or_default() += 1;
    }
    let top = histogram.values().copied().max().unwrap_or(0);
    let mut leaders = histogram.iter().filter(|(_, &c)| c == top);
    let final_label = match (leaders.next(), leaders.next()) {
        (Some((&label, _)), None) => Some(label),
        _ => None,
    };
    Vote {
        final_label,
        vote_histogram: histogram,
    }
}

/// Fleiss' kappa over an items x categories count matrix whose rows all sum
/// to the same rater count. Perfect chance agreement (`P_e = 1`) gives 1.
pub fn fleiss_kappa(matrix: &[Vec<u32>]) -> Result<f64> {
    let first = matrix.first().ok_or(Error::UndefinedInput("empty assignment matrix"))?;
    let raters: u32 = first.iter().sum();
    if raters < 2 {
        return Err(Error::UndefinedInput("fleiss kappa needs at least two raters per item"));
    }
    let categories = first.len();
    if matrix.iter().any(|row| row.len() != categories || row.iter().sum::<u32>() != raters) {
        return Err(Error::UndefinedInput("rows must share the rater count and category width"));
    }
    let n = f64::from(raters);
    let items = matrix.len() as f64;
    let mut totals = alloc::vec![0.0f64; categories];
    let mut p_bar = 0.0;
    for row in matrix {
        let mut agree = 0.0;
        for (j, &c) in row.iter().enumerate() {
            let c = f64::from(c);
            totals[j] += c;
            agree += c * c;
        }
        p_bar += (agree - n) / (n * (n - 1.0));
    }
    p_bar /= items;
    let p_e: f64 = totals.iter().map(|t| (t / (items * n)) * (t / (items * n))).sum();
    if p_e >= 1.0 {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Majority vote of one batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthLabel {
    pub batch_id: String,
    pub user_id: String,
    #[serde(with = "final_label")]
    pub final_label: Option<Label>,
    pub vote_histogram: BTreeMap<Label, u32>,
}

/// One row of `groundtruth.jsonl`: the user-level vote over batch labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserLabel {
    pub user_id: String,
    #[serde(with = "final_label")]
    pub final_label: Option<Label>,
    pub vote_histogram: BTreeMap<Label, u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub batches_total: usize,
    pub batches_complete: usize,
    pub batches_incomplete: usize,
    pub batches_unresolved: usize,
    pub users_resolved: usize,
    /// Users whose batch labels tie at the top.
    pub users_tied: usize,
    /// Users with no resolved batch at all; not exported.
    pub users_excluded: usize,
    pub distribution: BTreeMap<Label, usize>,
}

impl ExportSummary {
    /// Resolved users per label as fractions.
    pub fn proportions(&self) -> BTreeMap<Label, f64> {
        let total: usize = self.distribution.values().sum();
        self.distribution
            .iter()
            .map(|(&l, &c)| (l, if total == 0 { 0.0 } else { c as f64 / total as f64 }))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthExport {
    pub batches: Vec<GroundTruthLabel>,
    pub users: Vec<UserLabel>,
    pub summary: ExportSummary,
}

impl GroundTruthExport {
    /// Users with a resolved label.
    pub fn resolved(&self) -> BTreeMap<&str, Label> {
        self.users
            .iter()
            .filter_map(|u| u.final_label.map(|l| (u.user_id.as_str(), l)))
            .collect()
    }
}

/// The first `panel` distinct workers' labels per batch, taken in
/// `(submitted_at, worker_id)` order so the result ignores record order.
pub fn panel_labels(records: &[AnnotationRecord], panel: usize) -> BTreeMap<&str, Vec<Label>> {
    let mut sorted: Vec<&AnnotationRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (a.submitted_at, &a.worker_id, a.label).cmp(&(b.submitted_at, &b.worker_id, b.label)));
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut per_batch: BTreeMap<&str, Vec<Label>> = BTreeMap::new();
    for r in sorted {
        if !seen.insert((r.worker_id.as_str(), r.batch_id.as_str())) {
            continue;
        }
        let labels = per_batch.entry(r.batch_id.as_str()).or_default();
        if labels.len() < panel {
            labels.push(r.label);
        }
    }
    per_batch
}

/// Batch majority votes over complete panels, then a second plurality over
/// each user's resolved batch labels. Control batches are skipped.
pub fn export_ground_truth(records: &[AnnotationRecord], batches: &[Batch], panel: usize) -> GroundTruthExport {
    let labels = panel_labels(records, panel);
    let mut summary = ExportSummary::default();
    let mut out_batches = Vec::new();
    let mut per_user: BTreeMap<&str, Vec<Label>> = BTreeMap::new();
    let mut users_seen: BTreeSet<&str> = BTreeSet::new();

    let mut ordered: Vec<&Batch> = batches.iter().filter(|b| !b.is_control).collect();
    ordered.sort_by(|a, b| a.batch_id.cmp(&b.batch_id));
    for batch in ordered {
        summary.batches_total += 1;
        let votes = labels.get(batch.batch_id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if votes.len() < panel {
            summary.batches_incomplete += 1;
            continue;
        }
        summary.batches_complete += 1;
        users_seen.insert(batch.user_id.as_str());
        let vote = majority_vote(votes);
        match vote.final_label {
            Some(l) => per_user.entry(batch.user_id.as_str()).or_default().push(l),
            None => summary.batches_unresolved += 1,
        }
        out_batches.push(GroundTruthLabel {
            batch_id: batch.batch_id.clone(),
            user_id: batch.user_id.clone(),
            final_label: vote.final_label,
            vote_histogram: vote.vote_histogram,
        });
    }

    let mut users = Vec::new();
    for user in users_seen {
        let Some(batch_labels) = per_user.get(user) else {
            summary.users_excluded += 1;
            continue;
        };
        let vote = majority_vote(batch_labels);
        match vote.final_label {
            Some(l) => {
                summary.users_resolved += 1;
                *summary.distribution.entry(l).or_default() += 1;
            }
            None => summary.users_tied += 1,
        }
        users.push(UserLabel {
            user_id: user.into(),
            final_label: vote.final_label,
            vote_histogram: vote.vote_histogram,
        });
    }
    GroundTruthExport {
        batches: out_batches,
        users,
        summary,
    }
}

/// Batch-by-label count matrix for the complete panels among `records`.
pub fn assignment_matrix(records: &[AnnotationRecord], panel: usize) -> Vec<Vec<u32>> {
    panel_labels(records, panel)
        .into_values()
        .filter(|v| v.len() == panel)
        .map(|votes| {
            let mut row = alloc::vec![0u32; Label::ALL.len()];
            for l in votes {
                row[l as usize] += 1;
            }
            row
        })
        .collect()
}

/// Simulated panel: each rater reports the planted label, except with
/// probability `noise` a uniformly chosen different label.
pub fn simulate_raters(
    batches: &[Batch],
    planted: &BTreeMap<String, Label>,
    panel: usize,
    noise: f64,
    seed: u64,
) -> Vec<AnnotationRecord> {
    let mut records = Vec::new();
    for batch in batches {
        let Some(&truth) = planted.get(&batch.user_id) else {
            continue;
        };
        let mut rng = rng::rng_for_str(seed, &batch.batch_id);
        for rater in 0..panel {
            let label = if rng.random::<f64>() < noise {
                let others: Vec<Label> = Label::ALL.into_iter().filter(|&l| l != truth).collect();
                others[rng.random_range(0..others.len())]
            } else {
                truth
            };
            records.push(AnnotationRecord {
                worker_id: alloc::format!("sim-{rater}"),
                batch_id: batch.batch_id.clone(),
                label,
                submitted_at: rater as i64,
            });
        }
    }
    records
}
