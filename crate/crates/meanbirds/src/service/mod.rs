//! Annotation service: worker registration, batch assignment with one
//! control batch per assignment, label collection and live statistics.
//!
//! Every accepted command becomes an event appended to a JSONL log before it
//! touches the in-memory state, and startup replays the log. All state sits
//! behind one mutex, so the log has a single writer and the per-batch label
//! cap holds under any request interleaving.

mod http;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use meanbirds_core::groundtruth::{
    assignment_matrix, export_ground_truth, fleiss_kappa, AnnotationRecord, Demographics, GroundTruthExport,
};
use meanbirds_core::rng::rng_for_str;
use meanbirds_core::sessionizer::Batch;
use meanbirds_core::{Label, Tweet, UserAccount};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use http::{router, serve};

pub const DEFINITIONS: &str = include_str!("definitions.txt");

pub const GENDERS: &[&str] = &["female", "male", "other", "unknown"];
pub const AGE_BANDS: &[&str] = &["18-24", "25-34", "35-44", "45-54", "55+", "unknown"];
pub const EDUCATION: &[&str] = &["secondary", "bachelor", "master", "doctorate", "other", "unknown"];
pub const INCOME_BANDS: &[&str] = &["<10k", "10k-25k", "25k-50k", "50k-100k", ">100k", "unknown"];

pub trait Clock: Send + Sync {
    /// Epoch seconds.
    fn now(&self) -> i64;
}

#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> i64 {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0)
    }
}

/// Settable clock for tests.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicI64);

impl ManualClock {
    pub fn new(at: i64) -> Self {
        Self(AtomicI64::new(at))
    }

    pub fn advance(&self, seconds: i64) {
        self.0.fetch_add(seconds, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> i64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub seed: u64,
    /// Labels collected per real batch.
    pub panel: usize,
    /// Real batches per assignment; one control batch is added.
    pub real_per_assignment: usize,
    /// Open assignments older than this are expired and their unlabeled
    /// batches go back to the pool.
    pub assignment_timeout_secs: i64,
    pub definitions: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            panel: 5,
            real_per_assignment: 9,
            assignment_timeout_secs: 3600,
            definitions: DEFINITIONS.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Registered {
        worker_id: String,
        token: String,
        demographics: Demographics,
        at: i64,
    },
    Assigned {
        worker_id: String,
        batch_ids: Vec<String>,
        control_id: String,
        at: i64,
    },
    Labeled {
        worker_id: String,
        batch_id: String,
        label: Label,
        at: i64,
    },
    ControlAnswered {
        worker_id: String,
        batch_id: String,
        label: Label,
        correct: bool,
        at: i64,
    },
    Expired {
        worker_id: String,
        /// Batches that were still unlabeled.
        released: Vec<String>,
        at: i64,
    },
}

/// Rejections, each mapped to an HTTP status by the router.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registration {
    pub token: String,
    #[serde(default)]
    pub demographics: Demographics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetView {
    pub tweet_id: String,
    pub created_at: i64,
    pub text: String,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub mentions: Vec<String>,
    pub is_retweet: bool,
}

impl From<&Tweet> for TweetView {
    fn from(t: &Tweet) -> Self {
        Self {
            tweet_id: t.tweet_id.clone(),
            created_at: t.created_at,
            text: t.text.clone(),
            hashtags: t.hashtags.clone(),
            urls: t.urls.clone(),
            mentions: t.mentions.clone(),
            is_retweet: t.is_retweet,
        }
    }
}

/// What a worker sees of one batch. Real and control batches have the same shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchView {
    pub batch_id: String,
    pub user_id: String,
    pub profile_description: Option<String>,
    /// Chronological.
    pub tweets: Vec<TweetView>,
    pub definitions: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AssignmentResponse {
    Assigned {
        worker_id: String,
        issued_at: i64,
        batch_ids: Vec<String>,
        /// Ids already labeled by this worker.
        labeled: Vec<String>,
        batches: Vec<BatchView>,
        definitions: String,
    },
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSubmission {
    pub worker_id: String,
    pub batch_id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAck {
    pub batch_id: String,
    /// Remaining unlabeled batches in the worker's assignment.
    pub remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    /// Fleiss' kappa over the batches with a full panel.
    pub agreement: Option<f64>,
    /// Resolved users per label.
    pub distribution: BTreeMap<Label, usize>,
    /// Every label submitted on real batches.
    pub label_counts: BTreeMap<Label, usize>,
    pub control_accuracy: Option<f64>,
    pub completion: f64,
    pub batches_total: usize,
    pub batches_complete: usize,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OpenAssignment {
    batch_ids: Vec<String>,
    control_id: String,
    issued_at: i64,
    done: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Worker {
    demographics: Demographics,
    control_correct: u32,
    control_seen: u32,
    assignments: u32,
    seen: BTreeSet<String>,
    open: Option<OpenAssignment>,
}

#[derive(Debug, Default)]
struct State {
    tokens: BTreeMap<String, String>,
    workers: BTreeMap<String, Worker>,
    labels: BTreeMap<String, usize>,
    reserved: BTreeMap<String, usize>,
    records: Vec<AnnotationRecord>,
}

impl State {
    fn apply(&mut self, event: &Event) {
        match event {
            Event::Registered {
                worker_id,
                token,
                demographics,
                ..
            } => {
                self.tokens.insert(token.clone(), worker_id.clone());
                self.workers.insert(
                    worker_id.clone(),
                    Worker {
                        demographics: demographics.clone(),
                        control_correct: 0,
                        control_seen: 0,
                        assignments: 0,
                        seen: BTreeSet::new(),
                        open: None,
                    },
                );
            }
            Event::Assigned {
                worker_id,
                batch_ids,
                control_id,
                at,
            } => {
                let w = self.workers.get_mut(worker_id).expect("assigned worker exists");
                w.assignments += 1;
                w.seen.extend(batch_ids.iter().cloned());
                for b in batch_ids.iter().filter(|b| *b != control_id) {
                    *self.reserved.entry(b.clone()).or_default() += 1;
                }
                w.open = Some(OpenAssignment {
                    batch_ids: batch_ids.clone(),
                    control_id: control_id.clone(),
                    issued_at: *at,
                    done: BTreeSet::new(),
                });
            }
            Event::Labeled {
                worker_id,
                batch_id,
                label,
                at,
            } => {
                if let Some(r) = self.reserved.get_mut(batch_id) {
                    *r -= 1;
                }
                *self.labels.entry(batch_id.clone()).or_default() += 1;
                self.records.push(AnnotationRecord {
                    worker_id: worker_id.clone(),
                    batch_id: batch_id.clone(),
                    label: *label,
                    submitted_at: *at,
                });
                self.mark_done(worker_id, batch_id);
            }
            Event::ControlAnswered {
                worker_id,
                batch_id,
                correct,
                ..
            } => {
                let w = self.workers.get_mut(worker_id).expect("answering worker exists");
                w.control_seen += 1;
                w.control_correct += u32::from(*correct);
                self.mark_done(worker_id, batch_id);
            }
            Event::Expired {
                worker_id, released, ..
            } => {
                let w = self.workers.get_mut(worker_id).expect("expired worker exists");
                if let Some(open) = w.open.take() {
                    for b in released.iter().filter(|b| **b != open.control_id) {
                        if let Some(r) = self.reserved.get_mut(b) {
                            *r -= 1;
                        }
                    }
                }
            }
        }
    }

    fn mark_done(&mut self, worker_id: &str, batch_id: &str) {
        let w = self.workers.get_mut(worker_id).expect("labeling worker exists");
        let finished = match &mut w.open {
            Some(open) => {
                open.done.insert(batch_id.to_string());
                open.done.len() == open.batch_ids.len()
            }
            None => false,
        };
        if finished {
            w.open = None;
        }
    }

    fn load(&self, batch_id: &str) -> usize {
        self.labels.get(batch_id).copied().unwrap_or(0) + self.reserved.get(batch_id).copied().unwrap_or(0)
    }
}

struct Inner {
    state: State,
    log: File,
}

pub struct Service {
    config: ServiceConfig,
    /// Real batches by id.
    batches: BTreeMap<String, Batch>,
    controls: BTreeMap<String, Batch>,
    profiles: BTreeMap<String, Option<String>>,
    clock: Box<dyn Clock>,
    log_path: PathBuf,
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for Service {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Service")
            .field("batches", &self.batches.len())
            .field("controls", &self.controls.len())
            .field("log", &self.log_path)
            .finish()
    }
}

fn check_category(field: &str, value: &str, allowed: &[&str]) -> Result<(), Rejection> {
    if allowed.contains(&value) {
        Ok(())
    } else {
        Err(Rejection::BadRequest(format!("{field} `{value}` is not one of {}", allowed.join(", "))))
    }
}

fn validate_demographics(d: &Demographics) -> Result<(), Rejection> {
    check_category("gender", &d.gender, GENDERS)?;
    check_category("age_band", &d.age_band, AGE_BANDS)?;
    check_category("education", &d.education, EDUCATION)?;
    check_category("income_band", &d.income_band, INCOME_BANDS)?;
    if d.nationality.trim().is_empty() {
        return Err(Rejection::BadRequest("nationality must not be empty; use `unknown`".into()));
    }
    Ok(())
}

impl Service {
    /// Open (or create) the event log at `log_path` and replay it.
    pub fn open(
        config: ServiceConfig,
        batches: Vec<Batch>,
        controls: Vec<Batch>,
        accounts: &[UserAccount],
        log_path: &Path,
        clock: Box<dyn Clock>,
    ) -> Result<Self> {
        if controls.is_empty() {
            bail!("at least one control batch with a gold label is required");
        }
        if config.panel == 0 || config.real_per_assignment == 0 {
            bail!("panel size and batches per assignment must be positive");
        }
        let mut real = BTreeMap::new();
        for b in batches.into_iter().filter(|b| !b.is_control) {
            if real.insert(b.batch_id.clone(), b).is_some() {
                bail!("duplicate batch id in batch file");
            }
        }
        let mut gold = BTreeMap::new();
        for mut b in controls {
            if b.gold_label.is_none() {
                bail!("control batch `{}` has no gold_label", b.batch_id);
            }
            if real.contains_key(&b.batch_id) || gold.contains_key(&b.batch_id) {
                bail!("control batch id `{}` is not unique", b.batch_id);
            }
            b.is_control = true;
            gold.insert(b.batch_id.clone(), b);
        }
        let profiles = accounts.iter().map(|a| (a.user_id.clone(), a.profile_description.clone())).collect();

        let mut state = State::default();
        if log_path.exists() {
            let file = File::open(log_path).with_context(|| format!("opening {}", log_path.display()))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: Event = serde_json::from_str(&line)
                    .with_context(|| format!("{}:{}: unreadable event", log_path.display(), i + 1))?;
                state.apply(&event);
            }
        } else if let Some(dir) = log_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(log_path)
            .with_context(|| format!("opening {}", log_path.display()))?;
        Ok(Self {
            config,
            batches: real,
            controls: gold,
            profiles,
            clock,
            log_path: log_path.to_path_buf(),
            inner: Mutex::new(Inner { state, log }),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn log_path(&self) -> &Path {
        &self.log_path
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn commit(inner: &mut Inner, event: Event) -> Result<(), Rejection> {
        let mut line = serde_json::to_string(&event).expect("events serialize");
        line.push('\n');
        inner
            .log
            .write_all(line.as_bytes())
            .and_then(|_| inner.log.flush())
            .map_err(|e| Rejection::Conflict(format!("event log write failed: {e}")))?;
        inner.state.apply(&event);
        Ok(())
    }

    fn expire(&self, inner: &mut Inner, now: i64) -> Result<(), Rejection> {
        let timeout = self.config.assignment_timeout_secs;
        let stale: Vec<(String, Vec<String>)> = inner
            .state
            .workers
            .iter()
            .filter_map(|(id, w)| {
                let open = w.open.as_ref()?;
                (now - open.issued_at >= timeout).then(|| {
                    let released = open.batch_ids.iter().filter(|b| !open.done.contains(*b)).cloned().collect();
                    (id.clone(), released)
                })
            })
            .collect();
        for (worker_id, released) in stale {
            Self::commit(inner, Event::Expired { worker_id, released, at: now })?;
        }
        Ok(())
    }

    pub fn register(&self, reg: Registration) -> Result<String, Rejection> {
        if reg.token.trim().is_empty() {
            return Err(Rejection::BadRequest("registration token must not be empty".into()));
        }
        validate_demographics(&reg.demographics)?;
        let now = self.clock.now();
        let mut inner = self.lock();
        if inner.state.tokens.contains_key(&reg.token) {
            return Err(Rejection::Conflict("this registration token has already been used".into()));
        }
        let worker_id = format!("w{:05}", inner.state.workers.len() + 1);
        Self::commit(
            &mut inner,
            Event::Registered {
                worker_id: worker_id.clone(),
                token: reg.token,
                demographics: reg.demographics,
                at: now,
            },
        )?;
        Ok(worker_id)
    }

    /// The worker's open assignment, or a fresh one of up to
    /// `real_per_assignment` least-labeled batches plus one control batch.
    pub fn assignment(&self, worker_id: &str) -> Result<AssignmentResponse, Rejection> {
        let now = self.clock.now();
        let mut inner = self.lock();
        self.expire(&mut inner, now)?;
        let state = &inner.state;
        let Some(worker) = state.workers.get(worker_id) else {
            return Err(Rejection::NotFound(format!("unknown worker `{worker_id}`")));
        };
        if let Some(open) = &worker.open {
            return Ok(self.view(worker_id, open));
        }

        let mut rng = rng_for_str(self.config.seed, &format!("{worker_id}/{}", worker.assignments));
        let mut candidates: Vec<(&String, usize)> = self
            .batches
            .keys()
            .filter(|b| !worker.seen.contains(*b))
            .map(|b| (b, state.load(b)))
            .filter(|&(_, load)| load < self.config.panel)
            .collect();
        if candidates.is_empty() {
            return Ok(AssignmentResponse::Complete);
        }
        candidates.shuffle(&mut rng);
        candidates.sort_by_key(|&(_, load)| load);
        let mut ids: Vec<String> = candidates
            .into_iter()
            .take(self.config.real_per_assignment)
            .map(|(b, _)| b.clone())
            .collect();

        let unseen: Vec<&String> = self.controls.keys().filter(|c| !worker.seen.contains(*c)).collect();
        let pool: Vec<&String> = if unseen.is_empty() { self.controls.keys().collect() } else { unseen };
        let control_id = pool[rng.random_range(0..pool.len())].clone();
        ids.push(control_id.clone());
        ids.shuffle(&mut rng);

        Self::commit(
            &mut inner,
            Event::Assigned {
                worker_id: worker_id.to_string(),
                batch_ids: ids,
                control_id,
                at: now,
            },
        )?;
        let open = inner.state.workers[worker_id].open.as_ref().expect("just assigned");
        Ok(self.view(worker_id, open))
    }

    fn view(&self, worker_id: &str, open: &OpenAssignment) -> AssignmentResponse {
        let batches = open
            .batch_ids
            .iter()
            .map(|id| {
                let b = self.batches.get(id).or_else(|| self.controls.get(id)).expect("assigned batch exists");
                let mut tweets: Vec<&Tweet> = b.tweets.iter().collect();
                tweets.sort_by(|x, y| (x.created_at, &x.tweet_id).cmp(&(y.created_at, &y.tweet_id)));
                BatchView {
                    batch_id: b.batch_id.clone(),
                    user_id: b.user_id.clone(),
                    profile_description: self.profiles.get(&b.user_id).cloned().flatten(),
                    tweets: tweets.into_iter().map(TweetView::from).collect(),
                    definitions: self.config.definitions.clone(),
                }
            })
            .collect();
        AssignmentResponse::Assigned {
            worker_id: worker_id.to_string(),
            issued_at: open.issued_at,
            batch_ids: open.batch_ids.clone(),
            labeled: open.done.iter().cloned().collect(),
            batches,
            definitions: self.config.definitions.clone(),
        }
    }

    pub fn submit(&self, sub: LabelSubmission) -> Result<LabelAck, Rejection> {
        let label: Label = sub
            .label
            .parse()
            .map_err(|_| Rejection::BadRequest(format!("label `{}` is not one of bully, aggressive, spammer, normal", sub.label)))?;
        let now = self.clock.now();
        let mut inner = self.lock();
        self.expire(&mut inner, now)?;
        let state = &inner.state;
        let Some(worker) = state.workers.get(&sub.worker_id) else {
            return Err(Rejection::NotFound(format!("unknown worker `{}`", sub.worker_id)));
        };
        let is_control = self.controls.contains_key(&sub.batch_id);
        if !is_control && !self.batches.contains_key(&sub.batch_id) {
            return Err(Rejection::NotFound(format!("unknown batch `{}`", sub.batch_id)));
        }
        let already = state
            .records
            .iter()
            .any(|r| r.worker_id == sub.worker_id && r.batch_id == sub.batch_id);
        let Some(open) = worker.open.as_ref().filter(|o| o.batch_ids.contains(&sub.batch_id)) else {
            return Err(if already || worker.seen.contains(&sub.batch_id) {
                Rejection::Conflict(format!("batch `{}` was already handled by this worker", sub.batch_id))
            } else {
                Rejection::Conflict(format!("batch `{}` is not in this worker's open assignment", sub.batch_id))
            });
        };
        if open.done.contains(&sub.batch_id) || already {
            return Err(Rejection::Conflict(format!("duplicate submission for batch `{}`", sub.batch_id)));
        }
        let remaining = open.batch_ids.len() - open.done.len() - 1;
        let event = if is_control {
            let gold = self.controls[&sub.batch_id].gold_label.expect("controls carry gold labels");
            Event::ControlAnswered {
                worker_id: sub.worker_id,
                batch_id: sub.batch_id.clone(),
                label,
                correct: label == gold,
                at: now,
            }
        } else {
            // Reservations already count toward the cap, so this only trips
            // if the state was corrupted.
            if state.labels.get(&sub.batch_id).copied().unwrap_or(0) >= self.config.panel {
                return Err(Rejection::Conflict(format!("batch `{}` already has a full panel", sub.batch_id)));
            }
            Event::Labeled {
                worker_id: sub.worker_id,
                batch_id: sub.batch_id.clone(),
                label,
                at: now,
            }
        };
        Self::commit(&mut inner, event)?;
        Ok(LabelAck {
            batch_id: sub.batch_id,
            remaining,
        })
    }

    pub fn records(&self) -> Vec<AnnotationRecord> {
        self.lock().state.records.clone()
    }

    /// Labels held per real batch.
    pub fn label_counts(&self) -> BTreeMap<String, usize> {
        self.lock().state.labels.clone()
    }

    pub fn worker_controls(&self, worker_id: &str) -> Option<(u32, u32)> {
        self.lock().state.workers.get(worker_id).map(|w| (w.control_correct, w.control_seen))
    }

    pub fn worker_demographics(&self, worker_id: &str) -> Option<Demographics> {
        self.lock().state.workers.get(worker_id).map(|w| w.demographics.clone())
    }

    pub fn real_batches(&self) -> Vec<Batch> {
        self.batches.values().cloned().collect()
    }

    pub fn export(&self) -> GroundTruthExport {
        let records = self.records();
        export_ground_truth(&records, &self.real_batches(), self.config.panel)
    }

    pub fn stats(&self) -> Stats {
        let inner = self.lock();
        let state = &inner.state;
        let records = &state.records;
        let panel = self.config.panel;
        let export = export_ground_truth(records, &self.real_batches(), panel);
        let mut label_counts = BTreeMap::new();
        for r in records {
            *label_counts.entry(r.label).or_default() += 1;
        }
        let (seen, correct) = state
            .workers
            .values()
            .fold((0u64, 0u64), |(s, c), w| (s + u64::from(w.control_seen), c + u64::from(w.control_correct)));
        let total = self.batches.len();
        let complete = export.summary.batches_complete;
        Stats {
            agreement: fleiss_kappa(&assignment_matrix(records, panel)).ok(),
            distribution: export.summary.distribution,
            label_counts,
            control_accuracy: (seen > 0).then(|| correct as f64 / seen as f64),
            completion: if total == 0 { 1.0 } else { complete as f64 / total as f64 },
            batches_total: total,
            batches_complete: complete,
            workers: state.workers.len(),
        }
    }
}

/// Read the event log and return the label records it holds, for offline
/// recomputation of the export.
pub fn records_from_log(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let events: Vec<Event> = crate::io::read_jsonl(path)?;
    Ok(events
        .into_iter()
        .filter_map(|e| match e {
            Event::Labeled {
                worker_id,
                batch_id,
                label,
                at,
            } => Some(AnnotationRecord {
                worker_id,
                batch_id,
                label,
                submitted_at: at,
            }),
            _ => None,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(id: &str, gold: Option<Label>) -> Batch {
        Batch {
            batch_id: id.into(),
            user_id: format!("user-{id}"),
            source_session_id: format!("{id}-s"),
            tweets: (0..5)
                .map(|i| Tweet {
                    tweet_id: format!("{id}-{i}"),
                    user_id: format!("user-{id}"),
                    created_at: 100 - i,
                    text: format!("tweet {i}"),
                    hashtags: vec![],
                    urls: vec![],
                    mentions: vec![],
                    is_retweet: false,
                })
                .collect(),
            is_control: gold.is_some(),
            gold_label: gold,
        }
    }

    fn service(n: usize, dir: &Path, clock: Box<dyn Clock>) -> Service {
        let batches = (0..n).map(|i| batch(&format!("b{i:03}"), None)).collect();
        let controls = vec![batch("gold-1", Some(Label::Bully)), batch("gold-2", Some(Label::Normal))];
        Service::open(ServiceConfig::default(), batches, controls, &[], &dir.join("log.jsonl"), clock).unwrap()
    }

    fn reg(token: &str) -> Registration {
        Registration {
            token: token.into(),
            demographics: Demographics::default(),
        }
    }

    #[test]
    fn assignment_has_one_control_and_chronological_tweets() {
        let dir = tempfile::tempdir().unwrap();
        let s = service(20, dir.path(), Box::new(SystemClock));
        let w = s.register(reg("t1")).unwrap();
        let AssignmentResponse::Assigned { batch_ids, batches, .. } = s.assignment(&w).unwrap() else {
            panic!("expected an assignment");
        };
        assert_eq!(batch_ids.len(), 10);
        assert_eq!(batch_ids.iter().filter(|b| b.starts_with("gold")).count(), 1);
        for b in &batches {
            assert!(b.tweets.windows(2).all(|p| p[0].created_at <= p[1].created_at));
        }
        // Asking again returns the same open assignment.
        let AssignmentResponse::Assigned { batch_ids: again, .. } = s.assignment(&w).unwrap() else {
            panic!()
        };
        assert_eq!(again, batch_ids);
    }

    #[test]
    fn demographics_are_closed_sets() {
        let dir = tempfile::tempdir().unwrap();
        let s = service(5, dir.path(), Box::new(SystemClock));
        let mut r = reg("x");
        r.demographics.gender = "robot".into();
        assert!(matches!(s.register(r), Err(Rejection::BadRequest(_))));
        assert!(s.register(reg("y")).is_ok());
        assert!(matches!(s.register(reg("y")), Err(Rejection::Conflict(_))));
    }

    #[test]
    fn control_answers_are_scored() {
        let dir = tempfile::tempdir().unwrap();
        let s = service(20, dir.path(), Box::new(SystemClock));
        let w = s.register(reg("t")).unwrap();
        let AssignmentResponse::Assigned { batch_ids, .. } = s.assignment(&w).unwrap() else { panic!() };
        let control = batch_ids.iter().find(|b| b.starts_with("gold")).unwrap().clone();
        let gold = if control == "gold-1" { "bully" } else { "normal" };
        s.submit(LabelSubmission {
            worker_id: w.clone(),
            batch_id: control,
            label: gold.into(),
        })
        .unwrap();
        assert_eq!(s.worker_controls(&w), Some((1, 1)));
    }

    #[test]
    fn expired_batches_return_to_pool() {
        let dir = tempfile::tempdir().unwrap();
        let clock = std::sync::Arc::new(ManualClock::new(1_000));
        struct Shared(std::sync::Arc<ManualClock>);
        impl Clock for Shared {
            fn now(&self) -> i64 {
                self.0.now()
            }
        }
        let batches = (0..9).map(|i| batch(&format!("b{i}"), None)).collect();
        let controls = vec![batch("gold", Some(Label::Normal))];
        let config = ServiceConfig {
            panel: 1,
            assignment_timeout_secs: 60,
            ..ServiceConfig::default()
        };
        let s = Service::open(config, batches, controls, &[], &dir.path().join("log"), Box::new(Shared(clock.clone()))).unwrap();
        let a = s.register(reg("a")).unwrap();
        let b = s.register(reg("b")).unwrap();
        assert!(matches!(s.assignment(&a).unwrap(), AssignmentResponse::Assigned { .. }));
        // Everything is reserved by `a`.
        assert_eq!(s.assignment(&b).unwrap(), AssignmentResponse::Complete);
        clock.advance(61);
        let AssignmentResponse::Assigned { batch_ids, .. } = s.assignment(&b).unwrap() else { panic!() };
        assert_eq!(batch_ids.len(), 10);
        // `a` lost its assignment and cannot label into it.
        let err = s
            .submit(LabelSubmission {
                worker_id: a,
                batch_id: "b0".into(),
                label: "normal".into(),
            })
            .unwrap_err();
        assert!(matches!(err, Rejection::Conflict(_)));
    }
}
