//! Stage runner. Each stage reads files from the output directory, writes
//! its own files there and records content hashes in `manifest.json`. A
//! stage whose parameters, inputs and outputs all still match the manifest
//! is skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use meanbirds_core::features::{extract_all, FeatureVector};
use meanbirds_core::graph::{compute_metrics, IterConfig, NodeMetrics, SocialGraph};
use meanbirds_core::groundtruth::{
    assignment_matrix, export_ground_truth, fleiss_kappa, simulate_raters, AnnotationRecord, ExportSummary, UserLabel,
};
use meanbirds_core::model::{
    balance, cross_validate, default_targets, holdout_evaluate, info_gain_ranking, train_forest, CvConfig, Dataset,
    FeatureGain, FoldMetrics, ForestConfig,
};
use meanbirds_core::sessionizer::{batchify, drop_inactive, sessionize, Batch, BatchBounds, Session, SessionConfig};
use meanbirds_core::spamfilter::{filter_spammers, SpamConfig};
use meanbirds_core::synth::{generate, PlantedUser, SynthConfig};
use meanbirds_core::textprep::Emoticons;
use meanbirds_core::{Corpus, Executor, Label, Tweet, UserAccount};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{AnnotationSource, PipelineConfig, Stage};
use crate::io;
use crate::parallel::Pool;

pub const TWEETS: &str = "tweets.jsonl";
pub const ACCOUNTS: &str = "accounts.jsonl";
pub const EDGES: &str = "edges.txt";
pub const PLANTED: &str = "planted.jsonl";
pub const LOAD_SUMMARY: &str = "load_summary.json";
pub const VERDICTS: &str = "verdicts.jsonl";
pub const FILTERED: &str = "filtered_tweets.jsonl";
pub const ACTIVE: &str = "active_tweets.jsonl";
pub const SESSIONS: &str = "sessions.jsonl";
pub const BATCHES: &str = "batches.jsonl";
pub const RECORDS: &str = "records.jsonl";
pub const GROUNDTRUTH: &str = "groundtruth.jsonl";
pub const AGREEMENT: &str = "agreement.json";
pub const METRICS: &str = "metrics.jsonl";
pub const GRAPH_SUMMARY: &str = "graph_summary.json";
pub const FEATURES: &str = "features.csv";
pub const MODEL: &str = "model.json";
pub const REPORT: &str = "report.json";
pub const PREDICTIONS: &str = "predictions.jsonl";
pub const INFO_GAIN: &str = "info_gain.json";
pub const HOLDOUT: &str = "balanced_holdout.json";
pub const MANIFEST: &str = "manifest.json";

/// Which stage writes an artifact, for "run X first" errors.
fn producer(file: &str) -> &'static str {
    match file {
        TWEETS | ACCOUNTS | EDGES => "synth` or `ingest",
        PLANTED => "synth",
        VERDICTS | FILTERED => "spamfilter",
        ACTIVE | SESSIONS | BATCHES => "sessionize",
        RECORDS | GROUNDTRUTH | AGREEMENT => "annotate",
        METRICS | GRAPH_SUMMARY => "graph",
        FEATURES => "extract",
        _ => "train",
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of the stage's parameters, seed included.
    pub params: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub stages: BTreeMap<Stage, StageRecord>,
}

impl Manifest {
    fn new(seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            stages: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub executed: Vec<Stage>,
    pub skipped: Vec<Stage>,
}

/// One `predictions.jsonl` row: the out-of-fold prediction of a user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub user_id: String,
    pub truth: Label,
    pub predicted: Label,
    pub probabilities: BTreeMap<Label, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// `None` when no batch has a complete panel.
    pub fleiss_kappa: Option<f64>,
    pub summary: ExportSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub train_rows: usize,
    pub test_rows: usize,
    pub balanced_counts: BTreeMap<Label, usize>,
    pub synthetic_rows: usize,
    pub metrics: FoldMetrics,
}

pub struct Pipeline {
    config: PipelineConfig,
    out: PathBuf,
    pool: Pool,
    manifest: Manifest,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let out = config.out_dir.clone();
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let manifest_path = out.join(MANIFEST);
        let manifest = match manifest_path.exists() {
            true => {
                let m: Manifest = io::read_json(&manifest_path)?;
                if m.seed == config.seed {
                    m
                } else {
                    Manifest::new(config.seed)
                }
            }
            false => Manifest::new(config.seed),
        };
        let pool = Pool::new(config.workers)?;
        Ok(Self {
            config,
            out,
            pool,
            manifest,
        })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// Run the configured stage plan.
    pub fn run(&mut self) -> Result<RunReport> {
        let plan = self.config.stage_plan();
        self.run_stages(&plan)
    }

    pub fn run_stages(&mut self, stages: &[Stage]) -> Result<RunReport> {
        let mut report = RunReport::default();
        for &stage in stages {
            let started = Instant::now();
            if self.run_stage(stage)? {
                eprintln!("[{stage}] done in {:.1}s", started.elapsed().as_secs_f64());
                report.executed.push(stage);
            } else {
                eprintln!("[{stage}] up to date");
                report.skipped.push(stage);
            }
        }
        Ok(report)
    }

    fn require(&self, file: &str) -> Result<PathBuf> {
        let p = self.path(file);
        if !p.exists() {
            bail!("missing {}: run stage `{}` first", p.display(), producer(file));
        }
        Ok(p)
    }

    /// Input files (artifact names or external paths) and parameters of a stage.
    fn stage_inputs(&self, stage: Stage) -> Result<(Vec<(String, PathBuf)>, serde_json::Value)> {
        let c = &self.config;
        let mut inputs = Vec::new();
        let mut artifact = |name: &str| -> Result<()> {
            inputs.push((name.to_string(), self.require(name)?));
            Ok(())
        };
        let params = match stage {
            Stage::Synth => json!({ "synth": c.synth, "seed": c.seed }),
            Stage::Ingest => json!({}),
            Stage::Spamfilter => {
                artifact(TWEETS)?;
                artifact(ACCOUNTS)?;
                json!({ "spamfilter": c.spamfilter })
            }
            Stage::Sessionize => {
                artifact(FILTERED)?;
                artifact(ACCOUNTS)?;
                json!({ "sessionize": c.sessionize })
            }
            Stage::Annotate => {
                artifact(BATCHES)?;
                if c.annotate.source == AnnotationSource::Simulate {
                    artifact(PLANTED).context("simulated raters need planted labels")?;
                }
                json!({
                    "source": c.annotate.source,
                    "noise": c.annotate.noise,
                    "panel": c.annotate.panel,
                    "seed": c.seed,
                })
            }
            Stage::Graph => {
                artifact(EDGES)?;
                artifact(ACCOUNTS)?;
                json!({ "graph": c.graph, "seed": c.seed })
            }
            Stage::Extract => {
                for f in [ACTIVE, ACCOUNTS, SESSIONS, BATCHES, METRICS] {
                    artifact(f)?;
                }
                json!({})
            }
            Stage::Train => {
                artifact(FEATURES)?;
                artifact(GROUNDTRUTH)?;
                json!({ "train": c.train, "seed": c.seed })
            }
        };
        let external: Vec<&Path> = match stage {
            Stage::Ingest => {
                let (Some(t), Some(a)) = (&c.input.tweets, &c.input.accounts) else {
                    bail!("stage `ingest` needs input.tweets and input.accounts");
                };
                [t, a].into_iter().chain(&c.input.edges).map(PathBuf::as_path).collect()
            }
            Stage::Spamfilter => c.lexicons.emoticons.iter().map(PathBuf::as_path).collect(),
            Stage::Annotate => match c.annotate.source {
                AnnotationSource::Simulate => vec![],
                AnnotationSource::Records => {
                    vec![c.annotate.records.as_deref().ok_or_else(|| anyhow!("annotate.source = records needs annotate.records"))?]
                }
                AnnotationSource::Groundtruth => vec![c
                    .annotate
                    .groundtruth
                    .as_deref()
                    .ok_or_else(|| anyhow!("annotate.source = groundtruth needs annotate.groundtruth"))?],
            },
            Stage::Extract => c.lexicons.files(),
            _ => vec![],
        };
        for p in external {
            if !p.exists() {
                bail!("input file {} does not exist", p.display());
            }
            inputs.push((p.display().to_string(), p.to_path_buf()));
        }
        Ok((inputs, params))
    }

    fn run_stage(&mut self, stage: Stage) -> Result<bool> {
        let (inputs, params) = self.stage_inputs(stage)?;
        let mut record = StageRecord {
            params: io::sha256_hex(params.to_string().as_bytes()),
            ..StageRecord::default()
        };
        for (key, path) in &inputs {
            record.inputs.insert(key.clone(), io::sha256_file(path)?);
        }
        if let Some(prev) = self.manifest.stages.get(&stage) {
            if prev.params == record.params && prev.inputs == record.inputs && self.outputs_intact(prev) {
                return Ok(false);
            }
        }
        let outputs = self.execute(stage).with_context(|| format!("stage `{stage}`"))?;
        for name in outputs {
            record.outputs.insert(name.to_string(), io::sha256_file(&self.path(name))?);
        }
        self.manifest.stages.insert(stage, record);
        io::write_json(&self.path(MANIFEST), &self.manifest)?;
        Ok(true)
    }

    fn outputs_intact(&self, record: &StageRecord) -> bool {
        record
            .outputs
            .iter()
            .all(|(name, hash)| io::sha256_file(&self.path(name)).is_ok_and(|h| &h == hash))
    }

    fn execute(&self, stage: Stage) -> Result<Vec<&'static str>> {
        match stage {
            Stage::Synth => self.synth(),
            Stage::Ingest => self.ingest(),
            Stage::Spamfilter => self.spamfilter(),
            Stage::Sessionize => self.sessionize(),
            Stage::Annotate => self.annotate(),
            Stage::Graph => self.graph(),
            Stage::Extract => self.extract(),
            Stage::Train => self.train(),
        }
    }

    fn synth(&self) -> Result<Vec<&'static str>> {
        let s = &self.config.synth;
        let mut sc = SynthConfig::proportional(s.users);
        sc.near_duplicate_fraction = s.near_duplicate_fraction;
        sc.window_days = s.window_days;
        let out = generate(&sc, self.config.seed)?;
        io::write_corpus(&out.corpus, &self.path(TWEETS), &self.path(ACCOUNTS))?;
        io::write_edges(&self.path(EDGES), &out.edges)?;
        io::write_jsonl(&self.path(PLANTED), &out.planted)?;
        Ok(vec![TWEETS, ACCOUNTS, EDGES, PLANTED])
    }

    fn ingest(&self) -> Result<Vec<&'static str>> {
        let input = &self.config.input;
        let (tweets, accounts) = (input.tweets.as_deref().unwrap(), input.accounts.as_deref().unwrap());
        let (corpus, summary) = io::load_corpus(tweets, accounts)?;
        io::write_corpus(&corpus, &self.path(TWEETS), &self.path(ACCOUNTS))?;
        let edges = match &input.edges {
            Some(p) => io::read_edges(p)?,
            None => Vec::new(),
        };
        io::write_edges(&self.path(EDGES), &edges)?;
        io::write_json(&self.path(LOAD_SUMMARY), &summary)?;
        // Planted labels only exist for generated corpora.
        let planted = self.path(PLANTED);
        if planted.exists() {
            std::fs::remove_file(&planted)?;
        }
        Ok(vec![TWEETS, ACCOUNTS, EDGES, LOAD_SUMMARY])
    }

    fn accounts(&self) -> Result<Vec<UserAccount>> {
        io::read_jsonl(&self.path(ACCOUNTS))
    }

    fn corpus_from(&self, tweets_file: &str) -> Result<Corpus> {
        let tweets: Vec<Tweet> = io::read_jsonl(&self.path(tweets_file))?;
        Ok(Corpus::from_parts(tweets, self.accounts()?).0)
    }

    fn spamfilter(&self) -> Result<Vec<&'static str>> {
        let corpus = self.corpus_from(TWEETS)?;
        let emoticons = match &self.config.lexicons.emoticons {
            Some(p) => Emoticons::parse(&io::read_text(p)?),
            None => Emoticons::default(),
        };
        let s = &self.config.spamfilter;
        let cfg = SpamConfig {
            hashtag_cutoff: s.hashtag_cutoff,
            sim_cutoff: s.sim_cutoff,
            max_pairwise_tweets: s.max_pairwise_tweets,
        };
        let (kept, verdicts) = filter_spammers(&corpus, &cfg, &emoticons, &self.pool);
        io::write_jsonl(&self.path(VERDICTS), &verdicts)?;
        io::write_jsonl(&self.path(FILTERED), kept.tweets())?;
        Ok(vec![VERDICTS, FILTERED])
    }

    fn sessionize(&self) -> Result<Vec<&'static str>> {
        let s = &self.config.sessionize;
        let sc = SessionConfig {
            gap_hours: s.gap_hours,
            min_tweets: s.min_tweets,
        };
        let bounds = BatchBounds {
            min: s.batch_min,
            max: s.batch_max,
        };
        let active = drop_inactive(&self.corpus_from(FILTERED)?, s.min_tweets);
        let groups: Vec<Vec<&Tweet>> = active.tweets_by_user().into_values().collect();
        let gap = sc.gap_seconds();
        let per_user = self.pool.map(&groups, |tweets| {
            let sessions = sessionize(tweets, gap);
            let batches: Vec<Batch> = sessions.iter().flat_map(|s| batchify(s, bounds)).collect();
            (sessions, batches)
        });
        let sessions: Vec<&Session> = per_user.iter().flat_map(|p| &p.0).collect();
        let batches: Vec<&Batch> = per_user.iter().flat_map(|p| &p.1).collect();
        io::write_jsonl(&self.path(ACTIVE), active.tweets())?;
        io::write_jsonl(&self.path(SESSIONS), &sessions)?;
        io::write_jsonl(&self.path(BATCHES), &batches)?;
        Ok(vec![ACTIVE, SESSIONS, BATCHES])
    }

    fn annotate(&self) -> Result<Vec<&'static str>> {
        let a = &self.config.annotate;
        let batches: Vec<Batch> = io::read_jsonl(&self.path(BATCHES))?;
        let records: Vec<AnnotationRecord> = match a.source {
            AnnotationSource::Simulate => {
                let planted: Vec<PlantedUser> = io::read_jsonl(&self.path(PLANTED))?;
                let labels = planted.into_iter().map(|p| (p.user_id, p.label)).collect();
                simulate_raters(&batches, &labels, a.panel, a.noise, self.config.seed)
            }
            AnnotationSource::Records => read_records(a.records.as_deref().unwrap())?,
            AnnotationSource::Groundtruth => {
                let users: Vec<UserLabel> = io::read_jsonl(a.groundtruth.as_deref().unwrap())?;
                io::write_jsonl(&self.path(GROUNDTRUTH), &users)?;
                io::write_jsonl::<AnnotationRecord>(&self.path(RECORDS), &[])?;
                let report = AgreementReport {
                    fleiss_kappa: None,
                    summary: ExportSummary::default(),
                };
                io::write_json(&self.path(AGREEMENT), &report)?;
                return Ok(vec![RECORDS, GROUNDTRUTH, AGREEMENT]);
            }
        };
        let export = export_ground_truth(&records, &batches, a.panel);
        let report = AgreementReport {
            fleiss_kappa: fleiss_kappa(&assignment_matrix(&records, a.panel)).ok(),
            summary: export.summary.clone(),
        };
        io::write_jsonl(&self.path(RECORDS), &records)?;
        io::write_jsonl(&self.path(GROUNDTRUTH), &export.users)?;
        io::write_json(&self.path(AGREEMENT), &report)?;
        Ok(vec![RECORDS, GROUNDTRUTH, AGREEMENT])
    }

    fn graph(&self) -> Result<Vec<&'static str>> {
        let accounts = self.accounts()?;
        let edges = io::read_edges(&self.path(EDGES))?;
        let (metrics, summary) = graph_metrics(&accounts, &edges, &self.config, &self.pool);
        io::write_jsonl(&self.path(METRICS), &metrics)?;
        io::write_json(&self.path(GRAPH_SUMMARY), &summary)?;
        Ok(vec![METRICS, GRAPH_SUMMARY])
    }

    fn extract(&self) -> Result<Vec<&'static str>> {
        let corpus = self.corpus_from(ACTIVE)?;
        let mut sessions: BTreeMap<String, Vec<Session>> = BTreeMap::new();
        for s in io::read_jsonl::<Session>(&self.path(SESSIONS))? {
            sessions.entry(s.user_id.clone()).or_default().push(s);
        }
        let batches: Vec<Batch> = io::read_jsonl(&self.path(BATCHES))?;
        let metrics: Vec<NodeMetrics> = io::read_jsonl(&self.path(METRICS))?;
        let lex = self.config.lexicons.load()?;
        let vectors = extract_all(&corpus, &sessions, &batches, &metrics, &lex, &self.pool);
        io::write_features_csv(&self.path(FEATURES), &vectors)?;
        Ok(vec![FEATURES])
    }

    fn train(&self) -> Result<Vec<&'static str>> {
        let t = &self.config.train;
        let seed = self.config.seed;
        let vectors = io::read_features_csv(&self.path(FEATURES))?;
        let labels: Vec<UserLabel> = io::read_jsonl(&self.path(GROUNDTRUTH))?;
        let (data, users) = labeled_dataset(&vectors, &labels, t.classes, &t.selection_mask()?)?;
        let forest = ForestConfig {
            n_trees: t.trees,
            max_depth: t.max_depth,
            features_per_split: None,
        };
        let cv = CvConfig {
            folds: t.folds,
            repeats: t.repeats,
            forest,
        };
        let outcome = cross_validate(&data, &cv, seed, &self.pool)?;
        let predictions: Vec<PredictionRow> = outcome
            .out_of_fold
            .iter()
            .map(|o| PredictionRow {
                user_id: users[o.index].clone(),
                truth: o.truth,
                predicted: o.predicted,
                probabilities: outcome.report.classes.iter().copied().zip(o.probabilities.iter().copied()).collect(),
            })
            .collect();
        let gains: Vec<FeatureGain> = info_gain_ranking(&data);
        let mut written = vec![REPORT, PREDICTIONS, INFO_GAIN, MODEL];

        let model = if t.balance {
            let targets = t.targets.clone().unwrap_or_else(|| default_targets(&data));
            let holdout = holdout_evaluate(&data, t.test_fraction, &targets, t.smote_k, &forest, seed, &self.pool)?;
            let report = HoldoutReport {
                train_rows: holdout.train_indices.len(),
                test_rows: holdout.test_indices.len(),
                balanced_counts: data_counts(&holdout.balanced.data),
                synthetic_rows: holdout.balanced.synthetic.len(),
                metrics: holdout.metrics,
            };
            io::write_json(&self.path(HOLDOUT), &report)?;
            written.push(HOLDOUT);
            let balanced = balance(&data, &targets, t.smote_k, seed)?;
            train_forest(&balanced.data, &forest, seed, &self.pool)?
        } else {
            train_forest(&data, &forest, seed, &self.pool)?
        };
        io::write_json(&self.path(REPORT), &outcome.report)?;
        io::write_jsonl(&self.path(PREDICTIONS), &predictions)?;
        io::write_json(&self.path(INFO_GAIN), &gains)?;
        io::write_json(&self.path(MODEL), &model)?;
        Ok(written)
    }
}

fn data_counts(data: &Dataset) -> BTreeMap<Label, usize> {
    data.classes().into_iter().map(|c| (c, data.count(c))).collect()
}

/// Metrics for every account and every edge endpoint.
pub fn graph_metrics(
    accounts: &[UserAccount],
    edges: &[(String, String)],
    config: &PipelineConfig,
    exec: &impl Executor,
) -> (Vec<NodeMetrics>, meanbirds_core::graph::GraphSummary) {
    let graph = SocialGraph::from_nodes_and_edges(
        accounts.iter().map(|a| a.user_id.as_str()),
        edges.iter().map(|(a, b)| (a.as_str(), b.as_str())),
    );
    let iter = IterConfig {
        tol: config.graph.tol,
        max_iter: config.graph.max_iter,
    };
    compute_metrics(&graph, &iter, config.seed, exec)
}

/// Join feature rows with resolved user labels. The 3-class setting drops
/// spammers. Returns the dataset and the user id of every row.
pub fn labeled_dataset(
    vectors: &[FeatureVector],
    labels: &[UserLabel],
    classes: usize,
    mask: &meanbirds_core::features::SelectionMask,
) -> Result<(Dataset, Vec<String>)> {
    let truth: BTreeMap<&str, Label> = labels
        .iter()
        .filter_map(|u| u.final_label.map(|l| (u.user_id.as_str(), l)))
        .collect();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut users = Vec::new();
    for v in vectors {
        let Some(&label) = truth.get(v.user_id.as_str()) else {
            continue;
        };
        if classes == 3 && label == Label::Spammer {
            continue;
        }
        rows.push(v.masked(mask)?);
        y.push(label);
        users.push(v.user_id.clone());
    }
    if rows.is_empty() {
        bail!("no feature row has a resolved label");
    }
    Ok((Dataset::new(mask.names().to_vec(), rows, y)?, users))
}

/// Annotation records, either plain or as the service's event log.
fn read_records(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let text = io::read_text(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    let is_log = first.and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok()).is_some_and(|v| v.get("event").is_some());
    if is_log {
        crate::service::records_from_log(path)
    } else {
        io::read_jsonl(path)
    }
}
