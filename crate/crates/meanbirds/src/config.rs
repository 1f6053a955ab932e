//! `pipeline.toml`: every threshold with its default, the stage list, the
//! worker count and the master seed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use meanbirds_core::features::SelectionMask;
use meanbirds_core::Label;
use serde::{Deserialize, Serialize};

use crate::io::LexiconPaths;

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Synth,
    Ingest,
    Spamfilter,
    Sessionize,
    Annotate,
    Graph,
    Extract,
    Train,
}

impl Stage {
    pub const ORDER: [Stage; 8] = [
        Stage::Synth,
        Stage::Ingest,
        Stage::Spamfilter,
        Stage::Sessionize,
        Stage::Annotate,
        Stage::Graph,
        Stage::Extract,
        Stage::Train,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Spamfilter => "spamfilter",
            Stage::Sessionize => "sessionize",
            Stage::Annotate => "annotate",
            Stage::Graph => "graph",
            Stage::Extract => "extract",
            Stage::Train => "train",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match Stage::ORDER.into_iter().find(|st| st.name() == s.trim()) {
            Some(st) => Ok(st),
            None => bail!("unknown stage `{s}`"),
        }
    }
}

/// Where the raw corpus comes from: the synthetic generator or files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub tweets: Option<PathBuf>,
    pub accounts: Option<PathBuf>,
    pub edges: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub users: usize,
    pub near_duplicate_fraction: f64,
    pub window_days: i64,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            users: 1000,
            near_duplicate_fraction: 0.05,
            window_days: 90,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpamSection {
    pub hashtag_cutoff: f64,
    pub sim_cutoff: f64,
    pub max_pairwise_tweets: usize,
}

impl Default for SpamSection {
    fn default() -> Self {
        Self {
            hashtag_cutoff: 5.0,
            sim_cutoff: 0.8,
            max_pairwise_tweets: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionSection {
    pub gap_hours: f64,
    pub min_tweets: usize,
    pub batch_min: usize,
    pub batch_max: usize,
}

impl Default for SessionSection {
    fn default() -> Self {
        Self {
            gap_hours: 8.0,
            min_tweets: 5,
            batch_min: 5,
            batch_max: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationSource {
    /// Simulated panel over the generator's planted labels.
    Simulate,
    /// Annotation records collected elsewhere, e.g. by the service.
    Records,
    /// A finished `groundtruth.jsonl`.
    Groundtruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateSection {
    pub source: AnnotationSource,
    pub noise: f64,
    pub panel: usize,
    pub records: Option<PathBuf>,
    pub groundtruth: Option<PathBuf>,
}

impl Default for AnnotateSection {
    fn default() -> Self {
        Self {
            source: AnnotationSource::Simulate,
            noise: 0.1,
            panel: 5,
            records: None,
            groundtruth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub trees: usize,
    pub folds: usize,
    pub repeats: usize,
    pub classes: usize,
    pub balance: bool,
    /// `model18`, `all`, or a comma-separated list of scalar columns.
    pub mask: String,
    pub max_depth: Option<usize>,
    pub smote_k: usize,
    pub test_fraction: f64,
    /// Per-class training counts after balancing; defaults to the mean class size.
    pub targets: Option<BTreeMap<Label, usize>>,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            trees: 10,
            folds: 10,
            repeats: 10,
            classes: 3,
            balance: false,
            mask: "model18".into(),
            max_depth: None,
            smote_k: 5,
            test_fraction: 0.1,
            targets: None,
        }
    }
}

impl TrainSection {
    pub fn selection_mask(&self) -> Result<SelectionMask> {
        parse_mask(&self.mask)
    }
}

pub fn parse_mask(spec: &str) -> Result<SelectionMask> {
    match spec {
        "model18" => Ok(SelectionMask::model18()),
        "all" => Ok(SelectionMask::all_scalars()),
        list => {
            let names: Vec<String> = list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            let all = SelectionMask::all_scalars();
            for n in &names {
                if !all.names().contains(n) {
                    bail!("`{n}` is not a scalar feature column");
                }
            }
            if names.is_empty() {
                bail!("empty feature mask");
            }
            Ok(SelectionMask(names))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads for data-parallel stages. Never changes the output.
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Stages to run; `None` runs all of them, with `synth` or `ingest`
    /// picked by whether input files are configured.
    pub stages: Option<Vec<Stage>>,
    pub input: InputConfig,
    pub lexicons: LexiconPaths,
    pub synth: SynthSection,
    pub spamfilter: SpamSection,
    pub sessionize: SessionSection,
    pub annotate: AnnotateSection,
    pub graph: GraphSection,
    pub train: TrainSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            workers: 1,
            out_dir: PathBuf::from("out"),
            stages: None,
            input: InputConfig::default(),
            lexicons: LexiconPaths::default(),
            synth: SynthSection::default(),
            spamfilter: SpamSection::default(),
            sessionize: SessionSection::default(),
            annotate: AnnotateSection::default(),
            graph: GraphSection::default(),
            train: TrainSection::default(),
        }
    }
}

impl PipelineConfig {
    /// Parse a TOML file. Relative paths inside it are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.rebase(base);
        config.validate()?;
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        let l = &mut self.lexicons;
        for p in [
            &mut self.input.tweets,
            &mut self.input.accounts,
            &mut self.input.edges,
            &mut self.annotate.records,
            &mut self.annotate.groundtruth,
            &mut l.stopwords,
            &mut l.emoticons,
            &mut l.sentiment,
            &mut l.hate,
            &mut l.swear,
            &mut l.emotion,
            &mut l.vectors,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if !(self.train.classes == 3 || self.train.classes == 4) {
            bail!("train.classes must be 3 or 4, got {}", self.train.classes);
        }
        if self.sessionize.batch_min == 0 || self.sessionize.batch_min > self.sessionize.batch_max {
            bail!("batch bounds must satisfy 0 < min <= max");
        }
        if self.sessionize.batch_max < 2 * self.sessionize.batch_min - 1 {
            bail!("batch bounds need max >= 2*min - 1 so every session length splits");
        }
        if !(0.0..=1.0).contains(&self.annotate.noise) {
            bail!("annotate.noise must lie in [0, 1]");
        }
        if self.input.tweets.is_some() != self.input.accounts.is_some() {
            bail!("input.tweets and input.accounts must be given together");
        }
        self.train.selection_mask()?;
        Ok(())
    }

    pub fn uses_files(&self) -> bool {
        self.input.tweets.is_some()
    }

    /// Stages to run, in execution order.
    pub fn stage_plan(&self) -> Vec<Stage> {
        match &self.stages {
            Some(list) => Stage::ORDER.into_iter().filter(|s| list.contains(s)).collect(),
            None => Stage::ORDER
                .into_iter()
                .filter(|s| match s {
                    Stage::Synth => !self.uses_files(),
                    Stage::Ingest => self.uses_files(),
                    _ => true,
                })
                .collect(),
        }
    }
}
