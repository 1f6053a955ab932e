//! On-disk formats: JSONL records, lexicon files, edge lists and the
//! feature table.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use meanbirds_core::features::{FeatureVector, Lexicons, CANONICAL_NAMES};
use meanbirds_core::lexfeatures::{EmotionLexicon, HateLexicon, SentimentLexicon, SwearList, VectorTable};
use meanbirds_core::textprep::{Emoticons, StopWords};
use meanbirds_core::{Corpus, LoadSummary, Tweet, UserAccount};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Read one JSON value per non-blank line. Errors carry `path:line`.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).with_context(|| format!("{}:{}: schema error", path.display(), i + 1))?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = create(path)?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

pub fn load_corpus(tweets: &Path, accounts: &Path) -> Result<(Corpus, LoadSummary)> {
    let t: Vec<Tweet> = read_jsonl(tweets)?;
    let a: Vec<UserAccount> = read_jsonl(accounts)?;
    Ok(Corpus::from_parts(t, a))
}

pub fn write_corpus(corpus: &Corpus, tweets: &Path, accounts: &Path) -> Result<()> {
    write_jsonl(tweets, corpus.tweets())?;
    let a: Vec<&UserAccount> = corpus.accounts().values().collect();
    write_jsonl(accounts, &a)
}

pub fn read_edges(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read_text(path)?;
    meanbirds_core::graph::parse_edges(&text).with_context(|| format!("in {}", path.display()))
}

pub fn write_edges(path: &Path, edges: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for (a, b) in edges {
        text.push_str(a);
        text.push(' ');
        text.push_str(b);
        text.push('\n');
    }
    write_text(path, &text)
}

/// Lexicon file locations. Anything left out falls back to the bundled set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconPaths {
    pub stopwords: Option<PathBuf>,
    pub emoticons: Option<PathBuf>,
    pub sentiment: Option<PathBuf>,
    pub hate: Option<PathBuf>,
    pub swear: Option<PathBuf>,
    pub emotion: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
}

impl LexiconPaths {
    pub fn files(&self) -> Vec<&Path> {
        [&self.stopwords, &self.emoticons, &self.sentiment, &self.hate, &self.swear, &self.emotion, &self.vectors]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect()
    }

    pub fn load(&self) -> Result<Lexicons> {
        let mut lex = Lexicons::bundled();
        let ctx = |p: &Path| format!("in {}", p.display());
        if let Some(p) = &self.stopwords {
            lex.stopwords = StopWords::parse(&read_text(p)?);
        }
        if let Some(p) = &self.emoticons {
            lex.emoticons = Emoticons::parse(&read_text(p)?);
        }
        if let Some(p) = &self.sentiment {
            lex.sentiment = SentimentLexicon::parse_tsv(&read_text(p)?).with_context(|| ctx(p))?;
        }
        if let Some(p) = &self.hate {
            lex.hate = HateLexicon::parse_csv(&read_text(p)?).with_context(|| ctx(p))?;
        }
        if let Some(p) = &self.swear {
            lex.swear = SwearList::parse(&read_text(p)?);
        }
        if let Some(p) = &self.emotion {
            lex.emotion = Some(EmotionLexicon::parse_tsv(&read_text(p)?).with_context(|| ctx(p))?);
        }
        if let Some(p) = &self.vectors {
            lex.vectors = Some(VectorTable::parse(&read_text(p)?).with_context(|| ctx(p))?);
        }
        Ok(lex)
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn split(cell: &str) -> Result<Vec<f64>> {
    if cell.is_empty() {
        return Ok(Vec::new());
    }
    cell.split(';').map(|v| v.parse::<f64>().with_context(|| format!("bad number `{v}`"))).collect()
}

/// `features.csv`: a leading `user_id` column, then the canonical columns.
/// The two vector-valued columns hold `;`-joined components.
pub fn write_features_csv(path: &Path, vectors: &[FeatureVector]) -> Result<()> {
    let mut text = String::from("user_id");
    for name in CANONICAL_NAMES {
        text.push(',');
        text.push_str(name);
    }
    text.push('\n');
    for v in vectors {
        if v.user_id.contains([',', '\n', '"']) {
            bail!("user id `{}` cannot be written to csv", v.user_id);
        }
        text.push_str(&v.user_id);
        for name in CANONICAL_NAMES {
            text.push(',');
            match name {
                "emotion_scores" => text.push_str(&join(&v.emotion_scores)),
                "avg_embedding" => text.push_str(&join(&v.avg_embedding)),
                _ => text.push_str(&v.scalar(name).expect("canonical scalar").to_string()),
            }
        }
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureVector>> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let expected: Vec<&str> = std::iter::once("user_id").chain(CANONICAL_NAMES).collect();
    if header != expected {
        bail!("{}: header does not list the canonical feature columns", path.display());
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != expected.len() {
            bail!("{}:{}: expected {} cells, got {}", path.display(), i + 2, expected.len(), cells.len());
        }
        let row = parse_feature_row(&cells).with_context(|| format!("{}:{}", path.display(), i + 2))?;
        out.push(row);
    }
    Ok(out)
}

fn parse_feature_row(cells: &[&str]) -> Result<FeatureVector> {
    let mut values = std::collections::BTreeMap::new();
    let mut emotion = Vec::new();
    let mut embedding = Vec::new();
    for (name, cell) in CANONICAL_NAMES.iter().zip(&cells[1..]) {
        match *name {
            "emotion_scores" => emotion = split(cell)?,
            "avg_embedding" => embedding = split(cell)?,
            _ => {
                values.insert(*name, cell.parse::<f64>().with_context(|| format!("column {name}: bad number `{cell}`"))?);
            }
        }
    }
    let emotion_scores: [f64; 6] = emotion.try_into().map_err(|_| anyhow::anyhow!("emotion_scores needs 6 values"))?;
    let get = |n: &str| values[n];
    Ok(FeatureVector {
        user_id: cells[0].to_string(),
        avg_posts_per_day: get("avg_posts_per_day"),
        account_age_days: get("account_age_days"),
        verified: get("verified"),
        subscribed_lists: get("subscribed_lists"),
        median_interarrival_seconds: get("median_interarrival_seconds"),
        default_profile_image: get("default_profile_image"),
        session_count: get("session_count"),
        session_size_avg: get("session_size_avg"),
        session_size_median: get("session_size_median"),
        session_size_std: get("session_size_std"),
        avg_hashtags: get("avg_hashtags"),
        avg_emoticons: get("avg_emoticons"),
        avg_uppercase: get("avg_uppercase"),
        avg_urls: get("avg_urls"),
        avg_sentiment: get("avg_sentiment"),
        emotion_scores,
        hate_score: get("hate_score"),
        avg_embedding: embedding,
        curse_fraction: get("curse_fraction"),
        friends: get("friends"),
        followers: get("followers"),
        ratio: get("ratio"),
        reciprocity: get("reciprocity"),
        hub: get("hub"),
        authority: get("authority"),
        eigenvector: get("eigenvector"),
        closeness: get("closeness"),
        clustering: get("clustering"),
        community_id: get("community_id"),
        power_diff: get("power_diff"),
    })
}
