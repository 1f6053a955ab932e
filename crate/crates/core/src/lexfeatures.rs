//! Lexicon and vector based scoring of token lists.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::textprep::StopWords;

const DEFAULT_SENTIMENT: &str = include_str!("../data/sentiment.tsv");
const DEFAULT_HATE: &str = include_str!("../data/hate.csv");
const DEFAULT_SWEAR: &str = include_str!("../data/swear.txt");

pub const SENTIMENT_MIN: f64 = -4.0;
pub const SENTIMENT_MAX: f64 = 4.0;

const NEGATIONS: &[&str] = &[
    "not", "no", "never", "dont", "doesnt", "didnt", "isnt", "arent", "wasnt", "werent", "cant", "cannot",
    "wont", "aint", "nor", "neither",
];
const BOOSTERS: &[&str] = &[
    "very", "really", "so", "extremely", "totally", "absolutely", "super", "most", "too", "completely",
];

fn parse_score(line: usize, raw: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("`{raw}` is not a number"),
    })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Term scores on a [-4, 4] scale with negation and booster words.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    scores: BTreeMap<String, f64>,
    negations: BTreeSet<String>,
    boosters: BTreeSet<String>,
}

impl SentimentLexicon {
    /// Scores outside [-4, 4] are rejected.
    pub fn new(scores: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((term, s)) = scores.iter().find(|(_, s)| !(SENTIMENT_MIN..=SENTIMENT_MAX).contains(*s)) {
            return Err(Error::InvalidConfig(format!("sentiment score {s} for `{term}` outside [-4, 4]")));
        }
        Ok(Self {
            scores,
            negations: NEGATIONS.iter().map(|s| s.to_string()).collect(),
            boosters: BOOSTERS.iter().map(|s| s.to_string()).collect(),
        })
    }

    /// `term<TAB>score` per line.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for (line, l) in content_lines(text) {
            let (term, score) = l.split_once('\t').ok_or_else(|| Error::Parse {
                line,
                message: "expected `term<TAB>score`".into(),
            })?;
            scores.insert(term.trim().to_lowercase(), parse_score(line, score)?);
        }
        Self::new(scores)
    }

    pub fn with_negations(mut self, terms: impl IntoIterator<Item = String>) -> Self {
        self.negations = terms.into_iter().collect();
        self
    }

    pub fn with_boosters(mut self, terms: impl IntoIterator<Item = String>) -> Self {
        self.boosters = terms.into_iter().collect();
        self
    }

    pub fn score(&self, term: &str) -> Option<f64> {
        self.scores.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn is_negation(&self, term: &str) -> bool {
        self.negations.contains(term)
    }

    fn is_booster(&self, term: &str) -> bool {
        self.boosters.contains(term)
    }
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        Self::parse_tsv(DEFAULT_SENTIMENT).expect("bundled sentiment lexicon is valid")
    }
}

/// Strongest positive plus strongest negative term score.
///
/// A booster directly before a term adds one unit of magnitude; a negation
/// directly before the term (or before its booster) flips the sign. Each
/// adjusted term score is clamped to [-4, 4]. Sentences without a matched
/// term score 0.
pub fn sentiment_score(tokens: &[String], lexicon: &SentimentLexicon) -> f64 {
    let mut strongest_pos = 0.0f64;
    let mut strongest_neg = 0.0f64;
    for (i, token) in tokens.iter().enumerate() {
        let Some(mut score) = lexicon.score(token) else {
            continue;
        };
        let mut before = i;
        if before > 0 && lexicon.is_booster(&tokens[before - 1]) {
            score += libm::copysign(1.0, score);
            before -= 1;
        }
        if before > 0 && lexicon.is_negation(&tokens[before - 1]) {
            score = -score;
        }
        let score = score.clamp(SENTIMENT_MIN, SENTIMENT_MAX);
        if score > 0.0 {
            strongest_pos = strongest_pos.max(score);
        } else if score < 0.0 {
            strongest_neg = strongest_neg.min(score);
        }
    }
    strongest_pos + strongest_neg
}

/// Hatefulness per term on a [0, 100] scale.
#[derive(Debug, Clone, PartialEq)]
pub struct HateLexicon(BTreeMap<String, f64>);

impl HateLexicon {
    pub fn new(scores: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((term, s)) = scores.iter().find(|(_, s)| !(0.0..=100.0).contains(*s)) {
            return Err(Error::InvalidConfig(format!("hate score {s} for `{term}` outside [0, 100]")));
        }
        Ok(Self(scores))
    }

    /// `term,score` per line.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for (line, l) in content_lines(text) {
            let (term, score) = l.rsplit_once(',').ok_or_else(|| Error::Parse {
                line,
                message: "expected `term,score`".into(),
            })?;
            scores.insert(term.trim().to_lowercase(), parse_score(line, score)?);
        }
        Self::new(scores)
    }

    pub fn score(&self, term: &str) -> Option<f64> {
        self.0.get(term).copied()
    }
}

impl Default for HateLexicon {
    fn default() -> Self {
        Self::parse_csv(DEFAULT_HATE).expect("bundled hate lexicon is valid")
    }
}

/// Mean hatefulness over matched token occurrences, 0 without matches.
pub fn hate_score(tokens: &[String], lexicon: &HateLexicon) -> f64 {
    let matched: Vec<f64> = tokens.iter().filter_map(|t| lexicon.score(t)).collect();
    if matched.is_empty() {
        0.0
    } else {
        matched.iter().sum::<f64>() / matched.len() as f64
    }
}

/// Curse words, one per line in the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwearList(StopWords);

impl SwearList {
    pub fn parse(text: &str) -> Self {
        Self(StopWords::parse(text))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }
}

impl Default for SwearList {
    fn default() -> Self {
        Self::parse(DEFAULT_SWEAR)
    }
}

pub fn curse_flag(tokens: &[String], swear: &SwearList) -> bool {
    tokens.iter().any(|t| swear.contains(t))
}

/// Fraction of tweets (given as token lists) containing a curse word.
pub fn curse_fraction<T: AsRef<[String]>>(tweets: &[T], swear: &SwearList) -> f64 {
    if tweets.is_empty() {
        return 0.0;
    }
    let flagged = tweets.iter().filter(|t| curse_flag(t.as_ref(), swear)).count();
    flagged as f64 / tweets.len() as f64
}

/// Pre-trained word vectors of a fixed dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorTable {
    pub fn new(dim: usize, vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        if let Some((term, v)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::InvalidConfig(format!(
                "vector for `{term}` has {} components, expected {dim}",
                v.len()
            )));
        }
        Ok(Self { dim, vectors })
    }

    /// Text format with a `V D` header followed by `term x1 .. xD` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing `V D` header".into(),
        })?;
        let mut head = header.split_whitespace();
        let bad_header = || Error::Parse {
            line: 1,
            message: "header must be `V D`".into(),
        };
        let count: usize = head.next().and_then(|v| v.parse().ok()).ok_or_else(bad_header)?;
        let dim: usize = head.next().and_then(|v| v.parse().ok()).ok_or_else(bad_header)?;
        let mut vectors = BTreeMap::new();
        for (line, l) in lines {
            let mut parts = l.split_whitespace();
            let term = parts.next().unwrap_or_default().to_lowercase();
            let values = parts.map(|p| parse_score(line, p)).collect::<Result<Vec<f64>>>()?;
            if values.len() != dim {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {dim} components, found {}", values.len()),
                });
            }
            vectors.insert(term, values);
        }
        if vectors.len() != count {
            return Err(Error::Parse {
                line: 1,
                message: format!("header announces {count} vectors, file has {}", vectors.len()),
            });
        }
        Self::new(dim, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.vectors.get(term).map(Vec::as_slice)
    }
}

/// Mean vector of the in-vocabulary tokens; the zero vector when none are known.
pub fn embed_average(tokens: &[String], table: &VectorTable) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim()];
    let mut hits = 0usize;
    for v in tokens.iter().filter_map(|t| table.get(t)) {
        for (acc, x) in sum.iter_mut().zip(v) {
            *acc += x;
        }
        hits += 1;
    }
    if hits > 0 {
        for x in &mut sum {
            *x /= hits as f64;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 6] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Surprise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
        }
    }
}

/// Per-term emotion intensities. A term may carry several emotions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmotionLexicon(BTreeMap<String, [Option<f64>; 6]>);

impl EmotionLexicon {
    pub fn insert(&mut self, term: &str, emotion: Emotion, score: f64) {
        self.0.entry(term.to_lowercase()).or_insert([None; 6])[emotion as usize] = Some(score);
    }

    /// `term<TAB>emotion<TAB>score` per line.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut lex = Self::default();
        for (line, l) in content_lines(text) {
            let fields: Vec<&str> = l.split('\t').collect();
            let [term, emotion, score] = fields[..] else {
                return Err(Error::Parse {
                    line,
                    message: "expected `term<TAB>emotion<TAB>score`".into(),
                });
            };
            let emotion = Emotion::ALL
                .into_iter()
                .find(|e| e.name() == emotion.trim())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("unknown emotion `{emotion}`"),
                })?;
            lex.insert(term.trim(), emotion, parse_score(line, score)?);
        }
        Ok(lex)
    }
}

/// Per-emotion mean of matched term scores, in [`Emotion::ALL`] order.
pub fn emotion_scores(tokens: &[String], lexicon: Option<&EmotionLexicon>) -> [f64; 6] {
    let mut sums = [0.0; 6];
    let mut hits = [0usize; 6];
    if let Some(lex) = lexicon {
        for entry in tokens.iter().filter_map(|t| lex.0.get(t)) {
            for (i, score) in entry.iter().enumerate() {
                if let Some(s) = score {
                    sums[i] += s;
                    hits[i] += 1;
                }
            }
        }
    }
    let mut out = [0.0; 6];
    for i in 0..6 {
        if hits[i] > 0 {
            out[i] = sums[i] / hits[i] as f64;
        }
    }
    out
}
