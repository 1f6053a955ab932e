//! Tweet text cleaning, surface counts and string distances.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Tweet;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_EMOTICONS: &str = include_str!("../data/emoticons.txt");

/// Runs at least this long collapse to a single character.
pub const RUN_COLLAPSE_MIN: usize = 3;

/// Set of lowercase terms removed during cleaning.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords(BTreeSet<String>);

impl StopWords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// One term per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase())
                .collect(),
        )
    }

    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// ASCII emoticon patterns plus the common pictographic emoji blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emoticons {
    // Longest first so ":-)" is never counted as "-)".
    patterns: Vec<String>,
}

impl Emoticons {
    /// One pattern per line. Leading/trailing whitespace is not part of a pattern.
    pub fn parse(text: &str) -> Self {
        let mut patterns: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(ToString::to_string)
            .collect();
        patterns.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
        patterns.dedup();
        Self { patterns }
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    /// Non-overlapping emoticon and emoji occurrences. URLs must already be removed.
    pub fn count(&self, text: &str) -> usize {
        let mut count = 0;
        let mut rest = text;
        while let Some(c) = rest.chars().next() {
            if let Some(p) = self.patterns.iter().find(|p| rest.starts_with(p.as_str())) {
                count += 1;
                rest = &rest[p.len()..];
                continue;
            }
            if is_emoji(c) {
                count += 1;
            }
            rest = &rest[c.len_utf8()..];
        }
        count
    }
}

impl Default for Emoticons {
    fn default() -> Self {
        Self::parse(DEFAULT_EMOTICONS)
    }
}

fn is_emoji(c: char) -> bool {
    matches!(c as u32, 0x1F300..=0x1FAFF | 0x2600..=0x27BF)
}

/// Normalized token stream of one text plus counts taken before lowering.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanText {
    pub tokens: Vec<String>,
    /// Length of the raw text in characters.
    pub original_length: usize,
    pub uppercase_token_count: usize,
    pub emoticon_count: usize,
}

/// Byte offset where a URL begins inside a whitespace token, if any.
fn url_start(token: &str) -> Option<usize> {
    let lower = token.to_ascii_lowercase();
    ["http://", "https://", "www."]
        .iter()
        .filter_map(|scheme| lower.find(scheme))
        .min()
}

fn is_url_token(token: &str) -> bool {
    let lower = token.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://")
}

fn trim_edges(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric() && c != '#' && c != '@')
}

/// Raw text with URL fragments cut out of every token.
pub fn strip_urls(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for token in raw.split_whitespace() {
        let kept = match url_start(token) {
            Some(at) => &token[..at],
            None => token,
        };
        if kept.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(kept);
    }
    out
}

/// Fully uppercase alphabetic tokens of at least two letters; URLs, mentions
/// and hashtags never count.
pub fn count_uppercase_tokens(raw: &str) -> usize {
    raw.split_whitespace()
        .filter(|t| url_start(t).is_none())
        .map(trim_edges)
        .filter(|t| !t.starts_with('#') && !t.starts_with('@'))
        .filter(|t| t.chars().count() >= 2 && t.chars().all(|c| c.is_alphabetic() && c.is_uppercase()))
        .count()
}

/// Collapse every run of [`RUN_COLLAPSE_MIN`] or more identical characters to one.
pub fn collapse_runs(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    let mut out = String::with_capacity(word.len());
    let mut i = 0;
    while i < chars.len() {
        let mut j = i;
        while j < chars.len() && chars[j] == chars[i] {
            j += 1;
        }
        let run = j - i;
        let keep = if run >= RUN_COLLAPSE_MIN { 1 } else { run };
        for _ in 0..keep {
            out.push(chars[i]);
        }
        i = j;
    }
    out
}

/// Lowercase word tokens with URLs, mentions, punctuation, digits and
/// stopwords removed and long character runs collapsed.
pub fn tokenize(raw: &str, stopwords: &StopWords) -> Vec<String> {
    let mut tokens = Vec::new();
    for token in raw.split_whitespace() {
        let token = match url_start(token) {
            Some(at) => &token[..at],
            None => token,
        };
        if trim_edges(token).starts_with('@') {
            continue;
        }
        let lowered = token.to_lowercase();
        let mut word = String::new();
        let mut flush = |word: &mut String| {
            if !word.is_empty() {
                let collapsed = collapse_runs(word);
                if !stopwords.contains(&collapsed) {
                    tokens.push(collapsed);
                }
                word.clear();
            }
        };
        for c in lowered.chars() {
            if c == '\'' || c == '\u{2019}' {
                continue;
            }
            if c.is_alphabetic() {
                word.push(c);
            } else {
                flush(&mut word);
            }
        }
        flush(&mut word);
    }
    tokens
}

pub fn normalize_text(raw: &str, stopwords: &StopWords, emoticons: &Emoticons) -> CleanText {
    CleanText {
        tokens: tokenize(raw, stopwords),
        original_length: raw.chars().count(),
        uppercase_token_count: count_uppercase_tokens(raw),
        emoticon_count: emoticons.count(&strip_urls(raw)),
    }
}

/// Per-tweet surface counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceStats {
    pub hashtags: usize,
    pub emoticons: usize,
    pub uppercase: usize,
    pub urls: usize,
    pub mentions: usize,
}

/// Counts from the metadata arrays when they are non-empty, otherwise from
/// `#`, scheme and `@` prefixed tokens in the text.
pub fn surface_stats(tweet: &Tweet, emoticons: &Emoticons) -> SurfaceStats {
    let text = tweet.text.as_str();
    let from_text = |pred: &dyn Fn(&str) -> bool| text.split_whitespace().filter(|t| pred(t)).count();
    let hashtags = if tweet.hashtags.is_empty() {
        from_text(&|t| t.starts_with('#') && t.len() > 1)
    } else {
        tweet.hashtags.len()
    };
    let urls = if tweet.urls.is_empty() {
        from_text(&is_url_token)
    } else {
        tweet.urls.len()
    };
    let mentions = if tweet.mentions.is_empty() {
        from_text(&|t| t.starts_with('@') && t.len() > 1)
    } else {
        tweet.mentions.len()
    };
    SurfaceStats {
        hashtags,
        emoticons: emoticons.count(&strip_urls(text)),
        uppercase: count_uppercase_tokens(text),
        urls,
        mentions,
    }
}

/// Edit distance over Unicode scalar values, unit cost for insert, delete and substitute.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - levenshtein / max(len)`, and 1 for two empty strings.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    similarity_chars(&a, &b)
}

pub fn similarity_chars(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_chars(a, b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn no_stop() -> StopWords {
        StopWords::empty()
    }

    #[test]
    fn yes_collapses() {
        let clean = normalize_text("Yessss!! 123 go", &no_stop(), &Emoticons::default());
        assert_eq!(clean.tokens, vec!["yes", "go"]);
    }

    #[test]
    fn empty_text() {
        let clean = normalize_text("", &no_stop(), &Emoticons::default());
        assert!(clean.tokens.is_empty());
        assert_eq!(clean.uppercase_token_count, 0);
        assert_eq!(clean.emoticon_count, 0);
        assert_eq!(clean.original_length, 0);
    }

    #[test]
    fn url_removed_and_shouting_counted() {
        let clean = normalize_text("CHECK http://x.co NOW", &no_stop(), &Emoticons::default());
        assert_eq!(clean.tokens, vec!["check", "now"]);
        assert_eq!(clean.uppercase_token_count, 2);
    }

    #[test]
    fn doubles_survive_and_stopwords_go() {
        let clean = normalize_text("The food is GOOD, I said", &StopWords::english(), &Emoticons::default());
        assert_eq!(clean.tokens, vec!["food", "good", "said"]);
        // "I" is a single letter and does not count as shouting.
        assert_eq!(clean.uppercase_token_count, 1);
    }

    #[test]
    fn mentions_and_apostrophes() {
        let clean = normalize_text("@bob don't #WIN", &no_stop(), &Emoticons::default());
        assert_eq!(clean.tokens, vec!["dont", "win"]);
        assert_eq!(clean.uppercase_token_count, 0);
    }

    fn tweet(text: &str) -> Tweet {
        Tweet {
            tweet_id: "1".into(),
            user_id: "u".into(),
            created_at: 1,
            text: text.into(),
            hashtags: vec![],
            urls: vec![],
            mentions: vec![],
            is_retweet: false,
        }
    }

    #[test]
    fn surface_counts_from_text() {
        let s = surface_stats(&tweet("#a #b http://x @u"), &Emoticons::default());
        assert_eq!(
            (s.hashtags, s.emoticons, s.uppercase, s.urls, s.mentions),
            (2, 0, 0, 1, 1)
        );
    }

    #[test]
    fn surface_counts_emoticons() {
        let s = surface_stats(&tweet("ok :) then :( bye"), &Emoticons::default());
        assert_eq!(s.emoticons, 2);
        // ":-)" must count once, not as ":-)" plus "-)".
        assert_eq!(Emoticons::default().count(":-) \u{1F600}"), 2);
        // The scheme separator in a URL is not a ":/" emoticon.
        assert_eq!(surface_stats(&tweet("see https://a.b/c"), &Emoticons::default()).emoticons, 0);
    }

    #[test]
    fn surface_counts_empty() {
        assert_eq!(surface_stats(&tweet(""), &Emoticons::default()), SurfaceStats::default());
    }

    #[test]
    fn metadata_arrays_take_precedence() {
        let mut t = tweet("#a");
        t.hashtags = vec!["x".into(), "y".into(), "z".into()];
        assert_eq!(surface_stats(&t, &Emoticons::default()).hashtags, 3);
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(similarity("same", "same"), 1.0);
        assert_eq!(similarity("aaaa", "bbbb"), 0.0);
        assert!((similarity("kitten", "sitting") - (1.0 - 3.0 / 7.0)).abs() < 1e-12);
        assert_eq!(similarity("", ""), 1.0);
    }

    proptest! {
        #[test]
        fn levenshtein_metric(a in "[ab]{0,8}", b in "[ab]{0,8}", c in "[ab]{0,8}") {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
            prop_assert_eq!(ab == 0, a == b);
        }

        #[test]
        fn similarity_bounded(a in "\\PC{0,12}", b in "\\PC{0,12}") {
            let s = similarity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(similarity(&a, &a), 1.0);
        }

        #[test]
        fn normalize_idempotent(raw in "\\PC{0,60}") {
            let stop = StopWords::english();
            let emo = Emoticons::default();
            let once = normalize_text(&raw, &stop, &emo).tokens;
            let twice = normalize_text(&once.join(" "), &stop, &emo).tokens;
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_are_clean(raw in "\\PC{0,60}") {
            let stop = StopWords::english();
            for token in normalize_text(&raw, &stop, &Emoticons::default()).tokens {
                prop_assert!(token.chars().all(char::is_alphabetic));
                prop_assert!(!stop.contains(&token));
                let chars: Vec<char> = token.chars().collect();
                prop_assert!(chars.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2])));
            }
        }
    }
}
