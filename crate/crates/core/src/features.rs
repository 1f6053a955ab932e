//! Per-user feature vectors (user, text and network groups) and the model
//! feature mask.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet, UserAccount, Window};
use crate::exec::Executor;
use crate::graph::{power_difference, NodeMetrics};
use crate::lexfeatures::{self, EmotionLexicon, HateLexicon, SentimentLexicon, SwearList, VectorTable};
use crate::sessionizer::{Batch, Session};
use crate::textprep::{self, Emoticons, StopWords};

/// Column names in `features.csv` order: 10 user, 9 text and 11 network attributes.
pub const CANONICAL_NAMES: [&str; 30] = [
    "avg_posts_per_day",
    "account_age_days",
    "verified",
    "subscribed_lists",
    "median_interarrival_seconds",
    "default_profile_image",
    "session_count",
    "session_size_avg",
    "session_size_median",
    "session_size_std",
    "avg_hashtags",
    "avg_emoticons",
    "avg_uppercase",
    "avg_urls",
    "avg_sentiment",
    "emotion_scores",
    "hate_score",
    "avg_embedding",
    "curse_fraction",
    "friends",
    "followers",
    "ratio",
    "reciprocity",
    "hub",
    "authority",
    "eigenvector",
    "closeness",
    "clustering",
    "community_id",
    "power_diff",
];

/// Attributes left out of the classifier.
pub const MODEL_EXCLUDED: [&str; 12] = [
    "verified",
    "default_profile_image",
    "session_count",
    "session_size_avg",
    "session_size_median",
    "session_size_std",
    "emotion_scores",
    "hate_score",
    "avg_embedding",
    "curse_fraction",
    "closeness",
    "community_id",
];

/// Ordered subset of scalar feature names fed to the classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionMask(pub Vec<String>);

impl SelectionMask {
    /// The 18 model features, in canonical order.
    pub fn model18() -> Self {
        Self(
            CANONICAL_NAMES
                .iter()
                .filter(|n| !MODEL_EXCLUDED.contains(n))
                .map(|n| String::from(*n))
                .collect(),
        )
    }

    /// Every scalar attribute (the two vector-valued ones are skipped).
    pub fn all_scalars() -> Self {
        Self(
            CANONICAL_NAMES
                .iter()
                .filter(|n| !matches!(**n, "emotion_scores" | "avg_embedding"))
                .map(|n| String::from(*n))
                .collect(),
        )
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub user_id: String,
    // user
    pub avg_posts_per_day: f64,
    pub account_age_days: f64,
    pub verified: f64,
    pub subscribed_lists: f64,
    pub median_interarrival_seconds: f64,
    pub default_profile_image: f64,
    pub session_count: f64,
    pub session_size_avg: f64,
    pub session_size_median: f64,
    pub session_size_std: f64,
    // text
    pub avg_hashtags: f64,
    pub avg_emoticons: f64,
    pub avg_uppercase: f64,
    pub avg_urls: f64,
    pub avg_sentiment: f64,
    pub emotion_scores: [f64; 6],
    pub hate_score: f64,
    /// Empty when no vector table was supplied.
    pub avg_embedding: Vec<f64>,
    pub curse_fraction: f64,
    // network
    pub friends: f64,
    pub followers: f64,
    pub ratio: f64,
    pub reciprocity: f64,
    pub hub: f64,
    pub authority: f64,
    pub eigenvector: f64,
    pub closeness: f64,
    pub clustering: f64,
    /// -1 for users absent from the graph.
    pub community_id: f64,
    pub power_diff: f64,
}

impl FeatureVector {
    /// Value of a scalar attribute by canonical name.
    pub fn scalar(&self, name: &str) -> Option<f64> {
        Some(match name {
            "avg_posts_per_day" => self.avg_posts_per_day,
            "account_age_days" => self.account_age_days,
            "verified" => self.verified,
            "subscribed_lists" => self.subscribed_lists,
            "median_interarrival_seconds" => self.median_interarrival_seconds,
            "default_profile_image" => self.default_profile_image,
            "session_count" => self.session_count,
            "session_size_avg" => self.session_size_avg,
            "session_size_median" => self.session_size_median,
            "session_size_std" => self.session_size_std,
            "avg_hashtags" => self.avg_hashtags,
            "avg_emoticons" => self.avg_emoticons,
            "avg_uppercase" => self.avg_uppercase,
            "avg_urls" => self.avg_urls,
            "avg_sentiment" => self.avg_sentiment,
            "hate_score" => self.hate_score,
            "curse_fraction" => self.curse_fraction,
            "friends" => self.friends,
            "followers" => self.followers,
            "ratio" => self.ratio,
            "reciprocity" => self.reciprocity,
            "hub" => self.hub,
            "authority" => self.authority,
            "eigenvector" => self.eigenvector,
            "closeness" => self.closeness,
            "clustering" => self.clustering,
            "community_id" => self.community_id,
            "power_diff" => self.power_diff,
            _ => return None,
        })
    }

    /// Row for the classifier. Unknown or vector-valued names are an error.
    pub fn masked(&self, mask: &SelectionMask) -> crate::Result<Vec<f64>> {
        mask.names()
            .iter()
            .map(|n| {
                self.scalar(n)
                    .ok_or_else(|| crate::Error::InvalidConfig(alloc::format!("`{n}` is not a scalar feature")))
            })
            .collect()
    }
}

/// All lexical resources used by the text features.
#[derive(Debug, Clone, Default)]
pub struct Lexicons {
    pub stopwords: StopWords,
    pub emoticons: Emoticons,
    pub sentiment: SentimentLexicon,
    pub hate: HateLexicon,
    pub swear: SwearList,
    pub emotion: Option<EmotionLexicon>,
    pub vectors: Option<VectorTable>,
}

impl Lexicons {
    /// Bundled defaults: English stopwords, ASCII emoticons, small lexicons.
    pub fn bundled() -> Self {
        Self {
            stopwords: StopWords::english(),
            ..Self::default()
        }
    }
}

/// Everything known about one user when assembling their vector.
#[derive(Debug, Clone)]
pub struct UserContext<'a> {
    pub account: &'a UserAccount,
    /// All of the user's tweets in time order.
    pub tweets: Vec<&'a Tweet>,
    pub sessions: &'a [Session],
    /// Tweets of the user's annotated batches; text features average over these.
    pub batch_tweets: Vec<&'a Tweet>,
    pub node: Option<&'a NodeMetrics>,
    /// Followers/friends ratios of the distinct users this user mentions.
    pub mentioned_ratios: Vec<f64>,
    pub window: Window,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values.iter().copied());
    libm::sqrt(values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64)
}

const SECONDS_PER_DAY: f64 = 86_400.0;

pub fn extract_features(ctx: &UserContext<'_>, lex: &Lexicons) -> FeatureVector {
    let account = ctx.account;
    let window_days = (ctx.window.seconds() as f64 / SECONDS_PER_DAY).max(1.0);

    let mut gaps: Vec<f64> = ctx
        .tweets
        .windows(2)
        .map(|w| (w[1].created_at - w[0].created_at) as f64)
        .collect();
    let median_interarrival = if gaps.is_empty() {
        ctx.window.seconds() as f64
    } else {
        median(&mut gaps)
    };

    let mut sizes: Vec<f64> = ctx.sessions.iter().map(|s| s.tweets.len() as f64).collect();
    let session_size_avg = mean(sizes.iter().copied());
    let session_size_std = std_dev(&sizes);
    let session_size_median = median(&mut sizes);

    let text_tweets = if ctx.batch_tweets.is_empty() {
        &ctx.tweets
    } else {
        &ctx.batch_tweets
    };
    let surface: Vec<textprep::SurfaceStats> = text_tweets
        .iter()
        .map(|t| textprep::surface_stats(t, &lex.emoticons))
        .collect();
    let no_stop = StopWords::empty();
    let raw_tokens: Vec<Vec<String>> = text_tweets.iter().map(|t| textprep::tokenize(&t.text, &no_stop)).collect();
    let clean_tokens: Vec<Vec<String>> = text_tweets
        .iter()
        .map(|t| textprep::tokenize(&t.text, &lex.stopwords))
        .collect();

    let per_tweet_emotions: Vec<[f64; 6]> = clean_tokens
        .iter()
        .map(|t| lexfeatures::emotion_scores(t, lex.emotion.as_ref()))
        .collect();
    let mut emotion_scores = [0.0; 6];
    for (i, slot) in emotion_scores.iter_mut().enumerate() {
        *slot = mean(per_tweet_emotions.iter().map(|e| e[i]));
    }

    let avg_embedding = match &lex.vectors {
        Some(table) => {
            let mut acc = alloc::vec![0.0; table.dim()];
            for tokens in &clean_tokens {
                for (a, x) in acc.iter_mut().zip(lexfeatures::embed_average(tokens, table)) {
                    *a += x;
                }
            }
            if !clean_tokens.is_empty() {
                for a in &mut acc {
                    *a /= clean_tokens.len() as f64;
                }
            }
            acc
        }
        None => Vec::new(),
    };

    let node = ctx.node;
    let net = |f: fn(&NodeMetrics) -> f64| node.map(f).unwrap_or(0.0);

    FeatureVector {
        user_id: account.user_id.clone(),
        avg_posts_per_day: ctx.tweets.len() as f64 / window_days,
        account_age_days: (ctx.window.end - account.account_created_at) as f64 / SECONDS_PER_DAY,
        verified: f64::from(u8::from(account.verified)),
        subscribed_lists: account.listed_count as f64,
        median_interarrival_seconds: median_interarrival,
        default_profile_image: f64::from(u8::from(account.default_profile_image)),
        session_count: ctx.sessions.len() as f64,
        session_size_avg,
        session_size_median,
        session_size_std,
        avg_hashtags: mean(surface.iter().map(|s| s.hashtags as f64)),
        avg_emoticons: mean(surface.iter().map(|s| s.emoticons as f64)),
        avg_uppercase: mean(surface.iter().map(|s| s.uppercase as f64)),
        avg_urls: mean(surface.iter().map(|s| s.urls as f64)),
        avg_sentiment: mean(raw_tokens.iter().map(|t| lexfeatures::sentiment_score(t, &lex.sentiment))),
        emotion_scores,
        hate_score: mean(clean_tokens.iter().map(|t| lexfeatures::hate_score(t, &lex.hate))),
        avg_embedding,
        curse_fraction: lexfeatures::curse_fraction(&clean_tokens, &lex.swear),
        friends: net(|m| m.friends as f64),
        followers: net(|m| m.followers as f64),
        ratio: net(|m| m.ratio),
        reciprocity: net(|m| m.reciprocity),
        hub: net(|m| m.hub),
        authority: net(|m| m.authority),
        eigenvector: net(|m| m.eigenvector),
        closeness: net(|m| m.closeness),
        clustering: net(|m| m.clustering),
        community_id: node.map_or(-1.0, |m| m.community_id as f64),
        power_diff: power_difference(account.popularity_ratio(), &ctx.mentioned_ratios),
    }
}

/// Distinct mentioned users of a tweet list, from metadata or `@` tokens.
pub fn mentioned_users<'a>(tweets: impl IntoIterator<Item = &'a Tweet>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in tweets {
        if t.mentions.is_empty() {
            out.extend(
                t.text
                    .split_whitespace()
                    .filter_map(|w| w.strip_prefix('@'))
                    .map(|w| w.trim_end_matches(|c: char| !c.is_alphanumeric() && c != '_'))
                    .filter(|w| !w.is_empty())
                    .map(String::from),
            );
        } else {
            out.extend(t.mentions.iter().cloned());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Vectors for every active user of `corpus`, sorted by user id.
pub fn extract_all(
    corpus: &Corpus,
    sessions: &BTreeMap<String, Vec<Session>>,
    batches: &[Batch],
    metrics: &[NodeMetrics],
    lex: &Lexicons,
    exec: &impl Executor,
) -> Vec<FeatureVector> {
    let by_user = corpus.tweets_by_user();
    let node_index: BTreeMap<&str, &NodeMetrics> = metrics.iter().map(|m| (m.user_id.as_str(), m)).collect();
    let mut batch_tweets: BTreeMap<&str, Vec<&Tweet>> = BTreeMap::new();
    for b in batches.iter().filter(|b| !b.is_control) {
        batch_tweets.entry(b.user_id.as_str()).or_default().extend(b.tweets.iter());
    }
    let users: Vec<&str> = by_user.keys().copied().collect();
    let empty: Vec<Session> = Vec::new();
    let window = corpus.window();
    exec.map(&users, |user| {
        let tweets = by_user[user].clone();
        let mentioned_ratios = mentioned_users(tweets.iter().copied())
            .iter()
            .filter(|m| m.as_str() != *user)
            .filter_map(|m| corpus.account(m))
            .map(UserAccount::popularity_ratio)
            .collect();
        let ctx = UserContext {
            account: corpus.account(user).expect("corpus tweets resolve to accounts"),
            tweets,
            sessions: sessions.get(*user).unwrap_or(&empty),
            batch_tweets: batch_tweets.get(user).cloned().unwrap_or_default(),
            node: node_index.get(user).copied(),
            mentioned_ratios,
            window,
        };
        extract_features(&ctx, lex)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_has_eighteen_features() {
        let mask = SelectionMask::model18();
        assert_eq!(CANONICAL_NAMES.len(), 30);
        assert_eq!(mask.len(), CANONICAL_NAMES.len() - MODEL_EXCLUDED.len());
        assert_eq!(mask.len(), 18);
        assert!(MODEL_EXCLUDED.iter().all(|n| CANONICAL_NAMES.contains(n)));
        assert_eq!(mask.names()[0], "avg_posts_per_day");
        assert_eq!(mask.names()[17], "power_diff");
    }

    #[test]
    fn mentions_from_text() {
        let t = Tweet {
            tweet_id: "1".into(),
            user_id: "u".into(),
            created_at: 1,
            text: "@bob hi @amy: @bob".into(),
            hashtags: alloc::vec![],
            urls: alloc::vec![],
            mentions: alloc::vec![],
            is_retweet: false,
        };
        assert_eq!(mentioned_users([&t]), alloc::vec!["amy", "bob"]);
    }

    #[test]
    fn median_and_std() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(std_dev(&[2.0, 4.0]), 1.0);
    }
}
