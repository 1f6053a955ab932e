//! Tweets, accounts and the cross-referenced corpus.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One posted message with its surface metadata.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tweet {
    pub tweet_id: String,
    pub user_id: String,
    /// Epoch seconds, UTC.
    pub created_at: i64,
    pub text: String,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub is_retweet: bool,
}

/// Account profile with its public counters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserAccount {
    pub user_id: String,
    pub account_created_at: i64,
    #[serde(default)]
    pub verified: bool,
    #[serde(default)]
    pub default_profile_image: bool,
    #[serde(default)]
    pub statuses_count: u64,
    #[serde(default)]
    pub listed_count: u64,
    #[serde(default)]
    pub followers_count: u64,
    #[serde(default)]
    pub friends_count: u64,
    #[serde(default)]
    pub profile_description: Option<String>,
}

impl UserAccount {
    /// Followers over friends, with `max(1, friends)` in the denominator.
    pub fn popularity_ratio(&self) -> f64 {
        self.followers_count as f64 / self.friends_count.max(1) as f64
    }
}

/// Inclusive `[start, end]` range of epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn seconds(&self) -> i64 {
        self.end - self.start
    }

    pub fn days(&self) -> f64 {
        self.seconds() as f64 / 86_400.0
    }
}

/// What happened while cross-referencing raw records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub tweets_kept: usize,
    pub accounts: usize,
    /// Tweets whose `user_id` has no account.
    pub rejected_unknown_user: usize,
    pub rejected_duplicate_id: usize,
    pub rejected_bad_timestamp: usize,
    /// Accounts created after their own earliest tweet.
    pub warnings_account_after_tweet: usize,
}

/// Immutable, cross-referenced tweet collection.
///
/// Tweets are kept sorted by `(user_id, created_at, tweet_id)` so two corpora
/// built from the same records in any order compare equal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    accounts: BTreeMap<String, UserAccount>,
    window: Window,
}

fn tweet_order(a: &Tweet, b: &Tweet) -> core::cmp::Ordering {
    (&a.user_id, a.created_at, &a.tweet_id, a).cmp(&(&b.user_id, b.created_at, &b.tweet_id, b))
}

impl Corpus {
    /// Cross-reference tweets against accounts. Unknown users, non-positive
    /// timestamps and repeated tweet ids are dropped and counted.
    pub fn from_parts(
        tweets: impl IntoIterator<Item = Tweet>,
        accounts: impl IntoIterator<Item = UserAccount>,
    ) -> (Self, LoadSummary) {
        let mut summary = LoadSummary::default();
        let mut account_map = BTreeMap::new();
        let mut raw_accounts: Vec<UserAccount> = accounts.into_iter().collect();
        raw_accounts.sort();
        for account in raw_accounts {
            account_map.entry(account.user_id.clone()).or_insert(account);
        }

        let mut raw: Vec<Tweet> = tweets.into_iter().collect();
        // Sorting by full content first makes duplicate resolution independent of input order.
        raw.sort();
        let mut kept: Vec<Tweet> = Vec::with_capacity(raw.len());
        let mut last_id: Option<String> = None;
        for tweet in raw {
            if last_id.as_deref() == Some(tweet.tweet_id.as_str()) {
                summary.rejected_duplicate_id += 1;
                continue;
            }
            last_id = Some(tweet.tweet_id.clone());
            if tweet.created_at <= 0 {
                summary.rejected_bad_timestamp += 1;
            } else if !account_map.contains_key(&tweet.user_id) {
                summary.rejected_unknown_user += 1;
            } else {
                kept.push(tweet);
            }
        }
        kept.sort_by(tweet_order);

        let corpus = Self::assemble(kept, account_map);
        summary.tweets_kept = corpus.tweets.len();
        summary.accounts = corpus.accounts.len();
        summary.warnings_account_after_tweet = corpus
            .tweets_by_user()
            .into_iter()
            .filter(|(user, tweets)| {
                let first = tweets.first().map(|t| t.created_at).unwrap_or(i64::MAX);
                corpus.accounts[*user].account_created_at > first
            })
            .count();
        (corpus, summary)
    }

    fn assemble(tweets: Vec<Tweet>, accounts: BTreeMap<String, UserAccount>) -> Self {
        let window = match (
            tweets.iter().map(|t| t.created_at).min(),
            tweets.iter().map(|t| t.created_at).max(),
        ) {
            (Some(start), Some(end)) => Window { start, end },
            _ => Window::default(),
        };
        Self {
            tweets,
            accounts,
            window,
        }
    }

    /// Keep the tweets accepted by `keep`; accounts are retained untouched.
    pub fn retain_tweets(&self, mut keep: impl FnMut(&Tweet) -> bool) -> Self {
        let tweets = self.tweets.iter().filter(|t| keep(t)).cloned().collect();
        Self::assemble(tweets, self.accounts.clone())
    }

    /// Drop every tweet of the given users.
    pub fn without_users<'a>(&self, users: impl IntoIterator<Item = &'a str>) -> Self {
        let drop: alloc::collections::BTreeSet<&str> = users.into_iter().collect();
        self.retain_tweets(|t| !drop.contains(t.user_id.as_str()))
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn accounts(&self) -> &BTreeMap<String, UserAccount> {
        &self.accounts
    }

    pub fn account(&self, user_id: &str) -> Option<&UserAccount> {
        self.accounts.get(user_id)
    }

    /// Observation window spanning all tweet timestamps; zero for an empty corpus.
    pub fn window(&self) -> Window {
        self.window
    }

    /// Tweets grouped per user, each group in time order (ties by tweet id).
    pub fn tweets_by_user(&self) -> BTreeMap<&str, Vec<&Tweet>> {
        let mut map: BTreeMap<&str, Vec<&Tweet>> = BTreeMap::new();
        for tweet in &self.tweets {
            map.entry(tweet.user_id.as_str()).or_default().push(tweet);
        }
        map
    }

    /// Users owning at least one tweet.
    pub fn active_users(&self) -> Vec<&str> {
        self.tweets_by_user().into_keys().collect()
    }
}
