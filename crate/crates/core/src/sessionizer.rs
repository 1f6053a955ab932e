//! Time-gap sessions per user and their split into annotation batches.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet};
use crate::groundtruth::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub gap_hours: f64,
    pub min_tweets: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            gap_hours: 8.0,
            min_tweets: 5,
        }
    }
}

impl SessionConfig {
    pub fn gap_seconds(&self) -> i64 {
        libm::round(self.gap_hours * 3600.0) as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for BatchBounds {
    fn default() -> Self {
        Self { min: 5, max: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub user_id: String,
    pub start: i64,
    pub end: i64,
    pub tweets: Vec<Tweet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub batch_id: String,
    pub user_id: String,
    pub source_session_id: String,
    pub tweets: Vec<Tweet>,
    #[serde(default)]
    pub is_control: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_label: Option<Label>,
}

/// Remove users with fewer than `min_tweets` tweets.
pub fn drop_inactive(corpus: &Corpus, min_tweets: usize) -> Corpus {
    let inactive: Vec<&str> = corpus
        .tweets_by_user()
        .into_iter()
        .filter(|(_, tweets)| tweets.len() < min_tweets)
        .map(|(user, _)| user)
        .collect();
    corpus.without_users(inactive)
}

/// Split one user's tweets wherever the gap to the previous tweet exceeds
/// `gap_seconds`. Input order does not matter; ties are ordered by tweet id.
pub fn sessionize(user_tweets: &[&Tweet], gap_seconds: i64) -> Vec<Session> {
    let mut ordered: Vec<&Tweet> = user_tweets.to_vec();
    ordered.sort_by(|a, b| (a.created_at, &a.tweet_id).cmp(&(b.created_at, &b.tweet_id)));

    let mut sessions: Vec<Session> = Vec::new();
    for tweet in ordered {
        let start_new = match sessions.last() {
            Some(s) => tweet.created_at - s.end > gap_seconds,
            None => true,
        };
        if start_new {
            sessions.push(Session {
                session_id: format!("{}:s{}", tweet.user_id, sessions.len()),
                user_id: tweet.user_id.clone(),
                start: tweet.created_at,
                end: tweet.created_at,
                tweets: Vec::new(),
            });
        }
        let session = sessions.last_mut().expect("session just ensured");
        session.end = tweet.created_at;
        session.tweets.push(tweet.clone());
    }
    sessions
}

/// Sessions for every user of a corpus, keyed by user.
pub fn sessionize_corpus(corpus: &Corpus, gap_seconds: i64) -> BTreeMap<String, Vec<Session>> {
    corpus
        .tweets_by_user()
        .into_iter()
        .map(|(user, tweets)| (String::from(user), sessionize(&tweets, gap_seconds)))
        .collect()
}

/// Sizes of a balanced chronological split of `n` tweets: `k = ceil(n/max)`
/// parts whose sizes differ by at most one, larger parts first. Empty when
/// `n < min`.
pub fn split_sizes(n: usize, bounds: BatchBounds) -> Vec<usize> {
    if n < bounds.min || n == 0 || bounds.max == 0 {
        return Vec::new();
    }
    let k = n.div_ceil(bounds.max);
    let base = n / k;
    let extra = n % k;
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

pub fn batchify(session: &Session, bounds: BatchBounds) -> Vec<Batch> {
    let mut batches = Vec::new();
    let mut offset = 0;
    for (i, size) in split_sizes(session.tweets.len(), bounds).into_iter().enumerate() {
        batches.push(Batch {
            batch_id: format!("{}:b{}", session.session_id, i),
            user_id: session.user_id.clone(),
            source_session_id: session.session_id.clone(),
            tweets: session.tweets[offset..offset + size].to_vec(),
            is_control: false,
            gold_label: None,
        });
        offset += size;
    }
    batches
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    const HOUR: i64 = 3600;

    fn tweet(id: &str, at: i64) -> Tweet {
        Tweet {
            tweet_id: id.to_string(),
            user_id: "u".into(),
            created_at: at,
            text: String::new(),
            hashtags: vec![],
            urls: vec![],
            mentions: vec![],
            is_retweet: false,
        }
    }

    fn session_of(n: usize) -> Session {
        let tweets: Vec<Tweet> = (0..n).map(|i| tweet(&format!("{i:04}"), 1 + i as i64)).collect();
        let refs: Vec<&Tweet> = tweets.iter().collect();
        sessionize(&refs, 8 * HOUR).remove(0)
    }

    #[test]
    fn gap_of_nine_hours_splits() {
        let ts = [tweet("a", 1), tweet("b", 1 + 7 * HOUR), tweet("c", 1 + 16 * HOUR)];
        let refs: Vec<&Tweet> = ts.iter().collect();
        let sessions = sessionize(&refs, 8 * HOUR);
        let ids: Vec<Vec<&str>> = sessions
            .iter()
            .map(|s| s.tweets.iter().map(|t| t.tweet_id.as_str()).collect())
            .collect();
        assert_eq!(ids, vec![vec!["a", "b"], vec!["c"]]);
    }

    #[test]
    fn exact_gap_stays_together() {
        let ts = [tweet("a", 1), tweet("b", 1 + 8 * HOUR)];
        let refs: Vec<&Tweet> = ts.iter().collect();
        assert_eq!(sessionize(&refs, 8 * HOUR).len(), 1);
        assert_eq!(sessionize(&refs[..1], 8 * HOUR).len(), 1);
    }

    #[test]
    fn ties_ordered_by_id() {
        let ts = [tweet("b", 5), tweet("a", 5)];
        let refs: Vec<&Tweet> = ts.iter().collect();
        let s = sessionize(&refs, HOUR);
        assert_eq!(s[0].tweets[0].tweet_id, "a");
    }

    #[test]
    fn batch_examples() {
        assert!(batchify(&session_of(4), BatchBounds::default()).is_empty());
        let eight = batchify(&session_of(8), BatchBounds::default());
        assert_eq!(eight.len(), 1);
        assert_eq!(eight[0].tweets.len(), 8);
        let twelve: Vec<usize> = batchify(&session_of(12), BatchBounds::default())
            .iter()
            .map(|b| b.tweets.len())
            .collect();
        assert_eq!(twelve, vec![6, 6]);
    }

    #[test]
    fn split_sizes_exhaustive() {
        for n in 5..=200 {
            let sizes = split_sizes(n, BatchBounds::default());
            assert_eq!(sizes.iter().sum::<usize>(), n);
            assert!(sizes.iter().all(|&s| (5..=10).contains(&s)), "n={n}: {sizes:?}");
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(hi - lo <= 1);
        }
    }

    #[test]
    fn drop_inactive_boundary() {
        use crate::corpus::UserAccount;
        let mut tweets = Vec::new();
        for i in 0..4 {
            let mut t = tweet(&format!("four{i}"), 10 + i);
            t.user_id = "four".into();
            tweets.push(t);
        }
        for i in 0..5 {
            let mut t = tweet(&format!("five{i}"), 10 + i);
            t.user_id = "five".into();
            tweets.push(t);
        }
        let accounts = ["four", "five"].map(|u| UserAccount {
            user_id: u.into(),
            account_created_at: 1,
            verified: false,
            default_profile_image: false,
            statuses_count: 0,
            listed_count: 0,
            followers_count: 0,
            friends_count: 0,
            profile_description: None,
        });
        let (corpus, _) = Corpus::from_parts(tweets, accounts);
        assert_eq!(drop_inactive(&corpus, 5).active_users(), vec!["five"]);
        assert!(drop_inactive(&Corpus::default(), 5).tweets().is_empty());
    }

    proptest! {
        #[test]
        fn sessions_concatenate_to_input(gaps in proptest::collection::vec(0i64..20 * HOUR, 0..60)) {
            let mut at = 1;
            let tweets: Vec<Tweet> = gaps.iter().enumerate().map(|(i, g)| {
                at += g;
                tweet(&format!("{i:04}"), at)
            }).collect();
            let refs: Vec<&Tweet> = tweets.iter().collect();
            let sessions = sessionize(&refs, 8 * HOUR);
            let flat: Vec<Tweet> = sessions.iter().flat_map(|s| s.tweets.clone()).collect();
            prop_assert_eq!(&flat, &tweets);
            for s in &sessions {
                prop_assert!(s.tweets.windows(2).all(|w| w[1].created_at - w[0].created_at <= 8 * HOUR));
                let batches = batchify(s, BatchBounds::default());
                let joined: Vec<Tweet> = batches.iter().flat_map(|b| b.tweets.clone()).collect();
                if s.tweets.len() >= 5 {
                    prop_assert_eq!(&joined, &s.tweets);
                } else {
                    prop_assert!(joined.is_empty());
                }
            }
        }
    }
}
