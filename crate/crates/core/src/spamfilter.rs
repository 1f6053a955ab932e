//! First-level spam removal: too many hashtags per tweet, or tweets that are
//! near copies of each other.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::textprep::{self, Emoticons};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpamConfig {
    /// Users averaging strictly more hashtags per tweet are removed.
    pub hashtag_cutoff: f64,
    /// Users whose mean pairwise similarity is strictly above this are removed.
    pub sim_cutoff: f64,
    /// Only the most recent tweets of a user enter the pairwise test.
    pub max_pairwise_tweets: usize,
}

impl Default for SpamConfig {
    fn default() -> Self {
        Self {
            hashtag_cutoff: 5.0,
            sim_cutoff: 0.8,
            max_pairwise_tweets: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpamReason {
    Hashtags,
    Similarity,
    Both,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamVerdict {
    pub user_id: String,
    pub avg_hashtags: f64,
    pub intra_similarity: f64,
    pub removed: bool,
    pub reason: SpamReason,
}

/// Mean hashtag count per tweet.
pub fn avg_hashtags(tweets: &[&Tweet], emoticons: &Emoticons) -> Result<f64> {
    if tweets.is_empty() {
        return Err(Error::UndefinedInput("average hashtags of an empty tweet list"));
    }
    let total: usize = tweets
        .iter()
        .map(|t| textprep::surface_stats(t, emoticons).hashtags)
        .sum();
    Ok(total as f64 / tweets.len() as f64)
}

/// Mean similarity over all `x(x-1)/2` unordered pairs of tweets, comparing
/// text with URLs removed. Fewer than two tweets gives 0.
pub fn intra_similarity(tweets: &[&Tweet]) -> f64 {
    if tweets.len() < 2 {
        return 0.0;
    }
    let texts: Vec<Vec<char>> = tweets
        .iter()
        .map(|t| textprep::strip_urls(&t.text).chars().collect())
        .collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..texts.len() {
        for j in i + 1..texts.len() {
            sum += textprep::similarity_chars(&texts[i], &texts[j]);
            pairs += 1;
        }
    }
    sum / pairs as f64
}

/// Verdict for one user. `tweets` must be time ordered.
pub fn judge_user(user_id: &str, tweets: &[&Tweet], config: &SpamConfig, emoticons: &Emoticons) -> SpamVerdict {
    let avg = avg_hashtags(tweets, emoticons).unwrap_or(0.0);
    let recent = &tweets[tweets.len().saturating_sub(config.max_pairwise_tweets)..];
    let sim = intra_similarity(recent);
    let by_hashtags = avg > config.hashtag_cutoff;
    let by_similarity = sim > config.sim_cutoff;
    let reason = match (by_hashtags, by_similarity) {
        (true, true) => SpamReason::Both,
        (true, false) => SpamReason::Hashtags,
        (false, true) => SpamReason::Similarity,
        (false, false) => SpamReason::None,
    };
    SpamVerdict {
        user_id: user_id.into(),
        avg_hashtags: avg,
        intra_similarity: sim,
        removed: reason != SpamReason::None,
        reason,
    }
}

/// Judge every user with tweets and return the corpus without the removed
/// users' tweets, together with one verdict per user (sorted by user id).
pub fn filter_spammers(
    corpus: &Corpus,
    config: &SpamConfig,
    emoticons: &Emoticons,
    exec: &impl Executor,
) -> (Corpus, Vec<SpamVerdict>) {
    let groups: Vec<(&str, Vec<&Tweet>)> = corpus.tweets_by_user().into_iter().collect();
    let verdicts = exec.map(&groups, |(user, tweets)| judge_user(user, tweets, config, emoticons));
    let kept = corpus.without_users(verdicts.iter().filter(|v| v.removed).map(|v| v.user_id.as_str()));
    (kept, verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::UserAccount;
    use crate::exec::Sequential;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn tweet(id: usize, user: &str, text: &str) -> Tweet {
        Tweet {
            tweet_id: format!("{user}-{id}"),
            user_id: user.to_string(),
            created_at: 1000 + id as i64,
            text: text.to_string(),
            hashtags: vec![],
            urls: vec![],
            mentions: vec![],
            is_retweet: false,
        }
    }

    fn tags(n: usize) -> String {
        (0..n).map(|i| format!("#t{i} ")).collect()
    }

    fn with_hashtag_counts(counts: &[usize]) -> Vec<Tweet> {
        counts.iter().enumerate().map(|(i, &n)| tweet(i, "u", &tags(n))).collect()
    }

    #[test]
    fn hashtag_means() {
        let e = Emoticons::default();
        for (counts, want) in [(&[6, 6, 6][..], 6.0), (&[0, 0, 0, 0][..], 0.0), (&[3, 7][..], 5.0)] {
            let ts = with_hashtag_counts(counts);
            let refs: Vec<&Tweet> = ts.iter().collect();
            assert_eq!(avg_hashtags(&refs, &e).unwrap(), want);
        }
        assert!(avg_hashtags(&[], &e).is_err());
    }

    #[test]
    fn similarity_pairs() {
        let ts: Vec<Tweet> = ["same text", "same text", "same text"]
            .iter()
            .enumerate()
            .map(|(i, t)| tweet(i, "u", t))
            .collect();
        let refs: Vec<&Tweet> = ts.iter().collect();
        assert_eq!(intra_similarity(&refs), 1.0);
        assert_eq!(intra_similarity(&refs[..1]), 0.0);

        // Four tweets average over six pairs.
        let texts = ["aaaa", "aaab", "bbbb", "abab"];
        let ts: Vec<Tweet> = texts.iter().enumerate().map(|(i, t)| tweet(i, "u", t)).collect();
        let refs: Vec<&Tweet> = ts.iter().collect();
        let mut sum = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                sum += textprep::similarity(texts[i], texts[j]);
            }
        }
        assert!((intra_similarity(&refs) - sum / 6.0).abs() < 1e-15);
    }

    #[test]
    fn urls_do_not_make_tweets_differ() {
        let ts = [tweet(0, "u", "buy now http://a.co/1"), tweet(1, "u", "buy now http://b.co/zz")];
        let refs: Vec<&Tweet> = ts.iter().collect();
        assert_eq!(intra_similarity(&refs), 1.0);
    }

    fn account(user: &str) -> UserAccount {
        UserAccount {
            user_id: user.to_string(),
            account_created_at: 1,
            verified: false,
            default_profile_image: false,
            statuses_count: 0,
            listed_count: 0,
            followers_count: 0,
            friends_count: 0,
            profile_description: None,
        }
    }

    #[test]
    fn cutoffs_are_strict() {
        let e = Emoticons::default();
        let config = SpamConfig::default();
        let six = with_hashtag_counts(&[6, 6]);
        let refs: Vec<&Tweet> = six.iter().collect();
        // Identical tag lists are also near-duplicates.
        assert_eq!(judge_user("u", &refs, &config, &e).reason, SpamReason::Both);
        let loose = SpamConfig { sim_cutoff: 1.0, ..config };
        let v = judge_user("u", &refs, &loose, &e);
        assert!(v.removed);
        assert_eq!(v.reason, SpamReason::Hashtags);

        let five = with_hashtag_counts(&[5, 5]);
        let refs: Vec<&Tweet> = five.iter().collect();
        let strict = SpamConfig { sim_cutoff: 1.0, ..config };
        assert!(!judge_user("u", &refs, &strict, &e).removed);

        // Ten characters with one substitution: similarity 0.9 > 0.8.
        let near = [tweet(0, "u", "abcdefghij"), tweet(1, "u", "abcdefghiX")];
        let refs: Vec<&Tweet> = near.iter().collect();
        let v = judge_user("u", &refs, &config, &e);
        assert_eq!(v.reason, SpamReason::Similarity);

        // Exactly 0.8 is kept.
        let edge = [tweet(0, "u", "abcdefghij"), tweet(1, "u", "abcdefghXY")];
        let refs: Vec<&Tweet> = edge.iter().collect();
        let v = judge_user("u", &refs, &config, &e);
        assert_eq!(v.intra_similarity, 0.8);
        assert!(!v.removed);
    }

    #[test]
    fn filter_partitions_users() {
        let mut tweets = with_hashtag_counts(&[7, 7]);
        for t in &mut tweets {
            t.user_id = "spam".into();
            t.tweet_id = format!("s{}", t.tweet_id);
        }
        tweets.push(tweet(0, "ok", "hello there"));
        tweets.push(tweet(1, "ok", "another message entirely"));
        let (corpus, _) = Corpus::from_parts(tweets, vec![account("spam"), account("ok")]);
        let (kept, verdicts) = filter_spammers(&corpus, &SpamConfig::default(), &Emoticons::default(), &Sequential);
        assert_eq!(verdicts.len(), 2);
        assert_eq!(kept.active_users(), vec!["ok"]);
        assert!(verdicts.iter().find(|v| v.user_id == "spam").unwrap().removed);
    }
}
