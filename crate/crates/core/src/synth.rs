//! Reproducible synthetic corpora with planted behavior classes, a follow
//! graph and the label of every generated user.
//!
//! Planted spammers either use more than the hashtag cutoff on every tweet or
//! post near-copies of one template. Everyone else stays well below both
//! cutoffs. Bullies and aggressors post in tight bursts and draw words from a
//! negative pool. All users post in sessions of at least five tweets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet, UserAccount};
use crate::error::{Error, Result};
use crate::groundtruth::Label;
use crate::rng;

/// 2016-07-01T00:00:00Z.
pub const DEFAULT_WINDOW_START: i64 = 1_467_331_200;
const DAY: i64 = 86_400;
const MINUTE: i64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub aggressive: usize,
    pub bully: usize,
    pub normal: usize,
    pub spammer: usize,
}

impl ClassCounts {
    /// Split `total` users by the reference proportions (4.5% bully, 3.4%
    /// aggressive, 31.8% spam, 60.3% normal) with largest-remainder rounding.
    pub fn proportional(total: usize) -> Self {
        let shares = [(Label::Aggressive, 34), (Label::Bully, 45), (Label::Normal, 603), (Label::Spammer, 318)];
        let mut counts: Vec<(Label, usize, usize)> = shares
            .iter()
            .map(|&(l, per_mille)| (l, total * per_mille / 1000, total * per_mille % 1000))
            .collect();
        let assigned: usize = counts.iter().map(|c| c.1).sum();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| counts[b].2.cmp(&counts[a].2).then(a.cmp(&b)));
        for &i in order.iter().take(total - assigned) {
            counts[i].1 += 1;
        }
        Self {
            aggressive: counts[0].1,
            bully: counts[1].1,
            normal: counts[2].1,
            spammer: counts[3].1,
        }
    }

    pub fn total(&self) -> usize {
        self.aggressive + self.bully + self.normal + self.spammer
    }

    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Aggressive => self.aggressive,
            Label::Bully => self.bully,
            Label::Normal => self.normal,
            Label::Spammer => self.spammer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub counts: ClassCounts,
    /// Near-duplicate spammers as a fraction of all users; the remaining
    /// spammers are hashtag spammers.
    pub near_duplicate_fraction: f64,
    pub window_start: i64,
    pub window_days: i64,
    /// Graph-only accounts that follow and are followed by corpus users.
    pub background_nodes: usize,
}

impl SynthConfig {
    pub fn proportional(total: usize) -> Self {
        Self {
            counts: ClassCounts::proportional(total),
            near_duplicate_fraction: 0.05,
            window_start: DEFAULT_WINDOW_START,
            window_days: 90,
            background_nodes: total / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpamStyle {
    Hashtags,
    NearDuplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedUser {
    pub user_id: String,
    pub label: Label,
    pub spam_style: Option<SpamStyle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub corpus: Corpus,
    /// `(follower, followee)` pairs, sorted.
    pub edges: Vec<(String, String)>,
    /// Sorted by user id.
    pub planted: Vec<PlantedUser>,
}

impl SynthOutput {
    pub fn planted_labels(&self) -> BTreeMap<String, Label> {
        self.planted.iter().map(|p| (p.user_id.clone(), p.label)).collect()
    }
}

const NEUTRAL: &[&str] = &[
    "today", "game", "time", "people", "work", "week", "news", "city", "music", "coffee", "morning", "train", "weekend",
    "team", "phone", "movie", "book", "dinner", "weather", "market", "school", "street", "video", "photo", "story",
    "summer", "night", "match", "season", "office", "river", "garden", "kitchen", "window", "bridge", "ticket",
    "station", "concert", "library", "holiday", "project", "meeting", "update", "release", "player", "screen",
    "radio", "forest", "island", "planet", "camera", "guitar", "recipe", "bakery", "museum", "harbor", "valley",
    "village", "airport", "journey",
];

const POSITIVE: &[&str] = &[
    "love", "great", "good", "nice", "happy", "fun", "beautiful", "best", "cool", "enjoy", "excellent", "funny",
    "perfect", "smile", "sweet", "awesome", "amazing", "glad",
];

const NEGATIVE: &[&str] = &[
    "bad", "hate", "angry", "annoying", "awful", "boring", "disgusting", "dumb", "fail", "fake", "horrible", "idiot",
    "jerk", "liar", "loser", "lame", "moron", "nasty", "pathetic", "stupid", "sucks", "terrible", "trash", "ugly",
    "useless", "worst", "shame", "scum", "freak",
];

const SWEAR: &[&str] = &["damn", "crap", "hell", "wtf", "stfu", "shit", "bastard", "piss"];

const TAGS: &[&str] = &[
    "music", "sports", "news", "tech", "travel", "food", "art", "gaming", "movies", "fashion", "health", "science",
    "photo", "books", "nature", "fitness", "deal", "sale", "promo", "free", "win", "giveaway", "follow", "trending",
];

const EMOTICONS: &[&str] = &[":)", ":-)", ":D", ";)", "<3", ":("];

const SPAM_TEMPLATES: &[&str] = &[
    "Get your exclusive discount code now at our online store and save big on every order",
    "Limited time offer claim your free bonus gift card today before this amazing deal ends",
    "Click here to win the newest smartphone just follow and retweet to enter the contest",
];

struct Profile {
    sessions: (usize, usize),
    session_size: (usize, usize),
    gap_minutes: (i64, i64),
    age_days: (i64, i64),
    followers: (usize, usize),
    friends: (usize, usize),
    reciprocity: f64,
    listed: (u64, u64),
    verified: f64,
    default_image: f64,
}

fn profile(label: Label) -> Profile {
    match label {
        Label::Normal => Profile {
            sessions: (2, 5),
            session_size: (5, 10),
            gap_minutes: (5, 200),
            age_days: (200, 3200),
            followers: (20, 160),
            friends: (30, 140),
            reciprocity: 0.7,
            listed: (2, 40),
            verified: 0.05,
            default_image: 0.05,
        },
        Label::Bully => Profile {
            sessions: (2, 3),
            session_size: (8, 16),
            gap_minutes: (1, 40),
            age_days: (150, 2400),
            followers: (15, 110),
            friends: (30, 130),
            reciprocity: 0.45,
            listed: (0, 15),
            verified: 0.0,
            default_image: 0.15,
        },
        Label::Aggressive => Profile {
            sessions: (3, 4),
            session_size: (10, 18),
            gap_minutes: (1, 25),
            age_days: (20, 1200),
            followers: (5, 70),
            friends: (40, 150),
            reciprocity: 0.3,
            listed: (0, 8),
            verified: 0.0,
            default_image: 0.35,
        },
        Label::Spammer => Profile {
            sessions: (2, 4),
            session_size: (5, 9),
            gap_minutes: (5, 60),
            age_days: (30, 900),
            followers: (5, 40),
            friends: (80, 200),
            reciprocity: 0.1,
            listed: (0, 3),
            verified: 0.0,
            default_image: 0.4,
        },
    }
}

fn habits(label: Label, rng: &mut ChaCha8Rng) -> Label {
    match label {
        Label::Bully | Label::Aggressive if rng.random_bool(0.25) => Label::Normal,
        Label::Normal if rng.random_bool(0.08) => Label::Bully,
        Label::Bully if rng.random_bool(0.2) => Label::Aggressive,
        Label::Aggressive if rng.random_bool(0.2) => Label::Bully,
        other => other,
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).copied().unwrap_or("")
}

fn shout(word: &str) -> String {
    word.to_uppercase()
}

struct TweetText {
    text: String,
    hashtags: Vec<String>,
    urls: Vec<String>,
    mentions: Vec<String>,
}

fn compose(words: Vec<String>, tags: Vec<String>, url: Option<String>, mentions: Vec<String>) -> TweetText {
    let mut parts: Vec<String> = mentions.iter().map(|m| format!("@{m}")).collect();
    parts.extend(words);
    parts.extend(tags.iter().map(|t| format!("#{t}")));
    if let Some(u) = &url {
        parts.push(u.clone());
    }
    TweetText {
        text: parts.join(" "),
        hashtags: tags,
        urls: url.into_iter().collect(),
        mentions,
    }
}

struct Voice {
    negative: f64,
    positive: f64,
    shout: f64,
    swear: bool,
    emoticon: f64,
    url: f64,
    mention: f64,
    exclaim: f64,
    max_tags: usize,
}

const CALM: Voice = Voice {
    negative: 0.0,
    positive: 0.0,
    shout: 0.0,
    swear: false,
    emoticon: 0.0,
    url: 0.0,
    mention: 0.0,
    exclaim: 0.0,
    max_tags: 0,
};

/// Per-user writing habits. Ranges overlap between classes so that
/// individual users can look like another class.
fn user_voice(label: Label, rng: &mut ChaCha8Rng) -> Voice {
    let (negative, positive, shout, swear, emoticon, url, mention, exclaim, max_tags) = match label {
        Label::Normal => (0.0..0.16, 0.05..0.25, 0.0..0.08, 0.05, 0.0..0.4, 0.0..0.5, 0.0..0.4, 0.0..0.1, 0..=2),
        Label::Bully => (0.06..0.4, 0.0..0.15, 0.0..0.18, 0.2, 0.0..0.2, 0.0..0.25, 0.3..1.0, 0.0..0.3, 0..=2),
        Label::Aggressive => (0.06..0.45, 0.0..0.1, 0.02..0.35, 0.7, 0.0..0.15, 0.0..0.15, 0.1..0.8, 0.05..0.5, 0..=1),
        Label::Spammer => return CALM,
    };
    Voice {
        negative: rng.random_range(negative),
        positive: rng.random_range(positive),
        shout: rng.random_range(shout),
        swear: rng.random_bool(swear),
        emoticon: rng.random_range(emoticon),
        url: rng.random_range(url),
        mention: rng.random_range(mention),
        exclaim: rng.random_range(exclaim),
        max_tags: rng.random_range(max_tags),
    }
}

fn ordinary_words(rng: &mut ChaCha8Rng, len: usize, voice: &Voice) -> Vec<String> {
    (0..len)
        .map(|_| {
            let roll: f64 = rng.random();
            let word = if roll < voice.negative {
                if voice.swear && rng.random_bool(0.35) {
                    pick(rng, SWEAR)
                } else {
                    pick(rng, NEGATIVE)
                }
            } else if roll < voice.negative + voice.positive {
                pick(rng, POSITIVE)
            } else {
                pick(rng, NEUTRAL)
            };
            if rng.random_bool(voice.shout) {
                shout(word)
            } else {
                String::from(word)
            }
        })
        .collect()
}

fn distinct_tags(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    TAGS.choose_multiple(rng, n).map(|t| String::from(*t)).collect()
}

fn near_duplicate(rng: &mut ChaCha8Rng, template: &str) -> String {
    // A short numeric suffix keeps pairwise similarity well above the cutoff.
    format!("{template} {}", rng.random_range(1..1000))
}

struct UserPlan<'a> {
    user_id: &'a str,
    label: Label,
    /// Profile used for timing, account and graph behavior. Usually the
    /// planted label, but some users behave structurally like another class.
    habits: Label,
    spam_style: Option<SpamStyle>,
    victims: &'a [String],
}

fn user_tweets(plan: &UserPlan<'_>, cfg: &SynthConfig, seed: u64, user_index: usize) -> Vec<Tweet> {
    let p = profile(plan.habits);
    let mut rng = rng::rng_for_str(seed, &format!("tweets:{}", plan.user_id));
    let n_sessions = rng.random_range(p.sessions.0..=p.sessions.1);
    let span = cfg.window_days * DAY;
    let mut starts: Vec<i64> = (0..n_sessions).map(|_| cfg.window_start + rng.random_range(0..span - DAY)).collect();
    starts.sort_unstable();
    let template = SPAM_TEMPLATES.choose(&mut rng).copied().unwrap_or(SPAM_TEMPLATES[0]);
    let voice = user_voice(plan.label, &mut rng);
    let mut out = Vec::new();
    for start in starts {
        let size = rng.random_range(p.session_size.0..=p.session_size.1);
        let mut at = start;
        for _ in 0..size {
            let content = match (plan.label, plan.spam_style) {
                (Label::Spammer, Some(SpamStyle::NearDuplicate)) => compose(
                    near_duplicate(&mut rng, template).split(' ').map(String::from).collect(),
                    Vec::new(),
                    Some(format!("https://shop.example/{}", rng.random_range(0..5))),
                    Vec::new(),
                ),
                (Label::Spammer, _) => {
                    let len = rng.random_range(3..7);
                    compose(
                        ordinary_words(&mut rng, len, &CALM),
                        { let n = rng.random_range(6..=9); distinct_tags(&mut rng, n) },
                        Some(format!("https://promo.example/{}", rng.random_range(0..1000))),
                        Vec::new(),
                    )
                }
                _ => {
                    let len = rng.random_range(5..12);
                    let mut words = ordinary_words(&mut rng, len, &voice);
                    if rng.random_bool(voice.emoticon) {
                        words.push(String::from(pick(&mut rng, EMOTICONS)));
                    }
                    if rng.random_bool(voice.exclaim) {
                        words.push(String::from("!!!"));
                    }
                    let n_tags = rng.random_range(0..=voice.max_tags);
                    let tags = distinct_tags(&mut rng, n_tags);
                    let url = rng
                        .random_bool(voice.url)
                        .then(|| format!("https://news.example/{}", rng.random_range(0..1000)));
                    let mentions = match plan.victims.choose(&mut rng) {
                        Some(v) if rng.random_bool(voice.mention) => alloc::vec![v.clone()],
                        _ => Vec::new(),
                    };
                    compose(words, tags, url, mentions)
                }
            };
            out.push(Tweet {
                tweet_id: format!("t{:06}{:04}", user_index, out.len()),
                user_id: String::from(plan.user_id),
                created_at: at,
                text: content.text,
                hashtags: content.hashtags,
                urls: content.urls,
                mentions: content.mentions.into_iter().filter(|m| !m.is_empty()).collect(),
                is_retweet: rng.random_bool(0.1),
            });
            at += rng.random_range(p.gap_minutes.0..=p.gap_minutes.1) * MINUTE;
        }
    }
    out
}

fn user_edges(plan: &UserPlan<'_>, nodes: &[String], seed: u64) -> Vec<(String, String)> {
    let p = profile(plan.habits);
    let mut rng = rng::rng_for_str(seed, &format!("edges:{}", plan.user_id));
    let followers = rng.random_range(p.followers.0..=p.followers.1).min(nodes.len() - 1);
    let friends = rng.random_range(p.friends.0..=p.friends.1).min(nodes.len() - 1);
    let others: Vec<&String> = nodes.iter().filter(|n| n.as_str() != plan.user_id).collect();
    let mut edges = Vec::new();
    let chosen_followers: Vec<&String> = others.choose_multiple(&mut rng, followers).copied().collect();
    let mut followed: BTreeSet<&String> = BTreeSet::new();
    for f in &chosen_followers {
        edges.push(((*f).clone(), String::from(plan.user_id)));
        if followed.len() < friends && rng.random_bool(p.reciprocity) {
            followed.insert(*f);
        }
    }
    let mut pool = others.clone();
    pool.shuffle(&mut rng);
    for n in pool {
        if followed.len() >= friends {
            break;
        }
        followed.insert(n);
    }
    for n in followed {
        edges.push((String::from(plan.user_id), n.clone()));
    }
    edges
}

/// Build a corpus, follow graph and planted labels. The same config and seed
/// always give the same output; every user draws from its own random stream.
pub fn generate(config: &SynthConfig, seed: u64) -> Result<SynthOutput> {
    let total = config.counts.total();
    if total == 0 {
        return Err(Error::InvalidConfig("synthetic corpus needs at least one user".into()));
    }
    if config.window_days < 2 {
        return Err(Error::InvalidConfig("observation window must span at least two days".into()));
    }
    let near_dup = libm::round(config.near_duplicate_fraction * total as f64) as usize;
    if near_dup > config.counts.spammer {
        return Err(Error::InvalidConfig(format!(
            "{near_dup} near-duplicate spammers requested but only {} spammers",
            config.counts.spammer
        )));
    }
    let width = id_width(total.max(config.background_nodes));
    let ids: Vec<String> = (0..total).map(|i| format!("u{:0width$}", i + 1)).collect();
    let mut labels: Vec<Label> = Label::ALL
        .iter()
        .flat_map(|&l| core::iter::repeat_n(l, config.counts.get(l)))
        .collect();
    let mut assign_rng = rng::rng_for_str(seed, "assign");
    labels.shuffle(&mut assign_rng);
    let mut spammer_slots: Vec<usize> = (0..total).filter(|&i| labels[i] == Label::Spammer).collect();
    spammer_slots.shuffle(&mut assign_rng);
    let near_dup_set: BTreeSet<usize> = spammer_slots.into_iter().take(near_dup).collect();

    let normals: Vec<String> = (0..total).filter(|&i| labels[i] == Label::Normal).map(|i| ids[i].clone()).collect();
    let victim_lists: Vec<Vec<String>> = (0..total)
        .map(|i| {
            let mut rng = rng::rng_for_str(seed, &format!("victims:{}", ids[i]));
            let n = match labels[i] {
                Label::Bully => rng.random_range(1..=3),
                Label::Aggressive => rng.random_range(3..=8),
                Label::Normal => 2,
                Label::Spammer => 0,
            };
            normals
                .choose_multiple(&mut rng, n)
                .filter(|v| **v != ids[i])
                .cloned()
                .collect()
        })
        .collect();

    let plans: Vec<UserPlan<'_>> = (0..total)
        .map(|i| UserPlan {
            user_id: &ids[i],
            label: labels[i],
            habits: habits(labels[i], &mut rng::rng_for_str(seed, &format!("habits:{}", ids[i]))),
            spam_style: (labels[i] == Label::Spammer).then(|| {
                if near_dup_set.contains(&i) {
                    SpamStyle::NearDuplicate
                } else {
                    SpamStyle::Hashtags
                }
            }),
            victims: &victim_lists[i],
        })
        .collect();

    let mut nodes = ids.clone();
    nodes.extend((0..config.background_nodes).map(|i| format!("b{:0width$}", i + 1)));
    let mut edge_set: BTreeSet<(String, String)> = BTreeSet::new();
    let mut tweets = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        tweets.extend(user_tweets(plan, config, seed, i));
        edge_set.extend(user_edges(plan, &nodes, seed));
    }
    let mut out_deg: BTreeMap<&str, u64> = BTreeMap::new();
    let mut in_deg: BTreeMap<&str, u64> = BTreeMap::new();
    for (a, b) in &edge_set {
        *out_deg.entry(a.as_str()).or_default() += 1;
        *in_deg.entry(b.as_str()).or_default() += 1;
    }

    let mut per_user: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &tweets {
        *per_user.entry(t.user_id.as_str()).or_default() += 1;
    }
    let accounts: Vec<UserAccount> = plans
        .iter()
        .map(|plan| {
            let p = profile(plan.habits);
            let mut rng = rng::rng_for_str(seed, &format!("account:{}", plan.user_id));
            let age = rng.random_range(p.age_days.0..=p.age_days.1);
            let posted = per_user.get(plan.user_id).copied().unwrap_or(0) as u64;
            UserAccount {
                user_id: String::from(plan.user_id),
                account_created_at: config.window_start - age * DAY,
                verified: rng.random_bool(p.verified),
                default_profile_image: rng.random_bool(p.default_image),
                statuses_count: posted + rng.random_range(0..5000),
                listed_count: rng.random_range(p.listed.0..=p.listed.1),
                followers_count: in_deg.get(plan.user_id).copied().unwrap_or(0),
                friends_count: out_deg.get(plan.user_id).copied().unwrap_or(0),
                profile_description: rng.random_bool(0.6).then(|| ordinary_words(&mut rng, 4, &CALM).join(" ")),
            }
        })
        .collect();

    let planted = plans
        .iter()
        .map(|p| PlantedUser {
            user_id: String::from(p.user_id),
            label: p.label,
            spam_style: p.spam_style,
        })
        .collect();
    let (corpus, _) = Corpus::from_parts(tweets, accounts);
    Ok(SynthOutput {
        corpus,
        edges: edge_set.into_iter().collect(),
        planted,
    })
}

/// Zero-padding width for ids: at least four digits.
fn id_width(count: usize) -> usize {
    let mut n = count.max(1);
    let mut w = 0;
    while n > 0 {
        n /= 10;
        w += 1;
    }
    w.max(4)
}
