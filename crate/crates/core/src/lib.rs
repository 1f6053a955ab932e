//! Pure algorithms behind the meanbirds pipeline: text cleaning, spam
//! heuristics, sessionization, label aggregation, lexicon scoring, social
//! graph metrics, per-user feature assembly and a random-forest classifier
//! with its evaluation protocol.
//!
//! The crate is `no_std` and only needs `alloc`. File IO, the CLI and the
//! annotation service live in the `meanbirds` crate.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod error;
pub mod exec;
pub mod features;
pub mod graph;
pub mod groundtruth;
pub mod lexfeatures;
pub mod model;
pub mod rng;
pub mod sessionizer;
pub mod spamfilter;
pub mod stats;
pub mod synth;
pub mod textprep;

#[doc(inline)]
pub use self::corpus::{Corpus, LoadSummary, Tweet, UserAccount};
#[doc(inline)]
pub use self::error::{Error, Result};
#[doc(inline)]
pub use self::exec::{Executor, Sequential};
#[doc(inline)]
pub use self::groundtruth::Label;
