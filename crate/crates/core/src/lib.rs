//! Cross-event short-text classification harness.
//!
//! Messages are stripped of URLs and mentions, tokenized, filtered for
//! stopwords and turned into binary uni/bi-gram vectors. Information gain
//! picks the top features on the training set, a seeded random forest is
//! trained on them, and precision, recall, F1 and one-vs-rest AUC are
//! measured on a fixed held-out split of the target event.
//!
//! The [`harness`] module runs matrices of single-source, multi-source,
//! multi-source-with-target and special-case experiments over a manifest of
//! labeled event datasets.

pub mod corpus;
pub mod error;
pub mod features;
pub mod forest;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod seed;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
