//! Binary classification from positive (P) and biased-negative (bN) data.
//!
//! In the PbN setting, training data consist of positive samples and a
//! *biased* subset of the negatives: negatives are observed only when a
//! latent flag `s` is `+1`, and the observed negatives follow a different
//! distribution than the full negative class. This crate implements:
//!
//! - the classification risk rewritten in terms of observed data, using the
//!   observation posterior `σ(x) = p(s = +1 | x)`;
//! - the skewed posterior estimate `σ̃` computable from P and bN data alone,
//!   together with its power-transform correction `σ̃^k`;
//! - empirical risk estimators (PN, positive-confidence, naive and adjusted
//!   PbN) and their gradients for a linear model trained by mini-batch SGD;
//! - hyperparameter selection for `k` from a false-negative-rate prior;
//! - synthetic Gaussian-mixture experiment generators, a loader for the UCI
//!   Wireless Indoor Localization dataset, and a reproduction harness that
//!   emits accuracy tables with significance flags;
//! - an exact-arithmetic oracle on finite joint distributions that verifies
//!   the risk decomposition identities underpinning the estimators.
//!
//! The crate is deterministic end to end: every stochastic step derives its
//! seed from a user-supplied base seed, and repeated runs emit byte-identical
//! tables.

pub mod core;
pub mod datagen;
pub mod density;
pub mod harness;
pub mod losses;
pub mod oracle;
pub mod risk;
pub mod selection;
pub mod training;
pub mod wireless;

pub use crate::core::{
    LinearClassifier, PbnError, PbnSplits, ProblemParams, Result, Sample,
};
