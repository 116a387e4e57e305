//! Mini-batch gradient descent over weighted risk terms.
//!
//! Each optimization step uses a stratified batch: every risk term
//! contributes a proportional slice of its own shuffled samples, so the
//! per-batch objective is an unbiased estimate of the full risk regardless
//! of how unbalanced the class pools are. Batches are derived from a seeded
//! generator and samples are canonicalized by sorting before the first
//! shuffle, which makes training a pure function of (terms, config) —
//! independent of the order in which callers happened to assemble the data.

use crate::core::{LinearClassifier, PbnError, Result, Sample};
use crate::losses::zero_one_loss;
use crate::risk::{RiskTerm, Weighting};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Optimizer hyperparameters. Defaults: learning rate 0.01, 200 epochs,
/// batch size 64, seed 0, zero-initialized parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, epochs: 200, batch_size: 64, seed: 0 }
    }
}

impl SgdConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(PbnError::InvalidParam(format!(
                "learning rate must be finite and > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(PbnError::InvalidParam("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

struct TermData {
    xs: Vec<Vec<f64>>,
    coef: f64,
    sign: f64,
    weighting: Weighting,
    perm: Vec<usize>,
}

/// Canonical sample order: lexicographic by features, then by weight.
fn canonical_order(xs: &[Vec<f64>], weights: Option<&[f64]>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| {
        let by_x = xs[i]
            .iter()
            .zip(&xs[j])
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal);
        by_x.then_with(|| match weights {
            Some(w) => w[i].total_cmp(&w[j]),
            None => std::cmp::Ordering::Equal,
        })
    });
    idx
}

/// Minimize the summed risk terms by mini-batch gradient descent from a
/// zero-initialized linear classifier. Errors if term dimensions disagree
/// with `dim` or if the parameters stop being finite.
pub fn train_sgd(terms: &[RiskTerm], dim: usize, config: &SgdConfig) -> Result<LinearClassifier> {
    config.validate()?;
    if terms.is_empty() {
        return Err(PbnError::EmptySet("risk terms for training"));
    }
    let mut data = Vec::with_capacity(terms.len());
    let mut n_total = 0usize;
    for t in terms {
        for x in &t.xs {
            if x.len() != dim {
                return Err(PbnError::DimensionMismatch { expected: dim, got: x.len() });
            }
        }
        let order = canonical_order(&t.xs, t.weighting.weights());
        let xs: Vec<Vec<f64>> = order.iter().map(|&i| t.xs[i].clone()).collect();
        let reorder = |w: &[f64]| order.iter().map(|&i| w[i]).collect();
        let weighting = match &t.weighting {
            Weighting::Uniform => Weighting::Uniform,
            Weighting::Multiplier(w) => Weighting::Multiplier(reorder(w)),
            Weighting::MarginScale(w) => Weighting::MarginScale(reorder(w)),
        };
        n_total += xs.len();
        data.push(TermData {
            perm: (0..xs.len()).collect(),
            xs,
            coef: t.coef,
            sign: t.sign,
            weighting,
        });
    }
    let n_batches = n_total.div_ceil(config.batch_size).max(1);

    let mut clf = LinearClassifier::zeros(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut grad_a = vec![0.0; dim];
    for epoch in 0..config.epochs {
        for td in &mut data {
            td.perm.shuffle(&mut rng);
        }
        for bi in 0..n_batches {
            grad_a.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_beta = 0.0;
            for td in &data {
                let n = td.xs.len();
                let lo = (bi * n) / n_batches;
                let hi = ((bi + 1) * n) / n_batches;
                if hi <= lo {
                    continue;
                }
                let scale = td.coef / (hi - lo) as f64;
                for &i in &td.perm[lo..hi] {
                    let x = &td.xs[i];
                    let dg =
                        scale * td.weighting.dloss_dg(i, td.sign, clf.margin_unchecked(x));
                    for (ga, xi) in grad_a.iter_mut().zip(x) {
                        *ga += dg * xi;
                    }
                    grad_beta += dg;
                }
            }
            for (a, g) in clf.a.iter_mut().zip(&grad_a) {
                *a -= config.learning_rate * g;
            }
            clf.beta -= config.learning_rate * grad_beta;
            if !clf.is_finite() {
                return Err(PbnError::Diverged(format!(
                    "non-finite parameters at epoch {epoch}, batch {bi}"
                )));
            }
        }
    }
    Ok(clf)
}

/// False-negative rate of `clf` over samples treated as positives: the mean
/// zero-one loss of their margins, with margin exactly zero counted half.
pub fn evaluate_fnr(clf: &LinearClassifier, positives: &[Sample]) -> Result<f64> {
    if positives.is_empty() {
        return Err(PbnError::EmptySet("positives for false-negative rate"));
    }
    let mut total = 0.0;
    for sample in positives {
        total += zero_one_loss(clf.margin(&sample.x)?);
    }
    Ok(total / positives.len() as f64)
}
