//! Empirical risk estimators (PN, positive-confidence, naive/adjusted PbN)
//! and their gradients with respect to linear-classifier parameters.
//!
//! Every estimator is a sum of per-class means built from the logistic loss,
//! with two distinct per-sample weighting forms:
//!
//! - multiplier weights, `coef · mean_i [ w_i · ℓ(sign · g(x_i)) ]`, used by
//!   the positive-confidence risk (`w_i = (1−r_i)/r_i`);
//! - margin-scale weights, `coef · mean_i [ ℓ(sign · w_i · g(x_i)) ]`, used
//!   by the PbN correction term (`w_i = (1−t_i)/t_i` with
//!   `t_i = clamp(σ̃(x_i)^k, floor, 1)`). Scaling inside the loss makes a
//!   zero weight contribute the constant `ℓ(0) = log 2` and no gradient,
//!   and makes large weights act like a sharper margin requirement.
//!
//! The exact decomposition identities in [`crate::oracle`] are statements
//! about expectations with the true observation posterior, where the factor
//! multiplies the integrand; the empirical correction term here instead
//! follows the skew-corrected margin-scale form used for training.
//!
//! σ̃ weights are computed once per training sample and frozen; they do not
//! depend on the classifier, so each objective is a fixed finite sum.

use crate::core::{LinearClassifier, PbnError, ProblemParams, Result};
use crate::density::SigmaField;
use crate::losses::{logistic_loss, logistic_loss_grad};

/// How a term's per-sample weights enter the loss.
#[derive(Debug, Clone)]
pub enum Weighting {
    /// No per-sample weights: `ℓ(sign · g)`.
    Uniform,
    /// Weight multiplies the loss value: `w · ℓ(sign · g)`.
    Multiplier(Vec<f64>),
    /// Weight scales the margin inside the loss: `ℓ(sign · w · g)`.
    MarginScale(Vec<f64>),
}

impl Weighting {
    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            Weighting::Uniform => None,
            Weighting::Multiplier(w) | Weighting::MarginScale(w) => Some(w),
        }
    }

    /// Loss of sample `i` with raw margin `g` under this weighting.
    #[inline]
    pub fn loss(&self, i: usize, sign: f64, g: f64) -> f64 {
        match self {
            Weighting::Uniform => logistic_loss(sign * g),
            Weighting::Multiplier(w) => w[i] * logistic_loss(sign * g),
            Weighting::MarginScale(w) => logistic_loss(sign * w[i] * g),
        }
    }

    /// Derivative of [`Self::loss`] with respect to the raw margin `g`.
    #[inline]
    pub fn dloss_dg(&self, i: usize, sign: f64, g: f64) -> f64 {
        match self {
            Weighting::Uniform => logistic_loss_grad(sign * g) * sign,
            Weighting::Multiplier(w) => w[i] * logistic_loss_grad(sign * g) * sign,
            Weighting::MarginScale(w) => logistic_loss_grad(sign * w[i] * g) * sign * w[i],
        }
    }
}

/// One term of an empirical risk: a coefficient times a per-sample mean of
/// (possibly weighted) logistic losses of `sign · g(x_i)`.
#[derive(Debug, Clone)]
pub struct RiskTerm {
    pub xs: Vec<Vec<f64>>,
    pub coef: f64,
    pub sign: f64,
    pub weighting: Weighting,
}

impl RiskTerm {
    pub fn new(xs: Vec<Vec<f64>>, coef: f64, sign: f64, weighting: Weighting) -> Result<Self> {
        if xs.is_empty() {
            return Err(PbnError::EmptySet("risk term sample list"));
        }
        if let Some(w) = weighting.weights() {
            if w.len() != xs.len() {
                return Err(PbnError::DimensionMismatch { expected: xs.len(), got: w.len() });
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(PbnError::InvalidParam("term weights must be finite and >= 0".into()));
            }
        }
        Ok(Self { xs, coef, sign, weighting })
    }

    /// Value of this term at `clf`.
    pub fn value(&self, clf: &LinearClassifier) -> Result<f64> {
        let mut total = 0.0;
        for (i, x) in self.xs.iter().enumerate() {
            total += self.weighting.loss(i, self.sign, clf.margin(x)?);
        }
        Ok(self.coef * total / self.xs.len() as f64)
    }

    /// Accumulate this term's gradient into `(grad_a, grad_beta)`.
    pub fn accumulate_gradient(
        &self,
        clf: &LinearClassifier,
        grad_a: &mut [f64],
        grad_beta: &mut f64,
    ) -> Result<()> {
        let inv_n = 1.0 / self.xs.len() as f64;
        for (i, x) in self.xs.iter().enumerate() {
            let dg =
                self.coef * inv_n * self.weighting.dloss_dg(i, self.sign, clf.margin(x)?);
            for (ga, xi) in grad_a.iter_mut().zip(x) {
                *ga += dg * xi;
            }
            *grad_beta += dg;
        }
        Ok(())
    }
}

/// Total value of a list of risk terms.
pub fn risk_value(terms: &[RiskTerm], clf: &LinearClassifier) -> Result<f64> {
    let mut total = 0.0;
    for t in terms {
        total += t.value(clf)?;
    }
    if !total.is_finite() {
        return Err(PbnError::NonFinite("risk value"));
    }
    Ok(total)
}

/// Exact analytic gradient of a list of risk terms.
pub fn risk_gradient(terms: &[RiskTerm], clf: &LinearClassifier) -> Result<(Vec<f64>, f64)> {
    let mut grad_a = vec![0.0; clf.a.len()];
    let mut grad_beta = 0.0;
    for t in terms {
        t.accumulate_gradient(clf, &mut grad_a, &mut grad_beta)?;
    }
    Ok((grad_a, grad_beta))
}

/// Terms of the PN risk: `π·mean_P ℓ(g) + (1−π)·mean_N ℓ(−g)`.
pub fn pn_terms(x_p: &[Vec<f64>], x_n: &[Vec<f64>], pi: f64) -> Result<Vec<RiskTerm>> {
    Ok(vec![
        RiskTerm::new(x_p.to_vec(), pi, 1.0, Weighting::Uniform)?,
        RiskTerm::new(x_n.to_vec(), 1.0 - pi, -1.0, Weighting::Uniform)?,
    ])
}

/// Terms of the positive-confidence risk:
/// `π·mean_P [ ℓ(g) + ((1−r)/r)·ℓ(−g) ]` with per-sample confidence
/// `r(x) = p(y = +1 | x)`.
pub fn pconf_terms(x_p: &[Vec<f64>], confidences: &[f64], pi: f64) -> Result<Vec<RiskTerm>> {
    if confidences.len() != x_p.len() {
        return Err(PbnError::DimensionMismatch { expected: x_p.len(), got: confidences.len() });
    }
    let mut odds = Vec::with_capacity(confidences.len());
    for r in confidences {
        if !(r.is_finite() && *r > 0.0 && *r <= 1.0) {
            return Err(PbnError::InvalidParam(format!(
                "confidence must be in (0, 1], got {r}"
            )));
        }
        odds.push((1.0 - r) / r);
    }
    Ok(vec![
        RiskTerm::new(x_p.to_vec(), pi, 1.0, Weighting::Uniform)?,
        RiskTerm::new(x_p.to_vec(), pi, -1.0, Weighting::Multiplier(odds))?,
    ])
}

/// Terms of the PbN risk with precomputed posterior weights:
///
/// `π·mean_P ℓ(g) + ρ·mean_bN ℓ(−g) + (π+ρ)·mean_{P∪bN} ℓ(−w_i·g)`
///
/// where `weights[i] = (1 − t_i)/t_i`, `t_i = clamp(σ̃(x_i)^k, floor, 1)`,
/// over the concatenated observed pool (P first, then bN). The weight scales
/// the margin inside the loss of the correction term.
pub fn pbn_terms(
    x_p: &[Vec<f64>],
    x_bn: &[Vec<f64>],
    weights: &[f64],
    params: ProblemParams,
) -> Result<Vec<RiskTerm>> {
    if x_p.is_empty() || x_bn.is_empty() {
        return Err(PbnError::EmptySet("PbN risk needs both P and bN samples"));
    }
    let n_obs = x_p.len() + x_bn.len();
    if weights.len() != n_obs {
        return Err(PbnError::DimensionMismatch { expected: n_obs, got: weights.len() });
    }
    let mut observed = Vec::with_capacity(n_obs);
    observed.extend_from_slice(x_p);
    observed.extend_from_slice(x_bn);
    Ok(vec![
        RiskTerm::new(x_p.to_vec(), params.pi, 1.0, Weighting::Uniform)?,
        RiskTerm::new(x_bn.to_vec(), params.rho, -1.0, Weighting::Uniform)?,
        RiskTerm::new(
            observed,
            params.pi + params.rho,
            -1.0,
            Weighting::MarginScale(weights.to_vec()),
        )?,
    ])
}

/// Empirical PN risk value.
pub fn empirical_pn_risk(
    clf: &LinearClassifier,
    x_p: &[Vec<f64>],
    x_n: &[Vec<f64>],
    pi: f64,
) -> Result<f64> {
    risk_value(&pn_terms(x_p, x_n, pi)?, clf)
}

/// Empirical positive-confidence risk value.
pub fn empirical_pconf_risk(
    clf: &LinearClassifier,
    x_p: &[Vec<f64>],
    confidences: &[f64],
    pi: f64,
) -> Result<f64> {
    risk_value(&pconf_terms(x_p, confidences, pi)?, clf)
}

/// Empirical PbN risk value from a σ̃ field and exponent `k` (`k = 1` is the
/// naive estimator; `k = k*` the adjusted one).
pub fn empirical_pbn_risk(
    clf: &LinearClassifier,
    x_p: &[Vec<f64>],
    x_bn: &[Vec<f64>],
    field: &SigmaField,
    k: f64,
) -> Result<f64> {
    let weights = pool_weights(x_p, x_bn, field, k)?;
    risk_value(&pbn_terms(x_p, x_bn, &weights, field.params)?, clf)
}

/// σ̃-derived weights over the concatenated observed pool (P first, then bN).
pub fn pool_weights(
    x_p: &[Vec<f64>],
    x_bn: &[Vec<f64>],
    field: &SigmaField,
    k: f64,
) -> Result<Vec<f64>> {
    let mut weights = Vec::with_capacity(x_p.len() + x_bn.len());
    for x in x_p.iter().chain(x_bn.iter()) {
        weights.push(field.sigma_weight(x, k)?);
    }
    Ok(weights)
}
