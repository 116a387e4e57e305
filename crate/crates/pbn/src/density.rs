//! Density models (isotropic Gaussian mixtures and Gaussian-kernel KDE) and
//! the skewed observation posterior σ̃ with its power-transform weight.
//!
//! The observation posterior `σ(x) = p(s = +1 | x)` is not identifiable from
//! positive and biased-negative data alone; substituting the biased marginal
//! `p_bias = π·p_P + (1−π)·p_bN` for the true marginal yields the computable
//! but skewed estimate
//!
//! `σ̃(x) = (π·p_P(x) + ρ·p_bN(x)) / (π·p_P(x) + (1−π)·p_bN(x))`.
//!
//! The skew is corrected downstream by raising σ̃ to a selected power `k`.

use crate::core::{PbnError, ProblemParams, Result};

/// Default lower clip applied to σ̃^k before forming the weight, bounding the
/// weight at `(1 − 0.01)/0.01 = 99` for optimization stability.
pub const DEFAULT_CLIP_FLOOR: f64 = 0.01;

/// One isotropic Gaussian component `N(mean, variance·I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianComponent {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(PbnError::InvalidParam(format!(
                "variance must be positive, got {variance}"
            )));
        }
        Ok(Self { mean, variance })
    }
}

/// Density of an isotropic Gaussian: `(2π·var)^{−d/2} · exp(−‖x−μ‖²/(2·var))`.
pub fn gaussian_pdf(x: &[f64], component: &GaussianComponent) -> Result<f64> {
    if x.len() != component.mean.len() {
        return Err(PbnError::DimensionMismatch { expected: component.mean.len(), got: x.len() });
    }
    let d = x.len() as f64;
    let sq: f64 = x
        .iter()
        .zip(&component.mean)
        .map(|(xi, mi)| (xi - mi) * (xi - mi))
        .sum();
    let norm = (2.0 * std::f64::consts::PI * component.variance).powf(-d / 2.0);
    Ok(norm * (-sq / (2.0 * component.variance)).exp())
}

/// Finite mixture of isotropic Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDensity {
    components: Vec<GaussianComponent>,
    weights: Vec<f64>,
}

impl MixtureDensity {
    pub fn new(components: Vec<GaussianComponent>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(PbnError::InvalidParam(
                "mixture needs equally many components and weights, at least one".into(),
            ));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(PbnError::InvalidParam("mixture weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(PbnError::InvalidParam(format!(
                "mixture weights must sum to 1 (within 1e-12), got {total}"
            )));
        }
        Ok(Self { components, weights })
    }

    /// Single standard component: `N(mean, I)`.
    pub fn single(mean: Vec<f64>) -> Self {
        Self {
            components: vec![GaussianComponent { mean, variance: 1.0 }],
            weights: vec![1.0],
        }
    }

    /// Unit-variance components at `means` with the given weights.
    pub fn isotropic(means: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let components = means
            .iter()
            .map(|m| GaussianComponent { mean: m.clone(), variance: 1.0 })
            .collect();
        Self::new(components, weights.to_vec())
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components) {
            total += w * gaussian_pdf(x, c)?;
        }
        Ok(total)
    }
}

/// Gaussian-kernel density estimate with fixed bandwidth `h`:
/// `p̂(x) = (1/n) Σ_i (2πh²)^{−d/2} exp(−‖x−x_i‖²/(2h²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeDensity {
    support: Vec<Vec<f64>>,
    bandwidth: f64,
}

impl KdeDensity {
    pub fn new(support: Vec<Vec<f64>>, bandwidth: f64) -> Result<Self> {
        if support.is_empty() {
            return Err(PbnError::EmptySet("KDE support"));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(PbnError::InvalidParam(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let d = support[0].len();
        if support.iter().any(|p| p.len() != d) {
            return Err(PbnError::InvalidParam("KDE support points differ in dimension".into()));
        }
        Ok(Self { support, bandwidth })
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        let d = self.support[0].len();
        if x.len() != d {
            return Err(PbnError::DimensionMismatch { expected: d, got: x.len() });
        }
        let h2 = self.bandwidth * self.bandwidth;
        let norm = (2.0 * std::f64::consts::PI * h2).powf(-(d as f64) / 2.0);
        let mut total = 0.0;
        for p in &self.support {
            let sq: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            total += (-sq / (2.0 * h2)).exp();
        }
        Ok(norm * total / self.support.len() as f64)
    }
}

/// A density model: analytic mixture or KDE.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityModel {
    Mixture(MixtureDensity),
    Kde(KdeDensity),
}

impl DensityModel {
    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        match self {
            DensityModel::Mixture(m) => m.pdf(x),
            DensityModel::Kde(k) => k.pdf(x),
        }
    }
}

/// σ̃ evaluated at one point, with a flag marking degenerate points where the
/// biased marginal underflowed to zero and the clip floor was substituted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaValue {
    pub value: f64,
    pub degenerate: bool,
}

/// The densities and parameters needed to evaluate σ̃ and its weights.
///
/// `p_p` models `p(x | y = +1)`, `p_bn` models `p(x | y = −1, s = +1)`.
/// When `p_s1` (a model of `p(x | s = +1)`, typically a KDE on the union of
/// observed samples) is present, σ̃ is evaluated as
/// `(π+ρ)·p_s1(x) / p_bias(x)` capped at 1; otherwise the algebraically
/// equivalent closed form `(π·p_P + ρ·p_bN) / p_bias` is used.
#[derive(Debug, Clone)]
pub struct SigmaField {
    pub p_p: DensityModel,
    pub p_bn: DensityModel,
    pub p_s1: Option<DensityModel>,
    pub params: ProblemParams,
    pub clip_floor: f64,
}

impl SigmaField {
    pub fn new(
        p_p: DensityModel,
        p_bn: DensityModel,
        p_s1: Option<DensityModel>,
        params: ProblemParams,
    ) -> Self {
        Self { p_p, p_bn, p_s1, params, clip_floor: DEFAULT_CLIP_FLOOR }
    }

    /// The skewed observation posterior σ̃(x), in `(0, 1]`.
    ///
    /// If the biased marginal underflows to exactly zero the point is
    /// degenerate and the clip floor is returned.
    pub fn sigma_tilde(&self, x: &[f64]) -> Result<SigmaValue> {
        let pi = self.params.pi;
        let rho = self.params.rho;
        let pp = self.p_p.pdf(x)?;
        let pbn = self.p_bn.pdf(x)?;
        let den = pi * pp + (1.0 - pi) * pbn;
        if den <= 0.0 {
            return Ok(SigmaValue { value: self.clip_floor, degenerate: true });
        }
        let num = match &self.p_s1 {
            Some(model) => (pi + rho) * model.pdf(x)?,
            None => pi * pp + rho * pbn,
        };
        Ok(SigmaValue { value: (num / den).min(1.0), degenerate: false })
    }

    /// The per-sample weight `(1 − t)/t` with `t = clamp(σ̃(x)^k, floor, 1)`.
    /// Bounded by `(1 − floor)/floor` (99 at the default floor).
    pub fn sigma_weight(&self, x: &[f64], k: f64) -> Result<f64> {
        if !(k.is_finite() && k > 0.0) {
            return Err(PbnError::InvalidParam(format!("exponent k must be positive, got {k}")));
        }
        let sigma = self.sigma_tilde(x)?.value;
        let t = sigma.powf(k).clamp(self.clip_floor, 1.0);
        Ok((1.0 - t) / t)
    }

    /// Weights for a whole sample list (the observed pool), in order.
    pub fn weights(&self, xs: &[Vec<f64>], k: f64) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.sigma_weight(x, k)).collect()
    }
}
