//! Selection of the posterior exponent `k` and estimation of the
//! false-negative-rate prior φ that drives it.
//!
//! The adjusted estimator needs one scalar hyperparameter: the exponent `k`
//! applied to the observation posterior. It is chosen from a small grid by
//! training one candidate per grid value and keeping the candidate whose
//! validation false-negative rate is closest (in squared error) to a prior
//! φ — either known, estimated from a held-out labeled split, or a perturbed
//! variant of the estimate for sensitivity analysis.

use crate::core::{PbnError, Result, Sample};
use crate::risk::pn_terms;
use crate::training::{evaluate_fnr, train_sgd, SgdConfig};
use crate::LinearClassifier;

/// Ascending grid of candidate exponents, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    candidates: Vec<f64>,
}

impl KGrid {
    pub fn new(candidates: Vec<f64>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(PbnError::EmptySet("exponent grid"));
        }
        if candidates.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(PbnError::InvalidParam("grid exponents must be finite and > 0".into()));
        }
        if candidates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PbnError::InvalidParam("grid exponents must be strictly ascending".into()));
        }
        Ok(Self { candidates })
    }

    /// Grid used for the synthetic experiments.
    pub fn synthetic() -> Self {
        Self { candidates: vec![0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 4.0] }
    }

    /// Denser near-1 grid used for the real-data benchmark.
    pub fn benchmark() -> Self {
        Self { candidates: vec![0.5, 0.7, 0.9, 1.0, 1.2, 1.5, 2.0] }
    }

    pub fn values(&self) -> &[f64] {
        &self.candidates
    }
}

impl Default for KGrid {
    fn default() -> Self {
        Self::synthetic()
    }
}

/// Where a φ value came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiSource {
    Given,
    Estimated,
    Perturbed(f64),
}

/// A false-negative-rate prior in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPrior {
    pub phi: f64,
    pub source: PhiSource,
}

impl PhiPrior {
    pub fn new(phi: f64, source: PhiSource) -> Result<Self> {
        if !(phi.is_finite() && (0.0..=1.0).contains(&phi)) {
            return Err(PbnError::InvalidParam(format!("phi must be in [0, 1], got {phi}")));
        }
        Ok(Self { phi, source })
    }

    pub fn given(phi: f64) -> Result<Self> {
        Self::new(phi, PhiSource::Given)
    }
}

/// Train one candidate per grid value via `train_fn` and return the
/// `(k, classifier)` whose validation false-negative rate minimizes
/// `(FNR − φ)²`. Ties break toward the smallest `k`. Candidates whose
/// training fails are skipped with a warning on stderr; if every candidate
/// fails, the last error is returned.
pub fn select_k<F>(
    grid: &KGrid,
    mut train_fn: F,
    valid_p: &[Sample],
    phi: &PhiPrior,
) -> Result<(f64, LinearClassifier)>
where
    F: FnMut(f64) -> Result<LinearClassifier>,
{
    if valid_p.is_empty() {
        return Err(PbnError::EmptySet("validation positives"));
    }
    let mut best: Option<(f64, f64, LinearClassifier)> = None;
    let mut last_err = None;
    for &k in grid.values() {
        let clf = match train_fn(k) {
            Ok(clf) => clf,
            Err(e) => {
                eprintln!("warning: candidate k = {k} failed to train, skipping: {e}");
                last_err = Some(e);
                continue;
            }
        };
        let err = (evaluate_fnr(&clf, valid_p)? - phi.phi).powi(2);
        // Strict improvement keeps the first (smallest) k on exact ties.
        if best.as_ref().is_none_or(|(e, _, _)| err < *e) {
            best = Some((err, k, clf));
        }
    }
    match best {
        Some((_, k, clf)) => Ok((k, clf)),
        None => Err(last_err
            .unwrap_or_else(|| PbnError::Experiment("no exponent candidates were trained".into()))),
    }
}

/// Estimate φ from a held-out labeled split: train an ordinary
/// positive-versus-negative classifier on it (class prior taken as the
/// split's positive fraction) and return its false-negative rate on the
/// split's own positives.
pub fn estimate_phi(fnr_dataset: &[Sample], config: &SgdConfig) -> Result<PhiPrior> {
    let x_p: Vec<Vec<f64>> =
        fnr_dataset.iter().filter(|s| s.y == 1).map(|s| s.x.clone()).collect();
    let x_n: Vec<Vec<f64>> =
        fnr_dataset.iter().filter(|s| s.y == -1).map(|s| s.x.clone()).collect();
    if x_p.is_empty() || x_n.is_empty() {
        return Err(PbnError::EmptySet("both classes in the rate-estimation split"));
    }
    let pi = x_p.len() as f64 / fnr_dataset.len() as f64;
    let dim = x_p[0].len();
    let clf = train_sgd(&pn_terms(&x_p, &x_n, pi)?, dim, config)?;
    let positives: Vec<Sample> = fnr_dataset.iter().filter(|s| s.y == 1).cloned().collect();
    PhiPrior::new(evaluate_fnr(&clf, &positives)?, PhiSource::Estimated)
}

/// Scale a prior by `c`, capping at 1.
pub fn perturb_phi(phi: &PhiPrior, c: f64) -> Result<PhiPrior> {
    if !(c.is_finite() && c > 0.0) {
        return Err(PbnError::InvalidParam(format!("perturbation factor must be > 0, got {c}")));
    }
    PhiPrior::new((c * phi.phi).min(1.0), PhiSource::Perturbed(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn positives_at(xs: &[f64]) -> Vec<Sample> {
        xs.iter().map(|&v| Sample::positive(vec![v])).collect()
    }

    #[test]
    fn grid_validation() {
        assert!(KGrid::new(vec![]).is_err());
        assert!(KGrid::new(vec![0.5, 0.5]).is_err());
        assert!(KGrid::new(vec![1.0, 0.5]).is_err());
        assert!(KGrid::new(vec![0.0, 1.0]).is_err());
        assert!(KGrid::new(vec![-1.0, 1.0]).is_err());
        assert!(KGrid::new(vec![0.3, 1.0, 4.0]).is_ok());
        assert_eq!(KGrid::synthetic().values().len(), 7);
        assert_eq!(KGrid::benchmark().values().len(), 7);
    }

    #[test]
    fn single_candidate_grid() {
        let grid = KGrid::new(vec![1.0]).unwrap();
        let valid = positives_at(&[1.0, 2.0]);
        let phi = PhiPrior::given(0.0).unwrap();
        let (k, _) = select_k(
            &grid,
            |_| Ok(LinearClassifier { a: vec![1.0], beta: 0.5 }),
            &valid,
            &phi,
        )
        .unwrap();
        assert_eq!(k, 1.0);
    }

    #[test]
    fn squared_error_comparison_picks_closer_fnr() {
        // Ten positives at 0.5, 1.5, ..., 9.5. Threshold at 1 misses one
        // (FNR 0.10); threshold at 3 misses three (FNR 0.30). With
        // phi = 0.12 the first candidate wins.
        let valid = positives_at(&(0..10).map(|i| i as f64 + 0.5).collect::<Vec<_>>());
        let grid = KGrid::new(vec![0.5, 2.0]).unwrap();
        let phi = PhiPrior::given(0.12).unwrap();
        let (k, clf) = select_k(
            &grid,
            |k| {
                Ok(LinearClassifier {
                    a: vec![1.0],
                    beta: if k == 0.5 { -1.0 } else { -3.0 },
                })
            },
            &valid,
            &phi,
        )
        .unwrap();
        assert_eq!(k, 0.5);
        assert_relative_eq!(evaluate_fnr(&clf, &valid).unwrap(), 0.10);
    }

    #[test]
    fn exact_match_has_zero_error_and_wins() {
        let valid = positives_at(&(0..10).map(|i| i as f64 + 0.5).collect::<Vec<_>>());
        let grid = KGrid::new(vec![0.5, 2.0]).unwrap();
        // phi exactly equals candidate 2.0's achieved FNR of 0.30.
        let phi = PhiPrior::given(0.30).unwrap();
        let (k, clf) = select_k(
            &grid,
            |k| {
                Ok(LinearClassifier {
                    a: vec![1.0],
                    beta: if k == 0.5 { -1.0 } else { -3.0 },
                })
            },
            &valid,
            &phi,
        )
        .unwrap();
        assert_eq!(k, 2.0);
        assert_relative_eq!(evaluate_fnr(&clf, &valid).unwrap(), phi.phi);
    }

    #[test]
    fn identical_fnr_ties_break_to_smaller_k() {
        let valid = positives_at(&[1.0, 2.0, 3.0]);
        let grid = KGrid::new(vec![0.5, 1.0, 2.0]).unwrap();
        let phi = PhiPrior::given(0.0).unwrap();
        let (k, _) = select_k(
            &grid,
            |_| Ok(LinearClassifier { a: vec![1.0], beta: 0.0 }),
            &valid,
            &phi,
        )
        .unwrap();
        assert_eq!(k, 0.5);
    }

    #[test]
    fn failed_candidates_are_skipped() {
        let valid = positives_at(&[1.0]);
        let grid = KGrid::new(vec![0.3, 1.0]).unwrap();
        let phi = PhiPrior::given(0.0).unwrap();
        let (k, _) = select_k(
            &grid,
            |k| {
                if k < 0.5 {
                    Err(PbnError::Diverged("blew up".into()))
                } else {
                    Ok(LinearClassifier { a: vec![1.0], beta: 0.0 })
                }
            },
            &valid,
            &phi,
        )
        .unwrap();
        assert_eq!(k, 1.0);
    }

    #[test]
    fn all_failures_is_error() {
        let valid = positives_at(&[1.0]);
        let grid = KGrid::new(vec![0.3, 1.0]).unwrap();
        let phi = PhiPrior::given(0.0).unwrap();
        let r = select_k(&grid, |_| Err(PbnError::Diverged("x".into())), &valid, &phi);
        assert!(matches!(r, Err(PbnError::Diverged(_))));
    }

    #[test]
    fn selected_k_is_grid_member() {
        let valid = positives_at(&[0.5, -0.5, 1.5]);
        let grid = KGrid::synthetic();
        let phi = PhiPrior::given(0.4).unwrap();
        let (k, _) = select_k(
            &grid,
            |k| Ok(LinearClassifier { a: vec![1.0], beta: -k }),
            &valid,
            &phi,
        )
        .unwrap();
        assert!(grid.values().contains(&k));
    }

    #[test]
    fn phi_estimation_separable_is_zero() {
        let mut data: Vec<Sample> = (0..20).map(|i| Sample::positive(vec![2.0 + i as f64])).collect();
        data.extend((0..20).map(|i| Sample::unobserved_negative(vec![-2.0 - i as f64])));
        let phi = estimate_phi(&data, &SgdConfig::default()).unwrap();
        assert_eq!(phi.phi, 0.0);
        assert_eq!(phi.source, PhiSource::Estimated);
    }

    #[test]
    fn phi_estimation_needs_both_classes() {
        let data: Vec<Sample> = (0..5).map(|i| Sample::positive(vec![i as f64])).collect();
        assert!(estimate_phi(&data, &SgdConfig::default()).is_err());
    }

    #[test]
    fn phi_estimation_is_deterministic() {
        let mut data: Vec<Sample> =
            (0..30).map(|i| Sample::positive(vec![0.2 * i as f64 - 1.0])).collect();
        data.extend((0..30).map(|i| Sample::unobserved_negative(vec![1.0 - 0.2 * i as f64])));
        let cfg = SgdConfig { epochs: 40, ..Default::default() };
        let p1 = estimate_phi(&data, &cfg).unwrap();
        let p2 = estimate_phi(&data, &cfg).unwrap();
        assert_eq!(p1.phi.to_bits(), p2.phi.to_bits());
        assert!((0.0..=1.0).contains(&p1.phi));
    }

    #[test]
    fn perturbation_scales_and_caps() {
        let phi = PhiPrior::given(0.10).unwrap();
        assert_relative_eq!(perturb_phi(&phi, 1.5).unwrap().phi, 0.15);
        assert_relative_eq!(perturb_phi(&phi, 0.5).unwrap().phi, 0.05);
        let high = PhiPrior::given(0.8).unwrap();
        let capped = perturb_phi(&high, 1.5).unwrap();
        assert_relative_eq!(capped.phi, 1.0);
        assert_eq!(capped.source, PhiSource::Perturbed(1.5));
        assert!(perturb_phi(&phi, 0.0).is_err());
        assert!(perturb_phi(&phi, -1.0).is_err());
    }
}
