//! Exact computations on fully enumerated discrete joint distributions.
//!
//! On a finite support every expectation is a plain sum, so the exact PN
//! risk, the exact observation posterior, and the exact reweighted risks can
//! be evaluated to machine precision with no estimation error. This gives a
//! ground truth to verify two algebraic identities the estimators rely on:
//!
//! * the PbN decomposition: with the true posterior and exponent `k = 1`,
//!   the reweighted observed-pool risk equals the PN risk;
//! * the positive-confidence rewrite: with the true class posterior, the
//!   positives-only reweighted risk equals the PN risk.
//!
//! No clipping or clamping is applied anywhere in this module; a posterior
//! of zero where a weight is required is reported as an error naming the
//! offending atom.

use crate::core::{LinearClassifier, PbnError, Result};
use crate::losses::logistic_loss;
use rand::Rng;

/// One atom of a discrete joint distribution over `(x, y, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    /// Index into the shared support of x values.
    pub x_idx: usize,
    pub y: i8,
    pub s: i8,
    pub p: f64,
}

/// A fully enumerated joint distribution over `(x, y, s)` with finite
/// support. Invariants checked at construction:
///
/// * probabilities are finite, nonnegative, and sum to 1 within 1e-12;
/// * labels are in {-1, +1} and no atom has `y = +1` with `s = -1`
///   (a true positive is never observed as a biased negative);
/// * every atom references a valid support point.
#[derive(Debug, Clone)]
pub struct DiscreteJoint {
    pub support: Vec<Vec<f64>>,
    pub atoms: Vec<Atom>,
}

impl DiscreteJoint {
    pub fn new(support: Vec<Vec<f64>>, atoms: Vec<Atom>) -> Result<Self> {
        if support.is_empty() || atoms.is_empty() {
            return Err(PbnError::EmptySet("discrete joint support"));
        }
        let dim = support[0].len();
        if support.iter().any(|x| x.len() != dim || x.iter().any(|v| !v.is_finite())) {
            return Err(PbnError::InvalidParam(
                "support points must be finite and share one dimension".into(),
            ));
        }
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if a.x_idx >= support.len() {
                return Err(PbnError::InvalidParam(format!(
                    "atom {i} references support index {} out of {}",
                    a.x_idx,
                    support.len()
                )));
            }
            if !(a.y == 1 || a.y == -1) || !(a.s == 1 || a.s == -1) {
                return Err(PbnError::InvalidParam(format!("atom {i} has labels outside {{-1,+1}}")));
            }
            if a.y == 1 && a.s == -1 {
                return Err(PbnError::InvalidParam(format!(
                    "atom {i} has y = +1 with s = -1"
                )));
            }
            if !a.p.is_finite() || a.p < 0.0 {
                return Err(PbnError::InvalidParam(format!("atom {i} has probability {}", a.p)));
            }
            total += a.p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(PbnError::InvalidParam(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { support, atoms })
    }

    /// Class prior `p(y = +1)`.
    pub fn pi(&self) -> f64 {
        self.atoms.iter().filter(|a| a.y == 1).map(|a| a.p).sum()
    }

    /// Contamination mass `p(y = -1, s = +1)`.
    pub fn rho(&self) -> f64 {
        self.atoms.iter().filter(|a| a.y == -1 && a.s == 1).map(|a| a.p).sum()
    }

    /// Marginal `p(x)` at a support index.
    pub fn marginal_x(&self, x_idx: usize) -> f64 {
        self.atoms.iter().filter(|a| a.x_idx == x_idx).map(|a| a.p).sum()
    }
}

/// Exact PN risk: `Σ_atoms p · ℓ(y · g(x))`.
pub fn exact_pn_risk(joint: &DiscreteJoint, clf: &LinearClassifier) -> Result<f64> {
    let mut total = 0.0;
    for a in &joint.atoms {
        let g = clf.margin(&joint.support[a.x_idx])?;
        total += a.p * logistic_loss(a.y as f64 * g);
    }
    Ok(total)
}

/// Exact observation posterior `σ(x) = p(s = +1 | x)` at a support index,
/// obtained by direct summation. Errors if the marginal at `x` is zero.
pub fn exact_sigma(joint: &DiscreteJoint, x_idx: usize) -> Result<f64> {
    let px = joint.marginal_x(x_idx);
    if px <= 0.0 {
        return Err(PbnError::DegenerateAtom(format!(
            "support point {x_idx} has zero marginal probability"
        )));
    }
    let ps1: f64 = joint.atoms.iter().filter(|a| a.x_idx == x_idx && a.s == 1).map(|a| a.p).sum();
    Ok(ps1 / px)
}

/// Exact class posterior `r(x) = p(y = +1 | x)` at a support index.
pub fn exact_class_posterior(joint: &DiscreteJoint, x_idx: usize) -> Result<f64> {
    let px = joint.marginal_x(x_idx);
    if px <= 0.0 {
        return Err(PbnError::DegenerateAtom(format!(
            "support point {x_idx} has zero marginal probability"
        )));
    }
    let py1: f64 = joint.atoms.iter().filter(|a| a.x_idx == x_idx && a.y == 1).map(|a| a.p).sum();
    Ok(py1 / px)
}

/// Exact reweighted observed-pool risk with posterior exponent `k`:
///
/// `Σ_{y=+1} p·ℓ(g) + Σ_{y=-1,s=+1} p·ℓ(-g) + Σ_{s=+1} p·w(x)·ℓ(-g)`
///
/// with `w(x) = (1 - σ(x)^k) / σ(x)^k` and no clipping. An observed atom at
/// a point where `σ(x) = 0` makes the weight undefined and is an error.
pub fn exact_pbn_risk(joint: &DiscreteJoint, clf: &LinearClassifier, k: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(PbnError::InvalidParam(format!("posterior exponent must be > 0, got {k}")));
    }
    let mut total = 0.0;
    for (i, a) in joint.atoms.iter().enumerate() {
        if a.p == 0.0 {
            continue;
        }
        let g = clf.margin(&joint.support[a.x_idx])?;
        if a.y == 1 {
            total += a.p * logistic_loss(g);
        } else if a.s == 1 {
            total += a.p * logistic_loss(-g);
        }
        if a.s == 1 {
            let sigma = exact_sigma(joint, a.x_idx)?;
            if sigma <= 0.0 {
                return Err(PbnError::DegenerateAtom(format!(
                    "atom {i} is observed at support point {} where sigma = 0",
                    a.x_idx
                )));
            }
            let t = sigma.powf(k);
            total += a.p * ((1.0 - t) / t) * logistic_loss(-g);
        }
    }
    Ok(total)
}

/// Exact positives-only reweighted risk with the true class posterior:
///
/// `Σ_{y=+1} p · [ ℓ(g) + ((1 - r(x)) / r(x)) · ℓ(-g) ]`.
pub fn exact_pconf_risk(joint: &DiscreteJoint, clf: &LinearClassifier) -> Result<f64> {
    let mut total = 0.0;
    for (i, a) in joint.atoms.iter().enumerate() {
        if a.y != 1 || a.p == 0.0 {
            continue;
        }
        let r = exact_class_posterior(joint, a.x_idx)?;
        if r <= 0.0 {
            return Err(PbnError::DegenerateAtom(format!(
                "atom {i} is positive at support point {} where r = 0",
                a.x_idx
            )));
        }
        let g = clf.margin(&joint.support[a.x_idx])?;
        total += a.p * (logistic_loss(g) + ((1.0 - r) / r) * logistic_loss(-g));
    }
    Ok(total)
}

/// Absolute gap between the reweighted observed-pool risk at `k = 1` and the
/// PN risk. With the exact posterior this is zero up to rounding.
pub fn verify_decomposition(joint: &DiscreteJoint, clf: &LinearClassifier) -> Result<f64> {
    let pbn = exact_pbn_risk(joint, clf, 1.0)?;
    let pn = exact_pn_risk(joint, clf)?;
    Ok((pbn - pn).abs())
}

/// Absolute gap between the positives-only reweighted risk and the PN risk.
/// With the exact class posterior this is zero up to rounding.
pub fn verify_pconf(joint: &DiscreteJoint, clf: &LinearClassifier) -> Result<f64> {
    let pconf = exact_pconf_risk(joint, clf)?;
    let pn = exact_pn_risk(joint, clf)?;
    Ok((pconf - pn).abs())
}

/// Draw a random joint with at most `max_support` support points in
/// `dim` dimensions. Every support point carries positive mass on
/// `(y = +1, s = +1)`, so both posteriors are strictly positive everywhere;
/// the `(y = -1, s = +1)` and `(y = -1, s = -1)` atoms are present with
/// random (occasionally zero) mass.
pub fn random_joint<R: Rng>(rng: &mut R, max_support: usize, dim: usize) -> Result<DiscreteJoint> {
    let n_x = rng.random_range(1..=max_support.max(1));
    let mut support = Vec::with_capacity(n_x);
    let mut raw: Vec<Atom> = Vec::new();
    for i in 0..n_x {
        support.push((0..dim).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect());
        let p1 = 0.05 + 0.95 * rng.random::<f64>();
        raw.push(Atom { x_idx: i, y: 1, s: 1, p: p1 });
        if rng.random::<f64>() < 0.85 {
            raw.push(Atom { x_idx: i, y: -1, s: 1, p: rng.random::<f64>() });
        }
        if rng.random::<f64>() < 0.85 {
            raw.push(Atom { x_idx: i, y: -1, s: -1, p: rng.random::<f64>() });
        }
    }
    let total: f64 = raw.iter().map(|a| a.p).sum();
    let mut atoms: Vec<Atom> =
        raw.into_iter().map(|a| Atom { p: a.p / total, ..a }).collect();
    // Absorb residual rounding into the largest atom so the sum is exactly
    // within the construction tolerance.
    let drift: f64 = 1.0 - atoms.iter().map(|a| a.p).sum::<f64>();
    if let Some(biggest) =
        atoms.iter_mut().max_by(|a, b| a.p.partial_cmp(&b.p).expect("finite probabilities"))
    {
        biggest.p += drift;
    }
    DiscreteJoint::new(support, atoms)
}

/// Draw a random linear classifier with coefficients in `[-2, 2]`.
pub fn random_classifier<R: Rng>(rng: &mut R, dim: usize) -> LinearClassifier {
    LinearClassifier {
        a: (0..dim).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect(),
        beta: rng.random::<f64>() * 4.0 - 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::ProblemParams;
    use crate::risk::{pbn_terms, pconf_terms, pn_terms, risk_value};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    /// Two support points, all three atom kinds at each, hand-normalized.
    fn two_point_joint() -> DiscreteJoint {
        DiscreteJoint::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.5]],
            vec![
                Atom { x_idx: 0, y: 1, s: 1, p: 0.30 },
                Atom { x_idx: 0, y: -1, s: 1, p: 0.10 },
                Atom { x_idx: 0, y: -1, s: -1, p: 0.10 },
                Atom { x_idx: 1, y: 1, s: 1, p: 0.20 },
                Atom { x_idx: 1, y: -1, s: 1, p: 0.05 },
                Atom { x_idx: 1, y: -1, s: -1, p: 0.25 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn joint_rejects_bad_inputs() {
        let sup = vec![vec![0.0]];
        // Sum != 1.
        assert!(DiscreteJoint::new(
            sup.clone(),
            vec![Atom { x_idx: 0, y: 1, s: 1, p: 0.5 }]
        )
        .is_err());
        // Forbidden (y = +1, s = -1).
        assert!(DiscreteJoint::new(
            sup.clone(),
            vec![Atom { x_idx: 0, y: 1, s: -1, p: 1.0 }]
        )
        .is_err());
        // Out-of-range support index.
        assert!(DiscreteJoint::new(
            sup.clone(),
            vec![Atom { x_idx: 1, y: 1, s: 1, p: 1.0 }]
        )
        .is_err());
        // Negative probability.
        assert!(DiscreteJoint::new(
            sup,
            vec![
                Atom { x_idx: 0, y: 1, s: 1, p: 1.5 },
                Atom { x_idx: 0, y: -1, s: 1, p: -0.5 }
            ]
        )
        .is_err());
    }

    #[test]
    fn priors_and_marginals() {
        let j = two_point_joint();
        assert_relative_eq!(j.pi(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(j.rho(), 0.15, epsilon = 1e-15);
        assert_relative_eq!(j.marginal_x(0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(j.marginal_x(1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn sigma_and_class_posterior_by_summation() {
        let j = two_point_joint();
        // At x0: p(s=+1) = 0.4 of 0.5; at x1: 0.25 of 0.5.
        assert_relative_eq!(exact_sigma(&j, 0).unwrap(), 0.8, epsilon = 1e-15);
        assert_relative_eq!(exact_sigma(&j, 1).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(exact_class_posterior(&j, 0).unwrap(), 0.6, epsilon = 1e-15);
        assert_relative_eq!(exact_class_posterior(&j, 1).unwrap(), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn pn_risk_zero_classifier_is_log2() {
        let j = two_point_joint();
        let clf = LinearClassifier::zeros(2);
        assert_relative_eq!(exact_pn_risk(&j, &clf).unwrap(), LN_2, epsilon = 1e-15);
    }

    #[test]
    fn pbn_risk_hand_computed() {
        // Single support point keeps every sum one line long.
        let j = DiscreteJoint::new(
            vec![vec![2.0]],
            vec![
                Atom { x_idx: 0, y: 1, s: 1, p: 0.5 },
                Atom { x_idx: 0, y: -1, s: 1, p: 0.25 },
                Atom { x_idx: 0, y: -1, s: -1, p: 0.25 },
            ],
        )
        .unwrap();
        let clf = LinearClassifier { a: vec![1.0], beta: 0.0 };
        let g = 2.0;
        let sigma = 0.75_f64;
        for k in [1.0, 2.0, 0.5] {
            let t = sigma.powf(k);
            let w = (1.0 - t) / t;
            let expected = 0.5 * logistic_loss(g)
                + 0.25 * logistic_loss(-g)
                + 0.75 * w * logistic_loss(-g);
            assert_relative_eq!(exact_pbn_risk(&j, &clf, k).unwrap(), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn decomposition_identity_holds_at_k_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let j = random_joint(&mut rng, 5, 2).unwrap();
            for _ in 0..10 {
                let clf = random_classifier(&mut rng, 2);
                assert!(verify_decomposition(&j, &clf).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn decomposition_gap_nonzero_off_k_one() {
        let j = two_point_joint();
        let clf = LinearClassifier { a: vec![1.0, -0.5], beta: 0.2 };
        let off = (exact_pbn_risk(&j, &clf, 2.0).unwrap() - exact_pn_risk(&j, &clf).unwrap()).abs();
        assert!(off > 1e-3, "k != 1 should break the identity, gap = {off}");
    }

    #[test]
    fn pconf_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let j = random_joint(&mut rng, 5, 3).unwrap();
            let clf = random_classifier(&mut rng, 3);
            assert!(verify_pconf(&j, &clf).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn sigma_zero_observed_atom_is_error() {
        // Zero-probability observed atoms are skipped; a positive-mass
        // observed atom always has sigma > 0, so force the error through a
        // zero marginal instead.
        let j = two_point_joint();
        assert!(exact_sigma(&j, 0).is_ok());
        let bad = DiscreteJoint::new(
            vec![vec![0.0], vec![9.0]],
            vec![
                Atom { x_idx: 0, y: 1, s: 1, p: 1.0 },
                Atom { x_idx: 1, y: -1, s: 1, p: 0.0 },
            ],
        )
        .unwrap();
        // The zero-mass observed atom sits at a zero-marginal point; the
        // risk must skip it rather than divide by zero.
        let clf = LinearClassifier { a: vec![1.0], beta: 0.0 };
        assert!(exact_pbn_risk(&bad, &clf, 1.0).unwrap().is_finite());
        // Direct sigma query at the empty point errors.
        assert!(exact_sigma(&bad, 1).is_err());
    }

    #[test]
    fn empirical_estimators_match_oracle_on_enumerated_support() {
        // Build an empirical dataset whose per-sample frequencies reproduce
        // the atom probabilities exactly, then check the estimator arithmetic
        // against the exact sums to machine precision.
        let j = DiscreteJoint::new(
            vec![vec![0.5, -1.0], vec![1.5, 2.0]],
            vec![
                Atom { x_idx: 0, y: 1, s: 1, p: 0.25 },
                Atom { x_idx: 0, y: -1, s: 1, p: 0.125 },
                Atom { x_idx: 1, y: 1, s: 1, p: 0.25 },
                Atom { x_idx: 1, y: -1, s: -1, p: 0.375 },
            ],
        )
        .unwrap();
        let pi = j.pi();
        let rho = j.rho();
        assert_relative_eq!(pi, 0.5, epsilon = 1e-15);
        assert_relative_eq!(rho, 0.125, epsilon = 1e-15);

        // Counts out of 8 draws: 2 P at x0, 2 P at x1, 1 bN at x0, 3 N at x1.
        let x0 = j.support[0].clone();
        let x1 = j.support[1].clone();
        let x_p = vec![x0.clone(), x0.clone(), x1.clone(), x1.clone()];
        let x_bn = vec![x0.clone()];
        let x_n_all = vec![x0.clone(), x1.clone(), x1.clone(), x1.clone()];

        let clf = LinearClassifier { a: vec![0.8, -0.3], beta: 0.1 };

        // PN: empirical negatives pool frequencies match p(x | y = -1).
        let emp_pn = risk_value(&pn_terms(&x_p, &x_n_all, pi).unwrap(), &clf).unwrap();
        assert_relative_eq!(emp_pn, exact_pn_risk(&j, &clf).unwrap(), epsilon = 1e-12);

        // Positive-confidence: per-sample r from the exact class posterior.
        let r0 = exact_class_posterior(&j, 0).unwrap();
        let r1 = exact_class_posterior(&j, 1).unwrap();
        let conf = vec![r0, r0, r1, r1];
        let emp_pc = risk_value(&pconf_terms(&x_p, &conf, pi).unwrap(), &clf).unwrap();
        assert_relative_eq!(emp_pc, exact_pconf_risk(&j, &clf).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn empirical_pbn_matches_oracle_at_unit_weights() {
        // When the observation posterior is exactly 1/2 at every support
        // point, the k = 1 correction weight is 1 everywhere, and the
        // margin-scaled empirical correction term coincides with the exact
        // expectation form — so the empirical PbN estimator must reproduce
        // exact_pbn_risk, which in turn equals exact_pn_risk by the
        // decomposition identity.
        let j = DiscreteJoint::new(
            vec![vec![0.5, -1.0], vec![1.5, 2.0]],
            vec![
                Atom { x_idx: 0, y: 1, s: 1, p: 0.20 },
                Atom { x_idx: 0, y: -1, s: 1, p: 0.15 },
                Atom { x_idx: 0, y: -1, s: -1, p: 0.35 },
                Atom { x_idx: 1, y: 1, s: 1, p: 0.10 },
                Atom { x_idx: 1, y: -1, s: 1, p: 0.05 },
                Atom { x_idx: 1, y: -1, s: -1, p: 0.15 },
            ],
        )
        .unwrap();
        assert_relative_eq!(exact_sigma(&j, 0).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(exact_sigma(&j, 1).unwrap(), 0.5, epsilon = 1e-15);
        let pi = j.pi();
        let rho = j.rho();
        assert_relative_eq!(pi, 0.3, epsilon = 1e-15);
        assert_relative_eq!(rho, 0.2, epsilon = 1e-15);

        // Counts out of 20 draws: P = 4·x0 + 2·x1, bN = 3·x0 + 1·x1,
        // consistent with rho = pi·n_bN/n_P = 0.2.
        let x0 = j.support[0].clone();
        let x1 = j.support[1].clone();
        let x_p = vec![x0.clone(), x0.clone(), x0.clone(), x0.clone(), x1.clone(), x1.clone()];
        let x_bn = vec![x0.clone(), x0.clone(), x0.clone(), x1.clone()];
        let weights = vec![1.0; x_p.len() + x_bn.len()];
        let params = ProblemParams::new(pi, rho).unwrap();
        let clf = LinearClassifier { a: vec![0.8, -0.3], beta: 0.1 };
        let emp = risk_value(&pbn_terms(&x_p, &x_bn, &weights, params).unwrap(), &clf).unwrap();
        let exact = exact_pbn_risk(&j, &clf, 1.0).unwrap();
        assert_relative_eq!(emp, exact, epsilon = 1e-12);
        assert_relative_eq!(emp, exact_pn_risk(&j, &clf).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn random_joint_satisfies_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let j = random_joint(&mut rng, 5, 2).unwrap();
            assert!(j.support.len() <= 5 && !j.support.is_empty());
            let total: f64 = j.atoms.iter().map(|a| a.p).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
            for idx in 0..j.support.len() {
                assert!(exact_sigma(&j, idx).unwrap() > 0.0);
                assert!(exact_class_posterior(&j, idx).unwrap() > 0.0);
            }
        }
    }
}
