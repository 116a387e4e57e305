//! Shared domain types: samples, dataset splits, problem parameters, and the
//! linear classifier.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum PbnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty sample set: {0}")]
    EmptySet(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("optimization diverged: {0}")]
    Diverged(String),
    #[error("degenerate joint atom: {0}")]
    DegenerateAtom(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PbnError>;

/// A labeled sample: feature vector `x`, class label `y ∈ {+1, −1}`, and
/// observation flag `s ∈ {+1, −1}`. Positives are always observed, so any
/// sample with `y = +1` carries `s = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: i8,
    pub s: i8,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: i8, s: i8) -> Result<Self> {
        if !matches!(y, 1 | -1) || !matches!(s, 1 | -1) {
            return Err(PbnError::InvalidParam(format!(
                "label y and flag s must be +1 or -1, got y={y}, s={s}"
            )));
        }
        if y == 1 && s == -1 {
            return Err(PbnError::InvalidParam(
                "positive samples are always observed (y=+1 requires s=+1)".into(),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(PbnError::NonFinite("sample features"));
        }
        Ok(Self { x, y, s })
    }

    /// An observed positive (y = +1, s = +1).
    pub fn positive(x: Vec<f64>) -> Self {
        Self { x, y: 1, s: 1 }
    }

    /// An observed (biased) negative (y = −1, s = +1).
    pub fn biased_negative(x: Vec<f64>) -> Self {
        Self { x, y: -1, s: 1 }
    }

    /// An unobserved negative (y = −1, s = −1), as found in test splits.
    pub fn unobserved_negative(x: Vec<f64>) -> Self {
        Self { x, y: -1, s: -1 }
    }
}

/// Class prior `π = p(y = +1)` and the joint observation probability
/// `ρ = p(y = −1, s = +1)` of the biased negatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub pi: f64,
    pub rho: f64,
}

impl ProblemParams {
    pub fn new(pi: f64, rho: f64) -> Result<Self> {
        if !(pi.is_finite() && 0.0 < pi && pi < 1.0) {
            return Err(PbnError::InvalidParam(format!("pi must be in (0,1), got {pi}")));
        }
        if !(rho.is_finite() && 0.0 < rho && rho <= 1.0 - pi) {
            return Err(PbnError::InvalidParam(format!(
                "rho must be in (0, 1-pi] = (0, {}], got {rho}",
                1.0 - pi
            )));
        }
        Ok(Self { pi, rho })
    }
}

/// Dataset splits for one PbN problem instance.
///
/// The observed pool is exactly `train_p ∪ train_bn`. `test` and `fnr_est`
/// contain both classes; `valid_p` contains positives only and is reserved
/// for hyperparameter selection.
#[derive(Debug, Clone)]
pub struct PbnSplits {
    pub train_p: Vec<Sample>,
    pub train_bn: Vec<Sample>,
    pub valid_p: Vec<Sample>,
    pub test: Vec<Sample>,
    pub fnr_est: Vec<Sample>,
}

impl PbnSplits {
    /// Feature dimension, taken from the first training positive.
    pub fn dim(&self) -> usize {
        self.train_p.first().map_or(0, |s| s.x.len())
    }

    /// Feature matrix of a sample list.
    pub fn features(samples: &[Sample]) -> Vec<Vec<f64>> {
        samples.iter().map(|s| s.x.clone()).collect()
    }
}

/// Linear model `g(x) = aᵀx + β`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub a: Vec<f64>,
    pub beta: f64,
}

impl LinearClassifier {
    pub fn zeros(dim: usize) -> Self {
        Self { a: vec![0.0; dim], beta: 0.0 }
    }

    /// The margin `g(x) = aᵀx + β`.
    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.a.len() {
            return Err(PbnError::DimensionMismatch { expected: self.a.len(), got: x.len() });
        }
        Ok(self.a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + self.beta)
    }

    /// Margin without the dimension check, for hot loops over validated data.
    #[inline]
    pub(crate) fn margin_unchecked(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.a.len());
        self.a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + self.beta
    }

    /// Predicted label: +1 on nonnegative margin, −1 otherwise. The
    /// zero-margin tie resolves to +1 (deterministic convention; the 0-1
    /// *loss* treats a zero margin as 1/2 instead, see [`crate::losses`]).
    pub fn classify(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.margin(x)? >= 0.0 { 1 } else { -1 })
    }

    pub fn is_finite(&self) -> bool {
        self.beta.is_finite() && self.a.iter().all(|v| v.is_finite())
    }
}

/// Derive an independent stream seed from a base seed. Distinct streams
/// give decorrelated generator states (SplitMix64 finalizer), so the splits,
/// trials, and methods of an experiment can each be seeded reproducibly from
/// one root seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fraction of samples whose predicted label equals `y`.
pub fn accuracy(clf: &LinearClassifier, samples: &[Sample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(PbnError::EmptySet("accuracy over empty sample list"));
    }
    let mut correct = 0usize;
    for s in samples {
        if clf.classify(&s.x)? == s.y {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_zero_params() {
        let clf = LinearClassifier::zeros(2);
        assert_eq!(clf.margin(&[3.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn margin_hand_arithmetic() {
        let clf = LinearClassifier { a: vec![1.0, 2.0], beta: -1.0 };
        assert_eq!(clf.margin(&[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn margin_symmetry_cancellation() {
        let clf = LinearClassifier { a: vec![0.5, -0.5], beta: 0.0 };
        assert_eq!(clf.margin(&[2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn margin_dimension_mismatch() {
        let clf = LinearClassifier::zeros(2);
        assert!(matches!(
            clf.margin(&[1.0]),
            Err(PbnError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn classify_signs_and_tie() {
        let clf = LinearClassifier { a: vec![1.0], beta: 0.0 };
        assert_eq!(clf.classify(&[2.0]).unwrap(), 1);
        assert_eq!(clf.classify(&[-0.1]).unwrap(), -1);
        assert_eq!(clf.classify(&[0.0]).unwrap(), 1); // tie rule
    }

    #[test]
    fn accuracy_counts() {
        let clf = LinearClassifier { a: vec![1.0], beta: 0.0 };
        let mk = |v: f64, y: i8| Sample::new(vec![v], y, if y == 1 { 1 } else { -1 }).unwrap();
        let all_right = vec![mk(1.0, 1), mk(2.0, 1), mk(-1.0, -1)];
        assert_eq!(accuracy(&clf, &all_right).unwrap(), 1.0);
        let all_wrong = vec![mk(-1.0, 1), mk(1.0, -1)];
        assert_eq!(accuracy(&clf, &all_wrong).unwrap(), 0.0);
        let three_of_four = vec![mk(1.0, 1), mk(2.0, 1), mk(-1.0, -1), mk(3.0, -1)];
        assert_eq!(accuracy(&clf, &three_of_four).unwrap(), 0.75);
    }

    #[test]
    fn accuracy_flip_complement() {
        // accuracy(clf) + accuracy(flipped clf) = 1 when no margin is zero.
        let clf = LinearClassifier { a: vec![0.7, -0.3], beta: 0.2 };
        let flipped = LinearClassifier { a: vec![-0.7, 0.3], beta: -0.2 };
        let samples: Vec<Sample> = (0..20)
            .map(|i| {
                let x = vec![i as f64 * 0.37 + 0.1, (i % 5) as f64 - 2.0];
                let y = if i % 3 == 0 { 1 } else { -1 };
                Sample::new(x, y, if y == 1 { 1 } else { -1 }).unwrap()
            })
            .collect();
        let a1 = accuracy(&clf, &samples).unwrap();
        let a2 = accuracy(&flipped, &samples).unwrap();
        assert!((a1 + a2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_scale_invariant() {
        let clf = LinearClassifier { a: vec![0.4, -1.1], beta: 0.3 };
        let scaled = LinearClassifier { a: vec![0.4 * 7.5, -1.1 * 7.5], beta: 0.3 * 7.5 };
        for i in 0..50 {
            let x = vec![(i as f64).sin() * 3.0, (i as f64).cos() * 2.0];
            if clf.margin(&x).unwrap() != 0.0 {
                assert_eq!(clf.classify(&x).unwrap(), scaled.classify(&x).unwrap());
            }
        }
    }

    #[test]
    fn sample_invariants() {
        assert!(Sample::new(vec![0.0], 1, -1).is_err()); // positive must be observed
        assert!(Sample::new(vec![0.0], 2, 1).is_err());
        assert!(Sample::new(vec![f64::NAN], 1, 1).is_err());
        assert!(Sample::new(vec![0.0], -1, -1).is_ok());
    }

    #[test]
    fn params_invariants() {
        assert!(ProblemParams::new(0.5, 0.1).is_ok());
        assert!(ProblemParams::new(0.5, 0.5).is_ok()); // rho = 1 - pi allowed
        assert!(ProblemParams::new(0.5, 0.6).is_err());
        assert!(ProblemParams::new(0.0, 0.1).is_err());
        assert!(ProblemParams::new(1.0, 0.1).is_err());
        assert!(ProblemParams::new(0.5, 0.0).is_err());
    }
}
