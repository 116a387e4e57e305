//! Seeded synthetic data generation: isotropic Gaussian positives against a
//! four-component Gaussian-mixture negative class, with the observed
//! negatives drawn from a biased subset of the mixture.
//!
//! Two overlap regimes place the negative component means nearer to or
//! farther from the positive mean at the origin; two bias modes draw the
//! observed negatives either from a single component or from all four with
//! unequal probabilities. All splits derive independent sub-seeds from one
//! root seed, so a generated situation is a pure function of its spec and
//! seed.

use crate::core::{derive_seed, PbnError, PbnSplits, ProblemParams, Result, Sample};
use crate::density::{DensityModel, MixtureDensity};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::Write;

/// How far the negative mixture components sit from the positive mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overlap {
    /// Component means [1,1] .. [2.5,2.5]: heavy class overlap.
    Large,
    /// Component means [2,2] .. [5,5]: light class overlap.
    Small,
}

/// Which negative components the observed negatives come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasMode {
    /// All observed negatives from one component (1-based index in 1..=4).
    SingleComponent(usize),
    /// Component of each observed negative drawn with these probabilities.
    Proportional([f64; 4]),
}

/// Per-split sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub n_train_p: usize,
    pub n_train_bn: usize,
    pub n_valid_p: usize,
    pub n_test_p: usize,
    pub n_test_n: usize,
    pub n_fnr_p: usize,
    pub n_fnr_n: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            n_train_p: 500,
            n_train_bn: 100,
            n_valid_p: 500,
            n_test_p: 500,
            n_test_n: 500,
            n_fnr_p: 500,
            n_fnr_n: 500,
        }
    }
}

/// Full specification of one synthetic condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SituationSpec {
    pub overlap: Overlap,
    pub bias: BiasMode,
    pub sizes: SplitSizes,
}

impl SituationSpec {
    pub fn new(overlap: Overlap, bias: BiasMode) -> Result<Self> {
        let spec = Self { overlap, bias, sizes: SplitSizes::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.bias {
            BiasMode::SingleComponent(j) => {
                if !(1..=4).contains(&j) {
                    return Err(PbnError::InvalidParam(format!(
                        "component index must be in 1..=4, got {j}"
                    )));
                }
            }
            BiasMode::Proportional(p) => {
                if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(PbnError::InvalidParam(
                        "component probabilities must be finite and >= 0".into(),
                    ));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(PbnError::InvalidParam(format!(
                        "component probabilities sum to {total}, expected 1"
                    )));
                }
            }
        }
        let s = &self.sizes;
        if [s.n_train_p, s.n_train_bn, s.n_valid_p, s.n_test_p, s.n_test_n, s.n_fnr_p, s.n_fnr_n]
            .contains(&0)
        {
            return Err(PbnError::InvalidParam("all split sizes must be > 0".into()));
        }
        Ok(())
    }
}

/// Everything `make_situation` produces: the data splits, the problem
/// parameters, and the analytic densities of the positive class and the
/// observed-negative class that generated them.
#[derive(Debug, Clone)]
pub struct GeneratedSituation {
    pub splits: PbnSplits,
    pub params: ProblemParams,
    pub p_p: MixtureDensity,
    pub p_bn: MixtureDensity,
}

/// The four negative component means for an overlap regime.
pub fn negative_means(overlap: Overlap) -> Vec<Vec<f64>> {
    let diag = |v: f64| vec![v, v];
    match overlap {
        Overlap::Large => vec![diag(1.0), diag(1.5), diag(2.0), diag(2.5)],
        Overlap::Small => vec![diag(2.0), diag(3.0), diag(4.0), diag(5.0)],
    }
}

fn standard_normal_vec(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn shifted_normal(mean: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    standard_normal_vec(mean.len(), rng)
        .into_iter()
        .zip(mean)
        .map(|(z, m)| z + m)
        .collect()
}

/// Draw `n` feature vectors from the mixture over `means` with component
/// probabilities `probs`, returning `(component, x)` pairs.
fn sample_mixture(
    n: usize,
    means: &[Vec<f64>],
    probs: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, Vec<f64>)> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = probs.len() - 1;
        for (j, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                comp = j;
                break;
            }
        }
        out.push((comp, shifted_normal(&means[comp], rng)));
    }
    out
}

/// `n` positives from the standard normal at the origin.
pub fn sample_positive(n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Sample::positive(standard_normal_vec(2, &mut rng))).collect()
}

/// `n` unobserved negatives from the uniform mixture over all four
/// components.
pub fn sample_negative(n: usize, means: &[Vec<f64>], seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_mixture(n, means, &[0.25; 4], &mut rng)
        .into_iter()
        .map(|(_, x)| Sample::unobserved_negative(x))
        .collect()
}

/// `n` observed (biased) negatives drawn per the bias mode.
pub fn sample_biased_negative(
    n: usize,
    means: &[Vec<f64>],
    bias: BiasMode,
    seed: u64,
) -> Result<Vec<Sample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<f64>> = match bias {
        BiasMode::SingleComponent(j) => {
            if !(1..=4).contains(&j) {
                return Err(PbnError::InvalidParam(format!(
                    "component index must be in 1..=4, got {j}"
                )));
            }
            (0..n).map(|_| shifted_normal(&means[j - 1], &mut rng)).collect()
        }
        BiasMode::Proportional(p) => {
            sample_mixture(n, means, &p, &mut rng).into_iter().map(|(_, x)| x).collect()
        }
    };
    Ok(xs.into_iter().map(Sample::biased_negative).collect())
}

/// The density of the observed-negative class implied by a bias mode.
fn biased_density(means: &[Vec<f64>], bias: BiasMode) -> Result<MixtureDensity> {
    match bias {
        BiasMode::SingleComponent(j) => Ok(MixtureDensity::single(means[j - 1].clone())),
        BiasMode::Proportional(p) => MixtureDensity::isotropic(means, &p),
    }
}

// Stream tags for per-split seed derivation.
const STREAM_TRAIN_P: u64 = 0;
const STREAM_TRAIN_BN: u64 = 1;
const STREAM_VALID_P: u64 = 2;
const STREAM_TEST_P: u64 = 3;
const STREAM_TEST_N: u64 = 4;
const STREAM_FNR_P: u64 = 5;
const STREAM_FNR_N: u64 = 6;

/// Generate all splits of a synthetic condition from one root seed, along
/// with the problem parameters (π = 0.5 from the balanced test protocol,
/// ρ = π · n_bN / n_P so the risk coefficients match the observed sample
/// ratio) and the generator's analytic densities.
pub fn make_situation(spec: &SituationSpec, seed: u64) -> Result<GeneratedSituation> {
    spec.validate()?;
    let means = negative_means(spec.overlap);
    let s = &spec.sizes;

    let train_p = sample_positive(s.n_train_p, derive_seed(seed, STREAM_TRAIN_P));
    let train_bn = sample_biased_negative(
        s.n_train_bn,
        &means,
        spec.bias,
        derive_seed(seed, STREAM_TRAIN_BN),
    )?;
    let valid_p = sample_positive(s.n_valid_p, derive_seed(seed, STREAM_VALID_P));
    let mut test = sample_positive(s.n_test_p, derive_seed(seed, STREAM_TEST_P));
    test.extend(sample_negative(s.n_test_n, &means, derive_seed(seed, STREAM_TEST_N)));
    let mut fnr_est = sample_positive(s.n_fnr_p, derive_seed(seed, STREAM_FNR_P));
    fnr_est.extend(sample_negative(s.n_fnr_n, &means, derive_seed(seed, STREAM_FNR_N)));

    let pi = 0.5;
    let rho = pi * s.n_train_bn as f64 / s.n_train_p as f64;
    Ok(GeneratedSituation {
        splits: PbnSplits { train_p, train_bn, valid_p, test, fnr_est },
        params: ProblemParams::new(pi, rho)?,
        p_p: MixtureDensity::single(vec![0.0, 0.0]),
        p_bn: biased_density(&means, spec.bias)?,
    })
}

impl GeneratedSituation {
    /// The analytic observation-posterior field for this condition.
    pub fn sigma_field(&self) -> crate::density::SigmaField {
        crate::density::SigmaField::new(
            DensityModel::Mixture(self.p_p.clone()),
            DensityModel::Mixture(self.p_bn.clone()),
            None,
            self.params,
        )
    }
}

/// Write samples as delimited text, one row per sample: features, then `y`,
/// then `s`, comma-separated — a stable interchange format for
/// cross-implementation comparison.
pub fn dump_samples<W: Write>(w: &mut W, samples: &[Sample]) -> Result<()> {
    for sample in samples {
        for v in &sample.x {
            write!(w, "{v},")?;
        }
        writeln!(w, "{},{}", sample.y, sample.s)?;
    }
    Ok(())
}
