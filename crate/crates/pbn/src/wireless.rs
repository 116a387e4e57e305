//! Loader and split builder for the UCI Wireless Indoor Localization
//! dataset: 2000 rows of 7 received-signal-strength readings plus a room
//! label in 1..=4 (500 rows per room).
//!
//! Room 2 becomes the positive class and the other rooms the negative class.
//! The observed-negative pool is drawn from one designated room (or from all
//! negative rooms at random), which realizes the biased-negative sampling
//! scheme on real data. Features are standardized using statistics from the
//! training positives and observed negatives only.

use crate::core::{derive_seed, PbnError, PbnSplits, ProblemParams, Result, Sample};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

pub const N_SIGNALS: usize = 7;

/// One parsed dataset row.
#[derive(Debug, Clone, PartialEq)]
pub struct WirelessRecord {
    pub signals: [f64; N_SIGNALS],
    pub room: u8,
}

/// A binarized record: room 2 is positive, rooms 1/3/4 negative. The room is
/// kept as metadata so the observed-negative pool can be drawn per room.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub x: Vec<f64>,
    pub y: i8,
    pub room: u8,
}

/// Which rooms supply the observed negatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WirelessBias {
    Room1Only,
    Room3Only,
    Room4Only,
    /// Uniformly from all negative rooms.
    Random,
}

impl WirelessBias {
    fn room(&self) -> Option<u8> {
        match self {
            WirelessBias::Room1Only => Some(1),
            WirelessBias::Room3Only => Some(3),
            WirelessBias::Room4Only => Some(4),
            WirelessBias::Random => None,
        }
    }
}

/// Per-split sample counts for the benchmark protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkSizes {
    pub n_train_p: usize,
    pub n_train_bn: usize,
    pub n_valid_p: usize,
    pub n_test_p: usize,
    pub n_test_n: usize,
    pub n_fnr_p: usize,
    pub n_fnr_n: usize,
}

impl Default for BenchmarkSizes {
    fn default() -> Self {
        Self {
            n_train_p: 200,
            n_train_bn: 100,
            n_valid_p: 100,
            n_test_p: 100,
            n_test_n: 300,
            n_fnr_p: 100,
            n_fnr_n: 300,
        }
    }
}

/// Full specification of one benchmark condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkSpec {
    pub bias: WirelessBias,
    pub sizes: BenchmarkSizes,
}

impl BenchmarkSpec {
    pub fn new(bias: WirelessBias) -> Self {
        Self { bias, sizes: BenchmarkSizes::default() }
    }
}

/// The output of [`make_benchmark_split`]: the data splits, the problem
/// parameters, and the room of each observed negative (for audits).
#[derive(Debug, Clone)]
pub struct BenchmarkData {
    pub splits: PbnSplits,
    pub params: ProblemParams,
    pub bn_rooms: Vec<u8>,
}

/// Parse the dataset from a whitespace/tab-delimited file of 8 fields per
/// row: 7 numeric signal strengths and a room in 1..=4. Malformed rows are
/// rejected with their 1-based line number.
pub fn parse_wireless(path: &Path) -> Result<Vec<WirelessRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != N_SIGNALS + 1 {
            return Err(PbnError::Parse {
                line: line_no,
                msg: format!("expected {} fields, found {}", N_SIGNALS + 1, fields.len()),
            });
        }
        let mut signals = [0.0; N_SIGNALS];
        for (j, f) in fields[..N_SIGNALS].iter().enumerate() {
            signals[j] = f.parse::<f64>().map_err(|_| PbnError::Parse {
                line: line_no,
                msg: format!("non-numeric signal field {:?}", f),
            })?;
            if !signals[j].is_finite() {
                return Err(PbnError::Parse {
                    line: line_no,
                    msg: format!("non-finite signal field {:?}", f),
                });
            }
        }
        let room: i64 = fields[N_SIGNALS].parse().map_err(|_| PbnError::Parse {
            line: line_no,
            msg: format!("non-numeric room field {:?}", fields[N_SIGNALS]),
        })?;
        if !(1..=4).contains(&room) {
            return Err(PbnError::Parse {
                line: line_no,
                msg: format!("room must be in 1..=4, got {room}"),
            });
        }
        records.push(WirelessRecord { signals, room: room as u8 });
    }
    if records.is_empty() {
        return Err(PbnError::EmptySet("wireless records"));
    }
    Ok(records)
}

/// Binarize rooms: room 2 → positive, everything else → negative.
pub fn binarize(records: &[WirelessRecord]) -> Vec<LabeledRecord> {
    records
        .iter()
        .map(|r| LabeledRecord {
            x: r.signals.to_vec(),
            y: if r.room == 2 { 1 } else { -1 },
            room: r.room,
        })
        .collect()
}

/// Per-feature affine transform to zero mean and unit variance, fit on
/// training data only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fit on a feature matrix. A zero-variance feature is centered but left
    /// unscaled, with a warning.
    pub fn fit(xs: &[Vec<f64>]) -> Result<Self> {
        if xs.is_empty() {
            return Err(PbnError::EmptySet("standardizer fit data"));
        }
        let dim = xs[0].len();
        let n = xs.len() as f64;
        let mut mean = vec![0.0; dim];
        for x in xs {
            if x.len() != dim {
                return Err(PbnError::DimensionMismatch { expected: dim, got: x.len() });
            }
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for x in xs {
            for ((vss, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *vss += (v - m) * (v - m);
            }
        }
        let scale = var
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let sd = (v / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    eprintln!("warning: feature {j} has zero variance; centering only");
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(PbnError::DimensionMismatch { expected: self.mean.len(), got: x.len() });
        }
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    fn apply_in_place(&self, samples: &mut [Sample]) -> Result<()> {
        for s in samples {
            s.x = self.apply(&s.x)?;
        }
        Ok(())
    }
}

/// Fit a standardizer on the training positives and observed negatives of
/// `splits`, then apply it to every split in place. Statistics never touch
/// validation, test, or rate-estimation data.
pub fn standardize_splits(splits: &mut PbnSplits) -> Result<Standardizer> {
    let train: Vec<Vec<f64>> = splits
        .train_p
        .iter()
        .chain(&splits.train_bn)
        .map(|s| s.x.clone())
        .collect();
    let std = Standardizer::fit(&train)?;
    std.apply_in_place(&mut splits.train_p)?;
    std.apply_in_place(&mut splits.train_bn)?;
    std.apply_in_place(&mut splits.valid_p)?;
    std.apply_in_place(&mut splits.test)?;
    std.apply_in_place(&mut splits.fnr_est)?;
    Ok(std)
}

/// Draw the benchmark splits from binarized records: disjoint random
/// subsets of the stated sizes, with the observed negatives drawn from the
/// designated room(s). π = 0.25 per the 100/300 test composition; ρ follows
/// the observed sample ratio π · n_bN / n_P.
pub fn make_benchmark_split(
    records: &[LabeledRecord],
    spec: &BenchmarkSpec,
    seed: u64,
) -> Result<BenchmarkData> {
    let s = &spec.sizes;
    let mut positives: Vec<&LabeledRecord> = records.iter().filter(|r| r.y == 1).collect();
    let mut negatives: Vec<&LabeledRecord> = records.iter().filter(|r| r.y == -1).collect();

    let need_p = s.n_train_p + s.n_valid_p + s.n_test_p + s.n_fnr_p;
    if positives.len() < need_p {
        return Err(PbnError::Experiment(format!(
            "need {need_p} positive records, have {}",
            positives.len()
        )));
    }
    let need_n = s.n_train_bn + s.n_test_n + s.n_fnr_n;
    if negatives.len() < need_n {
        return Err(PbnError::Experiment(format!(
            "need {need_n} negative records, have {}",
            negatives.len()
        )));
    }

    let mut rng_p = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let mut rng_n = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    positives.shuffle(&mut rng_p);
    negatives.shuffle(&mut rng_n);

    let mut pos_iter = positives.into_iter();
    let mut take_p = |n: usize| -> Vec<Sample> {
        pos_iter.by_ref().take(n).map(|r| Sample::positive(r.x.clone())).collect()
    };
    let train_p = take_p(s.n_train_p);
    let valid_p = take_p(s.n_valid_p);
    let test_p = take_p(s.n_test_p);
    let fnr_p = take_p(s.n_fnr_p);

    // Observed negatives first: from the designated room, or from the head
    // of the pooled shuffle (uniform over rooms) for the random mode.
    let mut used = vec![false; negatives.len()];
    let mut bn_rooms = Vec::with_capacity(s.n_train_bn);
    let mut train_bn = Vec::with_capacity(s.n_train_bn);
    for (i, r) in negatives.iter().enumerate() {
        if train_bn.len() == s.n_train_bn {
            break;
        }
        if spec.bias.room().is_none_or(|room| r.room == room) {
            used[i] = true;
            bn_rooms.push(r.room);
            train_bn.push(Sample::biased_negative(r.x.clone()));
        }
    }
    if train_bn.len() < s.n_train_bn {
        return Err(PbnError::Experiment(format!(
            "designated room(s) hold only {} negative records, need {}",
            train_bn.len(),
            s.n_train_bn
        )));
    }
    let mut rest = negatives
        .iter()
        .enumerate()
        .filter(|(i, _)| !used[*i])
        .map(|(_, r)| *r);
    let mut take_n = |n: usize| -> Result<Vec<Sample>> {
        let v: Vec<Sample> =
            rest.by_ref().take(n).map(|r| Sample::unobserved_negative(r.x.clone())).collect();
        if v.len() < n {
            return Err(PbnError::Experiment(format!(
                "ran out of negative records: needed {n}, got {}",
                v.len()
            )));
        }
        Ok(v)
    };
    let test_n = take_n(s.n_test_n)?;
    let fnr_n = take_n(s.n_fnr_n)?;

    let mut test = test_p;
    test.extend(test_n);
    let mut fnr_est = fnr_p;
    fnr_est.extend(fnr_n);

    let pi = s.n_test_p as f64 / (s.n_test_p + s.n_test_n) as f64;
    let rho = pi * s.n_train_bn as f64 / s.n_train_p as f64;
    Ok(BenchmarkData {
        splits: PbnSplits { train_p, train_bn, valid_p, test, fnr_est },
        params: ProblemParams::new(pi, rho)?,
        bn_rooms,
    })
}
