//! Samples, datasets, five-way splits and prediction sets.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A feature vector with a non-negative outcome. Zero outcomes are stored as
/// an exact `0.0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub outcome: f64,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, outcome: f64) -> Result<Self> {
        if !outcome.is_finite() {
            return Err(Error::NonFinite("outcome"));
        }
        if outcome < 0.0 {
            return Err(Error::NegativeOutcome(outcome));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        Ok(Self { features, outcome })
    }

    /// Exact comparison: the zero atom has no tolerance band.
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.outcome == 0.0
    }
}

/// An ordered collection of samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Dataset {
    feature_dim: usize,
    samples: Vec<LabeledSample>,
}

impl Dataset {
    pub fn new(feature_dim: usize, samples: Vec<LabeledSample>) -> Result<Self> {
        if feature_dim == 0 {
            return Err(Error::InvalidParameter("feature dimension must be positive"));
        }
        if let Some(bad) = samples.iter().find(|s| s.features.len() != feature_dim) {
            return Err(Error::DimensionMismatch {
                expected: feature_dim,
                found: bad.features.len(),
            });
        }
        Ok(Self { feature_dim, samples })
    }

    /// Builds a dataset from raw rows, validating every sample.
    pub fn from_rows<I>(feature_dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, f64)>,
    {
        let samples = rows
            .into_iter()
            .map(|(x, y)| LabeledSample::new(x, y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(feature_dim, samples)
    }

    pub fn empty(feature_dim: usize) -> Self {
        Self { feature_dim, samples: Vec::new() }
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn iter(&self) -> core::slice::Iter<'_, LabeledSample> {
        self.samples.iter()
    }

    pub fn into_samples(self) -> Vec<LabeledSample> {
        self.samples
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.outcome).collect()
    }

    pub fn zero_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_zero()).count()
    }

    /// Fraction of exact-zero outcomes; `0` for an empty dataset.
    pub fn zero_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.zero_count() as f64 / self.samples.len() as f64
    }

    /// The subset with `y > 0`, in original order.
    pub fn nonzero_only(&self) -> Dataset {
        Dataset {
            feature_dim: self.feature_dim,
            samples: self.samples.iter().filter(|s| !s.is_zero()).cloned().collect(),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_dim: self.feature_dim,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    /// Splits off the trailing `count` samples.
    pub fn split_tail(mut self, count: usize) -> (Dataset, Dataset) {
        let at = self.samples.len().saturating_sub(count);
        let tail = self.samples.split_off(at);
        let dim = self.feature_dim;
        (self, Dataset { feature_dim: dim, samples: tail })
    }

    /// Concatenates datasets of equal dimension, in argument order.
    pub fn concat(parts: &[&Dataset]) -> Result<Dataset> {
        let dim = parts.first().ok_or(Error::Empty("dataset list"))?.feature_dim;
        let mut samples = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for part in parts {
            if part.feature_dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: part.feature_dim });
            }
            samples.extend_from_slice(&part.samples);
        }
        Ok(Dataset { feature_dim: dim, samples })
    }

    /// Applies `f` to every feature vector. `f` must return vectors of
    /// length `new_dim`.
    pub fn map_features<F>(&self, new_dim: usize, mut f: F) -> Result<Dataset>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let samples = self
            .samples
            .iter()
            .map(|s| LabeledSample { features: f(&s.features), outcome: s.outcome })
            .collect();
        Dataset::new(new_dim, samples)
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a LabeledSample;
    type IntoIter = core::slice::Iter<'a, LabeledSample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

/// Names of the five splits, in declaration order.
pub const SPLIT_NAMES: [&str; 5] = ["train", "val", "cal1", "cal2", "test"];

/// The five-way partition used by the two-step procedure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DataSplits {
    pub train: Dataset,
    pub val: Dataset,
    pub cal1: Dataset,
    pub cal2: Dataset,
    pub test: Dataset,
}

impl DataSplits {
    /// Validation size `n`.
    pub fn n(&self) -> usize {
        self.val.len()
    }

    /// Calibration fold size `m` (the smaller fold when sizes differ by one).
    pub fn m(&self) -> usize {
        self.cal1.len().min(self.cal2.len())
    }

    /// `(train, val ∪ cal1 ∪ cal2)`, giving two-split methods the same data
    /// budget as the five-way procedure.
    pub fn merge_for_two_way(&self) -> (Dataset, Dataset) {
        let mut merged = Vec::with_capacity(self.val.len() + self.cal1.len() + self.cal2.len());
        merged.extend_from_slice(&self.val.samples);
        merged.extend_from_slice(&self.cal1.samples);
        merged.extend_from_slice(&self.cal2.samples);
        let dim = self.train.feature_dim;
        (self.train.clone(), Dataset { feature_dim: dim, samples: merged })
    }

    /// Applies a feature map to every split.
    pub fn map_features<F>(&self, new_dim: usize, mut f: F) -> Result<DataSplits>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        Ok(DataSplits {
            train: self.train.map_features(new_dim, &mut f)?,
            val: self.val.map_features(new_dim, &mut f)?,
            cal1: self.cal1.map_features(new_dim, &mut f)?,
            cal2: self.cal2.map_features(new_dim, &mut f)?,
            test: self.test.map_features(new_dim, &mut f)?,
        })
    }
}

/// Split fractions over `(train, val, cal1, cal2, test)`. A zero fraction
/// leaves that split empty.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SplitScheme {
    fractions: [f64; 5],
}

impl SplitScheme {
    /// Accepts four (test left empty) or five fractions.
    pub fn new(fractions: &[f64]) -> Result<Self> {
        if fractions.len() != 4 && fractions.len() != 5 {
            return Err(Error::InvalidFractions);
        }
        let mut all = [0.0; 5];
        all[..fractions.len()].copy_from_slice(fractions);
        if all.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidFractions);
        }
        let total: f64 = all.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidFractions);
        }
        Ok(Self { fractions: all })
    }

    /// Equal train / val / cal1 / cal2, no test split.
    pub fn equal_four_way() -> Self {
        Self { fractions: [0.25, 0.25, 0.25, 0.25, 0.0] }
    }

    /// Five equal subsets including test.
    pub fn equal_five_way() -> Self {
        Self { fractions: [0.2; 5] }
    }

    pub fn fractions(&self) -> [f64; 5] {
        self.fractions
    }

    /// Floor each share, then hand the remainder out one sample at a time to
    /// the active splits in declaration order.
    pub fn sizes(&self, total: usize) -> Result<[usize; 5]> {
        let mut sizes = [0usize; 5];
        for (size, &frac) in sizes.iter_mut().zip(&self.fractions) {
            let exact = frac * total as f64;
            let nearest = libm::round(exact);
            *size = if (exact - nearest).abs() <= 1e-9 { nearest } else { libm::floor(exact) } as usize;
        }
        let assigned: usize = sizes.iter().sum();
        let mut remainder = total.saturating_sub(assigned);
        let active: Vec<usize> = (0..5).filter(|&i| self.fractions[i] > 0.0).collect();
        for &i in active.iter().cycle() {
            if remainder == 0 {
                break;
            }
            sizes[i] += 1;
            remainder -= 1;
        }
        for &i in &active {
            if sizes[i] == 0 {
                return Err(Error::EmptySplit(SPLIT_NAMES[i]));
            }
        }
        Ok(sizes)
    }
}

/// Shuffles `data` with `rng` and cuts it into the splits of `scheme`.
pub fn partition<R: Rng + ?Sized>(data: &Dataset, scheme: &SplitScheme, rng: &mut R) -> Result<DataSplits> {
    let sizes = scheme.sizes(data.len())?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(rng);
    let mut start = 0;
    let mut parts = sizes.iter().map(|&size| {
        let part = data.select(&order[start..start + size]);
        start += size;
        part
    });
    let mut next = || parts.next().expect("five split sizes");
    Ok(DataSplits { train: next(), val: next(), cal1: next(), cal2: next(), test: next() })
}

/// Output of every conformal procedure in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum PredictionSet {
    /// `{0}`.
    ZeroSingleton,
    /// `[lo, hi]` with `lo ≤ hi`.
    Interval { lo: f64, hi: f64 },
    /// `{0} ∪ [lo, hi]`; only built with `0 ∉ [lo, hi]`.
    ZeroPlusInterval { lo: f64, hi: f64 },
    /// `[lo, hi] \ {0}`; only built with `0 ∈ [lo, hi]`. Score-based
    /// baselines produce it when the zero class is rejected but the
    /// residual interval straddles 0.
    PuncturedInterval { lo: f64, hi: f64 },
    /// The whole real line.
    Unbounded,
}

impl PredictionSet {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::NonFinite("interval endpoint"));
        }
        if lo > hi {
            return Err(Error::InvalidParameter("interval requires lo <= hi"));
        }
        Ok(PredictionSet::Interval { lo, hi })
    }

    /// `[center − radius, center + radius]`, or `Unbounded` for an infinite
    /// radius. With `clip_at_zero` the lower end is raised to 0 when that
    /// leaves a non-empty interval.
    pub fn symmetric(center: f64, radius: f64, clip_at_zero: bool) -> Self {
        if radius == f64::INFINITY {
            return PredictionSet::Unbounded;
        }
        let radius = radius.max(0.0);
        let mut lo = center - radius;
        let hi = center + radius;
        if clip_at_zero && lo < 0.0 && hi >= 0.0 {
            lo = 0.0;
        }
        PredictionSet::Interval { lo, hi }
    }

    /// Sets the membership of `0` in `base`, an interval or unbounded set:
    /// with `include_zero` the result is `base ∪ {0}` (connected whenever
    /// `0 ∈ base`), otherwise `base \ {0}`. `Unbounded` is returned as is.
    pub fn with_zero_membership(base: PredictionSet, include_zero: bool) -> Self {
        match (base, include_zero) {
            (PredictionSet::Interval { lo, hi }, true) if lo <= 0.0 && 0.0 <= hi => base,
            (PredictionSet::Interval { lo, hi }, true) => PredictionSet::ZeroPlusInterval { lo, hi },
            (PredictionSet::Interval { lo, hi }, false) if lo <= 0.0 && 0.0 <= hi => {
                PredictionSet::PuncturedInterval { lo, hi }
            }
            (other, _) => other,
        }
    }

    /// Lebesgue length; `{0}` has length 0.
    pub fn length(&self) -> f64 {
        match *self {
            PredictionSet::ZeroSingleton => 0.0,
            PredictionSet::Interval { lo, hi }
            | PredictionSet::ZeroPlusInterval { lo, hi }
            | PredictionSet::PuncturedInterval { lo, hi } => hi - lo,
            PredictionSet::Unbounded => f64::INFINITY,
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        match *self {
            PredictionSet::ZeroSingleton => y == 0.0,
            PredictionSet::Interval { lo, hi } => lo <= y && y <= hi,
            PredictionSet::ZeroPlusInterval { lo, hi } => y == 0.0 || (lo <= y && y <= hi),
            PredictionSet::PuncturedInterval { lo, hi } => y != 0.0 && lo <= y && y <= hi,
            PredictionSet::Unbounded => true,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_zero_singleton(&self) -> bool {
        matches!(self, PredictionSet::ZeroSingleton)
    }

    /// True iff the set is `{0} ∪ [lo, hi]` with `0 ∉ [lo, hi]`.
    pub fn is_disconnected(&self) -> bool {
        match *self {
            PredictionSet::ZeroPlusInterval { lo, hi } => !(lo <= 0.0 && 0.0 <= hi),
            _ => false,
        }
    }
}
