//! Classification-powered conformal inference.
//!
//! Calibration uses three held-out splits:
//!
//! * `cal1` fixes the classification threshold `α_r`, the `r`-quantile of
//!   `{p̂(x_i)} ∪ {1}`. Points with `p̂(x) ≤ α_r` are predicted as zero.
//! * `val` estimates the negative predictive value
//!   `β̂ = #{p̂ ≤ α_r, y = 0} / (|val|·r)`, optionally lowered to
//!   `β̃ = β̂ − C·r⁻¹·√(ln n / n)` with `n = |val|`.
//! * `cal2`, restricted to `p̂(x) > α_r`, gives the radius `q_r` at the
//!   effective level `γ = clamp((α̃ − r·β̃) / (1 − r), 0, 1)`.
//!
//! Classifiers with tied outputs (k-NN vote shares, say) put more than an
//! `r` share of points at or below `α_r`, which breaks the coverage
//! accounting. Ties are therefore broken by a fixed hash of the features:
//! a point is predicted zero when `(p̂(x), key(x))` is at most the pair
//! attaining the quantile. Untied classifiers are unaffected.
//!
//! `r` is picked on a grid by minimising `2(1 − r)·q_r` (or `q_r`), with ties
//! going to the smaller `r`. `r = 0` reproduces vanilla split conformal
//! calibration on `cal2` exactly.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::data::{DataSplits, Dataset, PredictionSet};
use crate::error::{Error, Result};
use crate::models::{Classifier, Regressor};
use crate::quantile::{conformal_threshold, order_rank};
use crate::seed::hash_unit;
use crate::vci::conformity_score;

/// What the `r` search minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Objective {
    /// Estimated mean set length `2(1 − r)·q_r`.
    #[default]
    OverallLength,
    /// Interval length on predicted non-zeros, i.e. `q_r`.
    NonzeroLength,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CpciConfig {
    /// Target marginal coverage `α̃ ∈ (0, 1)`.
    pub level: f64,
    /// Strictly increasing candidate values of `r`, all in `[0, 1)`.
    pub grid: Vec<f64>,
    /// Constant `C > 2` of the validation-tail adjustment.
    pub c_const: f64,
    /// Use `β̃` instead of `β̂` when computing `γ`.
    pub adjust_beta: bool,
    pub objective: Objective,
    pub clip_at_zero: bool,
    /// Break ties in `p̂` with [`tie_key`].
    pub break_ties: bool,
}

pub const DEFAULT_GRID_STEP: f64 = 0.05;
pub const DEFAULT_C: f64 = 2.5;

impl CpciConfig {
    pub fn new(level: f64) -> Self {
        Self {
            level,
            grid: grid_with_step(DEFAULT_GRID_STEP).expect("default step is valid"),
            c_const: DEFAULT_C,
            adjust_beta: false,
            objective: Objective::OverallLength,
            clip_at_zero: false,
            break_ties: true,
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_adjusted_beta(mut self, c_const: f64) -> Self {
        self.adjust_beta = true;
        self.c_const = c_const;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidLevel(self.level));
        }
        if self.grid.is_empty() {
            return Err(Error::Empty("r grid"));
        }
        if self.grid.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::InvalidParameter("grid values must lie in [0, 1)"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("grid must be strictly increasing"));
        }
        if !(self.c_const > 2.0) || !self.c_const.is_finite() {
            return Err(Error::InvalidParameter("adjustment constant must exceed 2"));
        }
        Ok(())
    }
}

/// `{0, step, 2·step, …}` below 1.
pub fn grid_with_step(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::InvalidParameter("grid step must lie in (0, 1)"));
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let r = libm::round(f64::from(k) * step * 1e12) / 1e12;
        if r >= 1.0 {
            break;
        }
        grid.push(r);
        k += 1;
    }
    Ok(grid)
}

fn check_r(r: f64) -> Result<()> {
    if (0.0..1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("r must lie in [0, 1)"))
    }
}

const TIE_SEED: u64 = 0x7469_652d_6272_6561;

/// Tie-break key in `[0, 1)`: a fixed hash of the feature bits.
pub fn tie_key(x: &[f64]) -> f64 {
    hash_unit(TIE_SEED, x)
}

/// `(p̂(x), key)`, the pair compared against a [`Threshold`]. The key is 0
/// when ties are left alone.
pub fn zero_score<C: Classifier + ?Sized>(classifier: &C, x: &[f64], break_ties: bool) -> (f64, f64) {
    (classifier.predict_proba(x), if break_ties { tie_key(x) } else { 0.0 })
}

/// `α_r` together with the key of the point attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Threshold {
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub alpha: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub tie: f64,
}

impl Threshold {
    /// Admits nothing (`r = 0`).
    pub const NONE: Threshold = Threshold { alpha: f64::NEG_INFINITY, tie: f64::NEG_INFINITY };

    /// Predicted zero: `(p, key) ≤ (alpha, tie)` lexicographically.
    pub fn admits(&self, (p, key): (f64, f64)) -> bool {
        p < self.alpha || (p == self.alpha && key <= self.tie)
    }
}

/// `α_r`: the `r`-quantile of `{p̂(x_i) : i ∈ cal1} ∪ {1}`, ordered by
/// `(p̂, key)`; the appended `1` sorts after every real point with `p̂ = 1`.
pub fn classification_threshold<C: Classifier + ?Sized>(
    cal1: &Dataset,
    classifier: &C,
    r: f64,
    break_ties: bool,
) -> Result<Threshold> {
    check_r(r)?;
    if cal1.is_empty() {
        return Err(Error::Empty("first calibration fold"));
    }
    let scores: Vec<(f64, f64)> = cal1.iter().map(|s| zero_score(classifier, &s.features, break_ties)).collect();
    Ok(SortedZeroScores::new(scores)?.threshold(r))
}

/// `cal1` scores in `(p̂, key)` order with the sentinel `(1, +∞)` appended.
#[derive(Debug, Clone)]
struct SortedZeroScores(Vec<(f64, f64)>);

impl SortedZeroScores {
    fn new(mut scores: Vec<(f64, f64)>) -> Result<Self> {
        if scores.iter().any(|(p, _)| !p.is_finite()) {
            return Err(Error::NonFinite("classifier output"));
        }
        scores.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        scores.push((1.0, f64::INFINITY));
        Ok(Self(scores))
    }

    fn threshold(&self, r: f64) -> Threshold {
        if r == 0.0 {
            return Threshold::NONE;
        }
        let (alpha, tie) = self.0[order_rank(self.0.len(), r) - 1];
        Threshold { alpha, tie }
    }
}

fn beta_from_count(count: usize, n_val: usize, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    (count as f64 / (n_val as f64 * r)).clamp(0.0, 1.0)
}

/// `β̂`, the share of validation points predicted zero that are truly zero,
/// normalised by `|val|·r` and clamped to `[0, 1]`. Zero when `r = 0`.
pub fn estimate_beta<C: Classifier + ?Sized>(
    val: &Dataset,
    classifier: &C,
    threshold: &Threshold,
    r: f64,
    break_ties: bool,
) -> Result<f64> {
    check_r(r)?;
    if val.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    let count = val
        .iter()
        .filter(|s| s.is_zero() && threshold.admits(zero_score(classifier, &s.features, break_ties)))
        .count();
    Ok(beta_from_count(count, val.len(), r))
}

/// `β̃ = β̂ − C·r⁻¹·√(ln n / n)`. Not clamped below: a negative value only
/// raises `γ`.
pub fn adjust_beta(beta_hat: f64, r: f64, n_val: usize, c_const: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter("adjustment requires 0 < r < 1"));
    }
    if n_val < 3 {
        return Err(Error::InsufficientData { needed: 2, found: n_val });
    }
    if !(c_const > 2.0) {
        return Err(Error::InvalidParameter("adjustment constant must exceed 2"));
    }
    let n = n_val as f64;
    Ok(beta_hat - c_const / r * libm::sqrt(libm::log(n) / n))
}

/// `γ = clamp((α̃ − r·β) / (1 − r), 0, 1)`.
pub fn effective_level(level: f64, r: f64, beta: f64) -> f64 {
    ((level - r * beta) / (1.0 - r)).clamp(0.0, 1.0)
}

fn radius_from_scores(scores: &[f64], gamma: f64) -> Result<f64> {
    if scores.is_empty() {
        return Ok(f64::INFINITY);
    }
    // γ = 0 yields −∞; floor at a point interval.
    Ok(conformal_threshold(scores, gamma)?.max(0.0))
}

/// `q_r`: the `γ` conformal threshold of `|y − f̂(x)|` over the `cal2`
/// points not predicted zero. `+∞` if no point passes the filter.
pub fn conformal_radius<C, R>(
    cal2: &Dataset,
    classifier: &C,
    regressor: &R,
    threshold: &Threshold,
    gamma: f64,
    break_ties: bool,
) -> Result<f64>
where
    C: Classifier + ?Sized,
    R: Regressor + ?Sized,
{
    let scores: Vec<f64> = cal2
        .iter()
        .filter(|s| !threshold.admits(zero_score(classifier, &s.features, break_ties)))
        .map(|s| conformity_score(regressor, &s.features, s.outcome))
        .collect();
    radius_from_scores(&scores, gamma)
}

/// Calibration quantities at one candidate `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GridPoint {
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub alpha_r: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub alpha_tie: f64,
    pub beta_hat: f64,
    pub beta_tilde: f64,
    pub gamma: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub q_r: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub objective: f64,
}

/// Model outputs on the calibration splits, computed once and reused for
/// every grid point.
#[derive(Debug, Clone)]
pub struct CalibrationScores {
    cal1: SortedZeroScores,
    /// `(p̂(x), key(x), y == 0)` on `val`.
    val: Vec<(f64, f64, bool)>,
    /// `(p̂(x), key(x), |y − f̂(x)|)` on `cal2`.
    cal2: Vec<(f64, f64, f64)>,
    break_ties: bool,
}

impl CalibrationScores {
    pub fn compute<C, R>(splits: &DataSplits, classifier: &C, regressor: &R, break_ties: bool) -> Result<Self>
    where
        C: Classifier + ?Sized,
        R: Regressor + ?Sized,
    {
        if splits.cal1.is_empty() {
            return Err(Error::Empty("first calibration fold"));
        }
        if splits.val.is_empty() {
            return Err(Error::Empty("validation set"));
        }
        if splits.cal2.is_empty() {
            return Err(Error::Empty("second calibration fold"));
        }
        let score = |x: &[f64]| zero_score(classifier, x, break_ties);
        Ok(Self {
            cal1: SortedZeroScores::new(splits.cal1.iter().map(|s| score(&s.features)).collect())?,
            val: splits
                .val
                .iter()
                .map(|s| {
                    let (p, key) = score(&s.features);
                    (p, key, s.is_zero())
                })
                .collect(),
            cal2: splits
                .cal2
                .iter()
                .map(|s| {
                    let (p, key) = score(&s.features);
                    (p, key, conformity_score(regressor, &s.features, s.outcome))
                })
                .collect(),
            break_ties,
        })
    }

    pub fn evaluate(&self, r: f64, config: &CpciConfig) -> Result<GridPoint> {
        check_r(r)?;
        if config.break_ties != self.break_ties {
            return Err(Error::InvalidParameter("scores were computed with a different tie rule"));
        }
        let threshold = self.cal1.threshold(r);
        let (beta_hat, beta_tilde) = if r == 0.0 {
            (0.0, 0.0)
        } else {
            let count = self.val.iter().filter(|&&(p, key, zero)| zero && threshold.admits((p, key))).count();
            let beta_hat = beta_from_count(count, self.val.len(), r);
            let beta_tilde = if config.adjust_beta {
                adjust_beta(beta_hat, r, self.val.len(), config.c_const)?
            } else {
                beta_hat
            };
            (beta_hat, beta_tilde)
        };
        let gamma = effective_level(config.level, r, beta_tilde);
        let scores: Vec<f64> =
            self.cal2.iter().filter(|&&(p, key, _)| !threshold.admits((p, key))).map(|&(_, _, s)| s).collect();
        let q_r = radius_from_scores(&scores, gamma)?;
        let objective = match config.objective {
            Objective::OverallLength if q_r.is_infinite() => f64::INFINITY,
            Objective::OverallLength => 2.0 * (1.0 - r) * q_r,
            Objective::NonzeroLength => q_r,
        };
        Ok(GridPoint { r, alpha_r: threshold.alpha, alpha_tie: threshold.tie, beta_hat, beta_tilde, gamma, q_r, objective })
    }
}

/// A frozen calibration: enough to predict for any new `x`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CpciCalibration<C, R> {
    pub classifier: C,
    pub regressor: R,
    pub level: f64,
    pub r_hat: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub alpha_r: f64,
    /// Tie-break key at `α_r`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub alpha_tie: f64,
    pub break_ties: bool,
    pub beta_hat: f64,
    pub beta_tilde: f64,
    pub gamma: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub q_r: f64,
    pub clip_at_zero: bool,
    /// Every evaluated grid point, in grid order.
    pub grid: Vec<GridPoint>,
    /// Set when every grid objective was infinite and `r = 0` was used.
    pub fell_back: bool,
}

impl<C: Classifier, R: Regressor> CpciCalibration<C, R> {
    fn from_point(classifier: C, regressor: R, config: &CpciConfig, point: GridPoint, grid: Vec<GridPoint>) -> Self {
        Self {
            classifier,
            regressor,
            level: config.level,
            r_hat: point.r,
            alpha_r: point.alpha_r,
            alpha_tie: point.alpha_tie,
            break_ties: config.break_ties,
            beta_hat: point.beta_hat,
            beta_tilde: point.beta_tilde,
            gamma: point.gamma,
            q_r: point.q_r,
            clip_at_zero: config.clip_at_zero,
            grid,
            fell_back: false,
        }
    }

    /// Calibrates at a fixed `r` (no search).
    pub fn at_fixed_r(splits: &DataSplits, classifier: C, regressor: R, config: &CpciConfig, r: f64) -> Result<Self> {
        let mut config = config.clone();
        config.grid = alloc::vec![r];
        config.validate()?;
        let scores = CalibrationScores::compute(splits, &classifier, &regressor, config.break_ties)?;
        let point = scores.evaluate(r, &config)?;
        Ok(Self::from_point(classifier, regressor, &config, point, alloc::vec![point]))
    }

    /// Evaluates every grid value of `r` and keeps the minimiser of the
    /// configured objective.
    pub fn select_r(splits: &DataSplits, classifier: C, regressor: R, config: &CpciConfig) -> Result<Self> {
        config.validate()?;
        let scores = CalibrationScores::compute(splits, &classifier, &regressor, config.break_ties)?;
        let grid = config.grid.iter().map(|&r| scores.evaluate(r, config)).collect::<Result<Vec<_>>>()?;
        let mut best: Option<GridPoint> = None;
        for point in &grid {
            if point.objective.is_finite() && best.is_none_or(|b| point.objective < b.objective) {
                best = Some(*point);
            }
        }
        match best {
            Some(point) => Ok(Self::from_point(classifier, regressor, config, point, grid)),
            None => {
                let point = match grid.first() {
                    Some(p) if p.r == 0.0 => *p,
                    _ => scores.evaluate(0.0, config)?,
                };
                let mut cal = Self::from_point(classifier, regressor, config, point, grid);
                cal.fell_back = true;
                Ok(cal)
            }
        }
    }

    pub fn threshold(&self) -> Threshold {
        Threshold { alpha: self.alpha_r, tie: self.alpha_tie }
    }

    pub fn is_predicted_zero(&self, x: &[f64]) -> bool {
        self.threshold().admits(zero_score(&self.classifier, x, self.break_ties))
    }

    /// `{0}` if predicted zero, else `[f̂(x) − q_r, f̂(x) + q_r]`.
    pub fn predict(&self, x: &[f64]) -> PredictionSet {
        if self.is_predicted_zero(x) {
            PredictionSet::ZeroSingleton
        } else {
            PredictionSet::symmetric(self.regressor.predict(x), self.q_r, self.clip_at_zero)
        }
    }
}
