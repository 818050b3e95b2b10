//! Empirical quantiles with a single convention.
//!
//! For a multiset of size `n` and a level `q ∈ (0, 1]` the quantile is the
//! `k`-th smallest element with `k = ⌈q·n⌉`; at `q = 0` it is `−∞`. Products
//! `q·n` that land within rounding error of an integer are snapped to it, so
//! `0.7 · 10` selects the 7th element rather than the 8th.
//!
//! Conformal thresholds augment the scores with `+∞` before taking the
//! quantile, which makes the `⌈q·(m+1)⌉`-th order statistic of the augmented
//! set the cut-off.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rank `k ∈ [1, len]` selected at level `q > 0`.
pub fn order_rank(len: usize, q: f64) -> usize {
    let exact = q * len as f64;
    let nearest = libm::round(exact);
    let k = if (exact - nearest).abs() <= 1e-12 * (len as f64).max(1.0) {
        nearest
    } else {
        libm::ceil(exact)
    };
    (k as usize).clamp(1, len)
}

fn check_level(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidLevel(q))
    }
}

/// The `⌈q·n⌉`-th smallest value, or `−∞` when `q = 0`. Values may include
/// `±∞` but not NaN.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    check_level(q)?;
    if values.is_empty() {
        return Err(Error::Empty("quantile input"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("quantile input"));
    }
    if q == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let k = order_rank(values.len(), q);
    let mut buf = values.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// Split conformal cut-off: the `level` quantile of `scores ∪ {+∞}`.
/// `level = 1` gives `+∞`, `level = 0` gives `−∞`.
pub fn conformal_threshold(scores: &[f64], level: f64) -> Result<f64> {
    check_level(level)?;
    if scores.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("conformity scores"));
    }
    if level == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let k = order_rank(scores.len() + 1, level);
    if k > scores.len() {
        return Ok(f64::INFINITY);
    }
    let mut buf = scores.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// A sorted multiset with an optional sentinel appended, for repeated
/// quantile queries at different levels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AugmentedSample {
    sorted: Vec<f64>,
}

impl AugmentedSample {
    pub fn new(values: &[f64], augment: Option<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample values"));
        }
        if values.is_empty() && augment.is_none() {
            return Err(Error::Empty("sample"));
        }
        let mut sorted = Vec::with_capacity(values.len() + 1);
        sorted.extend_from_slice(values);
        sorted.extend(augment);
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    /// Probabilities augmented with `1`.
    pub fn probabilities(values: &[f64]) -> Result<Self> {
        Self::new(values, Some(1.0))
    }

    /// Conformity scores augmented with `+∞`.
    pub fn scores(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("conformity scores"));
        }
        let mut sorted = Vec::with_capacity(values.len() + 1);
        sorted.extend_from_slice(values);
        sorted.sort_unstable_by(f64::total_cmp);
        sorted.push(f64::INFINITY);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        check_level(q)?;
        if q == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.sorted[order_rank(self.sorted.len(), q) - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest element `t` with `#{v ≤ t} ≥ k`, found by counting over
    /// every candidate.
    fn counting_oracle(values: &[f64], k: usize) -> f64 {
        values
            .iter()
            .copied()
            .filter(|&t| values.iter().filter(|&&v| v <= t).count() >= k)
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn documented_examples() {
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0], 1.0).unwrap(), 3.0);
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0], 0.34).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[0.5], 0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn conformal_threshold_examples() {
        let nine: Vec<f64> = (1..=9).map(f64::from).collect();
        let nineteen: Vec<f64> = (1..=19).map(f64::from).collect();
        assert_eq!(conformal_threshold(&nine, 0.9).unwrap(), 9.0);
        assert_eq!(conformal_threshold(&nineteen, 0.9).unwrap(), 18.0);
        assert_eq!(conformal_threshold(&nine, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(conformal_threshold(&nine, 0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(conformal_threshold(&[], 0.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ranks_snap_to_integers() {
        assert_eq!(order_rank(10, 0.7), 7);
        assert_eq!(order_rank(10, 0.6), 6);
        assert_eq!(order_rank(10, 0.61), 7);
        assert_eq!(order_rank(3, 1e-9), 1);
    }

    #[test]
    fn errors() {
        assert_eq!(empirical_quantile(&[], 0.5), Err(Error::Empty("quantile input")));
        assert_eq!(empirical_quantile(&[1.0], 1.5), Err(Error::InvalidLevel(1.5)));
        assert!(empirical_quantile(&[f64::NAN], 0.5).is_err());
    }

    #[test]
    fn augmented_probabilities() {
        let probs: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
        let s = AugmentedSample::probabilities(&probs).unwrap();
        assert_eq!(s.quantile(0.5).unwrap(), 0.5);
        assert_eq!(s.quantile(1.0).unwrap(), 1.0);
        assert_eq!(s.quantile(0.0).unwrap(), f64::NEG_INFINITY);
        let scores = AugmentedSample::scores(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(scores.sorted(), &[1.0, 2.0, 3.0, f64::INFINITY]);
        assert_eq!(scores.quantile(0.9).unwrap(), f64::INFINITY);
        assert!(AugmentedSample::new(&[], None).is_err());
        assert_eq!(AugmentedSample::new(&[], Some(1.0)).unwrap().quantile(0.3).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn matches_counting_oracle(
            values in prop::collection::vec(-5i32..5, 1..=12),
            j in 1u32..=1000,
        ) {
            let values: Vec<f64> = values.into_iter().map(f64::from).collect();
            let q = f64::from(j) / 1000.0;
            let k = (j as usize * values.len()).div_ceil(1000);
            prop_assert_eq!(empirical_quantile(&values, q).unwrap(), counting_oracle(&values, k));
        }

        #[test]
        fn monotone_in_level(
            values in prop::collection::vec(-1e3f64..1e3, 1..40),
            a in 0.0f64..=1.0,
            b in 0.0f64..=1.0,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(empirical_quantile(&values, lo).unwrap() <= empirical_quantile(&values, hi).unwrap());
        }

        #[test]
        fn translation_equivariant(
            values in prop::collection::vec(-1e3f64..1e3, 1..40),
            q in 0.001f64..=1.0,
            shift in -1e3f64..1e3,
        ) {
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let base = empirical_quantile(&values, q).unwrap();
            prop_assert_eq!(empirical_quantile(&shifted, q).unwrap(), base + shift);
        }

        #[test]
        fn augmented_matches_direct(
            values in prop::collection::vec(0.0f64..10.0, 0..30),
            q in 0.0f64..=1.0,
        ) {
            let sample = AugmentedSample::scores(&values).unwrap();
            prop_assert_eq!(sample.quantile(q).unwrap(), conformal_threshold(&values, q).unwrap());
            let mut with_inf = values.clone();
            with_inf.push(f64::INFINITY);
            prop_assert_eq!(empirical_quantile(&with_inf, q).unwrap(), conformal_threshold(&values, q).unwrap());
        }
    }

    #[test]
    fn oracle_sanity() {
        assert_eq!(counting_oracle(&[2.0, 2.0, 1.0], 2), 2.0);
        assert_eq!(counting_oracle(&[1.0], 1), 1.0);
    }
}
