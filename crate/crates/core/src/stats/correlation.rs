//! Pearson, Spearman and Kendall tau-b.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::Scalar;

fn check_pair<T: Scalar>(x: &[T], y: &[T]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn clamp_unit<T: Scalar>(r: T) -> T {
    r.max(-T::one()).min(T::one())
}

/// Sample Pearson coefficient, accumulated in one pass with running means
/// and co-moments.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    check_pair(x, y)?;
    let (mut mx, mut my) = (T::zero(), T::zero());
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let n = T::from_count(i + 1);
        let dx = a - mx;
        let dy = b - my;
        mx = mx + dx / n;
        my = my + dy / n;
        sxx = sxx + dx * (a - mx);
        syy = syy + dy * (b - my);
        sxy = sxy + dx * (b - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(StatsError::DegenerateSeries);
    }
    Ok(clamp_unit(sxy / (sxx.sqrt() * syy.sqrt())))
}

fn cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("finite values compare")
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp(&values[a], &values[b]));
    let mut ranks = vec![T::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i+1 ..= j share the rank (i + 1 + j) / 2.
        let rank = T::from_count(i + 1 + j) / T::lit(2.0);
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Sum of t·(t−1)/2 over runs of equal adjacent elements.
fn tied_pairs<I: Iterator<Item = bool>>(same_as_prev: I) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for same in same_as_prev {
        if same {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` and returns the number of inversions (pairs out of order).
fn merge_count<T: Scalar>(v: &mut [T], buf: &mut Vec<T>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if cmp(&v[j], &v[i]) == Ordering::Less {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall tau-b in O(n log n) (Knight's merge-sort method).
pub fn kendall_tau<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    check_pair(x, y)?;
    let n = x.len() as u64;
    let mut pairs: Vec<(T, T)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| cmp(&a.0, &b.0).then_with(|| cmp(&a.1, &b.1)));

    let x_ties = tied_pairs(pairs.windows(2).map(|w| w[0].0 == w[1].0));
    let joint_ties = tied_pairs(pairs.windows(2).map(|w| w[0] == w[1]));
    let mut ys: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let discordant = merge_count(&mut ys, &mut buf);
    let y_ties = tied_pairs(ys.windows(2).map(|w| w[0] == w[1]));

    let total = n * (n - 1) / 2;
    let s = total as i128 - x_ties as i128 - y_ties as i128 + joint_ties as i128 - 2 * discordant as i128;
    let dx = total - x_ties;
    let dy = total - y_ties;
    if dx == 0 || dy == 0 {
        return Err(StatsError::DegenerateSeries);
    }
    let num = <T as num_traits::NumCast>::from(s).expect("pair count fits scalar");
    let den = (T::from_count(dx as usize) * T::from_count(dy as usize)).sqrt();
    Ok(clamp_unit(num / den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Strong,
    Moderate,
    Weak,
}

impl Strength {
    /// Strong above 0.8 in magnitude, moderate above 0.5, weak otherwise.
    pub fn classify<T: Scalar>(r: T) -> Self {
        let a = r.abs();
        if a > T::lit(0.8) {
            Strength::Strong
        } else if a > T::lit(0.5) {
            Strength::Moderate
        } else {
            Strength::Weak
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Strong => "strong",
            Strength::Moderate => "moderate",
            Strength::Weak => "weak",
        }
    }
}
