//! Finite unions of closed intervals.

use std::ops::{Add, Sub};

use num_traits::Zero;

/// Sorted, pairwise disjoint closed intervals. Touching intervals are merged,
/// so `[0, 1/2] ∪ [1/2, 1]` is stored as `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Ord + Clone> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet { intervals: vec![] }
    }

    /// Sort-and-merge. Intervals with `lo > hi` are dropped.
    pub fn from_intervals(intervals: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut raw: Vec<(T, T)> = intervals.into_iter().filter(|(lo, hi)| lo <= hi).collect();
        raw.sort_unstable();
        let mut merged: Vec<(T, T)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        IntervalSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: &T) -> bool {
        // first interval whose upper end is >= x
        let idx = self.intervals.partition_point(|(_, hi)| hi < x);
        self.intervals.get(idx).is_some_and(|(lo, _)| lo <= x)
    }

    /// True when the set is exactly the single interval `[lo, hi]`.
    pub fn is_interval(&self, lo: &T, hi: &T) -> bool {
        self.intervals.len() == 1 && &self.intervals[0].0 == lo && &self.intervals[0].1 == hi
    }
}

impl<T> IntervalSet<T>
where
    T: Ord + Clone + Zero,
    for<'a> &'a T: Sub<&'a T, Output = T>,
    T: Add<T, Output = T>,
{
    pub fn total_length(&self) -> T {
        self.intervals
            .iter()
            .fold(T::zero(), |acc, (lo, hi)| acc + (hi - lo))
    }
}
