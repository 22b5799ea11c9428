//! Brute-force reference computations.
//!
//! Each function here answers the same question as a fast routine elsewhere
//! in the crate by a different route (full enumeration or dense sampling),
//! and is used only to cross-check it.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::Result;
use crate::geometry::{Point, Segment};
use crate::pattern::Pattern;
use crate::quaternary::GridRational;

/// Membership in `F_n` by scanning every level-`n` square.
pub fn contains_by_scan(
    pattern: &Pattern,
    x: &GridRational,
    y: &GridRational,
    level: u32,
) -> Result<bool> {
    let (x, y) = (x.to_ratio(), y.to_ratio());
    Ok(pattern.squares(level)?.iter().any(|sq| sq.contains(&x, &y)))
}

/// Smallest left edge over all level-`n` squares whose closed `y` range
/// contains `t`.
pub fn g_lower_by_scan(pattern: &Pattern, t: &GridRational, level: u32) -> Result<BigRational> {
    let t = t.to_ratio();
    Ok(pattern
        .squares(level)?
        .into_iter()
        .filter(|sq| sq.y0() <= t && t <= sq.y0() + sq.side())
        .map(|sq| sq.x0())
        .min()
        .expect("the y projection of F_n is [0, 1]"))
}

/// Whether the line `{(a, b) : a + b x = y}` meets some level-`n` square,
/// checked square by square. Coordinates are scaled by `m^n` and both
/// denominators so every comparison is between integers.
pub fn stab_by_scan(
    pattern: &Pattern,
    x: &BigRational,
    y: &BigRational,
    level: u32,
) -> Result<bool> {
    let (p, q) = (x.numer(), x.denom());
    let (r, s) = (y.numer(), y.denom());
    let cells = BigInt::from(pattern.box_count(level)?);
    // the target y * m^n * q * s
    let target = r * &cells * q;
    Ok(pattern.squares(level)?.iter().any(|sq| {
        let (a0, b0) = (BigInt::from(sq.x_index()), BigInt::from(sq.y_index()));
        // a * q + b * p at the four corners, in units of 1 / (m^n q)
        let corners = [
            &a0 * q + &b0 * p,
            (&a0 + 1) * q + &b0 * p,
            &a0 * q + (&b0 + 1) * p,
            (&a0 + 1) * q + (&b0 + 1) * p,
        ];
        let lo = corners.iter().min().expect("four corners") * s;
        let hi = corners.iter().max().expect("four corners") * s;
        lo <= target && target <= hi
    }))
}

fn dist2(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
}

/// `min_j |p - q_j|` over `samples` evenly spaced points of `s`. The squared
/// distance along a segment is a convex quadratic, so a discrete ternary
/// search over sample indices finds the same minimum as a full scan.
fn sampled_distance(p: Point, s: &Segment, samples: usize) -> f64 {
    let last = samples - 1;
    let f = |j: usize| dist2(p, s.point_at(j as f64 / last as f64));
    let (mut lo, mut hi) = (0usize, last);
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    (lo..=hi).map(f).fold(f64::INFINITY, f64::min).sqrt()
}

/// Two-sided Hausdorff distance between `samples`-point discretisations of
/// both segments. Discretisation error is at most half the sample spacing.
pub fn sampled_hausdorff(s1: &Segment, s2: &Segment, samples: usize) -> f64 {
    assert!(samples >= 2, "need at least both endpoints");
    let one_sided = |a: &Segment, b: &Segment| {
        (0..samples)
            .map(|i| sampled_distance(a.point_at(i as f64 / (samples - 1) as f64), b, samples))
            .fold(0.0, f64::max)
    };
    one_sided(s1, s2).max(one_sided(s2, s1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ternary_search_matches_full_scan() {
        let s = Segment::new([0.1, 0.2], [0.9, 0.7]);
        for p in [[0.0, 0.0], [0.5, 0.45], [2.0, -1.0], [0.3, 0.9]] {
            let full = (0..=500)
                .map(|j| dist2(p, s.point_at(j as f64 / 500.0)))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            assert_eq!(sampled_distance(p, &s, 501), full);
        }
    }
}
