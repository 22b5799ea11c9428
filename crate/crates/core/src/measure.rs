//! Finite-depth measurements of the dual line set
//! `L(F_n) = { (x, a + b x) : (a, b) in F_n }`.
//!
//! At a fixed `x >= 0` the level-`n` square with corner `(a0, b0)` and side
//! `d` contributes the slice interval `[a0 + b0 x, a0 + d + (b0 + d) x]`.
//! Slice lengths are computed exactly by sort-and-merge on integer
//! numerators over the common denominator `m^n * D`, where `x = X / D`.
//!
//! Area over the window `0 <= x <= 1` is reported three ways on the lattice
//! `x_i = i / (K - 1)`: a trapezoid estimate, and rigorous lower and upper
//! bounds. Both slice endpoints are nondecreasing in `x`, so for
//! `x in [x_i, x_{i+1}]` every slice interval lies inside
//! `[l(x_i), r(x_{i+1})]` and contains `[l(x_{i+1}), r(x_i)]`.

use std::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::EnvelopeSelector;
use crate::error::{Error, Result};
use crate::geometry::SegmentConvention;
use crate::interval::IntervalSet;
use crate::pattern::{Pattern, SquareAddress};
use crate::quaternary::{ratio_to_f64, GridRational};
use crate::rng;

/// Integer arithmetic used by the exact predicates; `i128` first, `BigInt`
/// when an intermediate would overflow.
trait Exact:
    Clone + Ord + Zero + One + CheckedAdd + CheckedSub + CheckedMul + From<u64> + std::fmt::Debug
{
}

impl Exact for i128 {}
impl Exact for BigInt {}

fn lift<T: Exact>(v: u64) -> T {
    T::from(v)
}

/// `x = X / D`, `y = Y / D` with `D > 0`.
#[derive(Clone, Debug)]
struct LineQuery<T> {
    x: T,
    y: T,
    den: T,
}

impl LineQuery<BigInt> {
    fn new(x: &BigRational, y: &BigRational) -> Self {
        let den = x.denom().lcm(y.denom());
        LineQuery {
            x: x.numer() * (&den / x.denom()),
            y: y.numer() * (&den / y.denom()),
            den,
        }
    }

    fn narrow(&self) -> Option<LineQuery<i128>> {
        Some(LineQuery {
            x: self.x.to_i128()?,
            y: self.y.to_i128()?,
            den: self.den.to_i128()?,
        })
    }
}

/// Does the line `a + b x = y` in parameter space meet the square with
/// `a in [col, col + 1] / scale`, `b in [row, row + 1] / scale`?
/// `None` on overflow.
fn meets<T: Exact>(q: &LineQuery<T>, col: &T, row: &T, scale: &T) -> Option<bool> {
    let one = T::one();
    let x_nonneg = q.x >= T::zero();
    let (b_lo, b_hi) = if x_nonneg {
        (row.clone(), row.checked_add(&one)?)
    } else {
        (row.checked_add(&one)?, row.clone())
    };
    let ys = q.y.checked_mul(scale)?;
    let lo = col
        .checked_mul(&q.den)?
        .checked_add(&b_lo.checked_mul(&q.x)?)?
        .checked_sub(&ys)?;
    if lo > T::zero() {
        return Some(false);
    }
    let hi = col
        .checked_add(&one)?
        .checked_mul(&q.den)?
        .checked_add(&b_hi.checked_mul(&q.x)?)?
        .checked_sub(&ys)?;
    Some(hi >= T::zero())
}

/// Depth-first descent through the retained squares, visiting children
/// only when the parent square meets the line.
fn descend<T: Exact>(pattern: &Pattern, q: &LineQuery<T>, level: u32) -> Option<bool> {
    let m: T = lift(pattern.order() as u64);
    let mut stack: Vec<(T, T, T, u32)> = vec![(T::zero(), T::zero(), T::one(), 0)];
    while let Some((col, row, scale, depth)) = stack.pop() {
        if !meets(q, &col, &row, &scale)? {
            continue;
        }
        if depth == level {
            return Some(true);
        }
        let child_scale = scale.checked_mul(&m)?;
        for r in 0..pattern.order() {
            let c = col
                .checked_mul(&m)?
                .checked_add(&lift(pattern.sigma()[r as usize] as u64))?;
            let y = row
                .checked_mul(&m)?
                .checked_add(&lift(pattern.y_digit(r) as u64))?;
            stack.push((c, y, child_scale.clone(), depth + 1));
        }
    }
    Some(false)
}

/// Whether `(x, y)` lies in `L(F_n)`, i.e. the parameter line
/// `{(a, b) : a + b x = y}` meets a level-`n` square. Exact.
pub fn stab_exact(pattern: &Pattern, x: &BigRational, y: &BigRational, level: u32) -> bool {
    let q = LineQuery::new(x, y);
    if let Some(hit) = q.narrow().and_then(|small| descend(pattern, &small, level)) {
        return hit;
    }
    descend(pattern, &q, level).expect("BigInt arithmetic does not overflow")
}

/// [`stab_exact`] at the exact values of two finite floats.
pub fn stab(pattern: &Pattern, x: f64, y: f64, level: u32) -> bool {
    match (BigRational::from_float(x), BigRational::from_float(y)) {
        (Some(x), Some(y)) => stab_exact(pattern, &x, &y, level),
        _ => false,
    }
}

/// Slice intervals scaled by `m^n * D`.
fn scaled_slice<T: Exact>(
    squares: &[SquareAddress],
    den: &T,
    x_left: &T,
    x_right: &T,
) -> Option<IntervalSet<T>> {
    // [a0 D + b0 X_left, (a0 + 1) D + (b0 + 1) X_right] in units of 1/(m^n D)
    let one = T::one();
    let intervals = squares
        .iter()
        .map(|sq| {
            let a: T = lift(sq.x_index());
            let b: T = lift(sq.y_index());
            let lo = a.checked_mul(den)?.checked_add(&b.checked_mul(x_left)?)?;
            let hi = a
                .checked_add(&one)?
                .checked_mul(den)?
                .checked_add(&b.checked_add(&one)?.checked_mul(x_right)?)?;
            Some((lo, hi))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(IntervalSet::from_intervals(intervals))
}

/// Total length of `{ [a0 + b0 x_left, a0 + d + (b0 + d) x_right] }` over the
/// given squares, as a numerator over `m^n * den`. With
/// `x_left == x_right` this is the slice of `L(F_n)` at `x`.
fn band_numerator(squares: &[SquareAddress], den: u64, x_left: u64, x_right: u64) -> BigInt {
    if let Some(set) = scaled_slice::<i128>(
        squares,
        &(den as i128),
        &(x_left as i128),
        &(x_right as i128),
    ) {
        return BigInt::from(set.total_length());
    }
    let set = scaled_slice::<BigInt>(squares, &den.into(), &x_left.into(), &x_right.into())
        .expect("BigInt arithmetic does not overflow");
    set.total_length()
}

fn cells(pattern: &Pattern, level: u32) -> Result<BigInt> {
    Ok(BigInt::from(pattern.box_count(level)?))
}

/// Exact length of the slice of `L(F_n)` at `x >= 0`.
pub fn slice_union_length(pattern: &Pattern, x: &BigRational, level: u32) -> Result<BigRational> {
    if x.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "slice abscissa {x} must be nonnegative"
        )));
    }
    let squares = pattern.squares(level)?;
    let den = x.denom().clone();
    let num = x.numer().clone();
    let total = match (den.to_u64(), num.to_u64()) {
        (Some(d), Some(n)) => band_numerator(&squares, d, n, n),
        _ => scaled_slice::<BigInt>(&squares, &den, &num, &num)
            .expect("BigInt arithmetic does not overflow")
            .total_length(),
    };
    Ok(BigRational::new(total, cells(pattern, level)? * den))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaMethod {
    Sweep,
    MonteCarlo,
}

impl AreaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AreaMethod::Sweep => "sweep",
            AreaMethod::MonteCarlo => "montecarlo",
        }
    }
}

/// Area of `L(F_n)` over the window `0 <= x <= 1`.
#[derive(Clone, Debug, Serialize)]
pub struct AreaReport {
    pub level: u32,
    /// Lattice size `K` for the sweep, point count `N` for Monte Carlo.
    pub x_samples: usize,
    pub area_estimate: f64,
    /// Sweep: rigorous bounds. Monte Carlo: the 95% Wilson interval.
    pub guaranteed_lower: f64,
    pub guaranteed_upper: f64,
    pub method: AreaMethod,
    pub seed: Option<u64>,
    /// Exact trapezoid value as `p/q` (sweep only).
    pub exact_estimate: Option<String>,
}

/// Trapezoid estimate and rigorous bounds from exact slices on the lattice
/// `x_i = i / (K - 1)`.
pub fn area_upper(pattern: &Pattern, level: u32, lattice: usize) -> Result<AreaReport> {
    if lattice < 2 {
        return Err(Error::InvalidArgument(
            "the x lattice needs at least two points".into(),
        ));
    }
    let squares = pattern.squares(level)?;
    let steps = (lattice - 1) as u64;
    let slices: Vec<BigInt> = (0..lattice as u64)
        .into_par_iter()
        .map(|i| band_numerator(&squares, steps, i, i))
        .collect();
    let outer: Vec<BigInt> = (0..steps)
        .into_par_iter()
        .map(|i| band_numerator(&squares, steps, i, i + 1))
        .collect();
    let inner: Vec<BigInt> = (0..steps)
        .into_par_iter()
        .map(|i| band_numerator(&squares, steps, i + 1, i))
        .collect();

    // slice lengths are numerators over m^n * (K - 1)
    let unit = cells(pattern, level)? * BigInt::from(steps) * BigInt::from(steps);
    let ends = &slices[0] + &slices[lattice - 1];
    let doubled: BigInt = slices.iter().sum::<BigInt>() * 2 - ends;
    let trapezoid = BigRational::new(doubled, &unit * 2);
    let upper = BigRational::new(outer.iter().sum(), unit.clone());
    let lower = BigRational::new(inner.iter().sum(), unit);

    Ok(AreaReport {
        level,
        x_samples: lattice,
        area_estimate: ratio_to_f64(&trapezoid),
        guaranteed_lower: ratio_to_f64(&lower),
        guaranteed_upper: ratio_to_f64(&upper),
        method: AreaMethod::Sweep,
        seed: None,
        exact_estimate: Some(format!("{}/{}", trapezoid.numer(), trapezoid.denom())),
    })
}

/// Height of the sampling box `[0, 1] x [0, 2]`; every slice of `L(F_0)`
/// over the window lies in `[0, 2]`.
pub const MC_BOX_HEIGHT: f64 = 2.0;

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits / trials`.
pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if hits == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if hits == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Monte Carlo estimate: fraction of uniform points of the box that stab
/// `F_n`, scaled by the box area. Points are dyadic (53-bit), so every stab
/// is decided exactly.
pub fn area_mc(pattern: &Pattern, level: u32, points: usize, seed: u64) -> Result<AreaReport> {
    if points == 0 {
        return Err(Error::NoSamples);
    }
    let chunks: Vec<(u64, usize)> = rng::chunks(points).collect();
    let den = 1i128 << 53;
    let hits: u64 = chunks
        .into_par_iter()
        .map(|(chunk, count)| {
            let mut r = rng::stream(seed, chunk);
            let mut hits = 0u64;
            for _ in 0..count {
                let x = (r.random::<u64>() >> 11) as i128;
                let y = 2 * (r.random::<u64>() >> 11) as i128;
                let q = LineQuery { x, y, den };
                let hit = descend(pattern, &q, level).unwrap_or_else(|| {
                    let big = LineQuery {
                        x: BigInt::from(x),
                        y: BigInt::from(y),
                        den: BigInt::from(den),
                    };
                    descend(pattern, &big, level).expect("BigInt arithmetic does not overflow")
                });
                hits += hit as u64;
            }
            hits
        })
        .sum();
    let (lo, hi) = wilson_interval(hits, points as u64);
    Ok(AreaReport {
        level,
        x_samples: points,
        area_estimate: MC_BOX_HEIGHT * hits as f64 / points as f64,
        guaranteed_lower: MC_BOX_HEIGHT * lo,
        guaranteed_upper: MC_BOX_HEIGHT * hi,
        method: AreaMethod::MonteCarlo,
        seed: Some(seed),
        exact_estimate: None,
    })
}

/// One sweep report per level `0..=max_level`.
pub fn decay_table(pattern: &Pattern, max_level: u32, lattice: usize) -> Result<Vec<AreaReport>> {
    (0..=max_level)
        .map(|n| area_upper(pattern, n, lattice))
        .collect()
}

/// `n,area_estimate,guaranteed_upper,K,method,seed`.
pub fn decay_csv(reports: &[AreaReport]) -> String {
    let mut out = String::from("n,area_estimate,guaranteed_upper,K,method,seed\n");
    for r in reports {
        writeln!(
            out,
            "{},{:.12},{:.12},{},{},{}",
            r.level,
            r.area_estimate,
            r.guaranteed_upper,
            r.x_samples,
            r.method.as_str(),
            r.seed.map(|s| s.to_string()).unwrap_or_default()
        )
        .expect("writing to a String");
    }
    out
}

/// Slopes `round(j * 4^8 / (S - 1)) / 4^8` for `j = 0..S`, spanning `[0, 1]`.
pub const SLOPE_RESOLUTION: u32 = 8;

pub fn coverage_slopes(base: u32, count: usize) -> Vec<GridRational> {
    let cells = (base as u64).pow(SLOPE_RESOLUTION);
    (0..count)
        .map(|j| {
            let p = if count <= 1 {
                0
            } else {
                ((j as u128 * cells as u128 * 2 + (count - 1) as u128) / (2 * (count - 1) as u128))
                    as u64
            };
            GridRational::new(p, SLOPE_RESOLUTION, base).expect("base validated")
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageFailure {
    pub slope: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub level: u32,
    pub slopes: usize,
    pub points_per_needle: usize,
    pub convention: SegmentConvention,
    pub checked: usize,
    pub failures: Vec<CoverageFailure>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `floor(v * 2^40) / 2^40`.
fn dyadic_floor(v: f64) -> BigRational {
    let scaled = (v * (1u64 << 40) as f64).floor() as i64;
    BigRational::new(BigInt::from(scaled), BigInt::from(1u64 << 40))
}

/// Samples `points` points along each needle and checks they lie in
/// `L(F_n)`. Points are placed exactly on the needle's line, at dyadic
/// abscissas within the needle.
pub fn coverage_check(
    selector: &EnvelopeSelector,
    slopes: usize,
    points: usize,
    level: u32,
    convention: SegmentConvention,
) -> Result<CoverageReport> {
    if slopes == 0 || points == 0 {
        return Err(Error::NoSamples);
    }
    let pattern = selector.pattern();
    let ts = coverage_slopes(pattern.order(), slopes);
    let per_slope: Vec<Vec<CoverageFailure>> = ts
        .par_iter()
        .map(|t| -> Result<Vec<CoverageFailure>> {
            let a = selector.g_exact(t)?;
            let b = t.to_ratio();
            // horizontal extent of a unit needle of slope b
            let extent = 1.0 / 1.0f64.hypot(ratio_to_f64(&b));
            let mut failures = Vec::new();
            for k in 0..points {
                let u = if points == 1 {
                    0.0
                } else {
                    k as f64 / (points - 1) as f64
                };
                let run = dyadic_floor(u * extent);
                let (x, y) = match convention {
                    SegmentConvention::Dual => (run.clone(), &a + &b * &run),
                    SegmentConvention::Literal => (&a + &run, &b * &run),
                };
                if !stab_exact(pattern, &x, &y, level) {
                    failures.push(CoverageFailure {
                        slope: format!("{}/{}", b.numer(), b.denom()),
                        x: ratio_to_f64(&x),
                        y: ratio_to_f64(&y),
                    });
                }
            }
            Ok(failures)
        })
        .collect::<Result<_>>()?;
    Ok(CoverageReport {
        level,
        slopes,
        points_per_needle: points,
        convention,
        checked: slopes * points,
        failures: per_slope.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::stab_by_scan;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn std_pattern() -> Pattern {
        Pattern::standard()
    }

    #[test]
    fn stab_examples() {
        let p = std_pattern();
        for n in [0, 3, 12, 20] {
            assert!(stab_exact(&p, &q(0, 1), &q(1, 3), n));
            assert!(!stab_exact(&p, &q(0, 1), &q(-1, 1), n));
        }
        // on the line of needle(1/2): y = 1/12 + x/2
        let y = q(1, 12) + q(1, 2) * q(1, 2);
        for n in 0..=12 {
            assert!(stab_exact(&p, &q(1, 2), &y, n));
        }
        assert!(stab(&p, 0.0, 0.5, 6));
        assert!(!stab(&p, 0.5, 1.6, 0));
    }

    #[test]
    fn stab_falls_back_to_bigint() {
        // denominators far beyond i128
        let x = BigRational::new(1.into(), BigInt::from(3u32).pow(90));
        let y = q(1, 3) + q(1, 3) * &x;
        assert!(stab_exact(&std_pattern(), &x, &y, 8));
        assert!(stab_exact(&std_pattern(), &q(0, 1), &q(1, 3), 70));
    }

    #[test]
    fn stab_matches_scan_and_is_monotone() {
        let p = std_pattern();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..400 {
            let n = rng.random_range(0..=5u32);
            let x = q(rng.random_range(-64..=128), 64);
            let y = q(rng.random_range(-16..=160), 64);
            let fast = stab_exact(&p, &x, &y, n);
            assert_eq!(
                fast,
                stab_by_scan(&p, &x, &y, n).unwrap(),
                "x {x} y {y} n {n}"
            );
            if fast && n > 0 {
                assert!(stab_exact(&p, &x, &y, n - 1));
            }
        }
    }

    #[test]
    fn slice_examples() {
        let p = std_pattern();
        for n in 0..=5 {
            assert_eq!(slice_union_length(&p, &q(0, 1), n).unwrap(), q(1, 1));
        }
        assert_eq!(slice_union_length(&p, &q(1, 1), 1).unwrap(), q(3, 2));
        assert_eq!(slice_union_length(&p, &q(1, 1), 0).unwrap(), q(2, 1));
        assert!(slice_union_length(&p, &q(-1, 2), 1).is_err());
    }

    #[test]
    fn slice_matches_rational_merge() {
        let p = std_pattern();
        for n in 0..=3 {
            for x in [q(1, 3), q(5, 7), q(1, 1)] {
                let d = q(1, 4i64.pow(n));
                let direct = IntervalSet::from_intervals(
                    p.squares(n)
                        .unwrap()
                        .iter()
                        .map(|sq| (sq.x0() + sq.y0() * &x, sq.x0() + &d + (sq.y0() + &d) * &x)),
                )
                .total_length();
                assert_eq!(slice_union_length(&p, &x, n).unwrap(), direct);
            }
        }
    }

    #[test]
    fn slices_shrink_with_level() {
        let p = std_pattern();
        for i in 0..=16 {
            let x = q(i, 16);
            let mut prev = slice_union_length(&p, &x, 0).unwrap();
            for n in 1..=5 {
                let cur = slice_union_length(&p, &x, n).unwrap();
                assert!(cur <= prev);
                prev = cur;
            }
        }
    }

    #[test]
    fn area_of_full_beam() {
        let r = area_upper(&std_pattern(), 0, 2).unwrap();
        assert_eq!(r.exact_estimate.as_deref(), Some("3/2"));
        assert!(r.guaranteed_upper >= 1.5);
        assert!(r.guaranteed_lower <= 1.5);
        let r = area_upper(&std_pattern(), 1, 65).unwrap();
        assert!(r.area_estimate < 1.5);
        assert!(area_upper(&std_pattern(), 1, 1).is_err());
    }

    #[test]
    fn decay_is_monotone() {
        let rows = decay_table(&std_pattern(), 4, 33).unwrap();
        assert_eq!(rows.len(), 5);
        for w in rows.windows(2) {
            assert!(w[1].area_estimate < w[0].area_estimate);
            assert!(w[1].guaranteed_upper <= w[0].guaranteed_upper);
        }
        for r in &rows {
            assert!(r.guaranteed_lower <= r.area_estimate && r.area_estimate <= r.guaranteed_upper);
        }
        let csv = decay_csv(&rows[..1]);
        assert_eq!(
            csv,
            "n,area_estimate,guaranteed_upper,K,method,seed\n0,1.500000000000,1.515625000000,33,sweep,\n"
        );
        assert_eq!(decay_table(&std_pattern(), 0, 5).unwrap().len(), 1);
    }

    #[test]
    fn monte_carlo_full_beam_and_errors() {
        let r = area_mc(&std_pattern(), 0, 20_000, 3).unwrap();
        assert!(
            r.guaranteed_lower <= 1.5 && 1.5 <= r.guaranteed_upper,
            "{r:?}"
        );
        assert!(matches!(
            area_mc(&std_pattern(), 0, 0, 3),
            Err(Error::NoSamples)
        ));
        let again = area_mc(&std_pattern(), 0, 20_000, 3).unwrap();
        assert_eq!(r.area_estimate, again.area_estimate);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
    }

    #[test]
    fn coverage_examples() {
        let sel = EnvelopeSelector::new(std_pattern());
        let slopes = coverage_slopes(4, 3);
        assert_eq!(
            slopes.iter().map(|s| s.to_ratio()).collect::<Vec<_>>(),
            vec![q(0, 1), q(1, 2), q(1, 1)]
        );
        let r = coverage_check(&sel, 3, 100, 10, SegmentConvention::Dual).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.checked, 300);
        let r = coverage_check(&sel, 3, 100, 0, SegmentConvention::Literal).unwrap();
        assert!(r.passed());
        let r = coverage_check(&sel, 3, 100, 10, SegmentConvention::Literal).unwrap();
        assert!(!r.passed());
    }
}
