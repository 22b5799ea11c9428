//! The left-envelope selector `g(t) = inf { x : (x, t) in F }`.
//!
//! Each row of `F` meets exactly one column per level, so the points of `F`
//! at height `t` are in one-to-one correspondence with the base-`m`
//! expansions of `t`: the `x` digits are the retained columns of the `y`
//! digits. A grid rational has at most two expansions, and `g(t)` is the
//! smaller of the two resulting `x` values, each with a constant tail that is
//! summed in closed form.
//!
//! `g` is lower semicontinuous. [`MoreauLattice`] evaluates the
//! infimal convolutions `g_n(t) = inf_s { g(s) + n |t - s| }` over a lattice,
//! a nondecreasing sequence of `n`-Lipschitz functions converging to `g`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::quaternary::{expansions, geometric_tail, ratio_to_f64, Expansion, GridRational, Tail};

/// `g(t)` at a grid rational together with the expansion of `t` attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeValue {
    pub t: GridRational,
    pub value: BigRational,
    pub witness: Expansion,
}

#[derive(Clone, Debug)]
pub struct EnvelopeSelector {
    pattern: Pattern,
}

impl EnvelopeSelector {
    pub fn new(pattern: Pattern) -> Self {
        EnvelopeSelector { pattern }
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    fn check(&self, t: &GridRational) -> Result<()> {
        if t.base() != self.pattern.order() {
            return Err(Error::BaseMismatch {
                expected: self.pattern.order(),
                got: t.base(),
            });
        }
        if !t.in_unit_interval() {
            return Err(Error::OutOfUnitInterval {
                value: t.to_string(),
            });
        }
        Ok(())
    }

    /// The `x` coordinate of the point of `F` whose `y` expansion is `e`.
    pub fn abscissa(&self, e: &Expansion) -> BigRational {
        let m = self.pattern.order();
        let cols: Vec<u32> = e
            .prefix
            .iter()
            .map(|&d| self.pattern.column_for_y_digit(d))
            .collect();
        let head = GridRational::from_digits(&cols, m)
            .expect("columns are digits")
            .to_ratio();
        let tail = geometric_tail(
            self.pattern.column_for_y_digit(e.tail_digit()),
            cols.len() as u32 + 1,
            m,
        )
        .expect("columns are digits");
        head + tail
    }

    pub fn evaluate(&self, t: &GridRational) -> Result<EnvelopeValue> {
        self.check(t)?;
        let (value, witness) = expansions(t)?
            .into_iter()
            .map(|e| (self.abscissa(&e), e))
            .min_by(|a, b| a.0.cmp(&b.0))
            .expect("every t in [0, 1] has an expansion");
        Ok(EnvelopeValue {
            t: t.clone(),
            value,
            witness,
        })
    }

    /// Exact `g(t)`.
    pub fn g_exact(&self, t: &GridRational) -> Result<BigRational> {
        Ok(self.evaluate(t)?.value)
    }

    /// Exact one-sided limits of `g` at `t`: the left limit comes from the
    /// expansion ending in `m - 1` forever, the right limit from the
    /// terminating one. Missing at the ends of `[0, 1]`.
    pub fn one_sided_limits(
        &self,
        t: &GridRational,
    ) -> Result<(Option<BigRational>, Option<BigRational>)> {
        self.check(t)?;
        let mut left = None;
        let mut right = None;
        for e in expansions(t)? {
            let x = self.abscissa(&e);
            match e.tail {
                Tail::RepeatingTop if !t.is_zero() => left = Some(x),
                Tail::Terminating if t < &GridRational::one(t.base()) => right = Some(x),
                _ => {}
            }
        }
        Ok((left, right))
    }

    /// Enclosure `[lo, lo + m^-n]` for the `x` value of the stream whose first
    /// `n` digits are given. When the stream is the only expansion of `t`
    /// (always the case off the grid) this encloses `g(t)`.
    pub fn g_bracket(&self, digits: &[u32], depth: u32) -> Result<(BigRational, BigRational)> {
        let m = self.pattern.order();
        let n = depth as usize;
        if digits.len() < n {
            return Err(Error::InsufficientDigits {
                needed: n,
                got: digits.len(),
            });
        }
        if let Some(&d) = digits[..n].iter().find(|&&d| d >= m) {
            return Err(Error::DigitOutOfRange { digit: d, base: m });
        }
        let cols: Vec<u32> = digits[..n]
            .iter()
            .map(|&d| self.pattern.column_for_y_digit(d))
            .collect();
        let lo = GridRational::from_digits(&cols, m)?.to_ratio();
        let hi = &lo + GridRational::new(1u32, depth, m)?.to_ratio();
        Ok((lo, hi))
    }

    /// Smallest left edge among the level-`n` squares whose closed `y` range
    /// contains `t`. Works on square indices only, never on expansions, so it
    /// is an independent check on [`EnvelopeSelector::g_exact`]:
    /// `oracle <= g(t) <= oracle + m^-n`.
    pub fn g_lower_oracle(&self, t: &GridRational, level: u32) -> Result<GridRational> {
        self.check(t)?;
        let m = self.pattern.order() as u64;
        let cells = m.checked_pow(level).ok_or(Error::ResourceLimit {
            level,
            cap: (64.0 / (m as f64).log2()) as u32,
        })?;
        // t * m^n = whole + frac
        let scaled = t.to_ratio() * BigRational::from_integer(BigInt::from(cells));
        let whole: u64 = scaled.floor().to_integer().try_into().expect("t in [0, 1]");
        let mut strips = Vec::with_capacity(2);
        if whole < cells {
            strips.push(whole);
        }
        if scaled.is_integer() && whole > 0 {
            strips.push(whole - 1);
        }
        let left_edge = |y_index: u64| -> u64 {
            // peel y digits least significant first
            let mut col = 0u64;
            let mut place = 1u64;
            let mut y = y_index;
            for _ in 0..level {
                let d = (y % m) as u32;
                col += self.pattern.column_for_y_digit(d) as u64 * place;
                place *= m;
                y /= m;
            }
            col
        };
        let best = strips
            .into_iter()
            .map(left_edge)
            .min()
            .expect("at least one strip contains t");
        GridRational::new(best, level, m as u32)
    }

    /// Probes `g` at `t +- m^-j` for the last three depths `j <= depth` and
    /// compares them with `g(t)` and with the exact one-sided limits.
    pub fn lsc_probe(&self, t: &GridRational, depth: u32, tol: f64) -> Result<LscReport> {
        let (left_limit, right_limit) = self.one_sided_limits(t)?;
        let mut report = lsc_probe_with(t, depth, tol, |s| {
            self.g_exact(s).expect("probe stays in [0, 1]")
        })?;

        let m = self.pattern.order();
        let near = |limit: &Option<BigRational>, samples: &[(u32, BigRational)]| {
            limit.as_ref().is_none_or(|l| {
                samples.iter().all(|(j, v)| {
                    let width = GridRational::new(1u32, j - 1, m)
                        .expect("base validated")
                        .to_ratio();
                    (v - l).abs() <= width
                })
            })
        };
        let limits_bracket_samples =
            near(&left_limit, &report.left_samples) && near(&right_limit, &report.right_samples);
        let min_limit = [&left_limit, &right_limit]
            .into_iter()
            .flatten()
            .min()
            .cloned();
        let value_is_min_limit = min_limit.as_ref().is_none_or(|l| l == &report.g_value);

        report.left_limit = left_limit;
        report.right_limit = right_limit;
        report.exact_ok = limits_bracket_samples && value_is_min_limit;
        Ok(report)
    }
}

#[derive(Clone, Debug)]
pub struct LscReport {
    pub t: GridRational,
    pub g_value: BigRational,
    /// Smallest sampled value among the deepest left probes.
    pub left_liminf: Option<f64>,
    pub right_liminf: Option<f64>,
    pub left_samples: Vec<(u32, BigRational)>,
    pub right_samples: Vec<(u32, BigRational)>,
    pub left_limit: Option<BigRational>,
    pub right_limit: Option<BigRational>,
    /// Sampled liminfs are at least `g(t) - tol`.
    pub lsc_ok: bool,
    /// Samples lie within `m^-(j-1)` of the exact one-sided limits and
    /// `g(t)` equals the smaller limit. Always true when no limits are known.
    pub exact_ok: bool,
}

impl LscReport {
    pub fn passed(&self) -> bool {
        self.lsc_ok && self.exact_ok
    }
}

/// Lower-semicontinuity probe for an arbitrary selector.
pub fn lsc_probe_with(
    t: &GridRational,
    depth: u32,
    tol: f64,
    g: impl Fn(&GridRational) -> BigRational,
) -> Result<LscReport> {
    if depth < 1 {
        return Err(Error::InvalidArgument(
            "probe depth must be positive".into(),
        ));
    }
    let g_value = g(t);
    let one = GridRational::one(t.base());
    let mut left_samples = Vec::new();
    let mut right_samples = Vec::new();
    for j in depth.saturating_sub(2).max(1)..=depth {
        if let Some(s) = t.sub_ulp(j) {
            left_samples.push((j, g(&s)));
        }
        let s = t.add_ulp(j);
        if s <= one {
            right_samples.push((j, g(&s)));
        }
    }
    let liminf = |samples: &[(u32, BigRational)]| {
        samples
            .iter()
            .map(|(_, v)| ratio_to_f64(v))
            .min_by(f64::total_cmp)
    };
    let left_liminf = liminf(&left_samples);
    let right_liminf = liminf(&right_samples);
    let floor = ratio_to_f64(&g_value) - tol;
    let lsc_ok = [left_liminf, right_liminf]
        .into_iter()
        .flatten()
        .all(|v| v >= floor);
    Ok(LscReport {
        t: t.clone(),
        g_value,
        left_liminf,
        right_liminf,
        left_samples,
        right_samples,
        left_limit: None,
        right_limit: None,
        lsc_ok,
        exact_ok: true,
    })
}

/// `g` tabulated on the lattice `j / m^L`, for evaluating the infimal
/// convolutions `g_n(t) = min_j { g(s_j) + n |t - s_j| }`.
#[derive(Clone, Debug)]
pub struct MoreauLattice {
    log_spacing: u32,
    spacing: f64,
    values: Vec<f64>,
}

impl MoreauLattice {
    pub fn new(selector: &EnvelopeSelector, log_spacing: u32) -> Result<Self> {
        let m = selector.pattern().order();
        let cells = (m as u64)
            .checked_pow(log_spacing)
            .filter(|&c| c <= 1 << 26)
            .ok_or(Error::ResourceLimit {
                level: log_spacing,
                cap: 26 / (m as f64).log2() as u32,
            })?;
        let values = (0..=cells)
            .into_par_iter()
            .map(|j| {
                let s = GridRational::new(j, log_spacing, m).expect("base validated");
                ratio_to_f64(&selector.g_exact(&s).expect("lattice inside [0, 1]"))
            })
            .collect();
        Ok(MoreauLattice {
            log_spacing,
            spacing: 1.0 / cells as f64,
            values,
        })
    }

    pub fn log_spacing(&self) -> u32 {
        self.log_spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `g_index(t)`. Lipschitz with constant `index`, nondecreasing in
    /// `index`, and at most `g(s) + index |t - s|` for every lattice `s`.
    pub fn eval(&self, index: f64, t: f64) -> f64 {
        assert!(index >= 0.0, "Lipschitz index must be nonnegative");
        let last = self.values.len() - 1;
        let nearest = ((t / self.spacing).round().max(0.0) as usize).min(last);
        let candidate = |j: usize| self.values[j] + index * (t - j as f64 * self.spacing).abs();
        let mut best = candidate(nearest);
        // g >= 0, so once the cone term alone reaches `best` nothing further out can win
        for j in (0..nearest).rev() {
            if index * (t - j as f64 * self.spacing).abs() >= best {
                break;
            }
            best = best.min(candidate(j));
        }
        for j in nearest + 1..=last {
            if index * (t - j as f64 * self.spacing).abs() >= best {
                break;
            }
            best = best.min(candidate(j));
        }
        best
    }
}

/// Sample points for the convergence check: one level-4 cell midpoint per
/// sample, `((floor(256 i / count) + 1/2) / 256)`. Midpoints sit `1/512` away
/// from every jump of size above `4^-4`, so `g_n` reaches `g` there once
/// `n >= 512`.
pub fn moreau_sample_points(count: usize) -> Vec<GridRational> {
    (0..count)
        .map(|i| {
            let cell = (256 * i / count.max(1)) as u64;
            GridRational::new(cell * 2 + 1, 9, 2)
                .and_then(|r| {
                    GridRational::from_ratio(&r.to_ratio(), 4)
                        .ok_or(Error::InvalidArgument("not a base-4 grid point".into()))
                })
                .expect("dyadic midpoints are base-4 grid rationals")
        })
        .collect()
}

/// Exact `(t, g(t))` rows over `t = j / m^k`.
pub fn g_table(
    selector: &EnvelopeSelector,
    resolution: u32,
) -> Result<Vec<(GridRational, BigRational)>> {
    let m = selector.pattern().order();
    let cells = (m as u64)
        .checked_pow(resolution)
        .ok_or(Error::ResourceLimit {
            level: resolution,
            cap: 20,
        })?;
    (0..=cells)
        .map(|j| {
            let t = GridRational::new(j, resolution, m)?;
            let v = selector.g_exact(&t)?;
            Ok((t, v))
        })
        .collect()
}

/// Formats a rational as `p/q`, including integers (`0/1`, `1/1`).
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `true` when `value` lies in the closed unit interval.
pub fn in_unit(value: &BigRational) -> bool {
    value >= &BigRational::zero() && value <= &BigRational::from_integer(1.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::RowOrientation;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn g(p: u64, k: u32) -> GridRational {
        GridRational::new(p, k, 4).unwrap()
    }

    fn sel() -> EnvelopeSelector {
        EnvelopeSelector::new(Pattern::standard())
    }

    /// Minimum left edge over a full scan of the level-`n` squares.
    fn oracle_by_scan(p: &Pattern, t: &GridRational, n: u32) -> BigRational {
        let t = t.to_ratio();
        p.squares(n)
            .unwrap()
            .into_iter()
            .filter(|sq| sq.y0() <= t && t <= sq.y0() + sq.side())
            .map(|sq| sq.x0())
            .min()
            .unwrap()
    }

    #[test]
    fn anchors() {
        let s = sel();
        assert_eq!(s.g_exact(&g(0, 0)).unwrap(), q(1, 3));
        assert_eq!(s.g_exact(&g(1, 1)).unwrap(), q(5, 12));
        assert_eq!(s.g_exact(&g(2, 1)).unwrap(), q(1, 12));
        assert_eq!(s.g_exact(&g(1, 0)).unwrap(), q(2, 3));
    }

    #[test]
    fn witness_expansions() {
        let v = sel().evaluate(&g(1, 1)).unwrap();
        assert_eq!(v.witness.prefix, vec![0]);
        assert_eq!(v.witness.tail, Tail::RepeatingTop);
        let v = sel().evaluate(&g(2, 1)).unwrap();
        assert_eq!(v.witness.prefix, vec![2]);
        assert_eq!(v.witness.tail, Tail::Terminating);
    }

    #[test]
    fn rejects_mismatched_base() {
        let t = GridRational::new(1u32, 1, 2).unwrap();
        assert!(matches!(
            sel().g_exact(&t),
            Err(Error::BaseMismatch {
                expected: 4,
                got: 2
            })
        ));
    }

    #[test]
    fn oracle_examples() {
        let s = sel();
        assert_eq!(s.g_lower_oracle(&g(0, 0), 1).unwrap(), g(1, 1));
        assert_eq!(s.g_lower_oracle(&g(0, 0), 2).unwrap(), g(5, 2));
        assert_eq!(s.g_lower_oracle(&g(1, 0), 1).unwrap(), g(2, 1));
        // values from an independent rational enumeration
        assert_eq!(
            s.g_lower_oracle(&g(0, 0), 6).unwrap().to_ratio(),
            q(1365, 4096)
        );
        assert_eq!(
            s.g_lower_oracle(&g(1, 1), 6).unwrap().to_ratio(),
            q(853, 2048)
        );
        assert_eq!(
            s.g_lower_oracle(&g(2, 1), 6).unwrap().to_ratio(),
            q(341, 4096)
        );
        assert_eq!(
            s.g_lower_oracle(&g(1, 0), 6).unwrap().to_ratio(),
            q(1365, 2048)
        );
    }

    #[test]
    fn index_oracle_matches_full_scan() {
        for pattern in [
            Pattern::standard(),
            Pattern::standard().with_orientation(RowOrientation::Top),
            Pattern::new(vec![2, 0, 1]).unwrap(),
        ] {
            let s = EnvelopeSelector::new(pattern.clone());
            let m = pattern.order();
            for n in 0..=4 {
                for j in 0..=(m as u64).pow(3) {
                    let t = GridRational::new(j, 3, m).unwrap();
                    assert_eq!(
                        s.g_lower_oracle(&t, n).unwrap().to_ratio(),
                        oracle_by_scan(&pattern, &t, n),
                        "t = {t}, n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn exact_values_within_oracle_brackets() {
        let s = sel();
        let width = g(1, 8).to_ratio();
        for j in 0..=4u64.pow(4) {
            let t = g(j, 4);
            let v = s.g_exact(&t).unwrap();
            let lo = s.g_lower_oracle(&t, 8).unwrap().to_ratio();
            assert!(lo <= v && v <= &lo + &width, "t = {t}");
        }
    }

    #[test]
    fn brackets() {
        let s = sel();
        assert_eq!(s.g_bracket(&[0, 0], 2).unwrap(), (q(5, 16), q(6, 16)));
        assert_eq!(s.g_bracket(&[3, 1, 2], 1).unwrap(), (q(2, 4), q(3, 4)));
        assert_eq!(s.g_bracket(&[], 0).unwrap(), (q(0, 1), q(1, 1)));
        assert!(matches!(
            s.g_bracket(&[1], 2),
            Err(Error::InsufficientDigits { needed: 2, got: 1 })
        ));
        let (lo, hi) = s.g_bracket(&[0; 10], 10).unwrap();
        assert!(lo <= q(1, 3) && q(1, 3) <= hi);
    }

    #[test]
    fn one_sided_limits_at_quarter_and_half() {
        let s = sel();
        let (l, r) = s.one_sided_limits(&g(1, 1)).unwrap();
        assert_eq!((l.unwrap(), r.unwrap()), (q(5, 12), q(5, 6)));
        let (l, r) = s.one_sided_limits(&g(2, 1)).unwrap();
        assert_eq!((l.unwrap(), r.unwrap()), (q(11, 12), q(1, 12)));
        let (l, r) = s.one_sided_limits(&g(0, 0)).unwrap();
        assert_eq!((l, r.unwrap()), (None, q(1, 3)));
    }

    #[test]
    fn lsc_probe_examples() {
        let s = sel();
        let rep = s.lsc_probe(&g(1, 1), 12, 1e-2).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.left_limit, Some(q(5, 12)));
        assert_eq!(rep.right_limit, Some(q(5, 6)));
        assert!((rep.left_liminf.unwrap() - 5.0 / 12.0).abs() < 1e-5);
        assert!((rep.right_liminf.unwrap() - 5.0 / 6.0).abs() < 1e-5);

        let rep = s.lsc_probe(&g(2, 1), 12, 1e-2).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.g_value, q(1, 12));

        // constant selector: nothing to violate
        let rep = lsc_probe_with(&g(1, 1), 12, 1e-2, |_| BigRational::zero()).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn lsc_probe_flags_an_upper_semicontinuous_selector() {
        // the pointwise max of the two limits is not lower semicontinuous
        let s = sel();
        let upper = |t: &GridRational| {
            let (l, r) = s.one_sided_limits(t).unwrap();
            [l, r].into_iter().flatten().max().unwrap()
        };
        let rep = lsc_probe_with(&g(2, 1), 12, 1e-2, upper).unwrap();
        assert!(!rep.lsc_ok);
    }

    #[test]
    fn values_stay_in_unit_interval() {
        let s = sel();
        let table = g_table(&s, 6).unwrap();
        assert_eq!(table.len(), 4097);
        assert!(table.iter().all(|(_, v)| in_unit(v)));
        let (t_max, v_max) = table.iter().max_by(|a, b| a.1.cmp(&b.1)).unwrap();
        // independent sweep with Python fractions
        assert_eq!(v_max, &q(12281, 12288));
        assert_eq!(t_max, &g(1365, 6));
        let v_min = table.iter().map(|(_, v)| v).min().unwrap();
        assert_eq!(v_min, &q(1, 12288));
    }

    #[test]
    fn table_rows() {
        let rows = g_table(&sel(), 0).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(ratio_string(&rows[0].1), "1/3");
        assert_eq!(ratio_string(&rows[1].1), "2/3");
        assert_eq!(ratio_string(&rows[0].0.to_ratio()), "0/1");
        assert_eq!(g_table(&sel(), 2).unwrap().len(), 17);
    }

    #[test]
    fn moreau_basics() {
        let s = sel();
        let lattice = MoreauLattice::new(&s, 6).unwrap();
        // s = 0 is a candidate
        assert!(lattice.eval(1.0, 0.0) <= 1.0 / 3.0 + 1e-15);
        let mut prev = f64::NEG_INFINITY;
        for e in 0..=10 {
            let v = lattice.eval(f64::from(1u32 << e), 0.0);
            assert!(v >= prev);
            prev = v;
        }
        assert!((prev - 1.0 / 3.0).abs() < 1e-2);
    }

    #[test]
    fn moreau_is_lipschitz_and_below_lattice_values() {
        let lattice = MoreauLattice::new(&sel(), 5).unwrap();
        let n = 64.0;
        let ts: Vec<f64> = (0..=500).map(|i| i as f64 / 500.0).collect();
        for w in ts.windows(2) {
            let d = (lattice.eval(n, w[1]) - lattice.eval(n, w[0])).abs();
            assert!(d <= n * (w[1] - w[0]) + 1e-12);
        }
        for (j, v) in lattice.values().iter().enumerate() {
            let t = j as f64 / 1024.0;
            assert!(lattice.eval(n, t) <= *v);
        }
    }

    #[test]
    fn moreau_sample_points_are_cell_midpoints() {
        let pts = moreau_sample_points(100);
        assert_eq!(pts.len(), 100);
        assert_eq!(pts[0].to_ratio(), q(1, 512));
        assert_eq!(pts[99].to_ratio(), q(2 * 253 + 1, 512));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }
}
