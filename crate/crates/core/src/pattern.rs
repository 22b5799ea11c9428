//! The retained-square pattern and the self-similar set it generates.
//!
//! A pattern of order `m` keeps exactly one of the `m` subsquares in every
//! row of an `m x m` grid, described by a permutation `sigma: row -> column`.
//! Iterating the rule gives the level-`n` approximation `F_n`, a union of
//! `m^n` closed squares of side `m^-n`, and the attractor `F` is their
//! intersection.

use std::fmt::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PatternError, Result};
use crate::interval::IntervalSet;
use crate::quaternary::{expansions, GridRational};

/// Deepest level that is ever materialised square by square.
pub const DEFAULT_LEVEL_CAP: u32 = 10;

/// Which way the pattern's rows are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowOrientation {
    /// Row 0 is `y in [0, 1/m]`.
    #[default]
    Bottom,
    /// Row 0 is `y in [1 - 1/m, 1]`.
    Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    sigma: Vec<u32>,
    orientation: RowOrientation,
}

/// Checks that `sigma` is a permutation of `0..sigma.len()`.
pub fn validate_pattern(sigma: &[u32]) -> std::result::Result<(), PatternError> {
    let order = sigma.len();
    if order < 2 {
        return Err(PatternError::OrderTooSmall(order));
    }
    let mut seen: Vec<Option<usize>> = vec![None; order];
    for (row, &col) in sigma.iter().enumerate() {
        let slot =
            seen.get_mut(col as usize)
                .ok_or(PatternError::OutOfRange { row, col, order })?;
        if let Some(first) = *slot {
            return Err(PatternError::DuplicateColumn {
                col,
                first,
                second: row,
            });
        }
        *slot = Some(row);
    }
    Ok(())
}

impl Pattern {
    /// The 4x4 pattern keeping columns 1, 3, 0, 2 in rows 0..4.
    pub fn standard() -> Self {
        Pattern {
            sigma: vec![1, 3, 0, 2],
            orientation: RowOrientation::Bottom,
        }
    }

    pub fn new(sigma: Vec<u32>) -> std::result::Result<Self, PatternError> {
        validate_pattern(&sigma)?;
        Ok(Pattern {
            sigma,
            orientation: RowOrientation::Bottom,
        })
    }

    /// Skips validation. Only the projection and enumeration queries are
    /// meaningful on such a pattern; they are used to show what breaks when
    /// `sigma` is not a bijection.
    pub fn new_unchecked(sigma: Vec<u32>) -> Self {
        assert!(sigma.len() >= 2, "grid order must be at least 2");
        assert!(
            sigma.iter().all(|&c| (c as usize) < sigma.len()),
            "columns must be in range"
        );
        Pattern {
            sigma,
            orientation: RowOrientation::Bottom,
        }
    }

    pub fn with_orientation(mut self, orientation: RowOrientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn validate(&self) -> std::result::Result<(), PatternError> {
        validate_pattern(&self.sigma)
    }

    pub fn order(&self) -> u32 {
        self.sigma.len() as u32
    }

    pub fn sigma(&self) -> &[u32] {
        &self.sigma
    }

    pub fn orientation(&self) -> RowOrientation {
        self.orientation
    }

    /// Base-`m` digit of `y` selected by row index `row`. The map is an
    /// involution, so it also converts a `y` digit back to a row.
    pub fn y_digit(&self, row: u32) -> u32 {
        match self.orientation {
            RowOrientation::Bottom => row,
            RowOrientation::Top => self.order() - 1 - row,
        }
    }

    /// The retained column for `y` digit `d`.
    pub fn column_for_y_digit(&self, d: u32) -> u32 {
        self.sigma[self.y_digit(d) as usize]
    }

    fn check_base(&self, t: &GridRational) -> Result<()> {
        if t.base() != self.order() {
            return Err(Error::BaseMismatch {
                expected: self.order(),
                got: t.base(),
            });
        }
        Ok(())
    }

    fn cells(&self, level: u32) -> Result<u64> {
        (self.order() as u64)
            .checked_pow(level)
            .ok_or(Error::ResourceLimit {
                level,
                cap: (64.0 / (self.order() as f64).log2()) as u32,
            })
    }

    /// All level-`n` squares of `F_n`, sorted lexicographically by row
    /// digits, refusing levels above [`DEFAULT_LEVEL_CAP`].
    pub fn squares(&self, level: u32) -> Result<Vec<SquareAddress>> {
        self.squares_capped(level, DEFAULT_LEVEL_CAP)
    }

    pub fn squares_capped(&self, level: u32, cap: u32) -> Result<Vec<SquareAddress>> {
        if level > cap {
            return Err(Error::ResourceLimit { level, cap });
        }
        self.cells(level)?;
        let m = self.order() as u64;
        let mut current = vec![SquareAddress {
            base: self.order(),
            level: 0,
            row: 0,
            col: 0,
            y: 0,
        }];
        for _ in 0..level {
            let mut next = Vec::with_capacity(current.len() * m as usize);
            for parent in &current {
                for r in 0..self.order() {
                    next.push(SquareAddress {
                        base: self.order(),
                        level: parent.level + 1,
                        row: parent.row * m + r as u64,
                        col: parent.col * m + self.sigma[r as usize] as u64,
                        y: parent.y * m + self.y_digit(r) as u64,
                    });
                }
            }
            current = next;
        }
        Ok(current)
    }

    /// Whether `(x, y)` lies in the closed set `F_n`.
    pub fn contains(&self, x: &GridRational, y: &GridRational, level: u32) -> Result<bool> {
        self.check_base(x)?;
        self.check_base(y)?;
        let xs = expansions(x)?;
        let ys = expansions(y)?;
        let n = level as usize;
        Ok(ys.iter().any(|ey| {
            let y_digits = ey.digits(n);
            xs.iter().any(|ex| {
                y_digits
                    .iter()
                    .enumerate()
                    .all(|(i, &d)| ex.digit(i + 1) == self.column_for_y_digit(d))
            })
        }))
    }

    /// Digit-stream form of [`Pattern::contains`] for points given by one
    /// expansion of each coordinate.
    pub fn contains_digits(&self, x_digits: &[u32], y_digits: &[u32], level: u32) -> Result<bool> {
        let n = level as usize;
        for digits in [x_digits, y_digits] {
            if digits.len() < n {
                return Err(Error::InsufficientDigits {
                    needed: n,
                    got: digits.len(),
                });
            }
            if let Some(&d) = digits[..n].iter().find(|&&d| d >= self.order()) {
                return Err(Error::DigitOutOfRange {
                    digit: d,
                    base: self.order(),
                });
            }
        }
        Ok((0..n).all(|i| x_digits[i] == self.column_for_y_digit(y_digits[i])))
    }

    /// Membership of an arbitrary rational point in `F_n`, by locating the
    /// one or two closed cells of side `m^-n` that contain each coordinate.
    pub fn contains_point(&self, x: &BigRational, y: &BigRational, level: u32) -> Result<bool> {
        let cells = self.cells(level)?;
        let (Some(xs), Some(ys)) = (cell_candidates(x, cells), cell_candidates(y, cells)) else {
            return Ok(false);
        };
        let m = self.order() as u64;
        Ok(ys.iter().any(|&j| {
            let (mut rest, mut col, mut scale) = (j, 0u64, 1u64);
            for _ in 0..level {
                col += self.column_for_y_digit((rest % m) as u32) as u64 * scale;
                rest /= m;
                scale *= m;
            }
            xs.contains(&col)
        }))
    }

    /// Exact projection of `F_n` onto an axis.
    pub fn project(&self, axis: Axis, level: u32) -> Result<IntervalSet<BigRational>> {
        let squares = self.squares(level)?;
        Ok(IntervalSet::from_intervals(squares.iter().map(|sq| {
            let lo = match axis {
                Axis::X => sq.x0(),
                Axis::Y => sq.y0(),
            };
            let hi = lo.clone() + sq.side();
            (lo, hi)
        })))
    }

    /// Number of level-`n` squares, `m^n`.
    pub fn box_count(&self, level: u32) -> Result<u64> {
        self.cells(level)
    }

    /// `log N(n) / log m^n`; identically 1 for one-square-per-row patterns.
    pub fn box_dimension(&self, level: u32) -> Result<f64> {
        if level == 0 {
            return Err(Error::InvalidArgument(
                "box dimension needs a positive level".into(),
            ));
        }
        let count = self.box_count(level)? as f64;
        Ok(count.ln() / (level as f64 * (self.order() as f64).ln()))
    }
}

/// A level-`n` square of `F_n`.
/// Indices `i` of the closed cells `[i / cells, (i + 1) / cells]` holding
/// `v`, or `None` outside `[0, 1]`.
fn cell_candidates(v: &BigRational, cells: u64) -> Option<Vec<u64>> {
    use num_traits::{ToPrimitive, Zero};
    if v < &BigRational::zero() || v > &BigRational::from_integer(1.into()) {
        return None;
    }
    let scaled = v * BigRational::from_integer(cells.into());
    let floor = scaled.floor().to_integer().to_u64()?;
    let mut out = Vec::with_capacity(2);
    if floor < cells {
        out.push(floor);
    }
    if scaled.is_integer() && floor > 0 {
        out.push(floor - 1);
    }
    Some(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SquareAddress {
    base: u32,
    level: u32,
    /// Row digits packed in base `m`, most significant first.
    row: u64,
    /// Column digits packed the same way; also the `x` index of the square.
    col: u64,
    /// Index of the square along `y`.
    y: u64,
}

fn unpack(mut packed: u64, base: u32, len: u32) -> Vec<u32> {
    let mut digits = vec![0; len as usize];
    for slot in digits.iter_mut().rev() {
        *slot = (packed % base as u64) as u32;
        packed /= base as u64;
    }
    digits
}

impl SquareAddress {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn row_digits(&self) -> Vec<u32> {
        unpack(self.row, self.base, self.level)
    }

    pub fn col_digits(&self) -> Vec<u32> {
        unpack(self.col, self.base, self.level)
    }

    pub fn x_index(&self) -> u64 {
        self.col
    }

    pub fn y_index(&self) -> u64 {
        self.y
    }

    pub fn x0_grid(&self) -> GridRational {
        GridRational::new(self.col, self.level, self.base).expect("base validated")
    }

    pub fn y0_grid(&self) -> GridRational {
        GridRational::new(self.y, self.level, self.base).expect("base validated")
    }

    pub fn side_grid(&self) -> GridRational {
        GridRational::new(1u32, self.level, self.base).expect("base validated")
    }

    pub fn x0(&self) -> BigRational {
        self.x0_grid().to_ratio()
    }

    pub fn y0(&self) -> BigRational {
        self.y0_grid().to_ratio()
    }

    pub fn side(&self) -> BigRational {
        self.side_grid().to_ratio()
    }

    /// Closed-square membership.
    pub fn contains(&self, x: &BigRational, y: &BigRational) -> bool {
        let (x0, y0, side) = (self.x0(), self.y0(), self.side());
        &x0 <= x && x <= &(&x0 + &side) && &y0 <= y && y <= &(&y0 + &side)
    }

    /// Whether `other` (at a deeper level) lies inside this square.
    pub fn encloses(&self, other: &SquareAddress) -> bool {
        if other.level < self.level || other.base != self.base {
            return false;
        }
        let shift = (self.base as u64).pow(other.level - self.level);
        other.col / shift == self.col && other.y / shift == self.y
    }
}

fn digit_string(digits: &[u32], base: u32) -> String {
    if base <= 10 {
        digits.iter().map(|d| char::from(b'0' + *d as u8)).collect()
    } else {
        digits
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// CSV with columns `level,row_digits,col_digits,x0,y0,side`; coordinates
/// are exact `p/m^k` strings.
pub fn squares_csv(squares: &[SquareAddress]) -> String {
    let mut out = String::from("level,row_digits,col_digits,x0,y0,side\n");
    for sq in squares {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            sq.level,
            digit_string(&sq.row_digits(), sq.base),
            digit_string(&sq.col_digits(), sq.base),
            sq.x0_grid(),
            sq.y0_grid(),
            sq.side_grid()
        )
        .expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(p: u64, k: u32) -> GridRational {
        GridRational::new(p, k, 4).unwrap()
    }

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    /// Closed-square scan over the enumerated level.
    fn contains_by_scan(p: &Pattern, x: &GridRational, y: &GridRational, n: u32) -> bool {
        let (x, y) = (x.to_ratio(), y.to_ratio());
        p.squares(n).unwrap().iter().any(|sq| sq.contains(&x, &y))
    }

    #[test]
    fn validation() {
        assert_eq!(validate_pattern(&[1, 3, 0, 2]), Ok(()));
        assert_eq!(
            validate_pattern(&[1, 1, 0, 2]),
            Err(PatternError::DuplicateColumn {
                col: 1,
                first: 0,
                second: 1
            })
        );
        assert_eq!(validate_pattern(&[0, 1]), Ok(()));
        assert!(matches!(
            validate_pattern(&[0, 4, 1, 2]),
            Err(PatternError::OutOfRange { row: 1, col: 4, .. })
        ));
        assert_eq!(validate_pattern(&[0]), Err(PatternError::OrderTooSmall(1)));
    }

    #[test]
    fn level_zero_and_one() {
        let p = Pattern::standard();
        let s0 = p.squares(0).unwrap();
        assert_eq!(s0.len(), 1);
        assert_eq!(s0[0].side(), q(1, 1));

        let s1 = p.squares(1).unwrap();
        let rc: Vec<(Vec<u32>, Vec<u32>)> = s1
            .iter()
            .map(|s| (s.row_digits(), s.col_digits()))
            .collect();
        assert_eq!(
            rc,
            vec![
                (vec![0], vec![1]),
                (vec![1], vec![3]),
                (vec![2], vec![0]),
                (vec![3], vec![2]),
            ]
        );
    }

    #[test]
    fn level_two_origin_row() {
        let s2 = Pattern::standard().squares(2).unwrap();
        assert_eq!(s2.len(), 16);
        assert_eq!(s2[0].row_digits(), vec![0, 0]);
        assert_eq!(s2[0].col_digits(), vec![1, 1]);
        assert_eq!(s2[0].x0(), q(5, 16));
        // sorted by row digits
        let rows: Vec<_> = s2.iter().map(|s| s.row_digits()).collect();
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(rows, sorted);
    }

    #[test]
    fn top_orientation_flips_rows() {
        let p = Pattern::standard().with_orientation(RowOrientation::Top);
        let s1 = p.squares(1).unwrap();
        // row 0 is the top strip
        assert_eq!(s1[0].y0(), q(3, 4));
        assert_eq!(s1[0].x0(), q(1, 4));
        let xs = p.project(Axis::X, 3).unwrap();
        assert!(xs.is_interval(&q(0, 1), &q(1, 1)));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            Pattern::standard().squares(11),
            Err(Error::ResourceLimit { level: 11, cap: 10 })
        ));
        assert!(Pattern::standard().squares_capped(3, 2).is_err());
    }

    #[test]
    fn membership_examples() {
        let p = Pattern::standard();
        // 1/3 is not a grid rational; its digit stream is 1 forever
        for n in [1usize, 5, 20] {
            assert!(p
                .contains_digits(&vec![1; n], &vec![0; n], n as u32)
                .unwrap());
        }
        assert!(!p.contains(&g(0, 0), &g(0, 0), 1).unwrap());
        assert!(!contains_by_scan(&p, &g(0, 0), &g(0, 0), 1));
        assert!(p.contains(&g(0, 0), &g(0, 0), 0).unwrap());
        assert!(p.contains(&g(7, 3), &g(1, 1), 0).unwrap());
        assert!(matches!(
            p.contains_digits(&[1], &[0, 0], 2),
            Err(Error::InsufficientDigits { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn third_is_bracketed_by_member_squares() {
        // (1/3, 0) is in every F_n: the enclosing level-n square at the
        // bottom row has left edge sum 4^-i and right edge one ulp higher
        let p = Pattern::standard();
        let third = q(1, 3);
        for n in 1..=6 {
            let hit = p
                .squares(n)
                .unwrap()
                .into_iter()
                .any(|sq| sq.contains(&third, &q(0, 1)));
            assert!(hit, "level {n}");
        }
    }

    #[test]
    fn projections_full_for_valid_patterns() {
        for sigma in [
            vec![1, 3, 0, 2],
            vec![0, 1],
            vec![2, 0, 1],
            vec![3, 2, 1, 0],
        ] {
            let p = Pattern::new(sigma).unwrap();
            for n in 0..=5 {
                for axis in [Axis::X, Axis::Y] {
                    assert!(p.project(axis, n).unwrap().is_interval(&q(0, 1), &q(1, 1)));
                }
            }
        }
    }

    #[test]
    fn projection_gap_without_surjectivity() {
        let p = Pattern::new_unchecked(vec![1, 1, 0, 2]);
        let xs = p.project(Axis::X, 1).unwrap();
        assert_eq!(xs.total_length(), q(3, 4));
        assert!(!xs.contains(&q(7, 8)));
    }

    #[test]
    fn box_counts() {
        let p = Pattern::standard();
        assert_eq!(p.box_count(0).unwrap(), 1);
        assert_eq!(p.box_count(2).unwrap(), 16);
        assert_eq!(p.box_count(5).unwrap(), 1024);
        assert_eq!(
            p.box_count(5).unwrap() as usize,
            p.squares(5).unwrap().len()
        );
        assert!((p.box_dimension(7).unwrap() - 1.0).abs() < 1e-12);
        assert!(p.box_count(40).is_err());
    }

    #[test]
    fn refinement() {
        let p = Pattern::standard();
        for n in 0..5 {
            let coarse = p.squares(n).unwrap();
            for fine in p.squares(n + 1).unwrap() {
                let parents = coarse.iter().filter(|c| c.encloses(&fine)).count();
                assert_eq!(parents, 1);
            }
        }
    }

    #[test]
    fn contains_matches_scan_on_random_points() {
        let p = Pattern::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(0..=6u32);
            let k = rng.random_range(0..=8u32);
            // bias towards points near F by sampling square corners too
            let (x, y) = if rng.random_bool(0.5) {
                let squares = p.squares(n.min(4)).unwrap();
                let sq = squares[rng.random_range(0..squares.len())];
                let kk = sq.level() + 2;
                let dx = rng.random_range(0..=16u64);
                let dy = rng.random_range(0..=16u64);
                let scale = 16u64;
                (
                    g(sq.x_index() * scale + dx, kk),
                    g(sq.y_index() * scale + dy, kk),
                )
            } else {
                (
                    g(rng.random_range(0..=4u64.pow(k)), k),
                    g(rng.random_range(0..=4u64.pow(k)), k),
                )
            };
            let fast = p.contains(&x, &y, n).unwrap();
            assert_eq!(
                fast,
                contains_by_scan(&p, &x, &y, n),
                "({x}, {y}) level {n}"
            );
            assert_eq!(
                fast,
                p.contains_point(&x.to_ratio(), &y.to_ratio(), n).unwrap()
            );
            if fast && n > 0 {
                assert!(p.contains(&x, &y, n - 1).unwrap());
            }
        }
    }

    #[test]
    fn rational_points_off_the_grid() {
        let p = Pattern::standard();
        for n in 0..=12 {
            // (1/3, 0) is the left end of the bottom row at every level
            assert!(p.contains_point(&q(1, 3), &q(0, 1), n).unwrap());
            assert!(p.contains_point(&q(2, 3), &q(1, 1), n).unwrap());
        }
        assert!(!p.contains_point(&q(1, 3), &q(1, 1), 1).unwrap());
        assert!(!p.contains_point(&q(-1, 3), &q(0, 1), 0).unwrap());
        assert!(p.contains_point(&q(1, 2), &q(1, 1), 40).is_err());
    }

    #[test]
    fn csv_emit() {
        let csv = squares_csv(&Pattern::standard().squares(1).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,row_digits,col_digits,x0,y0,side");
        assert_eq!(lines[1], "1,0,1,1/4^1,0/4^0,1/4^1");
        assert_eq!(lines.len(), 5);
        let csv0 = squares_csv(&Pattern::standard().squares(0).unwrap());
        assert_eq!(csv0.lines().nth(1), Some("0,,,0/4^0,0/4^0,1/4^0"));
    }
}
