//! Unit needles on dual lines, the Hausdorff metric on segments and the
//! 8-piece direction atlas.
//!
//! The point `(a, b)` is dual to the line `y = a + b x`. The segment map
//! places a unit needle of slope `b` on that line, starting at `(0, a)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::EnvelopeSelector;
use crate::error::{Error, Result};
use crate::quaternary::{ratio_to_f64, GridRational};
use crate::rng;

pub type Point = [f64; 2];

/// Where the needle of parameters `(a, b)` starts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentConvention {
    /// At `(0, a)`, on the dual line `y = a + b x`.
    #[default]
    Dual,
    /// At `(a, 0)`. Not on the dual line; kept for comparison.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub p0: Point,
    pub p1: Point,
    /// `(a, b)` when the segment lies on the dual line `y = a + b x`.
    pub dual: Option<(f64, f64)>,
}

impl Segment {
    pub fn new(p0: Point, p1: Point) -> Self {
        Segment { p0, p1, dual: None }
    }

    pub fn length(&self) -> f64 {
        (self.p1[0] - self.p0[0]).hypot(self.p1[1] - self.p0[1])
    }

    /// Direction of `p1 - p0` in `[0, 2 pi)`.
    pub fn angle(&self) -> f64 {
        let a = (self.p1[1] - self.p0[1]).atan2(self.p1[0] - self.p0[0]);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    /// `p0 + u (p1 - p0)`.
    pub fn point_at(&self, u: f64) -> Point {
        [
            self.p0[0] + u * (self.p1[0] - self.p0[0]),
            self.p0[1] + u * (self.p1[1] - self.p0[1]),
        ]
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Segment {
        Segment::new(f(self.p0), f(self.p1))
    }
}

/// The unit needle with parameters `(a, b)`, direction `(1, b) / |(1, b)|`.
pub fn segment(a: f64, b: f64, convention: SegmentConvention) -> Segment {
    let norm = 1.0f64.hypot(b);
    let (ux, uy) = (1.0 / norm, b / norm);
    match convention {
        SegmentConvention::Dual => Segment {
            p0: [0.0, a],
            p1: [ux, a + uy],
            dual: Some((a, b)),
        },
        SegmentConvention::Literal => Segment {
            p0: [a, 0.0],
            p1: [a + ux, uy],
            dual: None,
        },
    }
}

pub fn point_segment_distance(p: Point, s: &Segment) -> f64 {
    let d = [s.p1[0] - s.p0[0], s.p1[1] - s.p0[1]];
    let w = [p[0] - s.p0[0], p[1] - s.p0[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let u = if len2 > 0.0 {
        ((w[0] * d[0] + w[1] * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (w[0] - u * d[0]).hypot(w[1] - u * d[1])
}

/// Hausdorff distance between two segments. Distance to a convex set is a
/// convex function, so each one-sided supremum is attained at an endpoint.
pub fn hausdorff(s1: &Segment, s2: &Segment) -> f64 {
    [
        point_segment_distance(s1.p0, s2),
        point_segment_distance(s1.p1, s2),
        point_segment_distance(s2.p0, s1),
        point_segment_distance(s2.p1, s1),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Outcome of sampling `d_H(l(a, b), l(a', b')) / (|a - a'| + |b - b'|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzCertificate {
    pub constant: f64,
    pub sample_count: usize,
    /// Pairs with a zero denominator.
    pub skipped: usize,
    pub max_ratio: f64,
    pub seed: u64,
}

impl LipschitzCertificate {
    /// Constant claimed for the segment map: moving the start by `|da|` and
    /// the unit direction by at most `|db|` moves each endpoint by at most
    /// `|da| + |db|`.
    pub const CONSTANT: f64 = 1.0;
    pub const SLACK: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        self.max_ratio <= self.constant + Self::SLACK
    }
}

/// `None` for coincident parameters.
pub fn lipschitz_ratio(p: (f64, f64), q: (f64, f64), convention: SegmentConvention) -> Option<f64> {
    let denom = (p.0 - q.0).abs() + (p.1 - q.1).abs();
    if denom == 0.0 {
        return None;
    }
    let d = hausdorff(
        &segment(p.0, p.1, convention),
        &segment(q.0, q.1, convention),
    );
    Some(d / denom)
}

/// Draws `pairs` parameter pairs uniformly from `[0, 1]^2 x [0, 1]^2`.
pub fn lipschitz_scan(
    pairs: usize,
    seed: u64,
    convention: SegmentConvention,
) -> Result<LipschitzCertificate> {
    if pairs == 0 {
        return Err(Error::NoSamples);
    }
    let chunks: Vec<(u64, usize)> = rng::chunks(pairs).collect();
    let partial: Vec<(f64, usize)> = chunks
        .into_par_iter()
        .map(|(chunk, count)| {
            let mut r = rng::stream(seed, chunk);
            let mut max_ratio = 0.0f64;
            let mut skipped = 0;
            for _ in 0..count {
                let p = (r.random::<f64>(), r.random::<f64>());
                let q = (r.random::<f64>(), r.random::<f64>());
                match lipschitz_ratio(p, q, convention) {
                    Some(ratio) => max_ratio = max_ratio.max(ratio),
                    None => skipped += 1,
                }
            }
            (max_ratio, skipped)
        })
        .collect();
    Ok(LipschitzCertificate {
        constant: LipschitzCertificate::CONSTANT,
        sample_count: pairs,
        skipped: partial.iter().map(|p| p.1).sum(),
        max_ratio: partial.iter().map(|p| p.0).fold(0.0, f64::max),
        seed,
    })
}

/// The needle of slope `t` selected by the envelope, with its exact
/// parameters `(g(t), t)`.
#[derive(Clone, Debug)]
pub struct Needle {
    pub t: GridRational,
    pub intercept: BigRational,
    pub slope: BigRational,
    pub segment: Segment,
}

impl Needle {
    /// Unnormalised direction `(1, t)`.
    pub fn direction(&self) -> (BigRational, BigRational) {
        (
            BigRational::from_integer(BigInt::from(1)),
            self.slope.clone(),
        )
    }

    /// `dy / dx` of the unnormalised direction, in exact arithmetic.
    pub fn exact_slope(&self) -> BigRational {
        let (dx, dy) = self.direction();
        dy / dx
    }
}

pub fn needle(
    selector: &EnvelopeSelector,
    t: &GridRational,
    convention: SegmentConvention,
) -> Result<Needle> {
    let intercept = selector.g_exact(t)?;
    let slope = t.to_ratio();
    let segment = segment(ratio_to_f64(&intercept), ratio_to_f64(&slope), convention);
    Ok(Needle {
        t: t.clone(),
        intercept,
        slope,
        segment,
    })
}

/// Needles for a slope known only through its first `depth` digits: the
/// slope is the truncated value and the intercept ranges over the bracket.
pub fn needle_bracket(
    selector: &EnvelopeSelector,
    digits: &[u32],
    depth: u32,
    convention: SegmentConvention,
) -> Result<(Segment, Segment)> {
    let (lo, hi) = selector.g_bracket(digits, depth)?;
    let m = selector.pattern().order();
    let slope = GridRational::from_digits(&digits[..depth as usize], m)?.to_f64();
    Ok((
        segment(ratio_to_f64(&lo), slope, convention),
        segment(ratio_to_f64(&hi), slope, convention),
    ))
}

/// Grid rational equal to `t` when the base is a power of two, otherwise the
/// floor of `t` at 40 digits.
pub fn grid_from_f64(t: f64, base: u32) -> Result<GridRational> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfUnitInterval {
            value: t.to_string(),
        });
    }
    if let Some(g) = GridRational::from_f64(t, base) {
        return Ok(g);
    }
    let scaled = BigRational::from_float(t).expect("finite")
        * BigRational::from_integer(BigInt::from(crate::quaternary::pow(base, 40)));
    let numer = scaled
        .floor()
        .to_integer()
        .to_biguint()
        .expect("nonnegative");
    GridRational::new(numer, 40, base)
}

/// One of the eight symmetries of the square, as a linear map of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Symmetry {
    Identity,
    SwapXY,
    Rotate90,
    FlipX,
    Rotate180,
    AntiSwap,
    Rotate270,
    FlipY,
}

impl Symmetry {
    pub fn apply(self, [x, y]: Point) -> Point {
        match self {
            Symmetry::Identity => [x, y],
            Symmetry::SwapXY => [y, x],
            Symmetry::Rotate90 => [-y, x],
            Symmetry::FlipX => [-x, y],
            Symmetry::Rotate180 => [-x, -y],
            Symmetry::AntiSwap => [-y, -x],
            Symmetry::Rotate270 => [y, -x],
            Symmetry::FlipY => [x, -y],
        }
    }
}

/// Piece `k` covers directions in the closed octant `[k pi/4, (k+1) pi/4]`;
/// its symmetry maps base slope angles `[0, pi/4]` onto that octant.
pub const ATLAS: [Symmetry; 8] = [
    Symmetry::Identity,
    Symmetry::SwapXY,
    Symmetry::Rotate90,
    Symmetry::FlipX,
    Symmetry::Rotate180,
    Symmetry::AntiSwap,
    Symmetry::Rotate270,
    Symmetry::FlipY,
];

#[derive(Clone, Debug)]
pub struct StitchPiece {
    pub theta: f64,
    pub piece: usize,
    pub t: f64,
    pub segment: Segment,
}

/// Octant of `theta` (reduced mod `2 pi`); directions on a boundary go to
/// the lower piece.
pub fn piece_for(theta: f64) -> usize {
    let theta = theta.rem_euclid(TAU);
    let q = theta / FRAC_PI_4;
    if q <= 0.0 {
        0
    } else {
        (q.ceil() as usize - 1).min(7)
    }
}

/// Base slope for `theta` within its octant.
fn base_slope(piece: usize, theta: f64) -> f64 {
    let phi = match piece {
        0 => theta,
        1 => FRAC_PI_2 - theta,
        2 => theta - FRAC_PI_2,
        3 => PI - theta,
        4 => theta - PI,
        5 => 3.0 * FRAC_PI_2 - theta,
        6 => theta - 3.0 * FRAC_PI_2,
        _ => TAU - theta,
    };
    phi.tan().clamp(0.0, 1.0)
}

/// The needle of direction `theta`: the atlas symmetry of piece `k` applied
/// to the base needle of slope `t`.
pub fn stitch(
    selector: &EnvelopeSelector,
    theta: f64,
    convention: SegmentConvention,
) -> Result<StitchPiece> {
    let theta = theta.rem_euclid(TAU);
    let piece = piece_for(theta);
    stitch_piece(selector, theta, piece, convention)
}

/// Evaluates a given piece at `theta`, which must lie in that piece's octant.
pub fn stitch_piece(
    selector: &EnvelopeSelector,
    theta: f64,
    piece: usize,
    convention: SegmentConvention,
) -> Result<StitchPiece> {
    if piece >= 8 {
        return Err(Error::InvalidArgument(format!("piece {piece} out of 0..8")));
    }
    let t = base_slope(piece, theta);
    let t_grid = grid_from_f64(t, selector.pattern().order())?;
    let intercept = ratio_to_f64(&selector.g_exact(&t_grid)?);
    let base = segment(intercept, t, convention);
    let segment = base.map(|p| ATLAS[piece].apply(p));
    Ok(StitchPiece {
        theta,
        piece,
        t,
        segment,
    })
}

/// Absolute difference between two directions, in `[0, pi]`.
pub fn angle_error(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}
