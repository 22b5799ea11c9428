//! The invariant suite behind `besicovitch verify`.
//!
//! [`MANIFEST`] lists every invariant the library promises, grouped by
//! module; [`verify`] runs one check per entry and never skips any. Reports
//! contain no timings or paths, so two runs with the same configuration
//! produce identical bytes.

use std::fmt::Write;

use besicovitch::envelope::{moreau_sample_points, ratio_string, MoreauLattice};
use besicovitch::geometry::{
    angle_error, hausdorff, lipschitz_scan, needle, segment, stitch, SegmentConvention,
};
use besicovitch::measure::{area_mc, area_upper, coverage_check, slice_union_length, stab_exact};
use besicovitch::oracle::{contains_by_scan, g_lower_by_scan, sampled_hausdorff, stab_by_scan};
use besicovitch::{expansions, rng, Axis, GridRational, Pattern, RowOrientation};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::Context;
use crate::error::CliError;

pub struct Invariant {
    pub id: &'static str,
    pub module: &'static str,
    pub statement: &'static str,
}

const fn inv(module: &'static str, id: &'static str, statement: &'static str) -> Invariant {
    Invariant {
        id,
        module,
        statement,
    }
}

pub const MANIFEST: &[Invariant] = &[
    inv(
        "exact-quaternary",
        "expansions",
        "every expansion of a grid rational sums to it; interior grid points have exactly two",
    ),
    inv(
        "exact-quaternary",
        "digit-round-trip",
        "digits -> rational -> digits is the identity up to trailing zeros",
    ),
    inv(
        "exact-quaternary",
        "ordering",
        "comparison agrees with cross-multiplied integers",
    ),
    inv(
        "pattern-ifs",
        "refinement",
        "each level n+1 square lies in exactly one level n square",
    ),
    inv(
        "pattern-ifs",
        "projections",
        "both projections of F_n are [0, 1] for every valid pattern",
    ),
    inv(
        "pattern-ifs",
        "membership-monotone",
        "membership at level n implies membership at level n-1",
    ),
    inv(
        "pattern-ifs",
        "membership-vs-scan",
        "digit membership agrees with a closed-square scan",
    ),
    inv(
        "envelope-selector",
        "exactness",
        "g(t) lies in [oracle, oracle + m^-n] from the level-n square oracle",
    ),
    inv("envelope-selector", "validity", "(g(t), t) lies in F_n"),
    inv(
        "envelope-selector",
        "minimality",
        "no level-n square over t starts left of g(t) - m^-n",
    ),
    inv(
        "envelope-selector",
        "moreau",
        "lattice approximants are nondecreasing in n and converge to g",
    ),
    inv(
        "envelope-selector",
        "lower-semicontinuity",
        "one-sided samples approach limits no smaller than g",
    ),
    inv("envelope-selector", "range", "g maps [0, 1] into [0, 1]"),
    inv(
        "dual-geometry",
        "hausdorff-metric",
        "segment distance is symmetric, zero on the diagonal and satisfies the triangle inequality",
    ),
    inv(
        "dual-geometry",
        "hausdorff-vs-sampling",
        "closed-form distance matches dense sampling",
    ),
    inv(
        "dual-geometry",
        "slope",
        "the needle of t has slope exactly t and unit length",
    ),
    inv(
        "dual-geometry",
        "lipschitz",
        "parameter-to-segment map is 1-Lipschitz for the l1 parameter norm",
    ),
    inv(
        "dual-geometry",
        "stitch",
        "every direction is realised, with one plateau per atlas piece",
    ),
    inv(
        "measure-lab",
        "slice-nested",
        "slices of L(F_n) shrink with n",
    ),
    inv(
        "measure-lab",
        "slice-at-zero",
        "the slice at x = 0 is the projection of F_n",
    ),
    inv(
        "measure-lab",
        "stab-vs-scan",
        "line-square stabbing agrees with a square scan and is monotone in n",
    ),
    inv(
        "measure-lab",
        "area-bounds",
        "sweep bounds bracket the estimate, shrink with n and meet the Monte Carlo interval",
    ),
    inv(
        "measure-lab",
        "coverage",
        "sampled needle points lie in L(F_n)",
    ),
];

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub module: &'static str,
    pub id: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub sigma: Vec<u32>,
    pub row_orientation: RowOrientation,
    pub segment_convention: SegmentConvention,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{status} {}/{}: {}", c.module, c.id, c.detail).unwrap();
        }
        let failed = self.failures().count();
        writeln!(out, "{} checks, {} failed", self.checks.len(), failed).unwrap();
        out
    }
}

type Outcome = Result<(bool, String), CliError>;

/// Runs every entry of [`MANIFEST`].
pub fn verify(ctx: &Context) -> VerifyReport {
    let checks = MANIFEST
        .par_iter()
        .enumerate()
        .map(|(i, inv)| {
            let mut rng = rng::stream(ctx.config.seed, 1 << 32 | i as u64);
            let (passed, detail) = match run(ctx, inv.id, &mut rng) {
                Ok(outcome) => outcome,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                module: inv.module,
                id: inv.id,
                statement: inv.statement,
                passed,
                detail,
            }
        })
        .collect();
    VerifyReport {
        sigma: ctx.config.sigma.clone(),
        row_orientation: ctx.config.row_orientation,
        segment_convention: ctx.config.segment_convention,
        seed: ctx.config.seed,
        checks,
    }
}

fn run(ctx: &Context, id: &str, rng: &mut ChaCha8Rng) -> Outcome {
    match id {
        "expansions" => expansions_sum(ctx),
        "digit-round-trip" => digit_round_trip(ctx, rng),
        "ordering" => ordering(ctx, rng),
        "refinement" => refinement(ctx),
        "projections" => projections(ctx),
        "membership-monotone" => membership_monotone(ctx, rng),
        "membership-vs-scan" => membership_vs_scan(ctx, rng),
        "exactness" => exactness(ctx),
        "validity" => validity(ctx, rng),
        "minimality" => minimality(ctx),
        "moreau" => moreau(ctx),
        "lower-semicontinuity" => lower_semicontinuity(ctx),
        "range" => range(ctx),
        "hausdorff-metric" => hausdorff_metric(ctx, rng),
        "hausdorff-vs-sampling" => hausdorff_vs_sampling(ctx, rng),
        "slope" => slope(ctx),
        "lipschitz" => lipschitz(ctx),
        "stitch" => stitch_directions(ctx),
        "slice-nested" => slice_nested(ctx),
        "slice-at-zero" => slice_at_zero(ctx),
        "stab-vs-scan" => stab_vs_scan(ctx, rng),
        "area-bounds" => area_bounds(ctx),
        "coverage" => coverage(ctx),
        other => unreachable!("no check registered for {other}"),
    }
}

fn m(ctx: &Context) -> u32 {
    ctx.pattern.order()
}

fn grid(ctx: &Context, k: u32) -> Vec<GridRational> {
    let cells = (m(ctx) as u64).pow(k);
    (0..=cells)
        .map(|j| GridRational::new(j, k, m(ctx)).expect("j <= m^k"))
        .collect()
}

fn random_grid(rng: &mut ChaCha8Rng, base: u32, max_k: u32) -> GridRational {
    let k = rng.random_range(0..=max_k);
    let j = rng.random_range(0..=(base as u64).pow(k));
    GridRational::new(j, k, base).expect("j <= m^k")
}

fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn f(r: &BigRational) -> f64 {
    r.to_f64().expect("finite")
}

fn first<T: std::fmt::Display>(bad: &[T]) -> String {
    bad.first()
        .map(|b| format!(", first {b}"))
        .unwrap_or_default()
}

// --- exact-quaternary ---

fn expansions_sum(ctx: &Context) -> Outcome {
    let one = GridRational::one(m(ctx));
    let mut bad = Vec::new();
    let points = grid(ctx, ctx.config.exactness_resolution);
    for t in &points {
        let es = expansions(t)?;
        let interior = !t.is_zero() && t < &one;
        let count_ok = es.len() == if interior { 2 } else { 1 };
        if !count_ok || es.iter().any(|e| e.value() != t.to_ratio()) {
            bad.push(t.to_string());
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} grid points, {} mismatches{}",
            points.len(),
            bad.len(),
            first(&bad)
        ),
    ))
}

fn digit_round_trip(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let base = m(ctx);
    let mut bad = 0;
    for _ in 0..ctx.config.random_samples {
        let len = rng.random_range(0..=16usize);
        let digits: Vec<u32> = (0..len).map(|_| rng.random_range(0..base)).collect();
        let t = GridRational::from_digits(&digits, base)?;
        let mut back = t.terminating_digits();
        back.resize(len, 0);
        let reparsed = GridRational::from_ratio(&t.to_ratio(), base);
        if back != digits || reparsed.as_ref() != Some(&t) {
            bad += 1;
        }
    }
    Ok((
        bad == 0,
        format!(
            "{} digit strings, {bad} mismatches",
            ctx.config.random_samples
        ),
    ))
}

fn ordering(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let base = m(ctx);
    let mut bad = 0;
    for _ in 0..ctx.config.random_samples {
        let a = random_grid(rng, base, 12);
        let b = random_grid(rng, base, 12);
        let lhs: BigUint = a.numer() * b.denom();
        let rhs: BigUint = b.numer() * a.denom();
        if a.cmp(&b) != lhs.cmp(&rhs) || (a == b) != (lhs == rhs) {
            bad += 1;
        }
    }
    Ok((
        bad == 0,
        format!("{} pairs, {bad} disagreements", ctx.config.random_samples),
    ))
}

// --- pattern-ifs ---

fn refinement(ctx: &Context) -> Outcome {
    let top = 5.min(ctx.config.level_cap.saturating_sub(1));
    let mut bad = 0;
    let mut pairs = 0u64;
    for n in 0..=top {
        let coarse = ctx.pattern.squares(n)?;
        let fine = ctx.pattern.squares(n + 1)?;
        for sq in &fine {
            pairs += coarse.len() as u64;
            if coarse.iter().filter(|c| c.encloses(sq)).count() != 1 {
                bad += 1;
            }
        }
    }
    Ok((
        bad == 0,
        format!(
            "levels 0..={}, {pairs} pairs, {bad} squares without a unique parent",
            top + 1
        ),
    ))
}

fn projections(ctx: &Context) -> Outcome {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut bad = Vec::new();
    let flipped = match ctx.pattern.orientation() {
        RowOrientation::Bottom => RowOrientation::Top,
        RowOrientation::Top => RowOrientation::Bottom,
    };
    let patterns = [
        ctx.pattern.clone(),
        ctx.pattern.clone().with_orientation(flipped),
        Pattern::new((0..m(ctx)).rev().collect()).map_err(besicovitch::Error::from)?,
    ];
    for (i, p) in patterns.iter().enumerate() {
        for n in 0..=6.min(ctx.config.level_cap) {
            for axis in [Axis::X, Axis::Y] {
                if !p.project(axis, n)?.is_interval(&zero, &one) {
                    bad.push(format!("pattern {i} level {n} {axis:?}"));
                }
            }
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} patterns, levels 0..=6, {} gaps{}",
            patterns.len(),
            bad.len(),
            first(&bad)
        ),
    ))
}

/// A point on the grid near `F_n` half the time, uniform otherwise.
fn random_point(
    ctx: &Context,
    rng: &mut ChaCha8Rng,
    max_level: u32,
) -> (GridRational, GridRational) {
    let base = m(ctx);
    if rng.random_bool(0.5) {
        let level = rng.random_range(0..=max_level.min(4));
        let squares = ctx.pattern.squares(level).expect("level below cap");
        let sq = squares[rng.random_range(0..squares.len())];
        let scale = (base as u64).pow(2);
        let dx = rng.random_range(0..=scale);
        let dy = rng.random_range(0..=scale);
        (
            GridRational::new(sq.x_index() * scale + dx, level + 2, base).expect("in range"),
            GridRational::new(sq.y_index() * scale + dy, level + 2, base).expect("in range"),
        )
    } else {
        (random_grid(rng, base, 8), random_grid(rng, base, 8))
    }
}

fn membership_monotone(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    const DEEPEST: u32 = 10;
    let mut bad = 0;
    // how many points survive to each level
    let mut survivors = [0usize; DEEPEST as usize + 1];
    for _ in 0..ctx.config.random_samples {
        let (x, y) = random_point(ctx, rng, 6);
        let mut prev = true;
        for n in 0..=DEEPEST {
            let now = ctx.pattern.contains(&x, &y, n)?;
            if now && !prev {
                bad += 1;
            }
            survivors[n as usize] += now as usize;
            prev = now;
        }
    }
    Ok((
        bad == 0,
        format!(
            "{} points, members per level 0..={DEEPEST}: {survivors:?}, {bad} violations",
            ctx.config.random_samples
        ),
    ))
}

fn membership_vs_scan(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    let mut inside = 0;
    for _ in 0..ctx.config.random_samples {
        let (x, y) = random_point(ctx, rng, 6);
        let n = rng.random_range(0..=6.min(ctx.config.level_cap));
        let fast = ctx.pattern.contains(&x, &y, n)?;
        let scan = contains_by_scan(&ctx.pattern, &x, &y, n)?;
        let point = ctx
            .pattern
            .contains_point(&x.to_ratio(), &y.to_ratio(), n)?;
        inside += fast as usize;
        if fast != scan || fast != point {
            bad += 1;
        }
    }
    Ok((
        bad == 0,
        format!(
            "{} points ({inside} inside), {bad} disagreements",
            ctx.config.random_samples
        ),
    ))
}

// --- envelope-selector ---

fn exactness(ctx: &Context) -> Outcome {
    let depth = ctx.config.oracle_depth;
    let width = GridRational::new(1u32, depth, m(ctx))?.to_ratio();
    let points = grid(ctx, ctx.config.exactness_resolution);
    let mut bad = Vec::new();
    for t in &points {
        let g = ctx.selector.g_exact(t)?;
        let lower = ctx.selector.g_lower_oracle(t, depth)?.to_ratio();
        if g < lower || g > &lower + &width {
            bad.push(t.to_string());
        }
    }
    let mut detail = format!(
        "{} points at depth {depth}, {} outside the bracket{}",
        points.len(),
        bad.len(),
        first(&bad)
    );
    let mut anchors_ok = true;
    if ctx.pattern == Pattern::standard() {
        let anchors = [
            ((0u32, 0u32), (1, 3)),
            ((1, 1), (5, 12)),
            ((1, 0), (2, 3)),
            ((2, 1), (1, 12)),
        ];
        for ((p, k), (num, den)) in anchors {
            let t = GridRational::new(p, k, 4)?;
            anchors_ok &= ctx.selector.g_exact(&t)? == rational(num, den);
        }
        detail.push_str(if anchors_ok {
            "; anchors match"
        } else {
            "; ANCHOR MISMATCH"
        });
    }
    Ok((bad.is_empty() && anchors_ok, detail))
}

fn validity(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let depth = ctx.config.oracle_depth;
    let mut bad = Vec::new();
    for _ in 0..ctx.config.random_samples {
        let t = random_grid(rng, m(ctx), depth);
        let g = ctx.selector.g_exact(&t)?;
        if !ctx.pattern.contains_point(&g, &t.to_ratio(), depth)? {
            bad.push(t.to_string());
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} random t at level {depth}, {} outside F_n{}",
            ctx.config.random_samples,
            bad.len(),
            first(&bad)
        ),
    ))
}

fn minimality(ctx: &Context) -> Outcome {
    // full square scan at a small level, index oracle at the configured depth
    let scan_level = 6.min(ctx.config.level_cap);
    let scan_width = GridRational::new(1u32, scan_level, m(ctx))?.to_ratio();
    let mut bad = Vec::new();
    let coarse = grid(ctx, 3.min(ctx.config.exactness_resolution));
    for t in &coarse {
        let g = ctx.selector.g_exact(t)?;
        let leftmost = g_lower_by_scan(&ctx.pattern, t, scan_level)?;
        let index = ctx.selector.g_lower_oracle(t, scan_level)?.to_ratio();
        if leftmost < &g - &scan_width || leftmost != index {
            bad.push(t.to_string());
        }
    }
    let depth = ctx.config.oracle_depth;
    let width = GridRational::new(1u32, depth, m(ctx))?.to_ratio();
    let fine = grid(ctx, ctx.config.exactness_resolution);
    for t in &fine {
        let g = ctx.selector.g_exact(t)?;
        if ctx.selector.g_lower_oracle(t, depth)?.to_ratio() < &g - &width {
            bad.push(t.to_string());
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} points scanned at level {scan_level}, {} at depth {depth}, {} violations{}",
            coarse.len(),
            fine.len(),
            bad.len(),
            first(&bad)
        ),
    ))
}

fn moreau(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let lattice = MoreauLattice::new(&ctx.selector, c.moreau_log_spacing)?;
    let mut indices = c.moreau_indices.clone();
    indices.sort_unstable();
    let last = *indices.last().ok_or(besicovitch::Error::NoSamples)? as f64;
    let mut not_monotone = 0;
    let mut worst = 0.0f64;
    for t in moreau_sample_points(c.moreau_samples) {
        let tf = t.to_f64();
        let values: Vec<f64> = indices
            .iter()
            .map(|&n| lattice.eval(n as f64, tf))
            .collect();
        if values.windows(2).any(|w| w[1] < w[0]) {
            not_monotone += 1;
        }
        let g = f(&ctx.selector.g_exact(&t)?);
        worst = worst.max((lattice.eval(last, tf) - g).abs());
    }
    Ok((
        not_monotone == 0 && worst <= c.tolerance,
        format!(
            "{} points, indices {:?}, {not_monotone} non-monotone, max error {worst:.3e} at n = {last} (tol {:e})",
            c.moreau_samples, indices, c.tolerance
        ),
    ))
}

fn lower_semicontinuity(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let points = grid(ctx, c.lsc_resolution);
    let mut bad = Vec::new();
    let mut jumps = 0;
    for t in &points {
        let report = ctx.selector.lsc_probe(t, c.lsc_depth, c.tolerance)?;
        let g = &report.g_value;
        jumps += [&report.left_limit, &report.right_limit]
            .iter()
            .filter(|l| l.as_ref().is_some_and(|l| l != g))
            .count();
        if !report.passed() {
            bad.push(t.to_string());
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} points, depth {}, {jumps} one-sided jumps, {} failures{}",
            points.len(),
            c.lsc_depth,
            bad.len(),
            first(&bad)
        ),
    ))
}

fn range(ctx: &Context) -> Outcome {
    let points = grid(ctx, ctx.config.exactness_resolution);
    let mut lo: Option<(BigRational, GridRational)> = None;
    let mut hi: Option<(BigRational, GridRational)> = None;
    for t in points {
        let g = ctx.selector.g_exact(&t)?;
        if lo.as_ref().is_none_or(|(v, _)| &g < v) {
            lo = Some((g.clone(), t.clone()));
        }
        if hi.as_ref().is_none_or(|(v, _)| &g > v) {
            hi = Some((g, t));
        }
    }
    let (lo, lo_at) = lo.ok_or(besicovitch::Error::NoSamples)?;
    let (hi, hi_at) = hi.ok_or(besicovitch::Error::NoSamples)?;
    Ok((
        lo >= BigRational::zero() && hi <= BigRational::one(),
        format!(
            "min {} at {lo_at}, max {} at {hi_at}",
            ratio_string(&lo),
            ratio_string(&hi)
        ),
    ))
}

// --- dual-geometry ---

fn random_params(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.random::<f64>(), rng.random::<f64>())
}

fn hausdorff_metric(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let conv = ctx.config.segment_convention;
    let mut bad = 0;
    let mut worst_triangle = f64::NEG_INFINITY;
    for _ in 0..ctx.config.random_samples {
        let [p, q, r] = [(); 3].map(|_| random_params(rng));
        let [s1, s2, s3] = [p, q, r].map(|(a, b)| segment(a, b, conv));
        let d12 = hausdorff(&s1, &s2);
        let excess = d12 - hausdorff(&s1, &s3) - hausdorff(&s3, &s2);
        worst_triangle = worst_triangle.max(excess);
        if hausdorff(&s1, &s1) != 0.0 || d12 != hausdorff(&s2, &s1) || d12 < 0.0 || excess > 1e-12 {
            bad += 1;
        }
    }
    Ok((
        bad == 0,
        format!(
            "{} triples, {bad} violations, max triangle excess {worst_triangle:.3e}",
            ctx.config.random_samples
        ),
    ))
}

/// Dense sampling puts every point within half a spacing of a sample.
pub const SAMPLED_HAUSDORFF_TOLERANCE: f64 = 2e-4;

fn hausdorff_vs_sampling(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let c = &ctx.config;
    let mut worst = 0.0f64;
    for _ in 0..c.hausdorff_pairs {
        let (p, q) = (random_params(rng), random_params(rng));
        let (s1, s2) = (
            segment(p.0, p.1, c.segment_convention),
            segment(q.0, q.1, c.segment_convention),
        );
        let exact = hausdorff(&s1, &s2);
        worst = worst.max((exact - sampled_hausdorff(&s1, &s2, c.hausdorff_samples)).abs());
    }
    Ok((
        worst <= SAMPLED_HAUSDORFF_TOLERANCE,
        format!(
            "{} pairs, {} samples each, max difference {worst:.3e} (tol {SAMPLED_HAUSDORFF_TOLERANCE:e})",
            c.hausdorff_pairs, c.hausdorff_samples
        ),
    ))
}

fn slope(ctx: &Context) -> Outcome {
    let conv = ctx.config.segment_convention;
    let points = grid(ctx, ctx.config.exactness_resolution);
    let mut bad = Vec::new();
    for t in &points {
        let nd = needle(&ctx.selector, t, conv)?;
        let s = nd.segment;
        let a = f(&nd.intercept);
        let anchored = match conv {
            SegmentConvention::Dual => s.p0 == [0.0, a],
            SegmentConvention::Literal => s.p0 == [a, 0.0],
        };
        let direction_ok = (s.p1[1] - s.p0[1]) / (s.p1[0] - s.p0[0]) - t.to_f64();
        if nd.exact_slope() != t.to_ratio()
            || (s.length() - 1.0).abs() > 1e-12
            || !anchored
            || direction_ok.abs() > 1e-12
        {
            bad.push(t.to_string());
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} needles, {} violations{}",
            points.len(),
            bad.len(),
            first(&bad)
        ),
    ))
}

fn lipschitz(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let cert = lipschitz_scan(c.lipschitz_pairs, c.seed, c.segment_convention)?;
    Ok((
        cert.holds(),
        format!(
            "{} pairs ({} coincident), max ratio {:.12} against C = {}",
            cert.sample_count, cert.skipped, cert.max_ratio, cert.constant
        ),
    ))
}

/// Directions must be realised to within this angle.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

fn stitch_directions(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let mut worst = 0.0f64;
    let mut plateaus = 0;
    let mut prev = None;
    for j in 0..c.stitch_directions {
        let theta = std::f64::consts::TAU * j as f64 / c.stitch_directions as f64;
        let sp = stitch(&ctx.selector, theta, c.segment_convention)?;
        worst = worst.max(angle_error(sp.segment.angle(), theta));
        if prev != Some(sp.piece) {
            plateaus += 1;
        }
        prev = Some(sp.piece);
    }
    Ok((
        worst <= ANGLE_TOLERANCE && plateaus == 8,
        format!(
            "{} directions, max angular error {worst:.3e}, {plateaus} plateaus",
            c.stitch_directions
        ),
    ))
}

// --- measure-lab ---

fn slice_nested(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let steps = (c.area_lattice - 1) as i64;
    let top = c.area_max_level.min(c.level_cap);
    let mut bad = Vec::new();
    for i in 0..=steps {
        let x = rational(i, steps);
        let mut prev = slice_union_length(&ctx.pattern, &x, 0)?;
        for n in 1..=top {
            let now = slice_union_length(&ctx.pattern, &x, n)?;
            if now > prev {
                bad.push(format!("x = {i}/{steps} level {n}"));
            }
            prev = now;
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{} abscissas, levels 0..={top}, {} increases{}",
            steps + 1,
            bad.len(),
            first(&bad)
        ),
    ))
}

fn slice_at_zero(ctx: &Context) -> Outcome {
    let mut bad = Vec::new();
    let top = ctx.config.area_max_level.min(ctx.config.level_cap);
    for n in 0..=top {
        let slice = slice_union_length(&ctx.pattern, &BigRational::zero(), n)?;
        let projected = ctx.pattern.project(Axis::X, n)?.total_length();
        if slice != projected || !slice.is_one() {
            bad.push(format!("level {n}: {}", ratio_string(&slice)));
        }
    }
    Ok((
        bad.is_empty(),
        format!("levels 0..={top}, {} mismatches{}", bad.len(), first(&bad)),
    ))
}

fn stab_vs_scan(ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    let mut hits = 0;
    let top = 6.min(ctx.config.level_cap);
    for _ in 0..ctx.config.random_samples {
        let x = rational(rng.random_range(0..=64), 64);
        let y = rational(rng.random_range(0..=128), 64);
        let n = rng.random_range(0..=top);
        let fast = stab_exact(&ctx.pattern, &x, &y, n);
        let scan = stab_by_scan(&ctx.pattern, &x, &y, n)?;
        if fast != scan || (fast && n > 0 && !stab_exact(&ctx.pattern, &x, &y, n - 1)) {
            bad += 1;
        }
        hits += fast as usize;
    }
    Ok((
        bad == 0,
        format!(
            "{} points ({hits} stabbed), levels 0..={top}, {bad} disagreements",
            ctx.config.random_samples
        ),
    ))
}

fn area_bounds(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let top = c.area_max_level.min(c.level_cap);
    let mut bad = Vec::new();
    let mut prev_upper = f64::INFINITY;
    let mut last = None;
    for n in 0..=top {
        let sweep = area_upper(&ctx.pattern, n, c.area_lattice)?;
        let mc = area_mc(&ctx.pattern, n, c.mc_points, c.seed)?;
        let bracketed = sweep.guaranteed_lower <= sweep.area_estimate
            && sweep.area_estimate <= sweep.guaranteed_upper;
        let shrinking = sweep.guaranteed_upper <= prev_upper;
        let overlap = mc.guaranteed_lower <= sweep.guaranteed_upper
            && sweep.guaranteed_lower <= mc.guaranteed_upper;
        if !(bracketed && shrinking && overlap && sweep.guaranteed_upper.is_finite()) {
            bad.push(format!("level {n}"));
        }
        prev_upper = sweep.guaranteed_upper;
        last = Some((sweep, mc));
    }
    let (sweep, mc) = last.ok_or(besicovitch::Error::NoSamples)?;
    Ok((
        bad.is_empty(),
        format!(
            "levels 0..={top}, K = {}, {} MC points; level {top}: sweep [{:.6}, {:.6}] estimate {:.6}, MC [{:.6}, {:.6}]; {} failures{}",
            c.area_lattice,
            c.mc_points,
            sweep.guaranteed_lower,
            sweep.guaranteed_upper,
            sweep.area_estimate,
            mc.guaranteed_lower,
            mc.guaranteed_upper,
            bad.len(),
            first(&bad)
        ),
    ))
}

fn coverage(ctx: &Context) -> Outcome {
    let c = &ctx.config;
    let report = coverage_check(
        &ctx.selector,
        c.coverage_slopes,
        c.coverage_points,
        c.coverage_level,
        c.segment_convention,
    )?;
    let mut detail = format!(
        "{} slopes x {} points at level {}, {} outside L(F_n)",
        report.slopes,
        report.points_per_needle,
        report.level,
        report.failures.len()
    );
    if let Some(fail) = report.failures.first() {
        write!(
            detail,
            ", first slope {} at ({}, {})",
            fail.slope, fail.x, fail.y
        )
        .unwrap();
    }
    Ok((report.passed(), detail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn manifest_ids_are_unique_and_registered() {
        let ids: HashSet<_> = MANIFEST.iter().map(|i| i.id).collect();
        assert_eq!(ids.len(), MANIFEST.len());
        let modules: HashSet<_> = MANIFEST.iter().map(|i| i.module).collect();
        assert_eq!(modules.len(), 5);
        let per = |m| MANIFEST.iter().filter(|i| i.module == m).count();
        assert_eq!(
            [
                per("exact-quaternary"),
                per("pattern-ifs"),
                per("envelope-selector"),
                per("dual-geometry"),
                per("measure-lab")
            ],
            [3, 4, 6, 5, 5]
        );
    }
}
