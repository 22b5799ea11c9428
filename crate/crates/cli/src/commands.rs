//! Artifact-producing subcommands. Each writes its files under the output
//! directory and returns their paths.

use std::f64::consts::TAU;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use besicovitch::envelope::{g_table, ratio_string, EnvelopeSelector};
use besicovitch::geometry::{self, needle, Segment};
use besicovitch::measure::{self, coverage_check, decay_csv, decay_table};
use besicovitch::pattern::squares_csv;
use besicovitch::{Error, GridRational, Pattern};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::svg;

/// A validated configuration with the objects every command needs.
pub struct Context {
    pub config: RunConfig,
    pub pattern: Pattern,
    pub selector: EnvelopeSelector,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        let pattern = config.pattern()?;
        let selector = EnvelopeSelector::new(pattern.clone());
        Ok(Context {
            config,
            pattern,
            selector,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.out
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let dir = self.out_dir();
        let io = |e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        };
        std::fs::create_dir_all(dir).map_err(io)?;
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        Ok(path)
    }

    fn check_level(&self, level: u32) -> Result<(), CliError> {
        if level > self.config.level_cap {
            return Err(Error::ResourceLimit {
                level,
                cap: self.config.level_cap,
            }
            .into());
        }
        Ok(())
    }

    fn grid(&self, resolution: u32) -> Result<Vec<GridRational>, CliError> {
        self.check_level(resolution)?;
        let m = self.pattern.order();
        let cells = (m as u64).pow(resolution);
        Ok((0..=cells)
            .map(|j| GridRational::new(j, resolution, m).expect("j <= m^k"))
            .collect())
    }
}

/// `squares_<n>.csv` and `squares_<n>.svg`.
pub fn construct(ctx: &Context, level: u32) -> Result<Vec<PathBuf>, CliError> {
    ctx.check_level(level)?;
    let squares = ctx.pattern.squares_capped(level, ctx.config.level_cap)?;
    Ok(vec![
        ctx.write(&format!("squares_{level}.csv"), &squares_csv(&squares))?,
        ctx.write(
            &format!("squares_{level}.svg"),
            &svg::squares(&squares, ctx.pattern.order(), level),
        )?,
    ])
}

/// `g_<k>.csv` with exact `t,g` rows over `t = j / m^k`, and a plot.
pub fn envelope(ctx: &Context, resolution: u32) -> Result<Vec<PathBuf>, CliError> {
    ctx.check_level(resolution)?;
    let rows = g_table(&ctx.selector, resolution)?;
    let mut csv = String::from("t,g\n");
    let mut plot = Vec::with_capacity(rows.len());
    for (t, g) in &rows {
        writeln!(csv, "{},{}", ratio_string(&t.to_ratio()), ratio_string(g)).unwrap();
        let (left, right) = ctx.selector.one_sided_limits(t)?;
        plot.push((
            t.to_f64(),
            to_f64(g),
            left.as_ref().map(to_f64),
            right.as_ref().map(to_f64),
        ));
    }
    Ok(vec![
        ctx.write(&format!("g_{resolution}.csv"), &csv)?,
        ctx.write(&format!("g_{resolution}.svg"), &svg::step_plot(&plot))?,
    ])
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("values in [0, 1] are finite")
}

/// `needles_<k>.csv`: one unit needle per slope `t = j / m^k`.
pub fn needles(ctx: &Context, resolution: u32) -> Result<Vec<PathBuf>, CliError> {
    let conv = ctx.config.segment_convention;
    let mut csv = String::from("t,x0,y0,x1,y1\n");
    let mut segs: Vec<Segment> = Vec::new();
    for t in ctx.grid(resolution)? {
        let nd = needle(&ctx.selector, &t, conv)?;
        let s = nd.segment;
        writeln!(
            csv,
            "{},{},{},{},{}",
            ratio_string(&t.to_ratio()),
            s.p0[0],
            s.p0[1],
            s.p1[0],
            s.p1[1]
        )
        .unwrap();
        segs.push(s);
    }
    Ok(vec![
        ctx.write(&format!("needles_{resolution}.csv"), &csv)?,
        ctx.write(&format!("needles_{resolution}.svg"), &svg::segments(&segs))?,
    ])
}

/// `stitch.csv`: the atlas piece and base slope for `directions` evenly
/// spaced angles.
pub fn stitch(ctx: &Context, directions: usize) -> Result<Vec<PathBuf>, CliError> {
    if directions == 0 {
        return Err(Error::NoSamples.into());
    }
    let conv = ctx.config.segment_convention;
    let mut csv = String::from("theta,piece,t,x0,y0,x1,y1\n");
    for j in 0..directions {
        let theta = TAU * j as f64 / directions as f64;
        let sp = geometry::stitch(&ctx.selector, theta, conv)?;
        let s = sp.segment;
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            sp.theta, sp.piece, sp.t, s.p0[0], s.p0[1], s.p1[0], s.p1[1]
        )
        .unwrap();
    }
    Ok(vec![ctx.write("stitch.csv", &csv)?])
}

/// `decay.csv`: sweep reports for levels `0..=max_level`, followed by Monte
/// Carlo reports when `mc_points` is given.
pub fn area(
    ctx: &Context,
    max_level: u32,
    lattice: usize,
    mc_points: Option<usize>,
) -> Result<Vec<PathBuf>, CliError> {
    ctx.check_level(max_level)?;
    let mut reports = decay_table(&ctx.pattern, max_level, lattice)?;
    if let Some(points) = mc_points {
        for n in 0..=max_level {
            reports.push(measure::area_mc(&ctx.pattern, n, points, ctx.config.seed)?);
        }
    }
    Ok(vec![ctx.write("decay.csv", &decay_csv(&reports))?])
}

/// `coverage.json`: needle points checked against the line set.
pub fn coverage(ctx: &Context) -> Result<(Vec<PathBuf>, bool), CliError> {
    let c = &ctx.config;
    let report = coverage_check(
        &ctx.selector,
        c.coverage_slopes,
        c.coverage_points,
        c.coverage_level,
        c.segment_convention,
    )?;
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    Ok((vec![ctx.write("coverage.json", &json)?], report.passed()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(dir: &Path) -> Context {
        Context::new(RunConfig {
            out: dir.to_path_buf(),
            ..RunConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn g_rows_per_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let c = ctx(dir.path());
        for (k, rows) in [(0, 2), (2, 17)] {
            let paths = envelope(&c, k).unwrap();
            let text = std::fs::read_to_string(&paths[0]).unwrap();
            assert_eq!(text.lines().count(), rows + 1, "k = {k}");
        }
        let text = std::fs::read_to_string(dir.path().join("g_0.csv")).unwrap();
        assert_eq!(text, "t,g\n0/1,1/3\n1/1,2/3\n");
    }

    #[test]
    fn construct_refuses_levels_above_cap() {
        let dir = tempfile::tempdir().unwrap();
        let c = ctx(dir.path());
        let err = construct(&c, c.config.level_cap + 1).unwrap_err();
        assert!(matches!(err, CliError::Core(Error::ResourceLimit { .. })));
        let paths = construct(&c, 2).unwrap();
        let svg = std::fs::read_to_string(&paths[1]).unwrap();
        assert_eq!(svg.matches("<rect").count(), 16);
    }
}
