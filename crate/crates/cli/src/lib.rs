//! Command-line front end: artifact generation and the invariant suite.
//!
//! Exit codes: `0` success, `1` an invariant check failed, `2` usage or
//! configuration error.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use besicovitch::geometry::SegmentConvention;
use clap::{Parser, Subcommand};

pub use crate::commands::Context;
pub use crate::config::RunConfig;
pub use crate::error::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "besicovitch",
    version,
    about = "Needle sets from a self-similar fractal"
)]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Place needles on vertical lines (`dual`) or horizontal ones (`literal`).
    #[arg(long, global = true, value_parser = parse_convention)]
    pub convention: Option<SegmentConvention>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_convention(s: &str) -> Result<SegmentConvention, String> {
    match s {
        "dual" => Ok(SegmentConvention::Dual),
        "literal" => Ok(SegmentConvention::Literal),
        _ => Err(format!(
            "unknown convention {s:?}; expected dual or literal"
        )),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Squares of F_n as CSV and SVG.
    Construct {
        #[arg(long)]
        level: u32,
    },
    /// Exact table of g(t) over t = j / m^k, with a plot.
    G {
        #[arg(long)]
        resolution: u32,
    },
    /// One unit needle per slope j / m^k.
    Needles {
        #[arg(long)]
        resolution: u32,
    },
    /// Atlas piece and base slope for evenly spaced directions.
    Stitch {
        #[arg(long, default_value_t = 360)]
        directions: usize,
    },
    /// Area of the line set over [0, 1] for levels 0..=max-level.
    Area {
        #[arg(long)]
        max_level: Option<u32>,
        #[arg(long)]
        lattice: Option<usize>,
        /// Also estimate each level with this many Monte Carlo points.
        #[arg(long)]
        mc: Option<usize>,
    },
    /// Sample needle points and check they lie in the line set.
    Coverage,
    /// Run every invariant check and write a report.
    Verify,
}

impl Cli {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(conv) = self.convention {
            config.segment_convention = conv;
        }
        Ok(config)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr, file paths to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let ctx = Context::new(cli.config()?)?;
    let c = &ctx.config;
    let (paths, ok) = match &cli.command {
        Command::Construct { level } => (commands::construct(&ctx, *level)?, true),
        Command::G { resolution } => (commands::envelope(&ctx, *resolution)?, true),
        Command::Needles { resolution } => (commands::needles(&ctx, *resolution)?, true),
        Command::Stitch { directions } => (commands::stitch(&ctx, *directions)?, true),
        Command::Area {
            max_level,
            lattice,
            mc,
        } => (
            commands::area(
                &ctx,
                max_level.unwrap_or(c.area_max_level),
                lattice.unwrap_or(c.area_lattice),
                *mc,
            )?,
            true,
        ),
        Command::Coverage => commands::coverage(&ctx)?,
        Command::Verify => {
            let report = verify::verify(&ctx);
            eprint!("{}", report.to_text());
            (
                vec![
                    ctx.write("verify_report.json", &report.to_json())?,
                    ctx.write("verify_report.txt", &report.to_text())?,
                ],
                report.passed(),
            )
        }
    };
    for p in paths {
        println!("{}", p.display());
    }
    Ok(if ok { EXIT_OK } else { EXIT_INVARIANT })
}
