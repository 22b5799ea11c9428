//! Run configuration. The JSON form mirrors [`RunConfig`] field for field;
//! missing fields take the defaults below.

use std::path::{Path, PathBuf};

use besicovitch::geometry::SegmentConvention;
use besicovitch::pattern::DEFAULT_LEVEL_CAP;
use besicovitch::{Pattern, RowOrientation};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub base: u32,
    pub sigma: Vec<u32>,
    pub row_orientation: RowOrientation,
    pub segment_convention: SegmentConvention,
    /// Deepest level whose squares are enumerated.
    pub level_cap: u32,
    /// Depth of the brute-force envelope oracle.
    pub oracle_depth: u32,
    /// Envelope checks run over `t = p / m^k` for `k` up to this.
    pub exactness_resolution: u32,
    pub lsc_resolution: u32,
    pub lsc_depth: u32,
    pub moreau_log_spacing: u32,
    pub moreau_indices: Vec<u64>,
    pub moreau_samples: usize,
    pub random_samples: usize,
    pub lipschitz_pairs: usize,
    pub hausdorff_pairs: usize,
    pub hausdorff_samples: usize,
    pub stitch_directions: usize,
    pub area_max_level: u32,
    pub area_lattice: usize,
    pub mc_points: usize,
    pub coverage_slopes: usize,
    pub coverage_points: usize,
    pub coverage_level: u32,
    pub seed: u64,
    pub tolerance: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            base: 4,
            sigma: vec![1, 3, 0, 2],
            row_orientation: RowOrientation::Bottom,
            segment_convention: SegmentConvention::Dual,
            level_cap: DEFAULT_LEVEL_CAP,
            oracle_depth: 12,
            exactness_resolution: 6,
            lsc_resolution: 5,
            lsc_depth: 12,
            moreau_log_spacing: 8,
            moreau_indices: vec![1 << 2, 1 << 4, 1 << 6, 1 << 8, 1 << 10],
            moreau_samples: 100,
            random_samples: 1000,
            lipschitz_pairs: 100_000,
            hausdorff_pairs: 100,
            hausdorff_samples: 10_000,
            stitch_directions: 360,
            area_max_level: 6,
            area_lattice: 257,
            mc_points: 100_000,
            coverage_slopes: 1000,
            coverage_points: 100,
            coverage_level: 10,
            seed: 42,
            tolerance: 1e-2,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    /// The pattern this configuration describes, after validation.
    pub fn pattern(&self) -> Result<Pattern, CliError> {
        if self.sigma.len() != self.base as usize {
            return Err(CliError::Config(format!(
                "sigma has {} entries but base is {}",
                self.sigma.len(),
                self.base
            )));
        }
        let pattern = Pattern::new(self.sigma.clone())
            .map_err(|e| CliError::Config(format!("invalid pattern: {e}")))?;
        Ok(pattern.with_orientation(self.row_orientation))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.pattern()?;
        if self.level_cap > DEFAULT_LEVEL_CAP + 2 {
            return Err(CliError::Config(format!(
                "level_cap {} is above the supported maximum {}",
                self.level_cap,
                DEFAULT_LEVEL_CAP + 2
            )));
        }
        if self.area_lattice < 2 {
            return Err(CliError::Config("area_lattice must be at least 2".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(CliError::Config("tolerance must be positive".into()));
        }
        if self.hausdorff_samples < 2 {
            return Err(CliError::Config(
                "hausdorff_samples must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_the_standard_construction() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.pattern().unwrap(), Pattern::standard());
        assert_eq!(c.segment_convention, SegmentConvention::Dual);
    }

    #[test]
    fn json_round_trip_and_partial_files() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);

        let partial: RunConfig =
            serde_json::from_str(r#"{"segment_convention": "literal", "row_orientation": "top"}"#)
                .unwrap();
        assert_eq!(partial.segment_convention, SegmentConvention::Literal);
        assert_eq!(partial.row_orientation, RowOrientation::Top);
        assert_eq!(partial.sigma, vec![1, 3, 0, 2]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"colour": 1}"#).is_err());
    }

    #[test]
    fn rejects_invalid_patterns() {
        let c = RunConfig {
            sigma: vec![1, 1, 0, 2],
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let c = RunConfig {
            base: 3,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
