//! Experiment grids and score correlation.

mod correlate;
mod grid;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use correlate::{correlate, read_label_table, Correlation};
pub use grid::{read_grid_scores, run_experiment_grid, run_grid_on, write_csv, CellStatus, ScoreRow, CSV_HEADER};

use crate::alignment::GaConfig;
use crate::correction::ConcealmentStrategy;
use crate::distortion::{DropCase, Possibility, DEFAULT_SIM_THRESHOLD};
use crate::error::{Error, Result};
use crate::index::TdVariant;
use crate::metrics::MetricConfig;
use crate::video_io::{open_raw_yuv, open_y4m, RawLayout, VideoSequence};

/// Distortion applied on top of frame drops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// Drops only.
    #[serde(rename = "2")]
    DropsOnly,
    /// Drops plus least-significant-bit noise.
    #[serde(rename = "3a")]
    DropsWithMildNoise,
    /// Drops plus bit-3 noise.
    #[serde(rename = "3b")]
    DropsWithStrongNoise,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::DropsOnly,
        Scenario::DropsWithMildNoise,
        Scenario::DropsWithStrongNoise,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scenario::DropsOnly => "2",
            Scenario::DropsWithMildNoise => "3a",
            Scenario::DropsWithStrongNoise => "3b",
        }
    }

    pub fn bitplane(self) -> Option<u8> {
        match self {
            Scenario::DropsOnly => None,
            Scenario::DropsWithMildNoise => Some(0),
            Scenario::DropsWithStrongNoise => Some(3),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{s}` (expected 2, 3a or 3b)")))
    }
}

/// Geometry for headerless `.yuv` inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGeometry {
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_layout")]
    pub layout: RawLayout,
}

fn default_layout() -> RawLayout {
    RawLayout::I420
}

/// Opens `.y4m` directly and `.yuv` with the given geometry.
pub fn open_video(path: &Path, raw: Option<RawGeometry>) -> Result<VideoSequence> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "y4m" => open_y4m(path),
        "yuv" => {
            let g = raw.ok_or_else(|| {
                Error::InvalidConfig(format!("{} is raw YUV; width and height are required", path.display()))
            })?;
            open_raw_yuv(path, g.width, g.height, g.layout)
        }
        _ => Err(Error::InvalidConfig(format!(
            "{}: unrecognized extension (expected .y4m or .yuv)",
            path.display()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub reference_videos: Vec<PathBuf>,
    #[serde(default = "all_cases")]
    pub cases: Vec<DropCase>,
    #[serde(default = "all_possibilities")]
    pub possibilities: Vec<Possibility>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub metric_config: MetricConfig,
    #[serde(default)]
    pub ga_config: GaConfig,
    #[serde(default)]
    pub strategy: ConcealmentStrategy,
    #[serde(default)]
    pub td_variant: TdVariant,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Drop placements per grid cell.
    #[serde(default = "one")]
    pub repeats: usize,
    #[serde(default = "default_threshold")]
    pub sim_threshold: f64,
    #[serde(default)]
    pub raw_geometry: Option<RawGeometry>,
}

fn all_cases() -> Vec<DropCase> {
    DropCase::ALL.to_vec()
}

fn all_possibilities() -> Vec<Possibility> {
    Possibility::ALL.to_vec()
}

fn default_scenarios() -> Vec<Scenario> {
    vec![Scenario::DropsOnly]
}

fn one() -> usize {
    1
}

fn default_threshold() -> f64 {
    DEFAULT_SIM_THRESHOLD
}

impl ExperimentConfig {
    /// A full grid over `reference_videos` with every other field defaulted.
    pub fn new(reference_videos: Vec<PathBuf>) -> Self {
        Self {
            reference_videos,
            cases: all_cases(),
            possibilities: all_possibilities(),
            scenarios: default_scenarios(),
            seed: 0,
            metric_config: MetricConfig::default(),
            ga_config: GaConfig::default(),
            strategy: ConcealmentStrategy::default(),
            td_variant: TdVariant::default(),
            output: None,
            repeats: 1,
            sim_threshold: DEFAULT_SIM_THRESHOLD,
            raw_geometry: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything except the video list, which [`run_grid_on`]
    /// supplies separately.
    pub fn validate_axes(&self) -> Result<()> {
        if self.cases.is_empty() || self.possibilities.is_empty() || self.scenarios.is_empty() {
            return Err(Error::InvalidConfig(
                "cases, possibilities and scenarios must be non-empty".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if !(self.sim_threshold > -1.0 && self.sim_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sim_threshold must lie in (-1, 1], got {}",
                self.sim_threshold
            )));
        }
        self.metric_config.validate()?;
        self.ga_config.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.reference_videos.is_empty() {
            return Err(Error::InvalidConfig("reference_videos must be non-empty".into()));
        }
        self.validate_axes()
    }
}

/// Size of the rayon pool requested through `VQ_THREADS`, if any.
pub fn requested_threads() -> Result<Option<usize>> {
    match std::env::var("VQ_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig(format!(
                "VQ_THREADS must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a pool capped by `VQ_THREADS`, or on the global pool.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match requested_threads()? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_labels() {
        let cfg =
            ExperimentConfig::from_json(r#"{"reference_videos": ["a.y4m"], "scenarios": ["2", "3b"], "seed": 4}"#)
                .unwrap();
        assert_eq!(cfg.cases.len(), 4);
        assert_eq!(cfg.possibilities.len(), 4);
        assert_eq!(cfg.scenarios, vec![Scenario::DropsOnly, Scenario::DropsWithStrongNoise]);
        assert_eq!(cfg.repeats, 1);
        assert_eq!(cfg.sim_threshold, 0.9);
        assert_eq!(Scenario::DropsWithMildNoise.bitplane(), Some(0));
        assert_eq!("3b".parse::<Scenario>().unwrap().bitplane(), Some(3));
        assert_eq!(Scenario::DropsOnly.bitplane(), None);
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(ExperimentConfig::from_json(r#"{"reference_videos": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"reference_videos": ["a"], "repeats": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"reference_videos": ["a"], "cases": ["2.7"]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"reference_videos": ["a"], "bogus": 1}"#).is_err());
    }

    #[test]
    fn raw_inputs_need_geometry() {
        assert!(matches!(
            open_video(Path::new("clip.yuv"), None),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            open_video(Path::new("clip.mp4"), None),
            Err(Error::InvalidConfig(_))
        ));
    }
}
