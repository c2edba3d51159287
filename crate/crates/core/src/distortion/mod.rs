//! Synthetic distortion: frame-drop plans and bitplane noise.

mod bitplane;
mod plan;
pub mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bitplane::{embed_bitplane, SpatialSpec};
pub use plan::{classify_site, plan_drops, plan_drops_with, FrameSimilarity, SimilarityProbe, DEFAULT_SIM_THRESHOLD};

use crate::error::{Error, Result};
use crate::video_io::VideoSequence;

/// Drop severity class: contiguous-drop size (cfd) and total drops (tdf),
/// each as a percentage of the reference length.
///
/// | case | cfd      | tdf      |
/// |------|----------|----------|
/// | 2.1  | 1 - 5 %  | 1 - 10 % |
/// | 2.2  | 1 - 5 %  | 11 - 20 %|
/// | 2.3  | 6 - 10 % | 1 - 10 % |
/// | 2.4  | 6 - 10 % | 11 - 20 %|
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DropCase {
    #[serde(rename = "2.1")]
    LowCfdLowTdf,
    #[serde(rename = "2.2")]
    LowCfdHighTdf,
    #[serde(rename = "2.3")]
    HighCfdLowTdf,
    #[serde(rename = "2.4")]
    HighCfdHighTdf,
}

const CFD_LOW: (f64, f64) = (1.0, 5.0);
const CFD_HIGH: (f64, f64) = (6.0, 10.0);
const TDF_LOW: (f64, f64) = (1.0, 10.0);
const TDF_HIGH: (f64, f64) = (11.0, 20.0);

impl DropCase {
    pub const ALL: [DropCase; 4] = [
        DropCase::LowCfdLowTdf,
        DropCase::LowCfdHighTdf,
        DropCase::HighCfdLowTdf,
        DropCase::HighCfdHighTdf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DropCase::LowCfdLowTdf => "2.1",
            DropCase::LowCfdHighTdf => "2.2",
            DropCase::HighCfdLowTdf => "2.3",
            DropCase::HighCfdHighTdf => "2.4",
        }
    }

    /// Percentage band for the longest chunk.
    pub fn cfd_band(self) -> (f64, f64) {
        match self {
            DropCase::LowCfdLowTdf | DropCase::LowCfdHighTdf => CFD_LOW,
            DropCase::HighCfdLowTdf | DropCase::HighCfdHighTdf => CFD_HIGH,
        }
    }

    /// Percentage band for the total number of drops.
    pub fn tdf_band(self) -> (f64, f64) {
        match self {
            DropCase::LowCfdLowTdf | DropCase::HighCfdLowTdf => TDF_LOW,
            DropCase::LowCfdHighTdf | DropCase::HighCfdHighTdf => TDF_HIGH,
        }
    }
}

impl fmt::Display for DropCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DropCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DropCase::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown case `{s}` (expected 2.1, 2.2, 2.3 or 2.4)")))
    }
}

/// Content around a dropped chunk, judged by SSIM against a threshold.
///
/// Boundaries are the surviving frames just before and after the chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Possibility {
    /// Boundaries similar; every dropped frame similar to a boundary.
    SimilarBoundaryStaticGap,
    /// Boundaries similar; some dropped frame unlike both boundaries.
    SimilarBoundarySceneChange,
    /// Boundaries differ; every dropped frame similar to the left boundary.
    ChangedBoundaryStaticGap,
    /// Boundaries differ; some dropped frame unlike both boundaries.
    ChangedBoundarySceneChange,
}

impl Possibility {
    pub const ALL: [Possibility; 4] = [
        Possibility::SimilarBoundaryStaticGap,
        Possibility::SimilarBoundarySceneChange,
        Possibility::ChangedBoundaryStaticGap,
        Possibility::ChangedBoundarySceneChange,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl From<Possibility> for u8 {
    fn from(p: Possibility) -> u8 {
        p.number()
    }
}

impl TryFrom<u8> for Possibility {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Possibility::ALL
            .get((v as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("possibility must be 1..=4, got {v}")))
    }
}

impl fmt::Display for Possibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Which reference indices to drop, as `(start, length)` runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropPlan {
    pub m: usize,
    pub chunks: Vec<(usize, usize)>,
    pub case: Option<DropCase>,
    pub possibility: Option<Possibility>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DropPlan {
    /// A plan with explicit chunks and no case label.
    pub fn manual(m: usize, chunks: Vec<(usize, usize)>) -> Result<Self> {
        let plan = Self {
            m,
            chunks,
            case: None,
            possibility: None,
            seed: 0,
            warnings: Vec::new(),
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Chunks must be non-empty, sorted, separated by at least one surviving
    /// frame, and must not touch the first or last frame.
    pub fn validate(&self) -> Result<()> {
        let mut floor = 1;
        for &(start, len) in &self.chunks {
            if len == 0 {
                return Err(Error::InvalidPlan(format!("empty chunk at {start}")));
            }
            if start < floor {
                return Err(Error::InvalidPlan(format!(
                    "chunk at {start} overlaps, touches a neighbor, or touches frame 0"
                )));
            }
            if start + len >= self.m {
                return Err(Error::InvalidPlan(format!(
                    "chunk ({start}, {len}) reaches the last frame or beyond (m = {})",
                    self.m
                )));
            }
            floor = start + len + 1;
        }
        Ok(())
    }

    pub fn total_dropped(&self) -> usize {
        self.chunks.iter().map(|c| c.1).sum()
    }

    pub fn longest_chunk(&self) -> usize {
        self.chunks.iter().map(|c| c.1).max().unwrap_or(0)
    }

    /// Longest chunk as a percentage of `m`.
    pub fn cfd_pct(&self) -> f64 {
        100.0 * self.longest_chunk() as f64 / self.m as f64
    }

    /// Total drops as a percentage of `m`.
    pub fn tdf_pct(&self) -> f64 {
        100.0 * self.total_dropped() as f64 / self.m as f64
    }

    /// True when the measured cfd and tdf fall in `case`'s bands.
    pub fn within_bands(&self, case: DropCase) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo - 1e-9 && v <= hi + 1e-9;
        inside(self.cfd_pct(), case.cfd_band()) && inside(self.tdf_pct(), case.tdf_band())
    }

    /// Sorted dropped indices.
    pub fn dropped_indices(&self) -> Vec<usize> {
        self.chunks.iter().flat_map(|&(s, l)| s..s + l).collect()
    }
}

/// Removes the planned frames from `reference`, preserving order.
pub fn drop_frames(reference: &VideoSequence, plan: &DropPlan) -> Result<VideoSequence> {
    if plan.m != reference.len() {
        return Err(Error::InvalidPlan(format!(
            "plan is for {} frames but the reference has {}",
            plan.m,
            reference.len()
        )));
    }
    plan.validate()?;
    let mut keep = vec![true; plan.m];
    for t in plan.dropped_indices() {
        keep[t] = false;
    }
    let frames = reference
        .frames()
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(f, _)| f.clone())
        .collect();
    reference.derive(frames, format!("{}-dropped", reference.source_name()))
}
