//! Spatial distortion (SD), temporal distortion (TD) and the combined
//! dropped-frame quality index `DFVQMI = SD - TD`.
//!
//! SD is the mean SSIM between reference and corrected frames over the
//! positions that survived. TD sums, for every chunk of consecutive drops
//! starting at reference index `j` with length `cd`,
//!
//! ```text
//! cd / m * (c1 + c2) / 2
//! c1 = 1 - SSIM(V_C[j - 1], V_C[j + cd])
//! c2 = 1 - (1 / cd) * sum SSIM(V_R[t], V_C[t])
//! ```
//!
//! where the `c2` sum runs over `t = j .. j + cd - 1` for
//! [`TdVariant::FullChunk`] and over `t = j + 1 .. j + cd - 1` for
//! [`TdVariant::Literal`].

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{chunks_from_missing, identify_dropped_frames, Alignment, AlignmentMethod, GaConfig};
use crate::correction::{construct_corrected, ConcealmentStrategy};
use crate::error::{Error, Result};
use crate::metrics::{psnr, ssim_prepared, MetricConfig, PreparedFrame};
use crate::video_io::{Frame, VideoSequence};

/// Which positions of a chunk enter `c2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdVariant {
    /// Every dropped position of the chunk.
    #[default]
    FullChunk,
    /// Interior positions only, still divided by the chunk length.
    Literal,
}

/// One chunk's share of TD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkContribution {
    /// First dropped reference index of the chunk.
    pub start: usize,
    pub len: usize,
    pub c1: f64,
    pub c2: f64,
    /// `len / m`.
    pub weight: f64,
    pub contribution: f64,
}

impl ChunkContribution {
    pub fn new(start: usize, len: usize, m: usize, c1: f64, c2: f64) -> Self {
        let weight = len as f64 / m as f64;
        Self {
            start,
            len,
            c1,
            c2,
            weight,
            contribution: weight * (c1 + c2) / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalDistortion {
    pub td: f64,
    pub chunks: Vec<ChunkContribution>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub sd: f64,
    pub td: f64,
    pub dfvqmi: f64,
    pub variant: TdVariant,
    pub chunks: Vec<ChunkContribution>,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub missing: Vec<usize>,
    pub method: AlignmentMethod,
    /// Mean PSNR between reference and corrected frames at surviving positions.
    pub mean_psnr_nondropped: f64,
    /// Frame-by-frame PSNR of the first `n` reference frames against the
    /// distorted frames, with no temporal alignment.
    pub naive_mean_psnr: f64,
    /// Same pairing as `naive_mean_psnr`, scored with SSIM.
    pub naive_mean_ssim: f64,
    pub warnings: Vec<String>,
}

/// Mean SSIM over surviving positions.
pub fn spatial_distortion(
    reference: &VideoSequence,
    corrected: &VideoSequence,
    missing: &[usize],
    cfg: &MetricConfig,
) -> Result<f64> {
    check_lengths(reference, corrected, missing)?;
    let dropped = dropped_mask(corrected.len(), missing)?;
    let scores = positions_ssim(reference, corrected, cfg, |t| !dropped[t])?;
    Ok(sd_from_scores(&scores, &dropped))
}

/// Per-chunk temporal penalties and their sum.
pub fn temporal_distortion(
    reference: &VideoSequence,
    corrected: &VideoSequence,
    missing: &[usize],
    chunk_lengths: &[usize],
    cfg: &MetricConfig,
    variant: TdVariant,
) -> Result<TemporalDistortion> {
    check_lengths(reference, corrected, missing)?;
    let dropped = dropped_mask(corrected.len(), missing)?;
    let scores = positions_ssim(reference, corrected, cfg, |t| dropped[t])?;
    let prepared = LazyPrepared::new(corrected.frames(), cfg);
    td_from_scores(&scores, missing, chunk_lengths, variant, |a, b| prepared.ssim(a, b))
}

/// Scores `distorted` against `reference`: identify drops, conceal them,
/// then combine SD and TD.
pub fn dfvqmi(
    reference: &VideoSequence,
    distorted: &VideoSequence,
    cfg: &MetricConfig,
    ga: &GaConfig,
    strategy: ConcealmentStrategy,
    variant: TdVariant,
) -> Result<QualityReport> {
    Scorer::new(reference, cfg)?.score(distorted, ga, strategy, variant)
}

/// A reference video with its SSIM moments precomputed, for scoring many
/// distorted versions of the same clip.
pub struct Scorer<'a> {
    reference: &'a VideoSequence,
    prepared: Vec<PreparedFrame<'a>>,
    cfg: MetricConfig,
}

impl<'a> Scorer<'a> {
    pub fn new(reference: &'a VideoSequence, cfg: &MetricConfig) -> Result<Self> {
        cfg.validate()?;
        let prepared = reference
            .frames()
            .par_iter()
            .map(|f| PreparedFrame::new(f, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            reference,
            prepared,
            cfg: *cfg,
        })
    }

    pub fn reference(&self) -> &'a VideoSequence {
        self.reference
    }

    pub fn prepared(&self) -> &[PreparedFrame<'a>] {
        &self.prepared
    }

    pub fn config(&self) -> &MetricConfig {
        &self.cfg
    }

    /// SSIM of reference frame `r` against an arbitrary frame.
    pub fn ssim_to(&self, r: usize, other: &Frame) -> Result<f64> {
        let pr = &self.prepared[r];
        if pr.frame().luma() == other.luma() {
            pr.frame().check_comparable(other)?;
            return Ok(1.0);
        }
        ssim_prepared(pr, &PreparedFrame::new(other, &self.cfg)?, &self.cfg)
    }

    /// SSIM between two reference frames.
    pub fn ssim_between(&self, a: usize, b: usize) -> Result<f64> {
        ssim_prepared(&self.prepared[a], &self.prepared[b], &self.cfg)
    }

    pub fn score(
        &self,
        distorted: &VideoSequence,
        ga: &GaConfig,
        strategy: ConcealmentStrategy,
        variant: TdVariant,
    ) -> Result<QualityReport> {
        let alignment = identify_dropped_frames(self.reference, distorted, &self.cfg, ga)?;
        self.score_aligned(distorted, &alignment, strategy, variant)
    }

    pub fn score_aligned(
        &self,
        distorted: &VideoSequence,
        alignment: &Alignment,
        strategy: ConcealmentStrategy,
        variant: TdVariant,
    ) -> Result<QualityReport> {
        let reference = self.reference;
        let (m, n) = (reference.len(), distorted.len());
        if alignment.reference_len() != m || alignment.distorted_len() != n {
            return Err(Error::InconsistentAlignment(format!(
                "alignment is for m = {}, n = {} but videos have m = {m}, n = {n}",
                alignment.reference_len(),
                alignment.distorted_len()
            )));
        }
        let corrected = construct_corrected(distorted, alignment, strategy)?;
        let vc = &corrected.video;
        let missing = alignment.missing();
        let dropped = dropped_mask(m, missing)?;
        let lazy = LazyPrepared::new(vc.frames(), &self.cfg);

        let scores = (0..m)
            .into_par_iter()
            .map(|t| self.position_ssim(&lazy, t))
            .collect::<Result<Vec<_>>>()?;
        let sd = sd_from_scores(&scores, &dropped);
        let temporal = td_from_scores(&scores, missing, alignment.chunk_lengths(), variant, |a, b| {
            lazy.ssim(a, b)
        })?;

        let kept: Vec<usize> = (0..m).filter(|&t| !dropped[t]).collect();
        let psnrs = kept
            .par_iter()
            .map(|&t| psnr(reference.frame(t), vc.frame(t), &self.cfg))
            .collect::<Result<Vec<_>>>()?;
        let mean_psnr_nondropped = psnrs.iter().sum::<f64>() / psnrs.len() as f64;

        let mapping = alignment.mapping();
        let naive = (0..n)
            .into_par_iter()
            .map(|i| {
                let p = psnr(reference.frame(i), distorted.frame(i), &self.cfg)?;
                let s = ssim_prepared(&self.prepared[i], lazy.get(mapping[i])?, &self.cfg)?;
                Ok((p, s))
            })
            .collect::<Result<Vec<_>>>()?;
        let naive_mean_psnr = naive.iter().map(|x| x.0).sum::<f64>() / n as f64;
        let naive_mean_ssim = naive.iter().map(|x| x.1).sum::<f64>() / n as f64;

        let mut warnings = corrected.warnings;
        warnings.extend(temporal.warnings);
        Ok(QualityReport {
            sd,
            td: temporal.td,
            dfvqmi: sd - temporal.td,
            variant,
            chunks: temporal.chunks,
            m,
            n,
            d: m - n,
            missing: missing.to_vec(),
            method: alignment.method(),
            mean_psnr_nondropped,
            naive_mean_psnr,
            naive_mean_ssim,
            warnings,
        })
    }

    fn position_ssim(&self, lazy: &LazyPrepared<'_>, t: usize) -> Result<f64> {
        let pr = &self.prepared[t];
        let frame = lazy.frames[t].luma();
        if pr.frame().luma() == frame {
            return Ok(1.0);
        }
        ssim_prepared(pr, lazy.get(t)?, &self.cfg)
    }
}

/// Prepares frames on first use so identical pairs never pay for moments.
struct LazyPrepared<'a> {
    frames: &'a [Frame],
    cells: Vec<OnceLock<PreparedFrame<'a>>>,
    cfg: MetricConfig,
}

impl<'a> LazyPrepared<'a> {
    fn new(frames: &'a [Frame], cfg: &MetricConfig) -> Self {
        Self {
            frames,
            cells: (0..frames.len()).map(|_| OnceLock::new()).collect(),
            cfg: *cfg,
        }
    }

    fn get(&self, t: usize) -> Result<&PreparedFrame<'a>> {
        if let Some(p) = self.cells[t].get() {
            return Ok(p);
        }
        let p = PreparedFrame::new(&self.frames[t], &self.cfg)?;
        Ok(self.cells[t].get_or_init(|| p))
    }

    fn ssim(&self, a: usize, b: usize) -> Result<f64> {
        if self.frames[a].luma() == self.frames[b].luma() {
            return Ok(1.0);
        }
        ssim_prepared(self.get(a)?, self.get(b)?, &self.cfg)
    }
}

fn check_lengths(reference: &VideoSequence, corrected: &VideoSequence, missing: &[usize]) -> Result<()> {
    let m = reference.len();
    if corrected.len() != m {
        return Err(Error::InconsistentAlignment(format!(
            "corrected video has {} frames, reference has {m}",
            corrected.len()
        )));
    }
    if missing.len() >= m {
        return Err(Error::InconsistentAlignment(format!(
            "{} missing indices leave no surviving frame out of {m}",
            missing.len()
        )));
    }
    Ok(())
}

fn dropped_mask(m: usize, missing: &[usize]) -> Result<Vec<bool>> {
    chunks_from_missing(missing)?;
    let mut mask = vec![false; m];
    for &t in missing {
        if t >= m {
            return Err(Error::InconsistentAlignment(format!(
                "missing index {t} outside [0, {m})"
            )));
        }
        mask[t] = true;
    }
    Ok(mask)
}

/// SSIM of reference vs corrected at every position where `wanted` holds;
/// other entries are NaN.
fn positions_ssim(
    reference: &VideoSequence,
    corrected: &VideoSequence,
    cfg: &MetricConfig,
    wanted: impl Fn(usize) -> bool + Sync,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    (0..reference.len())
        .into_par_iter()
        .map(|t| {
            if wanted(t) {
                crate::metrics::ssim(reference.frame(t), corrected.frame(t), cfg)
            } else {
                Ok(f64::NAN)
            }
        })
        .collect()
}

fn sd_from_scores(scores: &[f64], dropped: &[bool]) -> f64 {
    let (sum, count) = scores
        .iter()
        .zip(dropped)
        .filter(|(_, &d)| !d)
        .fold((0.0, 0usize), |(s, c), (&v, _)| (s + v, c + 1));
    sum / count as f64
}

fn td_from_scores(
    scores: &[f64],
    missing: &[usize],
    chunk_lengths: &[usize],
    variant: TdVariant,
    boundary_ssim: impl Fn(usize, usize) -> Result<f64>,
) -> Result<TemporalDistortion> {
    let m = scores.len();
    if chunks_from_missing(missing)? != chunk_lengths {
        return Err(Error::InconsistentAlignment(format!(
            "chunk lengths {chunk_lengths:?} do not match missing indices"
        )));
    }

    let mut chunks = Vec::with_capacity(chunk_lengths.len());
    let mut warnings = Vec::new();
    let mut k = 0;
    for &cd in chunk_lengths {
        let j = missing[k];
        k += cd;

        let left = j.checked_sub(1);
        let right = Some(j + cd).filter(|&r| r < m);
        let c1 = match (left, right) {
            (Some(a), Some(b)) => 1.0 - boundary_ssim(a, b)?,
            (Some(_), None) | (None, Some(_)) => {
                warnings.push(format!(
                    "chunk at {j} (length {cd}) touches the sequence edge; c1 uses the single existing boundary"
                ));
                0.0
            }
            (None, None) => {
                return Err(Error::InconsistentAlignment("every frame is missing".into()));
            }
        };

        let interior = match variant {
            TdVariant::FullChunk => j..j + cd,
            TdVariant::Literal => j + 1..j + cd,
        };
        let sum: f64 = scores[interior].iter().sum();
        let c2 = 1.0 - sum / cd as f64;
        chunks.push(ChunkContribution::new(j, cd, m, c1, c2));
    }
    // Folding from +0 keeps an empty TD at +0; `Sum` starts from -0.
    let td = chunks.iter().fold(0.0, |acc, c| acc + c.contribution);
    Ok(TemporalDistortion { td, chunks, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_contribution_is_one() {
        let c = ChunkContribution::new(0, 12, 12, 1.0, 1.0);
        assert_eq!(c.weight, 1.0);
        assert_eq!(c.contribution, 1.0);
    }

    #[test]
    fn static_scores_by_variant() {
        let scores = vec![1.0; 12];
        let missing = [2, 3, 4, 5, 8, 10];
        let full = td_from_scores(&scores, &missing, &[4, 1, 1], TdVariant::FullChunk, |_, _| Ok(1.0)).unwrap();
        assert_eq!(full.td, 0.0);
        let literal = td_from_scores(&scores, &missing, &[4, 1, 1], TdVariant::Literal, |_, _| Ok(1.0)).unwrap();
        assert_eq!(literal.td, 0.125);
        assert_eq!(
            literal.chunks.iter().map(|c| c.c2).collect::<Vec<_>>(),
            vec![0.25, 1.0, 1.0]
        );
    }

    #[test]
    fn inconsistent_chunks_rejected() {
        let scores = vec![1.0; 6];
        assert!(td_from_scores(&scores, &[1, 2, 4], &[3], TdVariant::FullChunk, |_, _| Ok(1.0)).is_err());
        assert!(td_from_scores(&scores, &[1, 2, 4], &[2, 1, 1], TdVariant::FullChunk, |_, _| Ok(1.0)).is_err());
        assert!(td_from_scores(&scores, &[2, 1], &[2], TdVariant::FullChunk, |_, _| Ok(1.0)).is_err());
    }

    #[test]
    fn edge_chunk_substitutes_boundary() {
        let scores = vec![0.5; 5];
        let t = td_from_scores(&scores, &[0, 1], &[2], TdVariant::FullChunk, |_, _| Ok(0.0)).unwrap();
        assert_eq!(t.chunks[0].c1, 0.0);
        assert_eq!(t.chunks[0].c2, 0.5);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn longer_chunk_weighs_more() {
        let a = ChunkContribution::new(3, 2, 20, 0.4, 0.6);
        let b = ChunkContribution::new(3, 5, 20, 0.4, 0.6);
        assert!(b.contribution > a.contribution);
    }
}
