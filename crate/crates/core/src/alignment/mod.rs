//! Dropped-frame identification.
//!
//! Each distorted frame is compared against its feasible reference
//! candidates by PSNR. If the per-row best matches already increase strictly
//! they are the answer; otherwise a genetic search anchored on the longest
//! increasing run of best matches picks the mapping with the highest mean
//! PSNR.

mod diff;
mod ga;
mod lis;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diff::{build_diff_matrix, DiffMatrix};
pub use ga::{refine_with_ga, refine_with_ga_traced, GaConfig, GaOutcome};
pub use lis::{lis_of_best_indices, longest_increasing_subsequence, longest_nondecreasing_subsequence};

use crate::error::{Error, Result};
use crate::metrics::{psnr, MetricConfig};
use crate::video_io::VideoSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMethod {
    ExactLis,
    GaRefined,
    TrivialNoDrop,
}

/// Which reference frame each distorted frame came from, and what was lost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    m: usize,
    mapping: Vec<usize>,
    missing: Vec<usize>,
    chunk_lengths: Vec<usize>,
    method: AlignmentMethod,
    fitness: f64,
}

impl Alignment {
    /// Validates `mapping` against a reference of `m` frames and derives the
    /// missing indices and their run lengths.
    pub fn from_mapping(m: usize, mapping: Vec<usize>, method: AlignmentMethod, fitness: f64) -> Result<Self> {
        let n = mapping.len();
        if n == 0 || n > m {
            return Err(Error::InconsistentAlignment(format!(
                "{n} mapped frames for a reference of {m}"
            )));
        }
        let d = m - n;
        if let Some(w) = mapping.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InconsistentAlignment(format!(
                "mapping not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some((i, &r)) = mapping.iter().enumerate().find(|&(i, &r)| r < i || r > i + d) {
            return Err(Error::InconsistentAlignment(format!(
                "row {i} mapped to {r}, outside window [{i}, {}]",
                i + d
            )));
        }
        let mut kept = vec![false; m];
        for &r in &mapping {
            kept[r] = true;
        }
        let missing: Vec<usize> = (0..m).filter(|&t| !kept[t]).collect();
        let chunk_lengths = chunks_from_missing(&missing)?;
        Ok(Self {
            m,
            mapping,
            missing,
            chunk_lengths,
            method,
            fitness,
        })
    }

    pub fn reference_len(&self) -> usize {
        self.m
    }

    pub fn distorted_len(&self) -> usize {
        self.mapping.len()
    }

    /// Matched reference index for each distorted frame.
    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// Sorted dropped reference indices.
    pub fn missing(&self) -> &[usize] {
        &self.missing
    }

    /// Lengths of the maximal runs in [`Self::missing`], in order.
    pub fn chunk_lengths(&self) -> &[usize] {
        &self.chunk_lengths
    }

    pub fn method(&self) -> AlignmentMethod {
        self.method
    }

    /// Mean PSNR over all matched pairs.
    pub fn fitness(&self) -> f64 {
        self.fitness
    }
}

/// Lengths of maximal runs of consecutive indices.
pub fn chunks_from_missing(missing: &[usize]) -> Result<Vec<usize>> {
    if let Some(w) = missing.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedMissing(format!("{} followed by {}", w[0], w[1])));
    }
    let mut chunks: Vec<usize> = Vec::new();
    for (k, &idx) in missing.iter().enumerate() {
        match chunks.last_mut() {
            Some(len) if missing[k - 1] + 1 == idx => *len += 1,
            _ => chunks.push(1),
        }
    }
    Ok(chunks)
}

/// Full identification: trivial when nothing was dropped, the LIS fast path
/// when best matches are already ordered, genetic refinement otherwise.
pub fn identify_dropped_frames(
    reference: &VideoSequence,
    distorted: &VideoSequence,
    cfg: &MetricConfig,
    ga: &GaConfig,
) -> Result<Alignment> {
    let (m, n) = (reference.len(), distorted.len());
    if m < n {
        return Err(Error::DistortedLonger { m, n });
    }
    if m == n {
        cfg.validate()?;
        let scores = (0..n)
            .into_par_iter()
            .map(|i| psnr(reference.frame(i), distorted.frame(i), cfg))
            .collect::<Result<Vec<_>>>()?;
        let fitness = scores.iter().sum::<f64>() / n as f64;
        return Alignment::from_mapping(m, (0..n).collect(), AlignmentMethod::TrivialNoDrop, fitness);
    }

    let dm = build_diff_matrix(reference, distorted, cfg)?;
    align_matrix(&dm, ga)
}

/// Steps 3 and 4 on an already built matrix.
pub fn align_matrix(dm: &DiffMatrix, ga: &GaConfig) -> Result<Alignment> {
    let lis = lis_of_best_indices(dm);
    if lis.len() == dm.distorted_len() {
        let fitness = dm.best_psnr().iter().sum::<f64>() / dm.distorted_len() as f64;
        return Alignment::from_mapping(
            dm.reference_len(),
            dm.best_index().to_vec(),
            AlignmentMethod::ExactLis,
            fitness,
        );
    }
    refine_with_ga(dm, &lis, ga)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_examples() {
        assert_eq!(chunks_from_missing(&[2, 3, 4, 5, 8, 10]).unwrap(), vec![4, 1, 1]);
        assert_eq!(chunks_from_missing(&[]).unwrap(), Vec::<usize>::new());
        assert_eq!(chunks_from_missing(&[0, 1, 2]).unwrap(), vec![3]);
        assert!(matches!(chunks_from_missing(&[3, 2]), Err(Error::UnsortedMissing(_))));
        assert!(chunks_from_missing(&[1, 1]).is_err());
    }

    #[test]
    fn alignment_invariants() {
        let a = Alignment::from_mapping(12, vec![0, 1, 6, 7, 9, 11], AlignmentMethod::ExactLis, 100.0).unwrap();
        assert_eq!(a.missing(), &[2, 3, 4, 5, 8, 10]);
        assert_eq!(a.chunk_lengths(), &[4, 1, 1]);
        assert_eq!(a.chunk_lengths().iter().sum::<usize>(), 6);
        assert!(Alignment::from_mapping(5, vec![1, 1], AlignmentMethod::GaRefined, 0.0).is_err());
        assert!(Alignment::from_mapping(5, vec![0, 4], AlignmentMethod::GaRefined, 0.0).is_ok());
        assert!(Alignment::from_mapping(5, vec![0, 5], AlignmentMethod::GaRefined, 0.0).is_err());
        assert!(Alignment::from_mapping(2, vec![0, 1, 2], AlignmentMethod::GaRefined, 0.0).is_err());
    }

    #[test]
    fn fast_path_takes_best_indices() {
        let dm = DiffMatrix::from_rows(5, vec![vec![9.0, 1.0, 1.0], vec![1.0, 9.0, 1.0], vec![1.0, 1.0, 9.0]]).unwrap();
        let a = align_matrix(&dm, &GaConfig::default()).unwrap();
        assert_eq!(a.mapping(), &[0, 2, 4]);
        assert_eq!(a.method(), AlignmentMethod::ExactLis);
        assert_eq!(a.fitness(), 9.0);
        assert_eq!(a.missing(), &[1, 3]);
    }

    #[test]
    fn repeated_best_falls_back_to_search() {
        let dm = DiffMatrix::from_rows(5, vec![vec![9.0, 1.0, 1.0], vec![1.0, 1.0, 9.0], vec![1.0, 9.0, 1.0]]).unwrap();
        let a = align_matrix(&dm, &GaConfig::default()).unwrap();
        assert_eq!(a.method(), AlignmentMethod::GaRefined);
        assert!(a.mapping().windows(2).all(|w| w[0] < w[1]));
    }
}
