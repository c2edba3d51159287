use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{psnr, MetricConfig};
use crate::video_io::VideoSequence;

/// PSNR of every distorted frame against its feasible reference candidates.
///
/// Row `i` holds the reference indices `i..=i + d` where `d = m - n`: a
/// distorted frame that survived `d` drops can only have come from there.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    m: usize,
    n: usize,
    values: Vec<f64>,
    best_psnr: Vec<f64>,
    best_index: Vec<usize>,
}

impl DiffMatrix {
    /// Builds a matrix from precomputed rows of `d + 1` values each.
    pub fn from_rows(m: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        if m < n {
            return Err(Error::DistortedLonger { m, n });
        }
        let width = m - n + 1;
        if let Some(i) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::InconsistentAlignment(format!(
                "row {i} has {} candidates, expected {width}",
                rows[i].len()
            )));
        }
        let mut best_psnr = Vec::with_capacity(n);
        let mut best_index = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            // Strict comparison keeps the smallest reference index on ties.
            let (k, &v) = row
                .iter()
                .enumerate()
                .fold((0, &row[0]), |acc, (k, v)| if *v > *acc.1 { (k, v) } else { acc });
            best_psnr.push(v);
            best_index.push(i + k);
        }
        Ok(Self {
            m,
            n,
            values: rows.into_iter().flatten().collect(),
            best_psnr,
            best_index,
        })
    }

    pub fn reference_len(&self) -> usize {
        self.m
    }

    pub fn distorted_len(&self) -> usize {
        self.n
    }

    /// Number of dropped frames, `m - n`.
    pub fn drops(&self) -> usize {
        self.m - self.n
    }

    /// Candidate PSNRs for row `i`, indexed by offset `0..=d`.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.drops() + 1;
        &self.values[i * w..(i + 1) * w]
    }

    /// PSNR of distorted frame `i` against reference frame `i + offset`.
    pub fn at_offset(&self, i: usize, offset: usize) -> f64 {
        self.row(i)[offset]
    }

    /// PSNR of distorted frame `i` against `reference`, if it is a candidate.
    pub fn candidate(&self, i: usize, reference: usize) -> Option<f64> {
        reference
            .checked_sub(i)
            .filter(|&off| off <= self.drops())
            .map(|off| self.at_offset(i, off))
    }

    pub fn best_psnr(&self) -> &[f64] {
        &self.best_psnr
    }

    pub fn best_index(&self) -> &[usize] {
        &self.best_index
    }
}

/// Computes every PSNR cell for reference `reference` and distorted `distorted`.
pub fn build_diff_matrix(
    reference: &VideoSequence,
    distorted: &VideoSequence,
    cfg: &MetricConfig,
) -> Result<DiffMatrix> {
    cfg.validate()?;
    let (m, n) = (reference.len(), distorted.len());
    if m < n {
        return Err(Error::DistortedLonger { m, n });
    }
    let d = m - n;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..=i + d)
                .map(|r| psnr(reference.frame(r), distorted.frame(i), cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    DiffMatrix::from_rows(m, rows)
}
