//! Seeded drop-plan generation.
//!
//! Chunk lengths come first: a total is drawn from the totals reachable with
//! chunks inside the cfd band, split into the fewest chunks that can hold it.
//! Chunks are then placed longest first, each uniformly among the sites whose
//! surrounding content matches the requested possibility.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DropCase, DropPlan, Possibility};
use crate::error::{Error, Result};
use crate::index::Scorer;
use crate::metrics::MetricConfig;
use crate::video_io::VideoSequence;

/// SSIM at or above this counts as "similar".
pub const DEFAULT_SIM_THRESHOLD: f64 = 0.9;

const PLACEMENT_ATTEMPTS: usize = 256;

/// Pairwise similarity between frames of one reference clip.
pub trait SimilarityProbe {
    fn len(&self) -> usize;

    fn similarity(&self, a: usize, b: usize) -> Result<f64>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Memoized SSIM between reference frames; shareable across threads.
pub struct FrameSimilarity<'a> {
    scorer: Scorer<'a>,
    cache: Mutex<HashMap<(usize, usize), f64>>,
}

impl<'a> FrameSimilarity<'a> {
    pub fn new(reference: &'a VideoSequence, cfg: &MetricConfig) -> Result<Self> {
        Ok(Self::from_scorer(Scorer::new(reference, cfg)?))
    }

    pub fn from_scorer(scorer: Scorer<'a>) -> Self {
        Self {
            scorer,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn scorer(&self) -> &Scorer<'a> {
        &self.scorer
    }
}

impl SimilarityProbe for FrameSimilarity<'_> {
    fn len(&self) -> usize {
        self.scorer.reference().len()
    }

    fn similarity(&self, a: usize, b: usize) -> Result<f64> {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let v = self.scorer.ssim_between(key.0, key.1)?;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

/// Which possibility, if any, describes dropping `len` frames at `start`.
///
/// `None` when the boundaries differ and every dropped frame resembles one of
/// them but not all resemble the left one.
pub fn classify_site<P: SimilarityProbe + ?Sized>(
    probe: &P,
    start: usize,
    len: usize,
    threshold: f64,
) -> Result<Option<Possibility>> {
    if start == 0 || len == 0 || start + len >= probe.len() {
        return Err(Error::InvalidPlan(format!(
            "site ({start}, {len}) lacks a surviving frame on each side (m = {})",
            probe.len()
        )));
    }
    let (left, right) = (start - 1, start + len);
    let similar = |a: usize, b: usize| probe.similarity(a, b).map(|v| v >= threshold);

    if similar(left, right)? {
        for t in start..right {
            if !similar(t, left)? && !similar(t, right)? {
                return Ok(Some(Possibility::SimilarBoundarySceneChange));
            }
        }
        return Ok(Some(Possibility::SimilarBoundaryStaticGap));
    }

    let mut all_left = true;
    for t in start..right {
        if !similar(t, left)? {
            all_left = false;
            if !similar(t, right)? {
                return Ok(Some(Possibility::ChangedBoundarySceneChange));
            }
        }
    }
    Ok(all_left.then_some(Possibility::ChangedBoundaryStaticGap))
}

/// Plans drops on `reference`, measuring similarity with SSIM.
pub fn plan_drops(
    reference: &VideoSequence,
    case: DropCase,
    possibility: Option<Possibility>,
    seed: u64,
    cfg: &MetricConfig,
) -> Result<DropPlan> {
    let probe = FrameSimilarity::new(reference, cfg)?;
    plan_drops_with(&probe, case, possibility, seed, DEFAULT_SIM_THRESHOLD)
}

/// Plans drops using an arbitrary similarity probe.
pub fn plan_drops_with<P: SimilarityProbe + ?Sized>(
    probe: &P,
    case: DropCase,
    possibility: Option<Possibility>,
    seed: u64,
    threshold: f64,
) -> Result<DropPlan> {
    let m = probe.len();
    if m < 3 {
        return Err(Error::InvalidPlan(format!(
            "need at least 3 frames to drop an interior chunk, got {m}"
        )));
    }
    let mut warnings = Vec::new();
    let (chunk_lo, chunk_hi) = band_counts(m, case.cfd_band(), "cfd", &mut warnings);
    let (total_lo, total_hi) = band_counts(m, case.tdf_band(), "tdf", &mut warnings);

    let totals: Vec<usize> = (total_lo..=total_hi)
        .filter(|&t| t.div_ceil(chunk_hi) * chunk_lo <= t)
        .collect();
    if totals.is_empty() {
        return Err(Error::InvalidPlan(format!(
            "no total in {total_lo}..={total_hi} splits into chunks of {chunk_lo}..={chunk_hi} frames"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = totals[rng.gen_range(0..totals.len())];
    let lengths = split_total(total, chunk_lo, chunk_hi, &mut rng);

    let mut last_failure = None;
    for _ in 0..PLACEMENT_ATTEMPTS {
        match place(probe, &lengths, possibility, threshold, &mut rng)? {
            Ok(mut chunks) => {
                chunks.sort_unstable();
                let plan = DropPlan {
                    m,
                    chunks,
                    case: Some(case),
                    possibility,
                    seed,
                    warnings,
                };
                plan.validate()?;
                return Ok(plan);
            }
            Err((placed, len)) => {
                let first = placed.is_empty();
                last_failure = Some((placed, len));
                if first {
                    break;
                }
            }
        }
    }

    let (placed, len) = last_failure.expect("at least one attempt");
    let census = site_census(probe, len, &placed, threshold)?;
    let wanted = possibility.map_or("any".to_string(), |p| p.to_string());
    Err(Error::NoQualifyingSite(format!(
        "possibility {wanted}, case {case}, chunk of {len} frames with {} already placed; \
         sites by possibility: 1={} 2={} 3={} 4={} unclassified={}",
        placed.len(),
        census[0],
        census[1],
        census[2],
        census[3],
        census[4]
    )))
}

/// Whole-frame counts for a percentage band, widened to the nearest count
/// when the band contains none.
fn band_counts(m: usize, (lo, hi): (f64, f64), what: &str, warnings: &mut Vec<String>) -> (usize, usize) {
    let lo_count = ((lo * m as f64 / 100.0) - 1e-9).ceil().max(1.0) as usize;
    let hi_count = ((hi * m as f64 / 100.0) + 1e-9).floor() as usize;
    if hi_count >= lo_count {
        return (lo_count, hi_count);
    }
    warnings.push(format!(
        "{what} band {lo}-{hi}% holds no whole frame count for m = {m}; using {lo_count}"
    ));
    (lo_count, lo_count)
}

/// Fewest chunks within `[lo, hi]` summing to `total`, in descending order.
fn split_total(total: usize, lo: usize, hi: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let k = total.div_ceil(hi);
    let mut lengths = vec![lo; k];
    for _ in 0..total - k * lo {
        let open: Vec<usize> = (0..k).filter(|&j| lengths[j] < hi).collect();
        lengths[*open.choose(rng).expect("total fits in k chunks")] += 1;
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths
}

type Placement = std::result::Result<Vec<(usize, usize)>, (Vec<(usize, usize)>, usize)>;

fn place<P: SimilarityProbe + ?Sized>(
    probe: &P,
    lengths: &[usize],
    possibility: Option<Possibility>,
    threshold: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Placement> {
    let mut placed: Vec<(usize, usize)> = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let mut sites = Vec::new();
        for start in free_sites(probe.len(), len, &placed) {
            let fits = match possibility {
                None => true,
                Some(p) => site_matches(probe, start, len, p, threshold)?,
            };
            if fits {
                sites.push(start);
            }
        }
        match sites.choose(rng) {
            Some(&start) => placed.push((start, len)),
            None => return Ok(Err((placed, len))),
        }
    }
    Ok(Ok(placed))
}

fn site_matches<P: SimilarityProbe + ?Sized>(
    probe: &P,
    start: usize,
    len: usize,
    wanted: Possibility,
    threshold: f64,
) -> Result<bool> {
    let boundary_similar = probe.similarity(start - 1, start + len)? >= threshold;
    let wants_similar = matches!(
        wanted,
        Possibility::SimilarBoundaryStaticGap | Possibility::SimilarBoundarySceneChange
    );
    if boundary_similar != wants_similar {
        return Ok(false);
    }
    Ok(classify_site(probe, start, len, threshold)? == Some(wanted))
}

/// Starts where a chunk of `len` keeps a surviving frame on both sides and
/// stays clear of already placed chunks.
fn free_sites(m: usize, len: usize, placed: &[(usize, usize)]) -> impl Iterator<Item = usize> + '_ {
    (1..m.saturating_sub(len)).filter(move |&s| placed.iter().all(|&(ps, pl)| s + len < ps || s > ps + pl))
}

/// Counts of free sites per possibility, with unclassified sites last.
fn site_census<P: SimilarityProbe + ?Sized>(
    probe: &P,
    len: usize,
    placed: &[(usize, usize)],
    threshold: f64,
) -> Result<[usize; 5]> {
    let mut counts = [0; 5];
    for start in free_sites(probe.len(), len, placed) {
        match classify_site(probe, start, len, threshold)? {
            Some(p) => counts[p as usize] += 1,
            None => counts[4] += 1,
        }
    }
    Ok(counts)
}
