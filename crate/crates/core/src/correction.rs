//! Rebuilds a reference-length sequence from the distorted frames by filling
//! every dropped position.

use serde::{Deserialize, Serialize};

use crate::alignment::Alignment;
use crate::error::{Error, Result};
use crate::video_io::{Frame, VideoSequence};

/// How dropped positions are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcealmentStrategy {
    /// Hold the last frame before the gap.
    #[default]
    RepeatLast,
    /// Fill the whole gap with the mean of its two surviving neighbors.
    AdjacentAverage,
    /// Fill each position with the mean of the previous corrected frame and
    /// the next surviving frame.
    ContiguousAverage,
}

/// The corrected sequence plus any boundary fallbacks that were applied.
#[derive(Debug, Clone)]
pub struct Corrected {
    pub video: VideoSequence,
    pub warnings: Vec<String>,
}

/// Per-sample mean rounded half up.
pub fn average_frames(a: &Frame, b: &Frame) -> Result<Frame> {
    a.zip_planes(b, |x, y| (x as u16 + y as u16).div_ceil(2) as u8)
}

/// Builds the corrected sequence `V_C` of reference length.
///
/// Surviving frames are copied unchanged to their matched positions. A gap
/// with no surviving frame on one side falls back to the side that exists.
pub fn construct_corrected(
    distorted: &VideoSequence,
    alignment: &Alignment,
    strategy: ConcealmentStrategy,
) -> Result<Corrected> {
    let m = alignment.reference_len();
    let mapping = alignment.mapping();
    if mapping.len() != distorted.len() {
        return Err(Error::InconsistentAlignment(format!(
            "alignment maps {} frames but the distorted video has {}",
            mapping.len(),
            distorted.len()
        )));
    }

    let mut slots: Vec<Option<Frame>> = vec![None; m];
    for (i, &r) in mapping.iter().enumerate() {
        slots[r] = Some(distorted.frame(i).clone());
    }

    let mut warnings = Vec::new();
    let mut start = 0;
    while start < m {
        if slots[start].is_some() {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < m && slots[end].is_none() {
            end += 1;
        }
        // Gap is [start, end); neighbors at start - 1 and end.
        let before = start.checked_sub(1).and_then(|p| slots[p].clone());
        let after = slots.get(end).cloned().flatten();
        let fills = fill_gap(before, after, end - start, strategy, start, &mut warnings)?;
        for (slot, frame) in slots[start..end].iter_mut().zip(fills) {
            *slot = Some(frame);
        }
        start = end;
    }

    let frames = slots.into_iter().map(|f| f.expect("every gap filled")).collect();
    let video = distorted.derive(frames, format!("{}-corrected", distorted.source_name()))?;
    Ok(Corrected { video, warnings })
}

fn fill_gap(
    before: Option<Frame>,
    after: Option<Frame>,
    len: usize,
    strategy: ConcealmentStrategy,
    start: usize,
    warnings: &mut Vec<String>,
) -> Result<Vec<Frame>> {
    let (before, after) = match (before, after) {
        (Some(b), Some(a)) => (b, a),
        (Some(b), None) => {
            warnings.push(format!(
                "gap at {start}..{} has no following frame; holding the preceding frame",
                start + len
            ));
            return Ok(vec![b; len]);
        }
        (None, Some(a)) => {
            warnings.push(format!(
                "gap at {start}..{} has no preceding frame; using the following frame",
                start + len
            ));
            return Ok(vec![a; len]);
        }
        (None, None) => {
            return Err(Error::InconsistentAlignment(
                "no surviving frames to conceal from".into(),
            ));
        }
    };

    Ok(match strategy {
        ConcealmentStrategy::RepeatLast => vec![before; len],
        ConcealmentStrategy::AdjacentAverage => vec![average_frames(&before, &after)?; len],
        ConcealmentStrategy::ContiguousAverage => {
            let mut out: Vec<Frame> = Vec::with_capacity(len);
            let mut prev = before;
            for _ in 0..len {
                let next = average_frames(&prev, &after)?;
                out.push(next.clone());
                prev = next;
            }
            out
        }
    })
}
