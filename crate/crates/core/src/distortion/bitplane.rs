//! Random bitplane replacement on luma.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video_io::VideoSequence;

/// Which luma bit to replace with random bits; `None` leaves frames untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpatialSpec {
    pub bitplane: Option<u8>,
    pub seed: u64,
}

impl SpatialSpec {
    pub const SUPPORTED_BITPLANES: [u8; 2] = [0, 3];

    pub fn validate(&self) -> Result<()> {
        match self.bitplane {
            Some(b) if !Self::SUPPORTED_BITPLANES.contains(&b) => {
                Err(Error::InvalidConfig(format!("bitplane must be 0 or 3, got {b}")))
            }
            _ => Ok(()),
        }
    }
}

/// Replaces bit `spec.bitplane` of every luma sample with an independent fair
/// coin flip. Frame `i` draws from stream `i` of the seeded generator, so the
/// result does not depend on processing order. Chroma is copied.
pub fn embed_bitplane(video: &VideoSequence, spec: &SpatialSpec) -> Result<VideoSequence> {
    spec.validate()?;
    let Some(bit) = spec.bitplane else {
        return Ok(video.clone());
    };
    let mask = 1u8 << bit;
    let frames = video
        .frames()
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            let mut luma = frame.luma().to_vec();
            for block in luma.chunks_mut(64) {
                let bits = rng.next_u64();
                for (k, sample) in block.iter_mut().enumerate() {
                    let on = (bits >> k) & 1 == 1;
                    *sample = if on { *sample | mask } else { *sample & !mask };
                }
            }
            frame.with_luma(luma)
        })
        .collect::<Result<Vec<_>>>()?;
    video.derive(frames, format!("{}-bitplane{bit}", video.source_name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::{Frame, FrameRate};

    fn ramp(frames: usize, w: usize, h: usize) -> VideoSequence {
        let frames = (0..frames)
            .map(|f| {
                let luma = (0..w * h).map(|i| ((i * 7 + f * 13) % 256) as u8).collect();
                let filled = Frame::filled(w, h, 0, true).unwrap();
                filled.with_luma(luma).unwrap()
            })
            .collect();
        VideoSequence::new(frames, FrameRate::default(), "ramp").unwrap()
    }

    #[test]
    fn changes_only_the_chosen_bit() {
        let v = ramp(3, 32, 32);
        for (bit, step) in [(0u8, 1i16), (3, 8)] {
            let out = embed_bitplane(
                &v,
                &SpatialSpec {
                    bitplane: Some(bit),
                    seed: 11,
                },
            )
            .unwrap();
            for (a, b) in v.frames().iter().zip(out.frames()) {
                for (&x, &y) in a.luma().iter().zip(b.luma()) {
                    let diff = y as i16 - x as i16;
                    assert!(diff == 0 || diff.abs() == step);
                }
                assert_eq!(a.chroma(), b.chroma());
            }
        }
    }

    #[test]
    fn about_half_the_samples_change() {
        let v = ramp(4, 512, 512);
        let out = embed_bitplane(
            &v,
            &SpatialSpec {
                bitplane: Some(3),
                seed: 2,
            },
        )
        .unwrap();
        let (mut changed, mut total) = (0usize, 0usize);
        for (a, b) in v.frames().iter().zip(out.frames()) {
            total += a.luma().len();
            changed += a.luma().iter().zip(b.luma()).filter(|(x, y)| x != y).count();
        }
        assert!(total >= 1_000_000);
        let fraction = changed as f64 / total as f64;
        assert!((fraction - 0.5).abs() <= 0.01, "{fraction}");
    }

    #[test]
    fn seeded_and_order_independent() {
        let v = ramp(3, 16, 16);
        let spec = SpatialSpec {
            bitplane: Some(0),
            seed: 5,
        };
        let whole = embed_bitplane(&v, &spec).unwrap();
        assert_eq!(whole.frames(), embed_bitplane(&v, &spec).unwrap().frames());
        let tail = v.derive(v.frames()[..1].to_vec(), "head").unwrap();
        assert_eq!(embed_bitplane(&tail, &spec).unwrap().frame(0), whole.frame(0));
    }

    #[test]
    fn none_and_unsupported() {
        let v = ramp(2, 16, 16);
        assert_eq!(
            embed_bitplane(&v, &SpatialSpec::default()).unwrap().frames(),
            v.frames()
        );
        assert!(embed_bitplane(
            &v,
            &SpatialSpec {
                bitplane: Some(5),
                seed: 0
            }
        )
        .is_err());
    }
}
