//! Procedural test clips with known scene structure.
//!
//! Textures are sums of random plane waves, so they can be sampled at
//! fractional offsets for smooth motion. Every frame carries fresh sensor
//! noise, which keeps all frames distinct.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video_io::{Chroma, Frame, FrameRate, VideoSequence};

const WAVES: usize = 6;
const UNIQUE_TEXTURE_BASE: u64 = 1 << 20;

/// One stretch of the clip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// A motionless scene.
    Still { len: usize, texture: u32 },
    /// Each frame shows `home` with probability `p_home`, otherwise a texture
    /// seen nowhere else.
    Flicker { len: usize, home: u32, p_home: f64 },
    /// A texture translating by `speed` pixels per frame.
    Pan { len: usize, texture: u32, speed: f64 },
}

impl Segment {
    pub fn len(&self) -> usize {
        match *self {
            Segment::Still { len, .. } | Segment::Flicker { len, .. } | Segment::Pan { len, .. } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn with_len(self, len: usize) -> Self {
        match self {
            Segment::Still { texture, .. } => Segment::Still { len, texture },
            Segment::Flicker { home, p_home, .. } => Segment::Flicker { len, home, p_home },
            Segment::Pan { texture, speed, .. } => Segment::Pan { len, texture, speed },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub segments: Vec<Segment>,
    pub seed: u64,
    /// Per-sample noise is uniform in `[-noise, noise]`.
    pub noise: u8,
}

impl SynthSpec {
    /// 250 frames: six still scenes (the fifth repeating the third), a
    /// flicker stretch and a fast pan.
    pub fn standard(width: usize, height: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            segments: vec![
                Segment::Still { len: 30, texture: 0 },
                Segment::Still { len: 30, texture: 1 },
                Segment::Still { len: 20, texture: 2 },
                Segment::Still { len: 20, texture: 3 },
                Segment::Still { len: 20, texture: 2 },
                Segment::Still { len: 20, texture: 4 },
                Segment::Flicker {
                    len: 70,
                    home: 5,
                    p_home: 0.5,
                },
                Segment::Pan {
                    len: 40,
                    texture: 6,
                    speed: 2.5,
                },
            ],
            seed,
            noise: 2,
        }
    }

    /// The standard layout stretched to `frames` frames.
    pub fn standard_with_len(width: usize, height: usize, frames: usize, seed: u64) -> Self {
        let mut spec = Self::standard(width, height, seed);
        let base: usize = spec.total_frames();
        let mut used = 0;
        let last = spec.segments.len() - 1;
        for (k, seg) in spec.segments.iter_mut().enumerate() {
            let len = if k == last {
                frames.saturating_sub(used)
            } else {
                (seg.len() * frames + base / 2) / base
            };
            used += len;
            *seg = seg.with_len(len);
        }
        spec.segments.retain(|s| !s.is_empty());
        spec
    }

    pub fn total_frames(&self) -> usize {
        self.segments.iter().map(Segment::len).sum()
    }
}

struct Wave {
    fx: f64,
    fy: f64,
    phase: f64,
    amp: f64,
}

struct Texture(Vec<Wave>);

impl Texture {
    fn new(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id + 1);
        let waves = (0..WAVES)
            .map(|_| {
                let period: f64 = rng.gen_range(8.0..48.0);
                let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                Wave {
                    fx: angle.cos() / period,
                    fy: angle.sin() / period,
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                    amp: rng.gen_range(8.0..22.0),
                }
            })
            .collect();
        Self(waves)
    }

    fn sample(&self, x: f64, y: f64) -> f64 {
        let wave_sum: f64 = self
            .0
            .iter()
            .map(|w| w.amp * (std::f64::consts::TAU * (w.fx * x + w.fy * y) + w.phase).sin())
            .sum();
        128.0 + wave_sum
    }
}

/// Renders `spec` as an I420 sequence at 25 fps.
pub fn synthesize(spec: &SynthSpec) -> Result<VideoSequence> {
    if spec.width < 2 || spec.height < 2 || !spec.width.is_multiple_of(2) || !spec.height.is_multiple_of(2) {
        return Err(Error::InvalidGeometry {
            width: spec.width,
            height: spec.height,
            reason: "synthetic clips need even, non-zero dimensions",
        });
    }
    if spec.total_frames() == 0 {
        return Err(Error::EmptySequence);
    }

    let mut frames = Vec::with_capacity(spec.total_frames());
    let mut layout_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for seg in &spec.segments {
        match *seg {
            Segment::Still { len, texture } => {
                let tex = Texture::new(spec.seed, texture as u64);
                for _ in 0..len {
                    frames.push(render(spec, &tex, 0.0, frames.len())?);
                }
            }
            Segment::Flicker { len, home, p_home } => {
                let home_tex = Texture::new(spec.seed, home as u64);
                for _ in 0..len {
                    let index = frames.len();
                    let frame = if layout_rng.gen_bool(p_home.clamp(0.0, 1.0)) {
                        render(spec, &home_tex, 0.0, index)?
                    } else {
                        let unique = Texture::new(spec.seed, UNIQUE_TEXTURE_BASE + index as u64);
                        render(spec, &unique, 0.0, index)?
                    };
                    frames.push(frame);
                }
            }
            Segment::Pan { len, texture, speed } => {
                let tex = Texture::new(spec.seed, texture as u64);
                for t in 0..len {
                    frames.push(render(spec, &tex, speed * t as f64, frames.len())?);
                }
            }
        }
    }
    VideoSequence::new(frames, FrameRate::default(), "synthetic")
}

fn render(spec: &SynthSpec, tex: &Texture, shift: f64, index: usize) -> Result<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x005e_ed0f_f00d);
    rng.set_stream(index as u64);
    let noise = spec.noise as i32;
    let (w, h) = (spec.width, spec.height);
    let mut luma = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let clean = tex.sample(x as f64 + shift, y as f64 + 0.5 * shift).round() as i32;
            let jitter = if noise > 0 { rng.gen_range(-noise..=noise) } else { 0 };
            luma.push((clean + jitter).clamp(0, 255) as u8);
        }
    }
    let chroma = Chroma {
        u: vec![128; (w / 2) * (h / 2)],
        v: vec![128; (w / 2) * (h / 2)],
    };
    Frame::new(w, h, luma, Some(chroma))
}
