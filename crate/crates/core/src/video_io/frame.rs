use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frames per second as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }
}

impl Default for FrameRate {
    fn default() -> Self {
        Self::new(25, 1)
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

/// The two chroma planes of a 4:2:0 picture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chroma {
    pub u: Vec<u8>,
    pub v: Vec<u8>,
}

/// One decoded 8-bit planar picture.
///
/// Luma is always present. Chroma, when present, is 4:2:0 subsampled so both
/// dimensions must be even.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    bit_depth: u8,
    luma: Vec<u8>,
    chroma: Option<Chroma>,
}

impl Frame {
    pub fn new(width: usize, height: usize, luma: Vec<u8>, chroma: Option<Chroma>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGeometry {
                width,
                height,
                reason: "dimensions must be non-zero",
            });
        }
        if luma.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "luma plane has {} samples, expected {}",
                luma.len(),
                width * height
            )));
        }
        if let Some(c) = &chroma {
            if !width.is_multiple_of(2) || !height.is_multiple_of(2) {
                return Err(Error::InvalidGeometry {
                    width,
                    height,
                    reason: "4:2:0 chroma requires even dimensions",
                });
            }
            let expected = (width / 2) * (height / 2);
            if c.u.len() != expected || c.v.len() != expected {
                return Err(Error::InvalidFrame(format!(
                    "chroma planes have {}/{} samples, expected {}",
                    c.u.len(),
                    c.v.len(),
                    expected
                )));
            }
        }
        Ok(Self {
            width,
            height,
            bit_depth: 8,
            luma,
            chroma,
        })
    }

    /// A luma-only frame.
    pub fn from_luma(width: usize, height: usize, luma: Vec<u8>) -> Result<Self> {
        Self::new(width, height, luma, None)
    }

    /// A frame with every luma sample set to `value` and neutral chroma.
    pub fn filled(width: usize, height: usize, value: u8, with_chroma: bool) -> Result<Self> {
        let chroma = with_chroma.then(|| {
            let len = (width / 2) * (height / 2);
            Chroma {
                u: vec![128; len],
                v: vec![128; len],
            }
        });
        Self::new(width, height, vec![value; width * height], chroma)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    /// Largest representable sample value, `2^bit_depth - 1`.
    pub fn max_value(&self) -> f64 {
        ((1u32 << self.bit_depth) - 1) as f64
    }

    pub fn luma(&self) -> &[u8] {
        &self.luma
    }

    pub fn chroma(&self) -> Option<&Chroma> {
        self.chroma.as_ref()
    }

    pub fn has_chroma(&self) -> bool {
        self.chroma.is_some()
    }

    /// Bytes occupied by all planes of this frame.
    pub fn payload_len(&self) -> usize {
        self.luma.len() + self.chroma.as_ref().map_or(0, |c| c.u.len() + c.v.len())
    }

    /// Replaces the luma plane, keeping geometry and chroma.
    pub fn with_luma(&self, luma: Vec<u8>) -> Result<Self> {
        Self::new(self.width, self.height, luma, self.chroma.clone())
    }

    /// True when both frames share geometry, depth and chroma layout.
    pub fn same_format(&self, other: &Frame) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bit_depth == other.bit_depth
            && self.has_chroma() == other.has_chroma()
    }

    pub(crate) fn check_comparable(&self, other: &Frame) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::GeometryMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        if self.bit_depth != other.bit_depth {
            return Err(Error::GeometryMismatch(format!(
                "bit depth {} vs {}",
                self.bit_depth, other.bit_depth
            )));
        }
        Ok(())
    }

    /// Applies `f` sample-wise to every plane of `self` and `other`.
    pub(crate) fn zip_planes(&self, other: &Frame, f: impl Fn(u8, u8) -> u8) -> Result<Frame> {
        if !self.same_format(other) {
            return Err(Error::GeometryMismatch(
                "frames differ in geometry or chroma layout".into(),
            ));
        }
        let zip = |a: &[u8], b: &[u8]| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect::<Vec<_>>();
        let chroma = match (&self.chroma, &other.chroma) {
            (Some(a), Some(b)) => Some(Chroma {
                u: zip(&a.u, &b.u),
                v: zip(&a.v, &b.v),
            }),
            _ => None,
        };
        Frame::new(self.width, self.height, zip(&self.luma, &other.luma), chroma)
    }
}

/// An ordered, non-empty run of frames sharing one format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSequence {
    frames: Vec<Frame>,
    frame_rate: FrameRate,
    source_name: String,
}

impl VideoSequence {
    pub fn new(frames: Vec<Frame>, frame_rate: FrameRate, source_name: impl Into<String>) -> Result<Self> {
        let first = frames.first().ok_or(Error::EmptySequence)?;
        if let Some((i, _)) = frames.iter().enumerate().find(|(_, f)| !f.same_format(first)) {
            return Err(Error::GeometryMismatch(format!(
                "frame {i} differs in format from frame 0"
            )));
        }
        if frame_rate.num == 0 || frame_rate.den == 0 {
            return Err(Error::InvalidConfig(format!(
                "frame rate {frame_rate} must be positive"
            )));
        }
        Ok(Self {
            frames,
            frame_rate,
            source_name: source_name.into(),
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false; sequences hold at least one frame.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, index: usize) -> &Frame {
        &self.frames[index]
    }

    pub fn frame_rate(&self) -> FrameRate {
        self.frame_rate
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn has_chroma(&self) -> bool {
        self.frames[0].has_chroma()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.source_name = name.into();
        self
    }

    /// Builds a sequence from `frames` with the rate of `self`.
    pub fn derive(&self, frames: Vec<Frame>, name: impl Into<String>) -> Result<Self> {
        Self::new(frames, self.frame_rate, name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_planes() {
        assert!(Frame::from_luma(4, 4, vec![0; 15]).is_err());
        assert!(Frame::from_luma(0, 4, vec![]).is_err());
        let odd = Chroma {
            u: vec![0; 2],
            v: vec![0; 2],
        };
        assert!(Frame::new(3, 4, vec![0; 12], Some(odd)).is_err());
        let short = Chroma {
            u: vec![0; 3],
            v: vec![0; 4],
        };
        assert!(Frame::new(4, 4, vec![0; 16], Some(short)).is_err());
    }

    #[test]
    fn sequence_requires_uniform_format() {
        let a = Frame::filled(4, 4, 0, true).unwrap();
        let b = Frame::filled(4, 4, 0, false).unwrap();
        assert!(matches!(
            VideoSequence::new(vec![], FrameRate::default(), "x"),
            Err(Error::EmptySequence)
        ));
        assert!(VideoSequence::new(vec![a.clone(), b], FrameRate::default(), "x").is_err());
        assert_eq!(
            VideoSequence::new(vec![a.clone(), a], FrameRate::default(), "x")
                .unwrap()
                .len(),
            2
        );
    }
}
