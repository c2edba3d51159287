use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::frame::{Chroma, Frame, FrameRate, VideoSequence};
use crate::error::{Error, Result};

/// Plane layout of a headerless planar stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawLayout {
    /// Y, then U and V at quarter resolution.
    I420,
    LumaOnly,
}

impl RawLayout {
    pub fn frame_size(self, width: usize, height: usize) -> usize {
        match self {
            RawLayout::I420 => width * height + 2 * (width / 2) * (height / 2),
            RawLayout::LumaOnly => width * height,
        }
    }
}

/// Slices a headerless planar stream into frames at 25 fps.
pub fn read_raw_yuv<R: Read>(reader: R, width: usize, height: usize, layout: RawLayout) -> Result<VideoSequence> {
    read_raw_yuv_with_rate(reader, width, height, layout, FrameRate::default())
}

pub fn read_raw_yuv_with_rate<R: Read>(
    mut reader: R,
    width: usize,
    height: usize,
    layout: RawLayout,
    rate: FrameRate,
) -> Result<VideoSequence> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidGeometry {
            width,
            height,
            reason: "dimensions must be non-zero",
        });
    }
    if layout == RawLayout::I420 && (!width.is_multiple_of(2) || !height.is_multiple_of(2)) {
        return Err(Error::InvalidGeometry {
            width,
            height,
            reason: "4:2:0 chroma requires even dimensions",
        });
    }
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;

    let frame_size = layout.frame_size(width, height);
    if bytes.is_empty() || bytes.len() % frame_size != 0 {
        return Err(Error::NotFrameMultiple {
            len: bytes.len(),
            frame_size,
        });
    }

    let luma_len = width * height;
    let chroma_len = (width / 2) * (height / 2);
    let frames = bytes
        .chunks_exact(frame_size)
        .map(|chunk| {
            let chroma = (layout == RawLayout::I420).then(|| Chroma {
                u: chunk[luma_len..luma_len + chroma_len].to_vec(),
                v: chunk[luma_len + chroma_len..].to_vec(),
            });
            Frame::new(width, height, chunk[..luma_len].to_vec(), chroma)
        })
        .collect::<Result<Vec<_>>>()?;
    VideoSequence::new(frames, rate, "raw")
}

/// Writes planes back to back with no header.
pub fn write_raw_yuv<W: Write>(video: &VideoSequence, mut writer: W) -> Result<()> {
    for frame in video.frames() {
        writer.write_all(frame.luma())?;
        if let Some(c) = frame.chroma() {
            writer.write_all(&c.u)?;
            writer.write_all(&c.v)?;
        }
    }
    writer.flush()?;
    Ok(())
}
