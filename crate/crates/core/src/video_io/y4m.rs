//! YUV4MPEG2 container reading and writing.
//!
//! Only 8-bit 4:2:0 (`C420`, `C420jpeg`, `C420paldv`, `C420mpeg2`) and
//! monochrome (`Cmono`) streams are accepted. A missing `C` tag means
//! `C420jpeg`.

use std::io::{Read, Write};

use super::frame::{Chroma, Frame, FrameRate, VideoSequence};
use crate::error::{Error, Result};

const SIGNATURE: &[u8] = b"YUV4MPEG2";
const FRAME_TAG: &[u8] = b"FRAME";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Colorspace {
    Yuv420,
    Mono,
}

#[derive(Debug)]
struct Header {
    width: usize,
    height: usize,
    rate: FrameRate,
    colorspace: Colorspace,
}

/// Reads an entire Y4M stream into memory and decodes it.
pub fn read_y4m<R: Read>(mut reader: R) -> Result<VideoSequence> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_y4m(&bytes)
}

/// Decodes a Y4M byte buffer.
pub fn parse_y4m(bytes: &[u8]) -> Result<VideoSequence> {
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or(Error::MalformedSignature)?;
    let header = parse_header(&bytes[..header_end])?;

    let luma_len = header.width * header.height;
    let chroma_len = match header.colorspace {
        Colorspace::Yuv420 => (header.width / 2) * (header.height / 2),
        Colorspace::Mono => 0,
    };
    let payload_len = luma_len + 2 * chroma_len;

    let mut frames = Vec::new();
    let mut pos = header_end + 1;
    while pos < bytes.len() {
        let index = frames.len();
        let rest = &bytes[pos..];
        let line_end = match rest.iter().position(|&b| b == b'\n') {
            Some(e) => e,
            None if FRAME_TAG.starts_with(rest) || rest.starts_with(FRAME_TAG) => {
                return Err(Error::Truncated {
                    frame: index,
                    expected: payload_len,
                    got: 0,
                })
            }
            None => return Err(Error::MalformedFrameHeader { frame: index }),
        };
        let line = &rest[..line_end];
        if !line.starts_with(FRAME_TAG) || !(line.len() == FRAME_TAG.len() || line[FRAME_TAG.len()] == b' ') {
            return Err(Error::MalformedFrameHeader { frame: index });
        }
        pos += line_end + 1;

        let available = bytes.len() - pos;
        if available < payload_len {
            return Err(Error::Truncated {
                frame: index,
                expected: payload_len,
                got: available,
            });
        }
        let payload = &bytes[pos..pos + payload_len];
        pos += payload_len;

        let luma = payload[..luma_len].to_vec();
        let chroma = (header.colorspace == Colorspace::Yuv420).then(|| Chroma {
            u: payload[luma_len..luma_len + chroma_len].to_vec(),
            v: payload[luma_len + chroma_len..].to_vec(),
        });
        frames.push(Frame::new(header.width, header.height, luma, chroma)?);
    }

    VideoSequence::new(frames, header.rate, "y4m")
}

fn parse_header(line: &[u8]) -> Result<Header> {
    let line = std::str::from_utf8(line).map_err(|_| Error::MalformedSignature)?;
    let mut tokens = line.split(' ').filter(|t| !t.is_empty());
    if tokens.next().map(str::as_bytes) != Some(SIGNATURE) {
        return Err(Error::MalformedSignature);
    }

    let mut width = None;
    let mut height = None;
    let mut rate = FrameRate::default();
    let mut colorspace = Colorspace::Yuv420;
    for token in tokens {
        let (tag, value) = token.split_at(1);
        let bad = || Error::MalformedHeader(token.to_string());
        match tag {
            "W" => width = Some(value.parse::<usize>().map_err(|_| bad())?),
            "H" => height = Some(value.parse::<usize>().map_err(|_| bad())?),
            "F" => {
                let (n, d) = value.split_once(':').ok_or_else(bad)?;
                rate = FrameRate::new(n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?);
                if rate.num == 0 || rate.den == 0 {
                    return Err(bad());
                }
            }
            "C" => {
                colorspace = match value {
                    "420" | "420jpeg" | "420paldv" | "420mpeg2" => Colorspace::Yuv420,
                    "mono" => Colorspace::Mono,
                    other => return Err(Error::UnsupportedColorspace(other.to_string())),
                }
            }
            // Interlacing, aspect ratio and extensions carry no sample data.
            "I" | "A" | "X" => {}
            _ => return Err(bad()),
        }
    }

    let width = width.ok_or_else(|| Error::MalformedHeader("missing W".into()))?;
    let height = height.ok_or_else(|| Error::MalformedHeader("missing H".into()))?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidGeometry {
            width,
            height,
            reason: "dimensions must be non-zero",
        });
    }
    if colorspace == Colorspace::Yuv420 && (width % 2 != 0 || height % 2 != 0) {
        return Err(Error::InvalidGeometry {
            width,
            height,
            reason: "4:2:0 chroma requires even dimensions",
        });
    }
    Ok(Header {
        width,
        height,
        rate,
        colorspace,
    })
}

/// Writes `video` as Y4M. Luma-only sequences use the `Cmono` tag.
pub fn write_y4m<W: Write>(video: &VideoSequence, mut writer: W) -> Result<()> {
    let tag = if video.has_chroma() { "420jpeg" } else { "mono" };
    writeln!(
        writer,
        "YUV4MPEG2 W{} H{} F{} Ip A0:0 C{}",
        video.width(),
        video.height(),
        video.frame_rate(),
        tag
    )?;
    for frame in video.frames() {
        writer.write_all(FRAME_TAG)?;
        writer.write_all(b"\n")?;
        writer.write_all(frame.luma())?;
        if let Some(c) = frame.chroma() {
            writer.write_all(&c.u)?;
            writer.write_all(&c.v)?;
        }
    }
    writer.flush()?;
    Ok(())
}
