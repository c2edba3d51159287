//! Raw video input and output.

mod frame;
mod raw;
mod y4m;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use frame::{Chroma, Frame, FrameRate, VideoSequence};
pub use raw::{read_raw_yuv, read_raw_yuv_with_rate, write_raw_yuv, RawLayout};
pub use y4m::{parse_y4m, read_y4m, write_y4m};

use crate::error::Result;

/// Opens a `.y4m` file and labels the sequence with its file stem.
pub fn open_y4m(path: impl AsRef<Path>) -> Result<VideoSequence> {
    let path = path.as_ref();
    let video = read_y4m(BufReader::new(File::open(path)?))?;
    Ok(video.with_name(stem(path)))
}

/// Opens a headerless planar file.
pub fn open_raw_yuv(path: impl AsRef<Path>, width: usize, height: usize, layout: RawLayout) -> Result<VideoSequence> {
    let path = path.as_ref();
    let video = read_raw_yuv(BufReader::new(File::open(path)?), width, height, layout)?;
    Ok(video.with_name(stem(path)))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
