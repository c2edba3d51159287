//! Full-reference video quality scoring for frame drops.
//!
//! The pipeline identifies which reference frames are missing from a
//! distorted video ([`alignment`]), rebuilds a temporally aligned copy by
//! concealing the gaps ([`correction`]), and scores spatial and temporal
//! degradation into a single index ([`index`]). [`distortion`] and
//! [`harness`] generate test material and run experiment grids.

pub mod alignment;
pub mod correction;
pub mod distortion;
pub mod error;
pub mod harness;
pub mod index;
pub mod metrics;
pub mod video_io;

pub use error::{Error, Result};
