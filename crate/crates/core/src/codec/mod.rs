//! Frame encoder and decoder.
//!
//! Per slice, blocks are coded in index order: intra mode by SATD against
//! reconstructed neighbor means, transform by Lagrangian cost, then
//! quantization, scan selection and arithmetic coding. The encoder keeps the
//! same reconstruction the decoder will produce, so predictions never drift.
//! Slices share nothing and run in parallel.

mod config;
mod decoder;
mod encoder;

pub use config::EncoderConfig;
pub use decoder::{decode, decode_bytes};
pub use encoder::{encode, encode_traced, BlockTrace, EncodedFrame, FrameStats};

use rayon::prelude::*;

use crate::cloud::{PointCloud, YuvAttributes};
use crate::color;
use crate::partition::{build_kdtree, PartitionError};
use crate::transform::{self, GftBasis, GraphOverrides};

/// Decoder output, also returned by the encoder as its reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedCloud {
    /// Geometry with colors converted back to 8-bit RGB.
    pub cloud: PointCloud,
    /// Reconstructed attributes before RGB rounding.
    pub yuv: YuvAttributes,
}

impl DecodedCloud {
    pub(crate) fn from_yuv(positions: &[[f64; 3]], yuv: YuvAttributes) -> DecodedCloud {
        let rgb = color::yuv_to_rgb(&yuv);
        let cloud = PointCloud::from_positions(positions, [0; 3]).with_colors(&rgb);
        DecodedCloud { cloud, yuv }
    }
}

/// Coding blocks of one slice: frame point indices per leaf, in index order.
pub(crate) fn slice_blocks(
    indices: &[usize],
    positions: &[[f64; 3]],
    depth: u32,
) -> Result<Vec<Vec<usize>>, PartitionError> {
    Ok(build_kdtree(indices, positions, depth)?.leaves)
}

/// GFT bases for the selected blocks, computed in parallel.
pub(crate) fn block_bases(
    blocks: &[Vec<usize>],
    positions: &[[f64; 3]],
    graph: GraphOverrides,
    wanted: impl Fn(usize) -> bool + Sync,
) -> Vec<Option<GftBasis>> {
    blocks
        .par_iter()
        .enumerate()
        .map(|(k, b)| {
            wanted(k).then(|| {
                let pos: Vec<[f64; 3]> = b.iter().map(|&i| positions[i]).collect();
                transform::block_basis(&pos, graph)
            })
        })
        .collect()
}

/// Header encoding of an optional graph parameter; 0 means per-block default.
pub(crate) fn override_to_header(v: Option<f64>) -> f32 {
    v.map_or(0.0, |x| x as f32)
}

pub(crate) fn override_from_header(v: f32) -> Option<f64> {
    (v != 0.0).then_some(v as f64)
}
