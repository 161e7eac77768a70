use rayon::prelude::*;

use super::{block_bases, override_from_header, slice_blocks, DecodedCloud};
use crate::cloud::{mean_rows, YuvAttributes};
use crate::entropy::bitstream::{unpack_index_map, Bitstream, SliceHeader, ToolFlags};
use crate::entropy::{BitstreamError, SliceReader};
use crate::error::{Error, Result};
use crate::partition::{slices_from_flags, PartitionError};
use crate::prediction::{self, IntraMode, MODE_COUNT};
use crate::transform::{self, GraphOverrides, TransformMode};

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Bitstream(BitstreamError::Corrupt(msg.into()))
}

/// A partition that cannot be rebuilt means the stream and geometry disagree.
fn layout_error(e: PartitionError) -> Error {
    corrupt(format!("slice layout does not fit the geometry: {e}"))
}

pub fn decode_bytes(bytes: &[u8], positions: &[[f64; 3]]) -> Result<DecodedCloud> {
    decode(&Bitstream::from_bytes(bytes)?, positions)
}

/// Reconstructs colors for `positions` from a parsed bitstream.
pub fn decode(stream: &Bitstream, positions: &[[f64; 3]]) -> Result<DecodedCloud> {
    let header = &stream.header;
    let count = header.point_count as usize;
    if positions.len() != count {
        return Err(Error::GeometryMismatch { expected: count, found: positions.len() });
    }
    if positions.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Config("point coordinates must be finite".into()));
    }
    let slices = slice_membership(&header.slices, header.flags, positions)?;

    let outputs: Vec<Vec<(usize, [f64; 3])>> = slices
        .par_iter()
        .zip(&header.slices)
        .zip(&stream.segments)
        .map(|((indices, sh), segment)| decode_slice(indices, sh, segment, header.flags, positions))
        .collect::<Result<_>>()?;

    let mut rows = vec![[0.0; 3]; count];
    for (i, r) in outputs.into_iter().flatten() {
        rows[i] = r;
    }
    Ok(DecodedCloud::from_yuv(positions, YuvAttributes::new(rows)))
}

fn slice_membership(
    headers: &[SliceHeader],
    flags: ToolFlags,
    positions: &[[f64; 3]],
) -> Result<Vec<Vec<usize>>> {
    let all = || (0..positions.len()).collect::<Vec<usize>>();
    match headers {
        [] if positions.is_empty() => Ok(Vec::new()),
        [] => Err(corrupt("no slices for a non-empty frame")),
        _ if positions.is_empty() => Err(corrupt("slices present in an empty frame")),
        [only] => {
            if !only.index_map.is_empty() {
                return Err(corrupt("single slice carries an index map"));
            }
            Ok(vec![all()])
        }
        [smooth, rough] => {
            if !flags.slices {
                return Err(corrupt("two slices with slice partitioning disabled"));
            }
            let (depth, rough_flags) = unpack_index_map(&rough.index_map)?;
            let (depth0, smooth_flags) = unpack_index_map(&smooth.index_map)?;
            if depth0 != depth || smooth_flags.iter().zip(&rough_flags).any(|(a, b)| a == b) {
                return Err(corrupt("slice index maps are inconsistent"));
            }
            let slices = slices_from_flags(positions, depth, &rough_flags).map_err(layout_error)?;
            if slices.len() != 2 {
                return Err(corrupt("index map leaves a slice empty"));
            }
            Ok(slices.into_iter().map(|s| s.point_indices).collect())
        }
        _ => Err(corrupt(format!("{} slices (at most 2 supported)", headers.len()))),
    }
}

fn decode_slice(
    indices: &[usize],
    sh: &SliceHeader,
    segment: &[u8],
    flags: ToolFlags,
    positions: &[[f64; 3]],
) -> Result<Vec<(usize, [f64; 3])>> {
    for (name, v) in [("delta", sh.delta), ("tau", sh.tau)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(corrupt(format!("invalid {name} {v}")));
        }
    }
    let blocks = slice_blocks(indices, positions, sh.depth as u32).map_err(layout_error)?;
    let graph = GraphOverrides { delta: override_from_header(sh.delta), tau: override_from_header(sh.tau) };
    let q = sh.q as f64;

    // Entropy decoding does not depend on reconstructed values, so all
    // records are parsed first and only the needed bases are built.
    let mut reader = SliceReader::new(flags, segment);
    let records = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| reader.read(k + 1, b.len()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let bases = block_bases(&blocks, positions, graph, |k| records[k].transform == TransformMode::Gft);

    let mut coded: Vec<(usize, [f64; 3])> = Vec::with_capacity(blocks.len());
    let mut out = Vec::with_capacity(indices.len());
    for (k, ((block, record), basis)) in blocks.iter().zip(&records).zip(&bases).enumerate() {
        let n = block.len();
        let references = if flags.intra {
            prediction::available_references(k + 1, &coded)
        } else {
            let mut r = [None; MODE_COUNT];
            r[IntraMode::DC.id() as usize] = Some(prediction::dc_reference());
            r
        };
        let reference = references[record.intra_mode.id() as usize]
            .ok_or_else(|| corrupt(format!("block {}: intra reference missing", k + 1)))?;
        let levels = record.scan.levels(n);
        let res = transform::reconstruct_residual(record.transform, basis.as_ref(), &levels, q);
        let m = reference.mean_yuv;
        let rec: Vec<[f64; 3]> = res.iter().map(|r| [m[0] + r[0], m[1] + r[1], m[2] + r[2]]).collect();
        coded.push((n, mean_rows(&rec)));
        out.extend(block.iter().copied().zip(rec));
    }
    Ok(out)
}
