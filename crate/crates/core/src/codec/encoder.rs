use rayon::prelude::*;

use super::config::{EncoderConfig, Resolved};
use super::{block_bases, override_to_header, slice_blocks, DecodedCloud};
use crate::cloud::{mean_rows, PointCloud, YuvAttributes};
use crate::entropy::bitstream::{pack_index_map, Bitstream, FrameHeader, SliceHeader, ToolFlags};
use crate::entropy::{BlockRecord, RecordContexts, SliceWriter};
use crate::error::{Error, Result};
use crate::partition::{choose_depth, partition_slices, SlicePlan};
use crate::prediction::{self, BlockReference, IntraMode, MODE_COUNT};
use crate::quant_scan::{ScannedBlock, SCAN_MODE_COUNT};
use crate::transform::{self, GraphOverrides, TransformMode};

/// Counts of coding decisions across a frame.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameStats {
    pub slices: usize,
    pub blocks: usize,
    pub gft_blocks: usize,
    pub intra_modes: [usize; MODE_COUNT],
    pub scan_modes: [usize; SCAN_MODE_COUNT],
    /// Blocks with no retained coefficient.
    pub empty_blocks: usize,
}

impl FrameStats {
    fn add(&mut self, other: &FrameStats) {
        self.slices += other.slices;
        self.blocks += other.blocks;
        self.gft_blocks += other.gft_blocks;
        self.empty_blocks += other.empty_blocks;
        for (a, b) in self.intra_modes.iter_mut().zip(other.intra_modes) {
            *a += b;
        }
        for (a, b) in self.scan_modes.iter_mut().zip(other.scan_modes) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone)]
pub struct EncodedFrame {
    pub bytes: Vec<u8>,
    pub reconstruction: DecodedCloud,
    pub stats: FrameStats,
}

impl EncodedFrame {
    pub fn bits_per_point(&self) -> f64 {
        if self.reconstruction.yuv.is_empty() {
            return 0.0;
        }
        self.bytes.len() as f64 * 8.0 / self.reconstruction.yuv.len() as f64
    }
}

/// Everything the encoder saw and decided for one block, for auditing.
#[derive(Debug, Clone)]
pub struct BlockTrace {
    pub slice: usize,
    /// 1-based index within the slice.
    pub index: usize,
    pub positions: Vec<[f64; 3]>,
    pub yuv: Vec<[f64; 3]>,
    pub references: [Option<BlockReference>; MODE_COUNT],
    pub intra_mode: IntraMode,
    pub transform: TransformMode,
    pub scan: ScannedBlock,
    /// Coder state the rate was measured against.
    pub contexts: RecordContexts,
    pub q: f64,
    pub lambda: f64,
    pub flags: ToolFlags,
    pub graph: GraphOverrides,
    pub reconstructed_residual: Vec<[f64; 3]>,
}

pub fn encode(cloud: &PointCloud, cfg: &EncoderConfig) -> Result<EncodedFrame> {
    encode_inner(cloud, cfg, false).map(|(frame, _)| frame)
}

/// [`encode`] that also returns a [`BlockTrace`] for every block.
pub fn encode_traced(cloud: &PointCloud, cfg: &EncoderConfig) -> Result<(EncodedFrame, Vec<BlockTrace>)> {
    encode_inner(cloud, cfg, true)
}

struct SliceOutput {
    segment: Vec<u8>,
    reconstructed: Vec<(usize, [f64; 3])>,
    stats: FrameStats,
    traces: Vec<BlockTrace>,
}

fn encode_inner(cloud: &PointCloud, cfg: &EncoderConfig, trace: bool) -> Result<(EncodedFrame, Vec<BlockTrace>)> {
    let params = cfg.resolved()?;
    if !cloud.all_finite() {
        return Err(Error::Config("point coordinates must be finite".into()));
    }
    let count = u32::try_from(cloud.len()).map_err(|_| Error::Config("too many points".into()))?;
    let positions = cloud.positions();
    let yuv = cloud.yuv();
    let flags = cfg.tools;

    let plan = if cloud.is_empty() {
        SlicePlan { slices: Vec::new(), probe_depth: 0, non_smooth: Vec::new() }
    } else if flags.slices {
        partition_slices(&positions, &yuv, cfg.threshold_1, cfg.threshold_2, cfg.probe_depth)?
    } else {
        SlicePlan::single(cloud.len())
    };

    let mut headers = Vec::with_capacity(plan.slices.len());
    let mut layouts = Vec::with_capacity(plan.slices.len());
    for slice in &plan.slices {
        let depth = cfg.depth.unwrap_or_else(|| choose_depth(slice.point_indices.len()));
        let blocks = slice_blocks(&slice.point_indices, &positions, depth)?;
        let index_map = if plan.slices.len() == 1 {
            Vec::new()
        } else {
            let members: Vec<bool> = plan.non_smooth.iter().map(|&f| f == (slice.id == 1)).collect();
            pack_index_map(plan.probe_depth, &members)
        };
        headers.push(SliceHeader {
            depth: depth as u8,
            q: params.q as f32,
            delta: override_to_header(params.graph.delta),
            tau: override_to_header(params.graph.tau),
            index_map,
        });
        layouts.push(blocks);
    }

    let outputs: Vec<SliceOutput> = layouts
        .par_iter()
        .enumerate()
        .map(|(s, blocks)| encode_slice(s, blocks, &positions, &yuv, &params, flags, trace))
        .collect();

    let mut rows = vec![[0.0; 3]; cloud.len()];
    let mut stats = FrameStats::default();
    let mut segments = Vec::with_capacity(outputs.len());
    let mut traces = Vec::new();
    for out in outputs {
        for (i, r) in out.reconstructed {
            rows[i] = r;
        }
        stats.add(&out.stats);
        segments.push(out.segment);
        traces.extend(out.traces);
    }
    let header = FrameHeader { flags, point_count: count, slices: headers };
    let bytes = Bitstream { header, segments }.to_bytes();
    let reconstruction = DecodedCloud::from_yuv(&positions, YuvAttributes::new(rows));
    Ok((EncodedFrame { bytes, reconstruction, stats }, traces))
}

fn encode_slice(
    slice: usize,
    blocks: &[Vec<usize>],
    positions: &[[f64; 3]],
    yuv: &YuvAttributes,
    params: &Resolved,
    flags: ToolFlags,
    trace: bool,
) -> SliceOutput {
    let bases = block_bases(blocks, positions, params.graph, |_| flags.adaptive_transform);
    let mut writer = SliceWriter::new(flags);
    let mut coded: Vec<(usize, [f64; 3])> = Vec::with_capacity(blocks.len());
    let mut reconstructed = Vec::with_capacity(blocks.iter().map(Vec::len).sum());
    let mut stats = FrameStats { slices: 1, ..Default::default() };
    let mut traces = Vec::new();

    for (k, (block, basis)) in blocks.iter().zip(&bases).enumerate() {
        let index = k + 1;
        let n = block.len();
        let rows: Vec<[f64; 3]> = block.iter().map(|&i| yuv.rows[i]).collect();
        let references = if flags.intra {
            prediction::available_references(index, &coded)
        } else {
            let mut r = [None; MODE_COUNT];
            r[IntraMode::DC.id() as usize] = Some(prediction::dc_reference());
            r
        };
        let intra = prediction::select_intra_mode(&rows, &references);
        let reference = references[intra.mode.id() as usize].expect("selected mode is available");
        let chosen = transform::select_transform_mode(
            &intra.residuals,
            basis.as_ref(),
            params.q,
            params.lambda,
            writer.contexts(),
            flags,
        );

        let m = reference.mean_yuv;
        let rec: Vec<[f64; 3]> =
            chosen.reconstructed.iter().map(|r| [m[0] + r[0], m[1] + r[1], m[2] + r[2]]).collect();
        coded.push((n, mean_rows(&rec)));
        reconstructed.extend(block.iter().copied().zip(rec.iter().copied()));

        stats.blocks += 1;
        stats.gft_blocks += (chosen.mode == TransformMode::Gft) as usize;
        stats.intra_modes[intra.mode.id() as usize] += 1;
        stats.scan_modes[chosen.scan.mode.id() as usize] += 1;
        stats.empty_blocks += (chosen.scan.kept == 0) as usize;

        if trace {
            traces.push(BlockTrace {
                slice,
                index,
                positions: block.iter().map(|&i| positions[i]).collect(),
                yuv: rows,
                references,
                intra_mode: intra.mode,
                transform: chosen.mode,
                scan: chosen.scan.clone(),
                contexts: writer.contexts().clone(),
                q: params.q,
                lambda: params.lambda,
                flags,
                graph: params.graph,
                reconstructed_residual: chosen.reconstructed.clone(),
            });
        }
        let record = BlockRecord { intra_mode: intra.mode, transform: chosen.mode, scan: chosen.scan };
        writer.write(index, n, &record);
    }
    SliceOutput { segment: writer.finish(), reconstructed, stats, traces }
}
