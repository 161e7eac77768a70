//! Layered frame structure: frame -> slices -> macroblocks -> blocks.
//!
//! Slices separate color-smooth and non-smooth regions using a probe kd-tree.
//! Each slice then gets its own kd-tree; the tree's leaves are the coding
//! blocks, numbered breadth-first, and each pair of sibling leaves forms a
//! macroblock.

use rayon::prelude::*;
use thiserror::Error;

use crate::cloud::YuvAttributes;

pub const DEFAULT_THRESHOLD_1: f64 = 100.0;
pub const DEFAULT_THRESHOLD_2: f64 = 0.3;

/// Target range for average block population.
pub const MAX_BLOCK_AVERAGE: usize = 200;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("kd-tree depth {depth} needs at least {needed} points, slice has {points}")]
    DepthTooLarge { depth: u32, needed: usize, points: usize },
    #[error("kd-tree depth {0} is not supported (max 24)")]
    DepthOutOfRange(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// An independently coded subset of the frame. Indices are in frame order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub id: usize,
    pub point_indices: Vec<usize>,
}

/// Slices plus the side information a decoder needs to rebuild them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicePlan {
    pub slices: Vec<Slice>,
    pub probe_depth: u32,
    /// One flag per probe block, in block order; `true` marks non-smooth.
    pub non_smooth: Vec<bool>,
}

impl SlicePlan {
    pub fn single(point_count: usize) -> SlicePlan {
        SlicePlan {
            slices: vec![Slice { id: 0, point_indices: (0..point_count).collect() }],
            probe_depth: 0,
            non_smooth: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitNode {
    pub axis: Axis,
    /// Largest coordinate (along `axis`) assigned to the left child.
    pub value: f64,
}

/// A complete kd-tree of a given depth. Internal nodes are stored heap-style
/// in breadth-first order (root at 0, children of `k` at `2k+1`, `2k+2`).
#[derive(Debug, Clone, PartialEq)]
pub struct KdTree {
    pub depth: u32,
    pub nodes: Vec<SplitNode>,
    /// Leaf point lists, left to right.
    pub leaves: Vec<Vec<usize>>,
}

/// Leaf of a slice's kd-tree. `index` is 1-based and equals coding order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub index: usize,
    pub point_indices: Vec<usize>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.point_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_indices.is_empty()
    }

    pub fn yuv(&self, frame: &YuvAttributes) -> YuvAttributes {
        frame.gather(&self.point_indices)
    }
}

/// Parent of blocks `2i-1` and `2i` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Macroblock {
    pub index: usize,
    pub children: (usize, usize),
}

/// Smallest depth whose average leaf population drops below
/// [`MAX_BLOCK_AVERAGE`]. Since halving from at least 200 leaves at least
/// 100, the result also keeps the average at or above 100 when the count
/// allows it.
pub fn choose_depth(point_count: usize) -> u32 {
    let mut depth = 0;
    while point_count as u128 >= (MAX_BLOCK_AVERAGE as u128) << depth {
        depth += 1;
    }
    depth
}

fn variance_along(indices: &[usize], positions: &[[f64; 3]], axis: Axis) -> f64 {
    let a = axis.index();
    let n = indices.len() as f64;
    let mean = indices.iter().map(|&i| positions[i][a]).sum::<f64>() / n;
    indices.iter().map(|&i| (positions[i][a] - mean).powi(2)).sum::<f64>() / n
}

/// Axis with the largest coordinate variance; ties go to the earlier axis.
pub fn max_variance_axis(indices: &[usize], positions: &[[f64; 3]]) -> Axis {
    let mut best = Axis::X;
    let mut best_var = f64::NEG_INFINITY;
    for axis in Axis::ALL {
        let v = variance_along(indices, positions, axis);
        if v > best_var {
            best = axis;
            best_var = v;
        }
    }
    best
}

fn coordinate_order(positions: &[[f64; 3]], axis: Axis) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    let a = axis.index();
    move |&i, &j| positions[i][a].total_cmp(&positions[j][a]).then(i.cmp(&j))
}

fn split(indices: Vec<usize>, positions: &[[f64; 3]]) -> (SplitNode, Vec<usize>, Vec<usize>) {
    let mut indices = indices;
    let axis = max_variance_axis(&indices, positions);
    let left_len = indices.len().div_ceil(2);
    let order = coordinate_order(positions, axis);
    indices.select_nth_unstable_by(left_len - 1, &order);
    let right = indices.split_off(left_len);
    let value = positions[indices[left_len - 1]][axis.index()];
    (SplitNode { axis, value }, indices, right)
}

/// Median-rank kd-tree of exactly `2^depth` leaves.
///
/// Every split sends the lower `ceil(m/2)` points (by coordinate, then point
/// index) to the left child. Points inside each leaf are ordered along the
/// leaf's own maximal-variance axis, which is the 1-D order the transforms see.
pub fn build_kdtree(
    indices: &[usize],
    positions: &[[f64; 3]],
    depth: u32,
) -> Result<KdTree, PartitionError> {
    if depth > 24 {
        return Err(PartitionError::DepthOutOfRange(depth));
    }
    let needed = 1usize << depth;
    if indices.len() < needed {
        return Err(PartitionError::DepthTooLarge { depth, needed, points: indices.len() });
    }

    let mut nodes = Vec::with_capacity(needed - 1);
    let mut level = vec![indices.to_vec()];
    for _ in 0..depth {
        let splits: Vec<_> = level.into_par_iter().map(|ix| split(ix, positions)).collect();
        let mut next = Vec::with_capacity(splits.len() * 2);
        for (node, left, right) in splits {
            nodes.push(node);
            next.push(left);
            next.push(right);
        }
        level = next;
    }
    level.par_iter_mut().for_each(|leaf| {
        let axis = max_variance_axis(leaf, positions);
        leaf.sort_unstable_by(coordinate_order(positions, axis));
    });
    Ok(KdTree { depth, nodes, leaves: level })
}

/// Numbers leaves `1..=2^n` left to right; macroblock `i` owns `2i-1`, `2i`.
pub fn enumerate_blocks(tree: &KdTree) -> (Vec<Block>, Vec<Macroblock>) {
    let blocks: Vec<Block> = tree
        .leaves
        .iter()
        .enumerate()
        .map(|(k, leaf)| Block { index: k + 1, point_indices: leaf.clone() })
        .collect();
    let macroblocks = if tree.depth == 0 {
        Vec::new()
    } else {
        (1..=blocks.len() / 2).map(|i| Macroblock { index: i, children: (2 * i - 1, 2 * i) }).collect()
    };
    (blocks, macroblocks)
}

/// Mean of the per-component population variances of `rows`.
pub fn color_variance(rows: &[[f64; 3]]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let n = rows.len() as f64;
    let mean = crate::cloud::mean_rows(rows);
    let mut var = [0.0; 3];
    for r in rows {
        for c in 0..3 {
            var[c] += (r[c] - mean[c]).powi(2);
        }
    }
    (var[0] + var[1] + var[2]) / (3.0 * n)
}

/// Rebuilds the slices implied by per-probe-block smoothness flags.
///
/// Slice 0 holds the points of smooth probe blocks and slice 1 the rest; an
/// empty side is dropped, leaving a single slice with id 0.
pub fn slices_from_flags(
    positions: &[[f64; 3]],
    probe_depth: u32,
    non_smooth: &[bool],
) -> Result<Vec<Slice>, PartitionError> {
    let all: Vec<usize> = (0..positions.len()).collect();
    let tree = build_kdtree(&all, positions, probe_depth)?;
    let mut rough = vec![false; positions.len()];
    for (leaf, &flag) in tree.leaves.iter().zip(non_smooth) {
        if flag {
            for &i in leaf {
                rough[i] = true;
            }
        }
    }
    let smooth: Vec<usize> = all.iter().copied().filter(|&i| !rough[i]).collect();
    let non_smooth: Vec<usize> = all.iter().copied().filter(|&i| rough[i]).collect();
    if smooth.is_empty() || non_smooth.is_empty() {
        return Ok(vec![Slice { id: 0, point_indices: all }]);
    }
    Ok(vec![Slice { id: 0, point_indices: smooth }, Slice { id: 1, point_indices: non_smooth }])
}

/// Two-slice partition by block color variance.
///
/// A probe block is non-smooth when its color variance exceeds `threshold_1`;
/// the frame splits in two when the non-smooth fraction exceeds
/// `threshold_2`. `probe_depth` defaults to [`choose_depth`] of the frame.
pub fn partition_slices(
    positions: &[[f64; 3]],
    yuv: &YuvAttributes,
    threshold_1: f64,
    threshold_2: f64,
    probe_depth: Option<u32>,
) -> Result<SlicePlan, PartitionError> {
    assert_eq!(positions.len(), yuv.len());
    if positions.len() <= 1 {
        return Ok(SlicePlan::single(positions.len()));
    }
    let probe_depth = probe_depth.unwrap_or_else(|| choose_depth(positions.len()));
    let all: Vec<usize> = (0..positions.len()).collect();
    let tree = build_kdtree(&all, positions, probe_depth)?;
    let non_smooth: Vec<bool> = tree
        .leaves
        .iter()
        .map(|leaf| {
            let rows: Vec<[f64; 3]> = leaf.iter().map(|&i| yuv.rows[i]).collect();
            color_variance(&rows) > threshold_1
        })
        .collect();
    let rough = non_smooth.iter().filter(|&&f| f).count();
    let fraction = rough as f64 / non_smooth.len() as f64;
    if fraction <= threshold_2 || rough == non_smooth.len() {
        return Ok(SlicePlan::single(positions.len()));
    }
    let slices = slices_from_flags(positions, probe_depth, &non_smooth)?;
    Ok(SlicePlan { slices, probe_depth, non_smooth })
}
