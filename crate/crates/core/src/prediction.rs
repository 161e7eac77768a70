//! Block intra prediction from reconstructed neighbor means.
//!
//! For block `j` (1-based within its slice) the candidate references are:
//!
//! | mode | reference                                  |
//! |------|--------------------------------------------|
//! | 0    | block `j-1`                                |
//! | 1    | block `j-2`                                |
//! | 2    | block `j-3`                                |
//! | 3    | macroblock `ceil(j/2) - 1`                 |
//! | 4    | macroblock `ceil(j/2) - 2`                 |
//! | 5    | DC, the fixed value `(128, 0, 0)`          |
//!
//! A mode is available only when its reference index is at least 1. All
//! references are means of reconstructed attributes, so the decoder derives
//! the same values.

use crate::dct;

pub const MODE_COUNT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntraMode(u8);

impl IntraMode {
    pub const DC: IntraMode = IntraMode(5);

    pub fn new(id: u8) -> Option<IntraMode> {
        (id < MODE_COUNT as u8).then_some(IntraMode(id))
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = IntraMode> {
        (0..MODE_COUNT as u8).map(IntraMode)
    }
}

/// Average reconstructed `(Y, U, V)` of a coded block or macroblock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockReference {
    pub mean_yuv: [f64; 3],
}

/// Fixed mid-gray reference for DC mode.
pub fn dc_reference() -> BlockReference {
    BlockReference { mean_yuv: [128.0, 0.0, 0.0] }
}

/// Mean of the reconstructed points of a macroblock, from its children.
pub fn macroblock_reference(
    left: (usize, [f64; 3]),
    right: (usize, [f64; 3]),
) -> BlockReference {
    let (na, a) = left;
    let (nb, b) = right;
    let total = (na + nb) as f64;
    let mut mean = [0.0; 3];
    for c in 0..3 {
        mean[c] = (na as f64 * a[c] + nb as f64 * b[c]) / total;
    }
    BlockReference { mean_yuv: mean }
}

/// Whether `mode` has a reference for block `index` (1-based).
pub fn mode_available(mode: IntraMode, index: usize) -> bool {
    let parent = index.div_ceil(2);
    match mode.0 {
        0..=2 => index > mode.0 as usize + 1,
        3 | 4 => parent > (mode.0 - 2) as usize,
        _ => true,
    }
}

/// Reference for each mode of block `index` (1-based), given the point count
/// and reconstructed mean of every earlier block of the slice in order.
pub fn available_references(
    index: usize,
    coded: &[(usize, [f64; 3])],
) -> [Option<BlockReference>; MODE_COUNT] {
    let block = |back: usize| -> Option<BlockReference> {
        let j = index.checked_sub(back).filter(|&j| j >= 1)?;
        coded.get(j - 1).map(|&(_, m)| BlockReference { mean_yuv: m })
    };
    let parent = index.div_ceil(2);
    let macroblock = |back: usize| -> Option<BlockReference> {
        let i = parent.checked_sub(back).filter(|&i| i >= 1)?;
        let left = *coded.get(2 * i - 2)?;
        let right = *coded.get(2 * i - 1)?;
        Some(macroblock_reference(left, right))
    };
    [block(1), block(2), block(3), macroblock(1), macroblock(2), Some(dc_reference())]
}

/// Per-point, per-component difference from the reference mean.
pub fn predict(block_yuv: &[[f64; 3]], reference: BlockReference) -> Vec<[f64; 3]> {
    let m = reference.mean_yuv;
    block_yuv.iter().map(|r| [r[0] - m[0], r[1] - m[1], r[2] - m[2]]).collect()
}

/// Sum of absolute DCT coefficients of the per-point component sum of `res`.
pub fn satd(res: &[[f64; 3]]) -> f64 {
    if res.is_empty() {
        return 0.0;
    }
    let summed: Vec<f64> = res.iter().map(|r| r[0] + r[1] + r[2]).collect();
    let plan = dct::plan(res.len());
    let mut coeffs = vec![0.0; res.len()];
    plan.forward(&summed, &mut coeffs);
    coeffs.iter().map(|c| c.abs()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntraDecision {
    pub mode: IntraMode,
    pub residuals: Vec<[f64; 3]>,
    pub satd: f64,
}

/// Lowest-SATD available mode; ties go to the smaller mode id.
pub fn select_intra_mode(
    block_yuv: &[[f64; 3]],
    refs: &[Option<BlockReference>; MODE_COUNT],
) -> IntraDecision {
    let mut best: Option<IntraDecision> = None;
    for mode in IntraMode::all() {
        let Some(reference) = refs[mode.0 as usize] else { continue };
        let residuals = predict(block_yuv, reference);
        let cost = satd(&residuals);
        if best.as_ref().map_or(true, |b| cost < b.satd) {
            best = Some(IntraDecision { mode, residuals, satd: cost });
        }
    }
    best.expect("DC mode is always available")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_values() {
        assert_eq!(dc_reference().mean_yuv, [128.0, 0.0, 0.0]);
        let res = predict(&[[128.0, 0.0, 0.0]; 9], dc_reference());
        assert!(res.iter().all(|r| *r == [0.0; 3]));
    }

    #[test]
    fn subtraction() {
        let res = predict(&[[110.0, 12.0, -4.0]], BlockReference { mean_yuv: [100.0, 10.0, -5.0] });
        assert_eq!(res, vec![[10.0, 2.0, 1.0]]);
    }

    #[test]
    fn satd_of_constant_and_zero() {
        assert_eq!(satd(&[[0.0; 3]; 12]), 0.0);
        // summed residual 1 + 2 - 0.5 = 2.5 at each of 16 points
        let s = satd(&[[1.0, 2.0, -0.5]; 16]);
        assert!((s - 2.5 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn satd_is_homogeneous() {
        let res: Vec<[f64; 3]> = (0..20).map(|i| [i as f64, -(i as f64) / 3.0, 1.5]).collect();
        let scaled: Vec<[f64; 3]> = res.iter().map(|r| r.map(|v| -2.5 * v)).collect();
        assert!((satd(&scaled) - 2.5 * satd(&res)).abs() < 1e-9);
    }

    #[test]
    fn availability_follows_indices() {
        let coded: Vec<(usize, [f64; 3])> = (0..8).map(|k| (10, [k as f64; 3])).collect();
        let refs = available_references(1, &coded[..0]);
        assert_eq!(refs.iter().filter(|r| r.is_some()).count(), 1);
        assert!(refs[5].is_some());

        let refs = available_references(2, &coded[..1]);
        assert_eq!(refs[0].unwrap().mean_yuv, [0.0; 3]);
        assert!(refs[1].is_none() && refs[3].is_none());

        // block 6: blocks 5, 4, 3 and macroblocks 2 (blocks 3,4) and 1 (blocks 1,2)
        let refs = available_references(6, &coded[..5]);
        assert_eq!(refs[0].unwrap().mean_yuv, [4.0; 3]);
        assert_eq!(refs[2].unwrap().mean_yuv, [2.0; 3]);
        assert_eq!(refs[3].unwrap().mean_yuv, [2.5; 3]);
        assert_eq!(refs[4].unwrap().mean_yuv, [0.5; 3]);

        // block 5 (odd): its own macroblock 3 is incomplete; uses 2 and 1
        let refs = available_references(5, &coded[..4]);
        assert_eq!(refs[3].unwrap().mean_yuv, [2.5; 3]);
        assert_eq!(refs[4].unwrap().mean_yuv, [0.5; 3]);
    }

    #[test]
    fn availability_predicate_matches_references() {
        let coded: Vec<(usize, [f64; 3])> = (0..40).map(|k| (3, [k as f64; 3])).collect();
        for index in 1..=40 {
            let refs = available_references(index, &coded[..index - 1]);
            for mode in IntraMode::all() {
                assert_eq!(refs[mode.id() as usize].is_some(), mode_available(mode, index), "{index} {mode:?}");
            }
        }
    }

    #[test]
    fn macroblock_weighted_mean() {
        let r = macroblock_reference((5, [100.0, 0.0, 0.0]), (5, [102.0, 0.0, 0.0]));
        assert_eq!(r.mean_yuv, [101.0, 0.0, 0.0]);
        let a = [10.0, -3.0, 7.0];
        let b = [20.0, 4.0, -1.0];
        let r = macroblock_reference((123, a), (124, b));
        for c in 0..3 {
            assert!((r.mean_yuv[c] - (123.0 * a[c] + 124.0 * b[c]) / 247.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_block_uses_dc() {
        let d = select_intra_mode(&[[30.0, 1.0, 2.0]; 4], &available_references(1, &[]));
        assert_eq!(d.mode, IntraMode::DC);
    }

    #[test]
    fn matching_neighbor_beats_dc() {
        let coded = vec![(4, [77.0, -3.0, 5.0])];
        let d = select_intra_mode(&[[77.0, -3.0, 5.0]; 6], &available_references(2, &coded));
        assert_eq!(d.mode, IntraMode::new(0).unwrap());
        assert_eq!(d.satd, 0.0);
    }
}
