//! Adaptive block transform: graph Fourier transform or 1-D DCT, chosen per
//! block by Lagrangian cost `J = D + lambda * R`.

pub mod eigen;
pub mod gft;
pub mod graph;
pub mod lambda;

use crate::dct;
use crate::entropy::{RecordContexts, ToolFlags};
use crate::quant_scan::{dequantize, quantize, select_scan_mode, ScanMode, ScannedBlock};

pub use gft::{gft_basis, GftBasis};
pub use graph::{build_graph, BlockGraph, GraphOverrides, GraphParams};
pub use lambda::{lambda_from_q, LambdaQModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformMode {
    Dct,
    Gft,
}

/// GFT basis for a block from its point positions.
pub fn block_basis(positions: &[[f64; 3]], overrides: GraphOverrides) -> GftBasis {
    let params = graph::resolve_params(positions, overrides);
    gft_basis(&build_graph(positions, params))
}

pub fn forward(mode: TransformMode, basis: Option<&GftBasis>, res: &[[f64; 3]]) -> Vec<[f64; 3]> {
    match mode {
        TransformMode::Dct => dct::plan(res.len()).forward_columns(res),
        TransformMode::Gft => basis.expect("GFT needs a basis").forward(res),
    }
}

pub fn inverse(mode: TransformMode, basis: Option<&GftBasis>, coeffs: &[[f64; 3]]) -> Vec<[f64; 3]> {
    match mode {
        TransformMode::Dct => dct::plan(coeffs.len()).inverse_columns(coeffs),
        TransformMode::Gft => basis.expect("GFT needs a basis").inverse(coeffs),
    }
}

/// Residual the decoder rebuilds from quantized levels. The encoder uses this
/// same function so both sides round identically.
pub fn reconstruct_residual(
    mode: TransformMode,
    basis: Option<&GftBasis>,
    levels: &[[i32; 3]],
    q: f64,
) -> Vec<[f64; 3]> {
    inverse(mode, basis, &dequantize(levels, q))
}

/// Mean squared error over all `3n` entries.
pub fn mse(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2))
        .sum();
    sum / (3 * a.len()) as f64
}

/// One fully evaluated transform choice for a block.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformCandidate {
    pub mode: TransformMode,
    pub scan: ScannedBlock,
    pub reconstructed: Vec<[f64; 3]>,
    pub distortion: f64,
    /// Bits per point, including one bit for the transform mode.
    pub rate: f64,
    pub cost: f64,
}

/// Transforms, quantizes and scans `res` under `mode`, measuring distortion
/// and the rate the entropy coder would spend in state `ctx`.
pub fn evaluate_candidate(
    res: &[[f64; 3]],
    mode: TransformMode,
    basis: Option<&GftBasis>,
    q: f64,
    lambda: f64,
    ctx: &RecordContexts,
    flags: ToolFlags,
) -> TransformCandidate {
    let n = res.len();
    let levels = quantize(&forward(mode, basis, res), q);
    let scan = if flags.scan_select {
        select_scan_mode(&levels)
    } else {
        ScannedBlock::with_mode(&levels, ScanMode::RASTER)
    };
    let reconstructed = reconstruct_residual(mode, basis, &levels, q);
    let distortion = mse(res, &reconstructed);
    let rate = (ctx.payload_cost(flags, n, &scan) + 1.0) / n as f64;
    TransformCandidate { mode, scan, reconstructed, distortion, rate, cost: distortion + lambda * rate }
}

/// Lowest-cost transform for a block. DCT is the only candidate unless
/// adaptive transform is enabled and a basis is given; ties go to DCT.
pub fn select_transform_mode(
    res: &[[f64; 3]],
    basis: Option<&GftBasis>,
    q: f64,
    lambda: f64,
    ctx: &RecordContexts,
    flags: ToolFlags,
) -> TransformCandidate {
    let dct = evaluate_candidate(res, TransformMode::Dct, None, q, lambda, ctx, flags);
    if !flags.adaptive_transform {
        return dct;
    }
    let Some(basis) = basis else { return dct };
    let gft = evaluate_candidate(res, TransformMode::Gft, Some(basis), q, lambda, ctx, flags);
    if gft.cost < dct.cost {
        gft
    } else {
        dct
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_block(rng: &mut impl Rng, n: usize) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
        let pos = (0..n).map(|_| [0; 3].map(|_| rng.gen_range(0..12) as f64)).collect();
        let res = (0..n).map(|_| [0; 3].map(|_| rng.gen_range(-40.0..40.0))).collect();
        (pos, res)
    }

    #[test]
    fn zero_residual_picks_dct() {
        let pos: Vec<[f64; 3]> = (0..20).map(|i| [i as f64, 0.0, 0.0]).collect();
        let basis = block_basis(&pos, GraphOverrides::default());
        let c = select_transform_mode(
            &[[0.0; 3]; 20],
            Some(&basis),
            8.0,
            10.0,
            &RecordContexts::default(),
            ToolFlags::default(),
        );
        assert_eq!(c.mode, TransformMode::Dct);
        assert_eq!(c.distortion, 0.0);
        assert_eq!(c.scan.kept, 0);
    }

    #[test]
    fn zero_lambda_minimizes_distortion() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..30 {
            let (pos, res) = random_block(&mut rng, 40);
            let basis = block_basis(&pos, GraphOverrides::default());
            let ctx = RecordContexts::default();
            let flags = ToolFlags::default();
            let c = select_transform_mode(&res, Some(&basis), 16.0, 0.0, &ctx, flags);
            let d = evaluate_candidate(&res, TransformMode::Dct, None, 16.0, 0.0, &ctx, flags);
            let g = evaluate_candidate(&res, TransformMode::Gft, Some(&basis), 16.0, 0.0, &ctx, flags);
            assert_eq!(c.distortion, d.distortion.min(g.distortion));
        }
    }

    #[test]
    fn disabled_tool_forces_dct() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let (pos, res) = random_block(&mut rng, 30);
        let basis = block_basis(&pos, GraphOverrides::default());
        let flags = ToolFlags { adaptive_transform: false, ..ToolFlags::default() };
        let c = select_transform_mode(&res, Some(&basis), 4.0, 1e9, &RecordContexts::default(), flags);
        assert_eq!(c.mode, TransformMode::Dct);
    }

    #[test]
    fn reconstruction_matches_candidate() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(6);
        let (pos, res) = random_block(&mut rng, 50);
        let basis = block_basis(&pos, GraphOverrides::default());
        let c = select_transform_mode(&res, Some(&basis), 8.0, 5.0, &RecordContexts::default(), ToolFlags::default());
        let b = (c.mode == TransformMode::Gft).then_some(&basis);
        assert_eq!(reconstruct_residual(c.mode, b, &c.scan.levels(50), 8.0), c.reconstructed);
    }
}
