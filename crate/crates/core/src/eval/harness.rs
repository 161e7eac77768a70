use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bdrate::{bd_rate, RdCurve, RdPoint};
use super::metrics::{mse_from_psnr, psnr_yuv};
use crate::cloud::PointCloud;
use crate::codec::{self, EncoderConfig};
use crate::color;
use crate::entropy::ToolFlags;
use crate::error::{Error, Result};
use crate::transform::lambda::{fit_lambda_curves, LambdaFit, RdSample};

/// One CSV row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "Q")]
    pub q: f64,
    pub bpp: f64,
    pub psnr_y: f64,
    pub psnr_u: f64,
    pub psnr_v: f64,
    pub encode_ms: f64,
    pub decode_ms: f64,
}

impl SweepRow {
    pub fn rd_point(&self) -> RdPoint {
        RdPoint { bpp: self.bpp, psnr_y: self.psnr_y }
    }

    /// Mean of the three component errors, recovered from the PSNRs.
    pub fn mse_yuv(&self) -> f64 {
        (mse_from_psnr(self.psnr_y) + mse_from_psnr(self.psnr_u) + mse_from_psnr(self.psnr_v)) / 3.0
    }
}

pub fn curve_from_rows(label: &str, rows: &[SweepRow]) -> RdCurve {
    RdCurve::new(label, rows.iter().map(SweepRow::rd_point).collect())
}

/// Encodes and decodes `cloud` once at the step in `cfg`.
///
/// Quality is measured on the decoded RGB output converted back to YUV. The
/// decoded attributes must equal the encoder's own reconstruction.
pub fn measure(cloud: &PointCloud, cfg: &EncoderConfig) -> Result<SweepRow> {
    let t0 = Instant::now();
    let frame = codec::encode(cloud, cfg)?;
    let encode_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let decoded = codec::decode_bytes(&frame.bytes, &cloud.positions())?;
    let decode_ms = t1.elapsed().as_secs_f64() * 1e3;
    if decoded.yuv != frame.reconstruction.yuv {
        return Err(Error::Metric(format!("decoder output differs from encoder reconstruction at Q={}", cfg.q)));
    }
    let original = cloud.yuv();
    let output = color::rgb_to_yuv(&decoded.cloud.colors());
    let [psnr_y, psnr_u, psnr_v] = psnr_yuv(&original, &output)?;
    Ok(SweepRow { q: cfg.q, bpp: frame.bits_per_point(), psnr_y, psnr_u, psnr_v, encode_ms, decode_ms })
}

/// Runs [`measure`] at every step in `qs`, returning rows in `qs` order.
pub fn run_rd_sweep(cloud: &PointCloud, cfg: &EncoderConfig, qs: &[f64]) -> Result<Vec<SweepRow>> {
    if qs.is_empty() {
        return Err(Error::Config("empty Q list".into()));
    }
    qs.par_iter().map(|&q| measure(cloud, &EncoderConfig { q, ..cfg.clone() })).collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

/// The five cumulative tool sets: baseline, then adaptive transform, intra
/// prediction, slices, and scan selection added in turn.
pub fn ablation_models() -> [(&'static str, ToolFlags); 5] {
    let v1 = ToolFlags::NONE;
    let v2 = ToolFlags { adaptive_transform: true, ..v1 };
    let v3 = ToolFlags { intra: true, ..v2 };
    let v4 = ToolFlags { slices: true, ..v3 };
    let v5 = ToolFlags { scan_select: true, ..v4 };
    [("V1", v1), ("V2", v2), ("V3", v3), ("V4", v4), ("V5", v5)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationModel {
    pub label: String,
    pub tools: ToolFlags,
    pub rows: Vec<SweepRow>,
    /// BD-rate against the first model; `None` when the curves cannot be
    /// compared (too few points or no PSNR overlap).
    pub bd_rate_vs_v1: Option<f64>,
}

pub fn run_ablation(cloud: &PointCloud, cfg: &EncoderConfig, qs: &[f64]) -> Result<Vec<AblationModel>> {
    let mut models = Vec::new();
    for (label, tools) in ablation_models() {
        let rows = run_rd_sweep(cloud, &cfg.clone().with_tools(tools), qs)?;
        models.push(AblationModel { label: label.into(), tools, rows, bd_rate_vs_v1: None });
    }
    let base = curve_from_rows("V1", &models[0].rows);
    for m in &mut models {
        m.bd_rate_vs_v1 = bd_rate(&base, &curve_from_rows(&m.label, &m.rows)).ok();
    }
    Ok(models)
}

/// Combined CSV: a `model` column followed by the sweep columns.
pub fn write_ablation_csv<W: Write>(models: &[AblationModel], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "Q", "bpp", "psnr_y", "psnr_u", "psnr_v", "encode_ms", "decode_ms"])?;
    for m in models {
        for r in &m.rows {
            w.write_record([
                m.label.clone(),
                r.q.to_string(),
                r.bpp.to_string(),
                r.psnr_y.to_string(),
                r.psnr_u.to_string(),
                r.psnr_v.to_string(),
                r.encode_ms.to_string(),
                r.decode_ms.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn rd_samples(rows: &[SweepRow]) -> Vec<RdSample> {
    rows.iter().map(|r| RdSample { q: r.q, bpp: r.bpp, mse: r.mse_yuv() }).collect()
}

/// Fits the lambda-Q model to one or more sweeps, each treated as its own curve.
pub fn fit_lambda_from_sweeps(sweeps: &[Vec<SweepRow>]) -> Result<LambdaFit> {
    let curves: Vec<Vec<RdSample>> = sweeps.iter().map(|s| rd_samples(s)).collect();
    Ok(fit_lambda_curves(&curves)?)
}
