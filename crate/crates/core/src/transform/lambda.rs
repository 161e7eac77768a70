//! Power-law relation between quantization step and Lagrange multiplier,
//! `lambda = a * Q^b`, and its estimation from measured RD points.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaQModel {
    pub a: f64,
    pub b: f64,
}

impl Default for LambdaQModel {
    fn default() -> Self {
        LambdaQModel { a: 0.14, b: 1.72 }
    }
}

impl LambdaQModel {
    pub fn lambda(&self, q: f64) -> f64 {
        self.a * q.powf(self.b)
    }
}

pub fn lambda_from_q(q: f64, model: LambdaQModel) -> f64 {
    model.lambda(q)
}

/// One operating point: quantization step, rate in bits per point, and mean
/// squared error over the Y, U and V components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdSample {
    pub q: f64,
    pub bpp: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaFit {
    pub model: LambdaQModel,
    pub r_square: f64,
    /// Number of `(Q, lambda)` estimates the regression used.
    pub estimates: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum LambdaFitError {
    #[error("need at least 3 distinct Q values per curve, got {0}")]
    TooFewPoints(usize),
    #[error("need slope estimates at 2 or more distinct Q values, got {0}")]
    TooFewEstimates(usize),
    #[error("model file: {0}")]
    Parse(String),
}

/// Slope estimates `-dD/dR` between neighboring operating points of one curve.
///
/// Points are sorted by Q; each adjacent pair yields `-(D2 - D1)/(R2 - R1)`,
/// placed at the geometric mean of the two steps. Pairs whose slope is not a
/// finite positive number are skipped.
pub fn lambda_estimates(curve: &[RdSample]) -> Vec<(f64, f64)> {
    let mut pts = curve.to_vec();
    pts.sort_by(|x, y| x.q.total_cmp(&y.q));
    pts.dedup_by(|x, y| x.q == y.q);
    pts.windows(2)
        .filter_map(|w| {
            let lambda = -(w[1].mse - w[0].mse) / (w[1].bpp - w[0].bpp);
            (lambda.is_finite() && lambda > 0.0).then(|| ((w[0].q * w[1].q).sqrt(), lambda))
        })
        .collect()
}

/// Fits a single RD curve; see [`fit_lambda_curves`].
pub fn fit_lambda_q(samples: &[RdSample]) -> Result<LambdaFit, LambdaFitError> {
    fit_lambda_curves(&[samples.to_vec()])
}

/// Pools slope estimates from several curves and fits
/// `ln lambda = ln a + b ln Q` by ordinary least squares.
pub fn fit_lambda_curves(curves: &[Vec<RdSample>]) -> Result<LambdaFit, LambdaFitError> {
    let mut est = Vec::new();
    for curve in curves {
        let mut qs: Vec<f64> = curve.iter().map(|s| s.q).collect();
        qs.sort_by(f64::total_cmp);
        qs.dedup();
        if qs.len() < 3 {
            return Err(LambdaFitError::TooFewPoints(qs.len()));
        }
        est.extend(lambda_estimates(curve));
    }
    let mut distinct: Vec<f64> = est.iter().map(|e| e.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(LambdaFitError::TooFewEstimates(distinct.len()));
    }

    let xs: Vec<f64> = est.iter().map(|e| e.0.ln()).collect();
    let ys: Vec<f64> = est.iter().map(|e| e.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - ln_a - b * x).powi(2)).sum();
    let r_square = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LambdaFit { model: LambdaQModel { a: ln_a.exp(), b }, r_square, estimates: est.len() })
}

impl fmt::Display for LambdaFit {
    /// Model file contents: `key = value` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a = {:?}", self.model.a)?;
        writeln!(f, "b = {:?}", self.model.b)?;
        writeln!(f, "r_square = {:?}", self.r_square)?;
        writeln!(f, "estimates = {}", self.estimates)
    }
}

impl FromStr for LambdaQModel {
    type Err = LambdaFitError;

    /// Reads `a` and `b` from `key = value` lines; `#` starts a comment and
    /// other keys are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut a, mut b) = (None, None);
        for (no, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LambdaFitError::Parse(format!("line {}: expected key = value", no + 1)))?;
            let parse = || {
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| LambdaFitError::Parse(format!("line {}: {e}", no + 1)))
            };
            match key.trim() {
                "a" => a = Some(parse()?),
                "b" => b = Some(parse()?),
                _ => {}
            }
        }
        let a = a.ok_or_else(|| LambdaFitError::Parse("missing key a".into()))?;
        let b = b.ok_or_else(|| LambdaFitError::Parse("missing key b".into()))?;
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(LambdaFitError::Parse(format!("invalid coefficients a={a}, b={b}")));
        }
        Ok(LambdaQModel { a, b })
    }
}

/// Synthetic curve whose neighbor slopes follow `model` exactly.
pub fn synthetic_curve(model: LambdaQModel, qs: &[f64]) -> Vec<RdSample> {
    let mut out: Vec<RdSample> = Vec::with_capacity(qs.len());
    for (k, &q) in qs.iter().enumerate() {
        let bpp = 8.0 / (1.0 + k as f64);
        let mse = match out.last() {
            None => 2.0,
            Some(prev) => prev.mse - model.lambda((prev.q * q).sqrt()) * (bpp - prev.bpp),
        };
        out.push(RdSample { q, bpp, mse });
    }
    out
}
