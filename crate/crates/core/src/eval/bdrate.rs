//! Bjontegaard delta rate with a cubic fit of log10(rate) against PSNR.

use crate::error::{Error, Result};

/// One operating point of an RD curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub bpp: f64,
    pub psnr_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdCurve {
    pub label: String,
    /// Sorted by ascending bpp.
    pub points: Vec<RdPoint>,
}

impl RdCurve {
    pub fn new(label: impl Into<String>, mut points: Vec<RdPoint>) -> RdCurve {
        points.sort_by(|a, b| a.bpp.total_cmp(&b.bpp));
        RdCurve { label: label.into(), points }
    }

    /// Same curve with every rate multiplied by `factor`.
    pub fn scaled_rate(&self, factor: f64) -> RdCurve {
        let points = self.points.iter().map(|p| RdPoint { bpp: p.bpp * factor, psnr_y: p.psnr_y }).collect();
        RdCurve::new(self.label.clone(), points)
    }
}

pub const MIN_POINTS: usize = 4;

/// Average rate difference of `test` against `reference`, in percent, over
/// the PSNR range both curves cover. Negative means `test` needs fewer bits.
pub fn bd_rate(reference: &RdCurve, test: &RdCurve) -> Result<f64> {
    for c in [reference, test] {
        if c.points.len() < MIN_POINTS {
            return Err(Error::Metric(format!(
                "curve {:?} has {} points, BD-rate needs {MIN_POINTS}",
                c.label,
                c.points.len()
            )));
        }
        if c.points.iter().any(|p| !(p.bpp > 0.0 && p.bpp.is_finite() && p.psnr_y.is_finite())) {
            return Err(Error::Metric(format!("curve {:?} has a non-positive or non-finite point", c.label)));
        }
    }
    let range = |c: &RdCurve| {
        let lo = c.points.iter().map(|p| p.psnr_y).fold(f64::INFINITY, f64::min);
        let hi = c.points.iter().map(|p| p.psnr_y).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (lo_r, hi_r) = range(reference);
    let (lo_t, hi_t) = range(test);
    let lo = lo_r.max(lo_t);
    let hi = hi_r.min(hi_t);
    if lo >= hi {
        return Err(Error::Metric("RD curves do not overlap in PSNR".into()));
    }
    // Fit in a shifted variable so the normal equations stay well conditioned.
    let center = (lo + hi) / 2.0;
    let scale = ((hi - lo) / 2.0).max(1e-9);
    let integral = |c: &RdCurve| -> Result<f64> {
        let xs: Vec<f64> = c.points.iter().map(|p| (p.psnr_y - center) / scale).collect();
        let ys: Vec<f64> = c.points.iter().map(|p| p.bpp.log10()).collect();
        let p = polyfit3(&xs, &ys)?;
        let anti = |x: f64| p[0] * x + p[1] * x * x / 2.0 + p[2] * x.powi(3) / 3.0 + p[3] * x.powi(4) / 4.0;
        // Integrate over x in [-1, 1]; the 1/2 turns it into a mean.
        Ok((anti(1.0) - anti(-1.0)) / 2.0)
    };
    let diff = integral(test)? - integral(reference)?;
    Ok((10f64.powf(diff) - 1.0) * 100.0)
}

/// Least-squares cubic, coefficients in ascending powers.
fn polyfit3(xs: &[f64], ys: &[f64]) -> Result<[f64; 4]> {
    let mut a = [[0.0; 5]; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let pw = [1.0, x, x * x, x * x * x];
        for r in 0..4 {
            for c in 0..4 {
                a[r][c] += pw[r] * pw[c];
            }
            a[r][4] += pw[r] * y;
        }
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::Metric("RD curve needs 4 distinct PSNR values".into()));
        }
        a.swap(col, pivot);
        for r in 0..4 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..5 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Ok([0, 1, 2, 3].map(|i| a[i][4] / a[i][i]))
}
