use crate::cloud::YuvAttributes;
use crate::error::{Error, Result};

pub const PEAK: f64 = 255.0;
/// Reported in place of infinity when the error is zero.
pub const PSNR_CAP: f64 = 100.0;

pub fn component_mse(original: &YuvAttributes, reconstructed: &YuvAttributes) -> Result<[f64; 3]> {
    if original.len() != reconstructed.len() {
        return Err(Error::Metric(format!(
            "point counts differ: {} vs {}",
            original.len(),
            reconstructed.len()
        )));
    }
    if original.is_empty() {
        return Ok([0.0; 3]);
    }
    let mut sum = [0.0; 3];
    for (a, b) in original.rows.iter().zip(&reconstructed.rows) {
        for c in 0..3 {
            sum[c] += (a[c] - b[c]).powi(2);
        }
    }
    let n = original.len() as f64;
    Ok(sum.map(|s| s / n))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP;
    }
    (10.0 * (PEAK * PEAK / mse).log10()).min(PSNR_CAP)
}

pub fn mse_from_psnr(psnr: f64) -> f64 {
    PEAK * PEAK / 10f64.powf(psnr / 10.0)
}

pub fn psnr_yuv(original: &YuvAttributes, reconstructed: &YuvAttributes) -> Result<[f64; 3]> {
    Ok(component_mse(original, reconstructed)?.map(psnr_from_mse))
}

pub fn psnr_y(original: &YuvAttributes, reconstructed: &YuvAttributes) -> Result<f64> {
    Ok(psnr_yuv(original, reconstructed)?[0])
}
