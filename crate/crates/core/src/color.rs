//! Full-range ITU-R BT.709 conversion with centered chroma.

use crate::cloud::YuvAttributes;

pub const KR: f64 = 0.2126;
pub const KG: f64 = 0.7152;
pub const KB: f64 = 0.0722;
/// `2 (1 - KB)`
pub const CB_SCALE: f64 = 1.8556;
/// `2 (1 - KR)`
pub const CR_SCALE: f64 = 1.5748;

#[inline]
pub fn rgb_to_yuv_pixel(rgb: [u8; 3]) -> [f64; 3] {
    let r = rgb[0] as f64;
    let g = rgb[1] as f64;
    let b = rgb[2] as f64;
    let y = KR * r + KG * g + KB * b;
    [y, (b - y) / CB_SCALE, (r - y) / CR_SCALE]
}

#[inline]
pub fn yuv_to_rgb_pixel(yuv: [f64; 3]) -> [u8; 3] {
    let [y, u, v] = yuv;
    let r = y + CR_SCALE * v;
    let b = y + CB_SCALE * u;
    let g = (y - KR * r - KB * b) / KG;
    [to_u8(r), to_u8(g), to_u8(b)]
}

#[inline]
fn to_u8(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

pub fn rgb_to_yuv(rgb: &[[u8; 3]]) -> YuvAttributes {
    YuvAttributes::new(rgb.iter().map(|&c| rgb_to_yuv_pixel(c)).collect())
}

pub fn yuv_to_rgb(yuv: &YuvAttributes) -> Vec<[u8; 3]> {
    yuv.rows.iter().map(|&r| yuv_to_rgb_pixel(r)).collect()
}
