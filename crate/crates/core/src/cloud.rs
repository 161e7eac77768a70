use crate::color;

/// One point: position plus 8-bit RGB color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub position: [f64; 3],
    pub rgb: [u8; 3],
}

/// A static frame: positions and per-point colors, in file order.
///
/// Color channels are `u8`, so the `[0, 255]` range holds by construction;
/// finiteness of coordinates is checked on load.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| p.position).collect()
    }

    pub fn colors(&self) -> Vec<[u8; 3]> {
        self.points.iter().map(|p| p.rgb).collect()
    }

    pub fn yuv(&self) -> YuvAttributes {
        color::rgb_to_yuv(&self.colors())
    }

    /// Same geometry with new colors.
    pub fn with_colors(&self, rgb: &[[u8; 3]]) -> PointCloud {
        assert_eq!(rgb.len(), self.len());
        let points = self
            .points
            .iter()
            .zip(rgb)
            .map(|(p, &c)| Point { position: p.position, rgb: c })
            .collect();
        PointCloud { points }
    }

    /// Builds a cloud from positions with every point colored `rgb`.
    pub fn from_positions(positions: &[[f64; 3]], rgb: [u8; 3]) -> PointCloud {
        PointCloud {
            points: positions.iter().map(|&position| Point { position, rgb }).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.points.iter().all(|p| p.position.iter().all(|c| c.is_finite()))
    }
}

/// Per-point `(Y, U, V)` rows. Chroma is centered: U and V span
/// `[-127.5, 127.5]` with 0 the neutral color.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct YuvAttributes {
    pub rows: Vec<[f64; 3]>,
}

impl YuvAttributes {
    pub fn new(rows: Vec<[f64; 3]>) -> Self {
        YuvAttributes { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows selected by `indices`, in that order.
    pub fn gather(&self, indices: &[usize]) -> YuvAttributes {
        YuvAttributes { rows: indices.iter().map(|&i| self.rows[i]).collect() }
    }

    pub fn mean(&self) -> [f64; 3] {
        mean_rows(&self.rows)
    }
}

pub(crate) fn mean_rows(rows: &[[f64; 3]]) -> [f64; 3] {
    if rows.is_empty() {
        return [0.0; 3];
    }
    let mut sum = [0.0; 3];
    for r in rows {
        for c in 0..3 {
            sum[c] += r[c];
        }
    }
    let n = rows.len() as f64;
    [sum[0] / n, sum[1] / n, sum[2] / n]
}
