//! Uniform scalar quantization and the seven reordering scans.
//!
//! Mode 0 is row-major over the `n x 3` coefficient matrix. Modes 1-6 scan
//! whole component columns, one after another, in the six orders of
//! `(Y, U, V)`. After scanning, the trailing run of zeros is dropped and only
//! the retained count is signaled.

pub const SCAN_MODE_COUNT: usize = 7;

/// Column orders for modes 1..=6.
const COLUMN_ORDERS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn quantize_value(x: f64, q: f64) -> i32 {
    // `f64::round` rounds half away from zero; `as` saturates.
    (x / q).round() as i32
}

pub fn quantize(coeffs: &[[f64; 3]], q: f64) -> Vec<[i32; 3]> {
    assert!(q > 0.0, "quantization step must be positive");
    coeffs.iter().map(|r| r.map(|v| quantize_value(v, q))).collect()
}

pub fn dequantize(levels: &[[i32; 3]], q: f64) -> Vec<[f64; 3]> {
    levels.iter().map(|r| r.map(|l| l as f64 * q)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScanMode(u8);

impl ScanMode {
    pub const RASTER: ScanMode = ScanMode(0);

    pub fn new(id: u8) -> Option<ScanMode> {
        ((id as usize) < SCAN_MODE_COUNT).then_some(ScanMode(id))
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = ScanMode> {
        (0..SCAN_MODE_COUNT as u8).map(ScanMode)
    }

    /// `(row, component)` visited at scan position `p` of an `n`-row block.
    #[inline]
    pub fn position(self, n: usize, p: usize) -> (usize, usize) {
        match self.0 {
            0 => (p / 3, p % 3),
            m => (p % n, COLUMN_ORDERS[m as usize - 1][p / n]),
        }
    }
}

pub fn scan(levels: &[[i32; 3]], mode: ScanMode) -> Vec<i32> {
    let n = levels.len();
    (0..3 * n)
        .map(|p| {
            let (row, comp) = mode.position(n, p);
            levels[row][comp]
        })
        .collect()
}

/// Inverse of [`scan`]; `symbols` shorter than `3n` is padded with zeros.
pub fn inverse_scan(symbols: &[i32], mode: ScanMode, n: usize) -> Vec<[i32; 3]> {
    assert!(symbols.len() <= 3 * n);
    let mut out = vec![[0; 3]; n];
    for (p, &s) in symbols.iter().enumerate() {
        let (row, comp) = mode.position(n, p);
        out[row][comp] = s;
    }
    out
}

pub fn trailing_zeros(symbols: &[i32]) -> usize {
    symbols.iter().rev().take_while(|&&s| s == 0).count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScannedBlock {
    pub mode: ScanMode,
    /// Retained symbol count; `symbols.len() == kept`.
    pub kept: usize,
    pub symbols: Vec<i32>,
}

impl ScannedBlock {
    pub fn with_mode(levels: &[[i32; 3]], mode: ScanMode) -> ScannedBlock {
        let mut symbols = scan(levels, mode);
        let kept = symbols.len() - trailing_zeros(&symbols);
        symbols.truncate(kept);
        ScannedBlock { mode, kept, symbols }
    }

    pub fn levels(&self, n: usize) -> Vec<[i32; 3]> {
        inverse_scan(&self.symbols, self.mode, n)
    }
}

/// Scan mode with the longest trailing zero run; ties go to the smaller id.
pub fn select_scan_mode(levels: &[[i32; 3]]) -> ScannedBlock {
    let mut best = ScannedBlock::with_mode(levels, ScanMode::RASTER);
    for mode in ScanMode::all().skip(1) {
        let candidate = ScannedBlock::with_mode(levels, mode);
        if candidate.kept < best.kept {
            best = candidate;
        }
    }
    best
}
