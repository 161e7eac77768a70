//! Block graphs: Gaussian-weighted, distance-thresholded adjacency over the
//! points of a block, its degree matrix and combinatorial Laplacian.

/// Kernel and threshold of a block graph.
///
/// `delta_sq` is the squared kernel width; `tau` bounds the squared distance
/// of connected pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphParams {
    pub delta_sq: f64,
    pub tau: f64,
}

/// Optional per-frame overrides; `None` picks the per-block default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GraphOverrides {
    /// Kernel width (not squared).
    pub delta: Option<f64>,
    pub tau: Option<f64>,
}

/// Multiplier applied to the median nearest-neighbor squared distance.
pub const TAU_SCALE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockGraph {
    pub n: usize,
    pub params: GraphParams,
    /// Row-major `n x n` adjacency.
    pub weights: Vec<f64>,
    pub degrees: Vec<f64>,
    /// Row-major `n x n` Laplacian `D - W`.
    pub laplacian: Vec<f64>,
}

#[inline]
fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Mean squared distance over all unordered pairs; 1 when undefined or zero.
pub fn default_delta_sq(positions: &[[f64; 3]]) -> f64 {
    let n = positions.len();
    if n < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += dist_sq(&positions[i], &positions[j]);
        }
    }
    let mean = sum / (n * (n - 1) / 2) as f64;
    if mean > 0.0 && mean.is_finite() {
        mean
    } else {
        1.0
    }
}

/// [`TAU_SCALE`] times the lower median, over points, of the squared distance
/// to the nearest point at a nonzero distance. 1 when no point has one.
pub fn default_tau(positions: &[[f64; 3]]) -> f64 {
    let n = positions.len();
    let mut nearest: Vec<f64> = (0..n)
        .filter_map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| dist_sq(&positions[i], &positions[j]))
                .filter(|&d| d > 0.0)
                .min_by(f64::total_cmp)
        })
        .collect();
    if nearest.is_empty() {
        return 1.0;
    }
    nearest.sort_by(f64::total_cmp);
    TAU_SCALE * nearest[(nearest.len() - 1) / 2]
}

pub fn resolve_params(positions: &[[f64; 3]], overrides: GraphOverrides) -> GraphParams {
    GraphParams {
        delta_sq: overrides.delta.map_or_else(|| default_delta_sq(positions), |d| d * d),
        tau: overrides.tau.unwrap_or_else(|| default_tau(positions)),
    }
}

pub fn build_graph(positions: &[[f64; 3]], params: GraphParams) -> BlockGraph {
    assert!(params.delta_sq > 0.0, "kernel width must be positive");
    let n = positions.len();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist_sq(&positions[i], &positions[j]);
            if d <= params.tau {
                let w = (-d / params.delta_sq).exp();
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
    }
    let degrees: Vec<f64> = weights.chunks_exact(n.max(1)).take(n).map(|row| row.iter().sum()).collect();
    let mut laplacian: Vec<f64> = weights.iter().map(|w| -w).collect();
    for i in 0..n {
        laplacian[i * n + i] = degrees[i];
    }
    BlockGraph { n, params, weights, degrees, laplacian }
}

impl BlockGraph {
    /// Connected components as sorted index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            label[start] = id;
            let mut members = vec![start];
            let mut k = 0;
            while k < members.len() {
                let i = members[k];
                k += 1;
                for j in 0..n {
                    if label[j] == usize::MAX && self.weights[i * n + j] != 0.0 {
                        label[j] = id;
                        members.push(j);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}
