//! Graph Fourier transform: projection onto Laplacian eigenvectors.
//!
//! The Laplacian of a disconnected graph is block diagonal, so each connected
//! component is decomposed on its own and the eigenvectors are scattered back
//! into the full index space before the global ordering rules are applied.

use super::eigen::{self, SymmetricEigen};
use super::graph::BlockGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct GftBasis {
    pub n: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Row-major `n x n`; column `k` is the basis vector for `eigenvalues[k]`.
    pub vectors: Vec<f64>,
}

pub fn gft_basis(graph: &BlockGraph) -> GftBasis {
    let n = graph.n;
    let components = graph.components();
    let eig = if components.len() == 1 {
        eigen::symmetric_eigen(&graph.laplacian, n)
    } else {
        let mut pairs = Vec::with_capacity(n);
        for comp in &components {
            let m = comp.len();
            if m == 1 {
                let mut v = vec![0.0; n];
                v[comp[0]] = 1.0;
                pairs.push((0.0, v));
                continue;
            }
            let mut sub = vec![0.0; m * m];
            for (a, &i) in comp.iter().enumerate() {
                for (b, &j) in comp.iter().enumerate() {
                    sub[a * m + b] = graph.laplacian[i * n + j];
                }
            }
            let e = eigen::symmetric_eigen(&sub, m);
            for k in 0..m {
                let mut v = vec![0.0; n];
                for (a, &i) in comp.iter().enumerate() {
                    v[i] = e.vectors[a * m + k];
                }
                pairs.push((e.values[k], v));
            }
        }
        eigen::from_pairs(pairs, n)
    };
    let SymmetricEigen { n, values, vectors } = eig;
    GftBasis { n, eigenvalues: values, vectors }
}

impl GftBasis {
    /// `A^T x` for each component column.
    pub fn forward(&self, rows: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let n = self.n;
        assert_eq!(rows.len(), n, "basis and block sizes differ");
        let mut out = vec![[0.0; 3]; n];
        for (i, r) in rows.iter().enumerate() {
            let a = &self.vectors[i * n..(i + 1) * n];
            for (o, &aik) in out.iter_mut().zip(a) {
                o[0] += aik * r[0];
                o[1] += aik * r[1];
                o[2] += aik * r[2];
            }
        }
        out
    }

    /// `A c` for each component column.
    pub fn inverse(&self, coeffs: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let n = self.n;
        assert_eq!(coeffs.len(), n, "basis and block sizes differ");
        (0..n)
            .map(|i| {
                let a = &self.vectors[i * n..(i + 1) * n];
                let mut acc = [0.0; 3];
                for (&aik, c) in a.iter().zip(coeffs) {
                    acc[0] += aik * c[0];
                    acc[1] += aik * c[1];
                    acc[2] += aik * c[2];
                }
                acc
            })
            .collect()
    }

    /// Largest entry of `|A^T A - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in p..n {
                let dot: f64 = (0..n).map(|i| self.vectors[i * n + p] * self.vectors[i * n + q]).sum();
                let target = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `||L A - A diag(lambda)||_F` for the Laplacian the basis came from.
    pub fn diagonalization_residual(&self, laplacian: &[f64]) -> f64 {
        let n = self.n;
        let mut sum = 0.0;
        for i in 0..n {
            for k in 0..n {
                let la: f64 = (0..n).map(|j| laplacian[i * n + j] * self.vectors[j * n + k]).sum();
                sum += (la - self.eigenvalues[k] * self.vectors[i * n + k]).powi(2);
            }
        }
        sum.sqrt()
    }
}
