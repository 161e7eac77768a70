//! Orthonormal 1-D DCT-II of arbitrary length, by dense matrix multiply.
//!
//! Blocks hold at most a few hundred points, so an `n x n` table is cheap and
//! keeps forward and inverse bit-for-bit reproducible. Tables are cached per
//! length.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

#[derive(Debug)]
pub struct DctPlan {
    n: usize,
    /// Row `k` is basis vector `k`.
    basis: Vec<f64>,
}

impl DctPlan {
    fn new(n: usize) -> DctPlan {
        let mut basis = vec![0.0; n * n];
        let nf = n as f64;
        for k in 0..n {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for i in 0..n {
                basis[k * n + i] = scale * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos();
            }
        }
        DctPlan { n, basis }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn basis(&self) -> &[f64] {
        &self.basis
    }

    /// DCT-II.
    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert!(x.len() == n && out.len() == n);
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.basis[k * n..(k + 1) * n];
            *o = row.iter().zip(x).map(|(b, v)| b * v).sum();
        }
    }

    /// DCT-III, the inverse of [`DctPlan::forward`].
    pub fn inverse(&self, c: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert!(c.len() == n && out.len() == n);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (k, &ck) in c.iter().enumerate() {
            if ck == 0.0 {
                continue;
            }
            let row = &self.basis[k * n..(k + 1) * n];
            for (o, b) in out.iter_mut().zip(row) {
                *o += ck * b;
            }
        }
    }

    /// Applies the forward transform to each component column of `rows`.
    pub fn forward_columns(&self, rows: &[[f64; 3]]) -> Vec<[f64; 3]> {
        map_columns(rows, |x, out| self.forward(x, out))
    }

    pub fn inverse_columns(&self, rows: &[[f64; 3]]) -> Vec<[f64; 3]> {
        map_columns(rows, |x, out| self.inverse(x, out))
    }
}

pub(crate) fn map_columns(rows: &[[f64; 3]], f: impl Fn(&[f64], &mut [f64])) -> Vec<[f64; 3]> {
    let n = rows.len();
    let mut out = vec![[0.0; 3]; n];
    let mut col = vec![0.0; n];
    let mut res = vec![0.0; n];
    for c in 0..3 {
        for (v, r) in col.iter_mut().zip(rows) {
            *v = r[c];
        }
        f(&col, &mut res);
        for (o, v) in out.iter_mut().zip(&res) {
            o[c] = *v;
        }
    }
    out
}

pub fn plan(n: usize) -> Arc<DctPlan> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<DctPlan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.read().unwrap().get(&n) {
        return p.clone();
    }
    let p = Arc::new(DctPlan::new(n));
    cache.write().unwrap().entry(n).or_insert(p).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_hits_dc_only() {
        let n = 37;
        let c = 2.5;
        let p = plan(n);
        let mut out = vec![0.0; n];
        p.forward(&vec![c; n], &mut out);
        assert!((out[0] - c * (n as f64).sqrt()).abs() < 1e-12);
        assert!(out[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn length_one_is_identity() {
        let p = plan(1);
        let mut out = [0.0];
        p.forward(&[-7.25], &mut out);
        assert_eq!(out, [-7.25]);
    }

    #[test]
    fn round_trip() {
        let n = 50;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 - 50.0).collect();
        let p = plan(n);
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        p.forward(&x, &mut c);
        p.inverse(&c, &mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ec: f64 = c.iter().map(|v| v * v).sum();
        assert!((ex - ec).abs() < 1e-9 * ex);
    }
}
