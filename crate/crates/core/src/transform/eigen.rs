//! Deterministic symmetric eigendecomposition.
//!
//! The encoder and decoder both derive each block's graph transform from
//! geometry alone, so the solver must produce bit-identical output for
//! identical input. Everything here runs in a fixed order with no
//! data-dependent parallelism.

/// Convergence threshold on the off-diagonal Frobenius norm, relative to the
/// Frobenius norm of the input.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Eigenvalues closer than this are treated as one repeated eigenvalue when
/// ordering the basis.
pub const EIGENVALUE_TIE_TOLERANCE: f64 = 1e-10;

const SIGN_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;
const MAX_QL_ITERATIONS: usize = 256;

/// Eigenpairs of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub n: usize,
    /// Ascending.
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `k` is the eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

/// Decomposes the symmetric row-major `n x n` matrix `a` by Householder
/// reduction to tridiagonal form followed by implicit QL iterations.
///
/// Columns of the result are sign-normalized (first entry with magnitude above
/// 1e-12 is positive) and sorted by ascending eigenvalue; runs of eigenvalues
/// within [`EIGENVALUE_TIE_TOLERANCE`] are ordered by descending lexicographic
/// comparison of their normalized eigenvectors, so a zero matrix yields the
/// identity basis.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    if n == 0 {
        return SymmetricEigen { n, values: Vec::new(), vectors: Vec::new() };
    }
    // `z` holds eigenvectors as rows once `tql2` finishes.
    let mut z = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e, n);
    tql2(&mut z, &mut d, &mut e, n);
    finish(d, &z, n)
}

/// Cyclic Jacobi reference solver. Slower than [`symmetric_eigen`] by roughly
/// an order of magnitude at block sizes, but algorithmically independent of
/// it; output follows the same ordering and sign rules.
pub fn jacobi_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut m = a.to_vec();
    // Rows of `vt` are eigenvectors, so each rotation touches two contiguous rows.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }

    let frob = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = OFF_DIAGONAL_TOLERANCE * frob;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&m, n);
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                rotate(&mut m, &mut vt, n, p, q);
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    finish(values, &vt, n)
}

/// Sign-normalizes and orders eigenpairs given eigenvectors as rows of `rows`.
fn finish(raw_values: Vec<f64>, rows: &[f64], n: usize) -> SymmetricEigen {
    let pairs = raw_values
        .into_iter()
        .enumerate()
        .map(|(k, value)| (value, rows[k * n..(k + 1) * n].to_vec()))
        .collect();
    from_pairs(pairs, n)
}

/// Builds a decomposition from unordered `(eigenvalue, eigenvector)` pairs,
/// applying the sign and ordering rules of [`symmetric_eigen`].
pub fn from_pairs(mut pairs: Vec<(f64, Vec<f64>)>, n: usize) -> SymmetricEigen {
    assert_eq!(pairs.len(), n);
    for (_, v) in pairs.iter_mut() {
        normalize_sign(v);
    }
    order_pairs(&mut pairs);

    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0; n * n];
    for (k, (value, v)) in pairs.into_iter().enumerate() {
        values.push(value);
        for (i, x) in v.into_iter().enumerate() {
            vectors[i * n + k] = x;
        }
    }
    SymmetricEigen { n, values, vectors }
}

/// Householder tridiagonalization. On return `d` is the diagonal, `e[1..]` the
/// subdiagonal, and `v` (row-major, `v[i*n+j]` = row i) the accumulated
/// orthogonal transform stored transposed: row `j` of `v` is column `j` of Q.
fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    // Work on the transpose so that the inner loops below walk contiguous rows.
    // The input is symmetric, so the transpose is the input itself.
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;

    // `v[k*n+j]` currently holds Q[k][j]; store transposed so eigenvector
    // updates in `tql2` touch contiguous rows.
    for i in 0..n {
        for j in (i + 1)..n {
            v.swap(i * n + j, j * n + i);
        }
    }
}

/// Implicit QL on the tridiagonal matrix from [`tred2`]. `vt` holds the
/// transform transposed; on return row `k` is the eigenvector for `d[k]`.
fn tql2(vt: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            for _ in 0..MAX_QL_ITERATIONS {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (head, tail) = vt.split_at_mut((i + 1) * n);
                    let row_i = &mut head[i * n..];
                    let row_i1 = &mut tail[..n];
                    for (a, b) in row_i1.iter_mut().zip(row_i.iter_mut()) {
                        let x = *a;
                        *a = s * *b + c * x;
                        *b = c * *b - s * x;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

fn off_diagonal_norm(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let x = m[p * n + q];
            s += x * x;
        }
    }
    (2.0 * s).sqrt()
}

/// Applies the Jacobi rotation that annihilates `m[p][q]`.
fn rotate(m: &mut [f64], vt: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let mpk = m[p * n + k];
        let mqk = m[q * n + k];
        let np = c * mpk - s * mqk;
        let nq = s * mpk + c * mqk;
        m[p * n + k] = np;
        m[q * n + k] = nq;
        m[k * n + p] = np;
        m[k * n + q] = nq;
    }
    m[p * n + p] = app - t * apq;
    m[q * n + q] = aqq + t * apq;
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;

    let (head, tail) = vt.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for (vp, vq) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let a = *vp;
        let b = *vq;
        *vp = c * a - s * b;
        *vq = s * a + c * b;
    }
}

fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().copied().find(|x| x.abs() > SIGN_TOLERANCE) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

fn order_pairs(pairs: &mut [(f64, Vec<f64>)]) {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lexicographic(&b.1, &a.1)));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= EIGENVALUE_TIE_TOLERANCE {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|a, b| lexicographic(&b.1, &a.1));
        }
        start = end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    fn residual(a: &[f64], e: &SymmetricEigen) -> f64 {
        let n = e.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                let mut av = 0.0;
                for j in 0..n {
                    av += a[i * n + j] * e.vectors[j * n + k];
                }
                worst = worst.max((av - e.values[k] * e.vectors[i * n + k]).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_matrix_is_its_own_decomposition() {
        let a = vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let e = symmetric_eigen(&a, 3);
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.vector(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = symmetric_eigen(&vec![0.0; 16], 4);
        for i in 0..4 {
            for k in 0..4 {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert_eq!(e.vectors[i * 4 + k], expect);
            }
        }
    }

    #[test]
    fn two_by_two_analytic() {
        let w = 0.7;
        let e = symmetric_eigen(&[w, -w, -w, w], 2);
        assert!(e.values[0].abs() < 1e-15);
        assert!((e.values[1] - 2.0 * w).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vector(0)[0] - s).abs() < 1e-15 && (e.vector(0)[1] - s).abs() < 1e-15);
    }

    #[test]
    fn random_matrices_are_diagonalized() {
        for seed in 0..5 {
            let n = 10 + 7 * seed as usize;
            let a = random_symmetric(n, seed);
            let e = symmetric_eigen(&a, n);
            assert!(residual(&a, &e) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn ql_and_jacobi_agree() {
        for seed in 0..4 {
            let n = 5 + 11 * seed as usize;
            let a = random_symmetric(n, 100 + seed);
            let ql = symmetric_eigen(&a, n);
            let jac = jacobi_eigen(&a, n);
            assert!(residual(&a, &jac) < 1e-10);
            for (x, y) in ql.values.iter().zip(&jac.values) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
            // Simple spectrum: vectors agree up to the shared sign rule.
            for (x, y) in ql.vectors.iter().zip(&jac.vectors) {
                assert!((x - y).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn output_is_reproducible() {
        let a = random_symmetric(40, 9);
        assert_eq!(symmetric_eigen(&a, 40), symmetric_eigen(&a, 40));
    }
}
