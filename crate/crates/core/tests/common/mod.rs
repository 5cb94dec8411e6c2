//! Small reference routines used as oracles. Deliberately written without
//! the crate's own linear algebra.
#![allow(dead_code)]

use hrs_core::linalg::CMat;
use hrs_core::rng::{complex_gaussian_matrix, seeded};
use hrs_core::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
    complex_gaussian_matrix(&mut seeded(seed, 77), rows, cols)
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt with re-orthogonalisation; drops dependent columns.
pub fn gram_schmidt(cols: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in cols {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let p = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= p * qi;
                }
            }
        }
        let n = vnorm(&w);
        if n > 1e-10 * vnorm(v).max(1e-300) {
            basis.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    basis
}

pub fn columns(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.cols()).map(|c| m.col(c).to_vec()).collect()
}

fn apply(a: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    // `a` is stored by columns
    let mut out = vec![c(0.0, 0.0); v.len()];
    for (col, x) in a.iter().zip(v) {
        for (o, y) in out.iter_mut().zip(col) {
            *o += y * x;
        }
    }
    out
}

/// Dominant `k` eigenvectors of a Hermitian PSD matrix by orthogonal
/// iteration.
pub fn dominant_eigvecs(a: &CMat, k: usize, iters: usize) -> Vec<Vec<Complex64>> {
    let cols = columns(a);
    let n = a.rows();
    let mut q: Vec<Vec<Complex64>> =
        gram_schmidt(&(0..k).map(|j| (0..n).map(|i| c(((i * 7 + j * 3) % 5) as f64 + 1.0, (i + j) as f64 * 0.1)).collect()).collect::<Vec<_>>());
    for _ in 0..iters {
        let z: Vec<Vec<Complex64>> = q.iter().map(|v| apply(&cols, v)).collect();
        q = gram_schmidt(&z);
    }
    q
}

/// `sum_ij |<a_i, b_j>|^2` for orthonormal sets.
pub fn overlap(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter().flat_map(|x| b.iter().map(move |y| inner(x, y).norm_sqr())).sum()
}

pub fn max_abs_inner(a: &[Complex64], basis: &[Vec<Complex64>]) -> f64 {
    basis.iter().map(|q| inner(q, a).norm()).fold(0.0, f64::max)
}
