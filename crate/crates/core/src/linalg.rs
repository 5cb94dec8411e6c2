//! Small dense complex linear algebra.
//!
//! Everything here works on column-major [`CMat`] values of at most a few
//! dozen rows. Hermitian eigenproblems use cyclic Jacobi sweeps, which are
//! slow asymptotically but accurate to working precision on these sizes.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(alloc::format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    /// Stacks equal-length column vectors side by side.
    pub fn from_columns(rows: usize, columns: &[&[Complex64]]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            assert_eq!(col.len(), rows, "column length mismatch");
            data.extend_from_slice(col);
        }
        CMat { rows, cols: columns.len(), data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn col(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Copies the listed columns, in order, into a new matrix.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &c in idx {
            data.extend_from_slice(self.col(c));
        }
        CMat { rows: self.rows, cols: idx.len(), data }
    }

    /// First `k` columns.
    pub fn leading_cols(&self, k: usize) -> Self {
        CMat { rows: self.rows, cols: k, data: self.data[..k * self.rows].to_vec() }
    }

    /// Horizontal concatenation.
    pub fn hstack(parts: &[&CMat], rows: usize) -> Self {
        let mut data = Vec::new();
        let mut cols = 0;
        for p in parts {
            assert_eq!(p.rows, rows, "row mismatch in hstack");
            data.extend_from_slice(&p.data);
            cols += p.cols;
        }
        CMat { rows, cols, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn mul(&self, rhs: &CMat) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b == ZERO {
                    continue;
                }
                let a = self.col(k);
                let o = out.col_mut(j);
                for i in 0..o.len() {
                    o[i] += a[i] * b;
                }
            }
        }
        out
    }

    /// `self^H * rhs` without materialising the adjoint.
    pub fn adjoint_mul(&self, rhs: &CMat) -> Self {
        assert_eq!(self.rows, rhs.rows, "row mismatch in adjoint product");
        CMat::from_fn(self.cols, rhs.cols, |i, j| dot_h(self.col(i), rhs.col(j)))
    }

    /// `self * rhs^H`.
    pub fn mul_adjoint(&self, rhs: &CMat) -> Self {
        self.mul(&rhs.adjoint())
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        let mut out = vec![ZERO; self.rows];
        for (k, &b) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.col(k)) {
                *o += a * b;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn sub(&self, rhs: &CMat) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_diag(&mut self, v: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += v;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.cols {
            for r in 0..self.rows {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Permutes columns: output column `i` is input column `perm[i]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        self.select_cols(perm)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[c * self.rows + r]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[c * self.rows + r]
    }
}

/// `a^H b`.
#[inline]
pub fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Scales `v` to unit Euclidean norm. Fails on the zero vector.
pub fn normalize(v: &mut [Complex64]) -> Result<()> {
    let n = norm(v);
    if !(n > 1e-300) || !n.is_finite() {
        return Err(Error::Numerical("cannot normalize a zero or non-finite vector".into()));
    }
    for z in v.iter_mut() {
        *z /= n;
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Matching orthonormal eigenvectors as columns.
    pub vectors: CMat,
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Only the upper triangle is trusted; the input is symmetrised first.
pub fn hermitian_eigen(a: &CMat) -> Result<HermitianEigen> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::Shape(alloc::format!("eigen of non-square {}x{}", a.rows, a.cols)));
    }
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry in Hermitian eigenproblem".into()));
    }
    let mut m = a.clone();
    for c in 0..n {
        m[(c, c)] = Complex64::new(m[(c, c)].re, 0.0);
        for r in 0..c {
            let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
    }
    let mut v = CMat::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for c in 0..n {
            for r in 0..c {
                off += m[(r, c)].norm_sqr();
            }
        }
        if libm::sqrt(off) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // Phase-align a_pq to a real positive value, then apply a
                // real Jacobi rotation.
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // Column rotation: V = E J restricted to (p, q), with
                // E = diag(1, conj(phase)).
                let e = phase.conj();
                let vpp = Complex64::new(c, 0.0);
                let vpq = Complex64::new(s, 0.0);
                let vqp = e * -s;
                let vqq = e * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * vpp + mkq * vqp;
                    m[(k, q)] = mkp * vpq + mkq * vqq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = vpp.conj() * mpk + vqp.conj() * mqk;
                    m[(q, k)] = vpq.conj() * mpk + vqq.conj() * mqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * vpp + vkq * vqp;
                    v[(k, q)] = vkp * vpq + vkq * vqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = v.select_cols(&order);
    Ok(HermitianEigen { values, vectors })
}

/// Left singular vectors and squared singular values of `a`, ordered by
/// decreasing singular value. Returns all `rows` vectors so callers also get
/// an orthonormal basis of the left null space.
pub fn left_singular(a: &CMat) -> Result<HermitianEigen> {
    let gram = a.mul_adjoint(a);
    let mut eig = hermitian_eigen(&gram)?;
    for v in eig.values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// Numerical rank from descending squared singular values.
pub fn rank_from_sq(values: &[f64], rel_tol: f64) -> usize {
    let top = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    values.iter().take_while(|&&v| v > rel_tol * top).count()
}

/// Solves `A X = B` by LU factorisation with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.rows;
    if a.cols != n || b.rows != n {
        return Err(Error::Shape(alloc::format!(
            "solve with A {}x{} and B {}x{}",
            a.rows,
            a.cols,
            b.rows,
            b.cols
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = lu.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for r in k + 1..n {
            let v = lu[(r, k)].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best > 1e-14 * scale) {
            return Err(Error::Numerical("singular system in linear solve".into()));
        }
        if piv != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(piv, c)];
                lu[(piv, c)] = tmp;
            }
            for c in 0..x.cols {
                let tmp = x[(k, c)];
                x[(k, c)] = x[(piv, c)];
                x[(piv, c)] = tmp;
            }
        }
        let d = lu[(k, k)];
        for r in k + 1..n {
            let f = lu[(r, k)] / d;
            if f == ZERO {
                continue;
            }
            for c in k..n {
                let u = lu[(k, c)];
                lu[(r, c)] -= f * u;
            }
            for c in 0..x.cols {
                let u = x[(k, c)];
                x[(r, c)] -= f * u;
            }
        }
    }
    for c in 0..x.cols {
        for r in (0..n).rev() {
            let mut acc = x[(r, c)];
            for k in r + 1..n {
                acc -= lu[(r, k)] * x[(k, c)];
            }
            x[(r, c)] = acc / lu[(r, r)];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian_matrix, seeded};

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = seeded(seed, 0);
        let a = complex_gaussian_matrix(&mut rng, n, n);
        a.mul_adjoint(&a)
    }

    #[test]
    fn eigen_reconstructs_and_is_orthonormal() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (12, 4), (16, 5)] {
            let a = random_hermitian(n, seed);
            let eig = hermitian_eigen(&a).unwrap();
            let u = &eig.vectors;
            let d = CMat::from_fn(n, n, |r, c| {
                if r == c {
                    Complex64::new(eig.values[r], 0.0)
                } else {
                    ZERO
                }
            });
            let rec = u.mul(&d).mul_adjoint(u);
            assert!(rec.sub(&a).frobenius() < 1e-10 * a.frobenius().max(1.0));
            let gram = u.adjoint_mul(u);
            assert!(gram.sub(&CMat::identity(n)).frobenius() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigen_of_diagonal_sorts() {
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(1, 1)] = Complex64::new(3.0, 0.0);
        a[(2, 2)] = Complex64::new(2.0, 0.0);
        let eig = hermitian_eigen(&a).unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn solve_matches_product() {
        let mut rng = seeded(9, 0);
        let a = complex_gaussian_matrix(&mut rng, 6, 6);
        let x = complex_gaussian_matrix(&mut rng, 6, 3);
        let b = a.mul(&x);
        let got = solve(&a, &b).unwrap();
        assert!(got.sub(&x).frobenius() < 1e-10);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = CMat::zeros(3, 3);
        assert!(matches!(solve(&a, &CMat::identity(3)), Err(Error::Numerical(_))));
    }

    #[test]
    fn left_singular_rank() {
        let mut rng = seeded(3, 0);
        let a = complex_gaussian_matrix(&mut rng, 6, 2);
        let svd = left_singular(&a).unwrap();
        assert_eq!(rank_from_sq(&svd.values, 1e-12), 2);
    }

    #[test]
    fn normalize_zero_fails() {
        let mut v = vec![ZERO; 3];
        assert!(normalize(&mut v).is_err());
    }
}
