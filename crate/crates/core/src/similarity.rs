//! Projection-Frobenius similarity between channel column spaces.
//!
//! `s = tr(P_k P_j) / min(N_k, N_j)` is the mean squared cosine of the
//! principal angles between the two subspaces. When `M > N_k + N_j` it is
//! standardised against its null distribution (independent i.i.d. complex
//! Gaussian channels), estimated here by Monte Carlo.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, CMat};
use crate::rng::{complex_gaussian_matrix, derive_seed, seeded};
use crate::{Error, Result};

/// Condition number above which a channel block counts as rank deficient.
pub const MAX_CONDITION: f64 = 1e12;
/// Monte Carlo draws per calibration key.
pub const DEFAULT_CALIBRATION_DRAWS: usize = 2000;

/// Orthonormal basis of the column space of `h`, `M x N`.
pub fn orthonormal_basis(h: &CMat) -> Result<CMat> {
    let (m, n) = (h.rows(), h.cols());
    if n == 0 || n > m {
        return Err(Error::Degenerate(alloc::format!("{m}x{n} block cannot have full column rank")));
    }
    let gram = h.adjoint_mul(h);
    let eig = hermitian_eigen(&gram)?;
    let top = eig.values[0];
    let low = eig.values[n - 1];
    if !(top > 0.0) || !(low > 0.0) || libm::sqrt(top / low) > MAX_CONDITION {
        return Err(Error::Degenerate(alloc::format!(
            "channel block is rank deficient (singular values^2 {top:e} .. {low:e})"
        )));
    }
    let mut q = h.mul(&eig.vectors);
    for (c, &l) in eig.values.iter().enumerate() {
        let s = 1.0 / libm::sqrt(l);
        for z in q.col_mut(c) {
            *z *= s;
        }
    }
    Ok(q)
}

/// Orthogonal projector `H (H^H H)^{-1} H^H` onto the column space of `h`.
pub fn projection_matrix(h: &CMat) -> Result<CMat> {
    let q = orthonormal_basis(h)?;
    Ok(q.mul_adjoint(&q))
}

fn similarity_from_bases(qk: &CMat, qj: &CMat) -> f64 {
    // tr(P_k P_j) = ||Q_k^H Q_j||_F^2
    let cross = qk.adjoint_mul(qj);
    let t = cross.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    (t / qk.cols().min(qj.cols()) as f64).clamp(0.0, 1.0)
}

/// Projection-Frobenius similarity, in `[0, 1]`.
pub fn pf_similarity(hk: &CMat, hj: &CMat) -> Result<f64> {
    if hk.rows() != hj.rows() {
        return Err(Error::Shape("similarity between blocks of different antenna counts".into()));
    }
    Ok(similarity_from_bases(&orthonormal_basis(hk)?, &orthonormal_basis(hj)?))
}

/// Null-distribution moments of the similarity for one block-size pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub eta: f64,
    pub sigma: f64,
}

/// Monte Carlo mean and standard deviation of [`pf_similarity`] between
/// independent i.i.d. complex Gaussian blocks of sizes `nk` and `nj`.
pub fn calibrate_similarity(m: usize, nk: usize, nj: usize, num_draws: usize, rng_seed: u64) -> Result<CalibrationEntry> {
    if m <= nk + nj {
        return Err(Error::CalibrationNotApplicable { m, nk, nj });
    }
    if num_draws < 2 {
        return Err(Error::Domain(alloc::format!("calibration needs at least 2 draws, got {num_draws}")));
    }
    let mut rng = seeded(rng_seed, 0);
    let mut values = Vec::with_capacity(num_draws);
    for _ in 0..num_draws {
        let a = complex_gaussian_matrix(&mut rng, m, nk);
        let b = complex_gaussian_matrix(&mut rng, m, nj);
        values.push(pf_similarity(&a, &b)?);
    }
    let n = values.len() as f64;
    let eta = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - eta) * (v - eta)).sum::<f64>() / (n - 1.0);
    let sigma = libm::sqrt(var);
    if !(sigma > 0.0) {
        return Err(Error::Numerical("calibrated similarity has zero spread".into()));
    }
    Ok(CalibrationEntry { eta, sigma })
}

/// Cached calibration entries keyed by `(M, min(N_k, N_j), max(N_k, N_j))`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityCalibration {
    pub num_draws: usize,
    entries: BTreeMap<(usize, usize, usize), CalibrationEntry>,
}

fn key(m: usize, nk: usize, nj: usize) -> (usize, usize, usize) {
    (m, nk.min(nj), nk.max(nj))
}

impl SimilarityCalibration {
    pub fn new(num_draws: usize) -> Self {
        SimilarityCalibration { num_draws, entries: BTreeMap::new() }
    }

    /// Calibrates every block-size pair an agglomeration over `num_users`
    /// users on `m` antennas can need.
    pub fn for_users(m: usize, num_users: usize, num_draws: usize, rng_seed: u64) -> Result<Self> {
        let mut cal = Self::new(num_draws);
        for a in 1..=num_users {
            for b in a..=num_users - a {
                if m > a + b {
                    cal.ensure(m, a, b, rng_seed)?;
                }
            }
        }
        Ok(cal)
    }

    /// Computes the entry for `(m, nk, nj)` unless already cached.
    pub fn ensure(&mut self, m: usize, nk: usize, nj: usize, rng_seed: u64) -> Result<CalibrationEntry> {
        let k = key(m, nk, nj);
        if let Some(e) = self.entries.get(&k) {
            return Ok(*e);
        }
        let seed = derive_seed(rng_seed, ((k.0 as u64) << 32) | ((k.1 as u64) << 16) | k.2 as u64);
        let e = calibrate_similarity(m, k.1, k.2, self.num_draws, seed)?;
        self.entries.insert(k, e);
        Ok(e)
    }

    pub fn insert(&mut self, m: usize, nk: usize, nj: usize, entry: CalibrationEntry) {
        self.entries.insert(key(m, nk, nj), entry);
    }

    pub fn get(&self, m: usize, nk: usize, nj: usize) -> Option<CalibrationEntry> {
        self.entries.get(&key(m, nk, nj)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Standardised similarity when `M > N_k + N_j`, raw similarity otherwise.
pub fn normalized_similarity(hk: &CMat, hj: &CMat, calib: &SimilarityCalibration) -> Result<f64> {
    let raw = pf_similarity(hk, hj)?;
    standardize(raw, hk.rows(), hk.cols(), hj.cols(), calib)
}

pub(crate) fn standardize(raw: f64, m: usize, nk: usize, nj: usize, calib: &SimilarityCalibration) -> Result<f64> {
    if m > nk + nj {
        let e = calib.get(m, nk, nj).ok_or(Error::CalibrationMissing { m, nk, nj })?;
        Ok((raw - e.eta) / e.sigma)
    } else {
        Ok(raw)
    }
}

pub(crate) fn similarity_of_bases(qk: &CMat, qj: &CMat) -> f64 {
    similarity_from_bases(qk, qj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::complex_gaussian_matrix;
    use num_complex::Complex64;

    fn unit(m: usize, i: usize) -> CMat {
        CMat::from_fn(m, 1, |r, _| if r == i { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    #[test]
    fn rank_one_projector() {
        let p = projection_matrix(&unit(3, 0)).unwrap();
        let mut expect = CMat::zeros(3, 3);
        expect[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(p.sub(&expect).frobenius() < 1e-14);
    }

    #[test]
    fn projector_axioms() {
        let mut rng = seeded(1, 0);
        for n in 1..=4 {
            let h = complex_gaussian_matrix(&mut rng, 6, n);
            let p = projection_matrix(&h).unwrap();
            assert!(p.mul(&p).sub(&p).frobenius() < 1e-8);
            assert!(p.hermitian_defect() < 1e-8);
            assert!((p.trace().re - n as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn degenerate_blocks() {
        let e = unit(4, 1);
        let dup = CMat::hstack(&[&e, &e], 4);
        assert!(matches!(projection_matrix(&dup), Err(Error::Degenerate(_))));
        assert!(matches!(projection_matrix(&CMat::zeros(4, 1)), Err(Error::Degenerate(_))));
        let mut rng = seeded(2, 0);
        let wide = complex_gaussian_matrix(&mut rng, 2, 3);
        assert!(matches!(projection_matrix(&wide), Err(Error::Degenerate(_))));
    }

    #[test]
    fn similarity_extremes() {
        let mut rng = seeded(3, 0);
        let h = complex_gaussian_matrix(&mut rng, 5, 2);
        assert!((pf_similarity(&h, &h).unwrap() - 1.0).abs() < 1e-12);
        assert!(pf_similarity(&unit(4, 0), &unit(4, 3)).unwrap().abs() < 1e-15);
        let g = complex_gaussian_matrix(&mut rng, 5, 3);
        let a = pf_similarity(&h, &g).unwrap();
        let b = pf_similarity(&g, &h).unwrap();
        assert!((a - b).abs() < 1e-12 && (0.0..=1.0).contains(&a));
    }

    #[test]
    fn calibration_applicability() {
        assert!(matches!(calibrate_similarity(4, 2, 2, 2000, 0), Err(Error::CalibrationNotApplicable { .. })));
        let cal = SimilarityCalibration::new(10);
        let mut rng = seeded(4, 0);
        let a = complex_gaussian_matrix(&mut rng, 8, 1);
        assert!(matches!(normalized_similarity(&a, &a, &cal), Err(Error::CalibrationMissing { .. })));
    }

    #[test]
    fn fallback_returns_raw() {
        let mut rng = seeded(5, 0);
        let a = complex_gaussian_matrix(&mut rng, 4, 2);
        let b = complex_gaussian_matrix(&mut rng, 4, 2);
        let cal = SimilarityCalibration::new(10);
        assert_eq!(normalized_similarity(&a, &b, &cal).unwrap(), pf_similarity(&a, &b).unwrap());
    }

    #[test]
    fn centering() {
        let mut cal = SimilarityCalibration::new(10);
        cal.insert(8, 1, 2, CalibrationEntry { eta: 0.3, sigma: 0.1 });
        assert_eq!(standardize(0.3, 8, 2, 1, &cal).unwrap(), 0.0);
    }

    #[test]
    fn calibration_table_keys() {
        let cal = SimilarityCalibration::for_users(6, 4, 50, 1).unwrap();
        // pairs (a, b) with a <= b, a + b <= 4, a + b < 6
        assert_eq!(cal.len(), 4);
        assert!(cal.get(6, 3, 1).is_some());
        assert!(cal.get(6, 2, 2).is_some());
        assert!(cal.get(6, 3, 3).is_none());
    }
}
