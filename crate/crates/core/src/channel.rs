//! Spatially correlated channels for a uniform circular array.
//!
//! Covariances follow the one-ring model: scatterers uniformly spread over
//! the angular sector `[azimuth - spread, azimuth + spread]`, integrated with
//! the midpoint rule. Channels are coloured i.i.d. complex normal draws, and
//! imperfect CSI mixes fresh innovations into the same eigenspace.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, CMat};
use crate::rng::{complex_gaussian_matrix, seeded};
use crate::{Error, Result};

/// Default number of midpoint-rule nodes for covariance integration.
pub const DEFAULT_INTEGRATION_POINTS: usize = 512;

/// Uniform circular array with half-wavelength chord spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Element coordinates in wavelengths.
    positions: Vec<(f64, f64)>,
    radius: f64,
}

impl ArrayGeometry {
    pub fn uca(num_elements: usize) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::Config("array needs at least one element".into()));
        }
        let m = num_elements as f64;
        // chord between neighbours: 2 r sin(pi/M) = 1/2
        let radius = if num_elements == 1 { 0.0 } else { 0.25 / libm::sin(PI / m) };
        let positions = (0..num_elements)
            .map(|i| {
                let ang = 2.0 * PI * i as f64 / m;
                (radius * libm::cos(ang), radius * libm::sin(ang))
            })
            .collect();
        Ok(ArrayGeometry { positions, radius })
    }

    pub fn num_elements(&self) -> usize {
        self.positions.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    /// Far-field response towards azimuth `phi`.
    pub fn steering(&self, phi: f64) -> Vec<Complex64> {
        let (ux, uy) = (libm::cos(phi), libm::sin(phi));
        self.positions
            .iter()
            .map(|&(x, y)| {
                let phase = 2.0 * PI * (x * ux + y * uy);
                Complex64::new(libm::cos(phase), libm::sin(phase))
            })
            .collect()
    }
}

/// Spatial covariance with its eigendecomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub r: CMat,
    /// Eigenvectors as columns, matching `lambda`.
    pub u: CMat,
    /// Eigenvalues sorted descending, clamped at zero.
    pub lambda: Vec<f64>,
    pub azimuth: f64,
    pub spread: f64,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `U diag(sqrt(lambda)) g`.
    pub fn color(&self, g: &[Complex64]) -> Vec<Complex64> {
        let scaled: Vec<Complex64> =
            g.iter().zip(&self.lambda).map(|(z, &l)| z * libm::sqrt(l)).collect();
        self.u.mul_vec(&scaled)
    }

    /// Orthonormal basis of the `k` dominant eigendirections.
    pub fn dominant_subspace(&self, k: usize) -> CMat {
        self.u.leading_cols(k)
    }
}

/// Builds the one-ring covariance for a sector centred at `azimuth` with
/// half-width `spread`.
pub fn build_covariance(
    geometry: &ArrayGeometry,
    azimuth: f64,
    spread: f64,
    num_integration_points: usize,
) -> Result<CovarianceMatrix> {
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::Domain(alloc::format!("angular spread must be positive, got {spread}")));
    }
    if num_integration_points < 64 {
        return Err(Error::Domain(alloc::format!(
            "need at least 64 integration points, got {num_integration_points}"
        )));
    }
    let m = geometry.num_elements();
    let mut r = CMat::zeros(m, m);
    let step = 2.0 * spread / num_integration_points as f64;
    for i in 0..num_integration_points {
        let phi = azimuth - spread + (i as f64 + 0.5) * step;
        let a = geometry.steering(phi);
        for c in 0..m {
            let ac = a[c].conj();
            for (row, &ar) in a.iter().enumerate() {
                r[(row, c)] += ar * ac;
            }
        }
    }
    let r = r.scale(1.0 / num_integration_points as f64);
    let defect = r.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::Numerical(alloc::format!("covariance not Hermitian (defect {defect:e})")));
    }
    let eig = hermitian_eigen(&r)?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    if let Some(&min) = eig.values.last() {
        if min < -1e-10 {
            return Err(Error::Numerical(alloc::format!("covariance eigenvalue {min:e} < 0")));
        }
    }
    let lambda = eig.values.iter().map(|&v| if v < 1e-12 * top { 0.0 } else { v }).collect();
    Ok(CovarianceMatrix { r, u: eig.vectors, lambda, azimuth, spread })
}

/// True and estimated channels for one realisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    /// `M x N`, column `k` is user `k`'s channel.
    pub h_true: CMat,
    /// Estimated channels seen by the transmitter.
    pub h_hat: CMat,
    pub cov_assignment: Vec<usize>,
    pub tau: f64,
    /// Pre-colouring innovations `g_k` behind `h_true`.
    pub innovations: CMat,
}

impl ChannelSet {
    /// Wraps stored matrices (no innovations available).
    pub fn from_matrices(h_true: CMat, h_hat: CMat, cov_assignment: Vec<usize>, tau: f64) -> Result<Self> {
        if h_true.rows() != h_hat.rows() || h_true.cols() != h_hat.cols() {
            return Err(Error::Shape("true and estimated channels differ in size".into()));
        }
        let innovations = CMat::zeros(0, 0);
        Ok(ChannelSet { h_true, h_hat, cov_assignment, tau, innovations })
    }

    pub fn num_antennas(&self) -> usize {
        self.h_true.rows()
    }

    pub fn num_users(&self) -> usize {
        self.h_true.cols()
    }

    /// Relabels users: new user `i` is old user `perm[i]`.
    pub fn permute_users(&self, perm: &[usize]) -> Self {
        let innovations = if self.innovations.cols() == self.num_users() {
            self.innovations.permute_cols(perm)
        } else {
            self.innovations.clone()
        };
        ChannelSet {
            h_true: self.h_true.permute_cols(perm),
            h_hat: self.h_hat.permute_cols(perm),
            cov_assignment: perm.iter().map(|&p| self.cov_assignment[p]).collect(),
            tau: self.tau,
            innovations,
        }
    }
}

fn check_covs(covs: &[CovarianceMatrix], assignment: &[usize]) -> Result<usize> {
    let m = covs.first().map(CovarianceMatrix::dim).ok_or_else(|| Error::Config("no covariance matrices".into()))?;
    if covs.iter().any(|c| c.dim() != m) {
        return Err(Error::Config("covariance matrices differ in dimension".into()));
    }
    if let Some(&bad) = assignment.iter().find(|&&a| a >= covs.len()) {
        return Err(Error::Config(alloc::format!(
            "covariance index {bad} out of range ({} available)",
            covs.len()
        )));
    }
    Ok(m)
}

fn color_columns(covs: &[CovarianceMatrix], assignment: &[usize], g: &CMat) -> CMat {
    let m = g.rows();
    let mut h = CMat::zeros(m, assignment.len());
    for (k, &a) in assignment.iter().enumerate() {
        h.col_mut(k).copy_from_slice(&covs[a].color(g.col(k)));
    }
    h
}

/// Draws `h_k = U Λ^{1/2} g_k` for every user. `h_hat` starts equal to
/// `h_true` (perfect CSI) until [`corrupt_csi`] is applied.
pub fn sample_channels(covs: &[CovarianceMatrix], assignment: &[usize], rng_seed: u64) -> Result<ChannelSet> {
    let m = check_covs(covs, assignment)?;
    let mut rng = seeded(rng_seed, 0);
    let g = complex_gaussian_matrix(&mut rng, m, assignment.len());
    let h_true = color_columns(covs, assignment, &g);
    Ok(ChannelSet {
        h_hat: h_true.clone(),
        h_true,
        cov_assignment: assignment.to_vec(),
        tau: 0.0,
        innovations: g,
    })
}

/// Replaces `h_hat` with `U Λ^{1/2} (sqrt(1 - tau^2) g_k + tau z_k)` using fresh
/// innovations `z_k`. `h_true` is left untouched.
pub fn corrupt_csi(
    channels: &ChannelSet,
    covs: &[CovarianceMatrix],
    tau: f64,
    rng_seed: u64,
) -> Result<ChannelSet> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(alloc::format!("tau must lie in [0, 1], got {tau}")));
    }
    let m = check_covs(covs, &channels.cov_assignment)?;
    let n = channels.num_users();
    if channels.innovations.rows() != m || channels.innovations.cols() != n {
        return Err(Error::Shape("channel set carries no innovations to corrupt".into()));
    }
    let mut out = channels.clone();
    out.tau = tau;
    if tau == 0.0 {
        out.h_hat = channels.h_true.clone();
        return Ok(out);
    }
    let mut rng = seeded(rng_seed, 1);
    let z = complex_gaussian_matrix(&mut rng, m, n);
    let keep = libm::sqrt(1.0 - tau * tau);
    let mixed = CMat::from_fn(m, n, |r, c| channels.innovations[(r, c)] * keep + z[(r, c)] * tau);
    out.h_hat = color_columns(covs, &channels.cov_assignment, &mixed);
    Ok(out)
}
