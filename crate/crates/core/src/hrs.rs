//! Hierarchical rate splitting: precoders, power split and achievable rates.
//!
//! Every user decodes, in order, the outer common stream (shared by all
//! groups), its group's inner common stream, and finally its private stream.
//! Precoders are designed from the estimated channels and rates are measured
//! on the true channels.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::linalg::{dot_h, left_singular, normalize, rank_from_sq, solve, CMat};
use crate::partition::Partition;
use crate::{Error, Result};

/// Relative threshold on squared singular values below which a direction is
/// treated as absent.
const RANK_TOL: f64 = 1e-10;

/// How outer-precoder dimensions `b_g` and nulled ranks `r_g` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DimensionRule {
    /// `b_g = r_g = floor(M / G)` for every group.
    FloorMOverG,
    /// Explicit per-group values, indexed by canonical block order.
    Fixed { b: Vec<usize>, r: Vec<usize> },
}

/// Regulariser of the private RZF inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonRule {
    /// `epsilon = N_g / P`.
    UsersOverPower,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrsConfig {
    pub dims: DimensionRule,
    pub epsilon: EpsilonRule,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub total_power: f64,
}

impl HrsConfig {
    /// Floor rule, `N_g / P` regularisation and the default search grids.
    pub fn with_power(total_power: f64) -> Self {
        HrsConfig {
            dims: DimensionRule::FloorMOverG,
            epsilon: EpsilonRule::UsersOverPower,
            alpha_grid: default_alpha_grid(),
            beta_grid: default_beta_grid(),
            total_power,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_power > 0.0) || !self.total_power.is_finite() {
            return Err(Error::Config(alloc::format!("total power must be positive, got {}", self.total_power)));
        }
        for (name, grid) in [("alpha", &self.alpha_grid), ("beta", &self.beta_grid)] {
            if grid.is_empty() {
                return Err(Error::Config(alloc::format!("{name} grid is empty")));
            }
            if let Some(v) = grid.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
                return Err(Error::Config(alloc::format!("{name} grid value {v} outside (0, 1]")));
            }
        }
        if let EpsilonRule::Fixed(e) = self.epsilon {
            if !(e >= 0.0) {
                return Err(Error::Config(alloc::format!("epsilon must be nonnegative, got {e}")));
            }
        }
        Ok(())
    }

    /// `(b_g, r_g)` per group for `partition` on an `m`-antenna array.
    pub fn group_dims(&self, m: usize, partition: &Partition) -> Result<GroupDims> {
        let g = partition.num_groups();
        let (b, r) = match &self.dims {
            DimensionRule::FloorMOverG => {
                let d = if g == 0 { 0 } else { m / g };
                (vec![d; g], vec![d; g])
            }
            DimensionRule::Fixed { b, r } => {
                if b.len() != g || r.len() != g {
                    return Err(Error::Config(alloc::format!(
                        "fixed dimension rule has {} / {} entries for {g} groups",
                        b.len(),
                        r.len()
                    )));
                }
                (b.clone(), r.clone())
            }
        };
        Ok(GroupDims { m, b, r, sizes: partition.blocks().iter().map(Vec::len).collect() })
    }

    /// Checks `1 <= b_g <= M - sum_{l != g} r_l` for every group.
    pub fn check_feasible(&self, m: usize, partition: &Partition) -> Result<GroupDims> {
        let dims = self.group_dims(m, partition)?;
        dims.check()?;
        Ok(dims)
    }

    fn epsilon(&self, group_size: usize) -> f64 {
        match self.epsilon {
            EpsilonRule::UsersOverPower => group_size as f64 / self.total_power,
            EpsilonRule::Fixed(e) => e,
        }
    }
}

/// Eleven alpha values: `1e-3` (outer common effectively off), then 0.1..=1.0.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut g = vec![1e-3];
    g.extend((1..=10).map(|i| i as f64 / 10.0));
    g
}

/// Ten beta values 0.1..=1.0.
pub fn default_beta_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Per-group precoder dimensions for one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDims {
    pub m: usize,
    pub b: Vec<usize>,
    pub r: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl GroupDims {
    pub fn check(&self) -> Result<()> {
        let total_r: usize = self.r.iter().sum();
        for (g, (&b, &r)) in self.b.iter().zip(&self.r).enumerate() {
            if b == 0 {
                return Err(Error::Infeasible(alloc::format!(
                    "group {g}: b_g = 0 leaves no dimensions (M={}, G={})",
                    self.m,
                    self.b.len()
                )));
            }
            let budget = self.m.saturating_sub(total_r - r);
            if b > budget {
                return Err(Error::Infeasible(alloc::format!(
                    "group {g}: b_g = {b} exceeds M - r* = {budget}"
                )));
            }
        }
        Ok(())
    }

    /// Whether every group can fully separate its users (`N_g <= b_g`).
    pub fn full_separation(&self) -> bool {
        self.sizes.iter().zip(&self.b).all(|(n, b)| n <= b)
    }
}

/// Precoders for every layer of one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    /// Outer precoders, `M x b_g` with orthonormal columns.
    pub outer: Vec<CMat>,
    /// Private RZF precoders, `b_g x N_g`, unit-norm columns.
    pub private: Vec<CMat>,
    /// Inner common precoders, length `b_g`, unit norm.
    pub inner_common: Vec<Vec<Complex64>>,
    /// Outer common precoder, length `M`, unit norm.
    pub outer_common: Vec<Complex64>,
}

/// Splits `h` into per-group submatrices following `partition`.
pub fn group_channels(h: &CMat, partition: &Partition) -> Vec<CMat> {
    partition.blocks().iter().map(|b| h.select_cols(b)).collect()
}

/// Orthonormal basis of the orthogonal complement of `span(u)`.
fn complement_basis(u: &CMat) -> Result<CMat> {
    let m = u.rows();
    if u.cols() == 0 {
        return Ok(CMat::identity(m));
    }
    let svd = left_singular(u)?;
    let rank = rank_from_sq(&svd.values, RANK_TOL);
    let keep: Vec<usize> = (rank..m).collect();
    Ok(svd.vectors.select_cols(&keep))
}

/// Outer precoders `B_g`.
///
/// For each group the dominant `r_l` left singular directions of every other
/// group's estimated channel are nulled, and `B_g` spans the `b_g` dominant
/// directions of the group's channel inside what remains. A single group gets
/// the leading columns of the identity.
pub fn compute_outer_precoders(h_hat_grouped: &[CMat], dims: &GroupDims) -> Result<Vec<CMat>> {
    dims.check()?;
    let m = dims.m;
    let groups = h_hat_grouped.len();
    if groups != dims.b.len() {
        return Err(Error::Shape(alloc::format!("{groups} channel groups for {} dimension entries", dims.b.len())));
    }
    if let Some(h) = h_hat_grouped.iter().find(|h| h.rows() != m) {
        return Err(Error::Shape(alloc::format!("group channel has {} rows, expected {m}", h.rows())));
    }
    if groups == 1 {
        return Ok(vec![CMat::identity(m).leading_cols(dims.b[0].min(m))]);
    }

    let mut dominant = Vec::with_capacity(groups);
    for (h, &r) in h_hat_grouped.iter().zip(&dims.r) {
        let svd = left_singular(h)?;
        let k = r.min(rank_from_sq(&svd.values, RANK_TOL));
        dominant.push(svd.vectors.leading_cols(k));
    }

    let mut outer = Vec::with_capacity(groups);
    for g in 0..groups {
        let others: Vec<&CMat> = (0..groups).filter(|&l| l != g).map(|l| &dominant[l]).collect();
        let stacked = CMat::hstack(&others, m);
        let q = complement_basis(&stacked)?;
        let b = dims.b[g];
        if q.cols() < b {
            return Err(Error::Infeasible(alloc::format!(
                "group {g}: only {} interference-free dimensions for b_g = {b}",
                q.cols()
            )));
        }
        let projected = q.adjoint_mul(&h_hat_grouped[g]);
        let svd = left_singular(&projected)?;
        outer.push(q.mul(&svd.vectors.leading_cols(b)));
    }
    Ok(outer)
}

/// Private RZF, inner common and outer common precoders on top of `outer`.
pub fn compute_inner_precoders(outer: &[CMat], h_hat_grouped: &[CMat], config: &HrsConfig) -> Result<PrecoderSet> {
    if outer.len() != h_hat_grouped.len() {
        return Err(Error::Shape("outer precoders and channel groups differ in count".into()));
    }
    let m = outer.first().map(CMat::rows).unwrap_or(0);
    let mut private = Vec::with_capacity(outer.len());
    let mut inner_common = Vec::with_capacity(outer.len());
    let mut outer_common = vec![Complex64::new(0.0, 0.0); m];

    for (b, h) in outer.iter().zip(h_hat_grouped) {
        let effective = b.adjoint_mul(h);
        let mut gram = effective.mul_adjoint(&effective);
        gram.add_diag(config.epsilon(h.cols()));
        let mut w = solve(&gram, &effective).map_err(|_| {
            Error::Numerical("regularised RZF inverse is singular (epsilon = 0 on a rank-deficient channel)".into())
        })?;
        for c in 0..w.cols() {
            normalize(w.col_mut(c))?;
        }
        let mut ic = vec![Complex64::new(0.0, 0.0); w.rows()];
        for c in 0..w.cols() {
            for (acc, z) in ic.iter_mut().zip(w.col(c)) {
                *acc += z;
            }
        }
        normalize(&mut ic)?;

        let ones = vec![Complex64::new(1.0, 0.0); effective.cols()];
        let leak = b.mul_vec(&effective.mul_vec(&ones));
        for (acc, z) in outer_common.iter_mut().zip(leak) {
            *acc += z;
        }
        private.push(w);
        inner_common.push(ic);
    }
    normalize(&mut outer_common)?;
    Ok(PrecoderSet { outer: outer.to_vec(), private, inner_common, outer_common })
}

/// Builds the full precoder stack for `partition` from estimated channels.
pub fn build_precoders(h_hat: &CMat, partition: &Partition, config: &HrsConfig) -> Result<PrecoderSet> {
    let dims = config.check_feasible(h_hat.rows(), partition)?;
    let grouped = group_channels(h_hat, partition);
    let outer = compute_outer_precoders(&grouped, &dims)?;
    compute_inner_precoders(&outer, &grouped, config)
}

/// Power split for one `(alpha, beta)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub alpha: f64,
    pub beta: f64,
    pub p_oc: f64,
    /// Per group.
    pub p_ic: Vec<f64>,
    /// Per user, indexed by user id.
    pub p_priv: Vec<f64>,
}

impl PowerAllocation {
    /// `p_oc = alpha P`, `p_ic,g = (1-alpha) beta P / G`,
    /// `p_gk = (1-alpha)(1-beta) P / (G N_g)`.
    pub fn new(alpha: f64, beta: f64, total_power: f64, partition: &Partition) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(alloc::format!("alpha={alpha}, beta={beta} must lie in [0, 1]")));
        }
        if !(total_power > 0.0) {
            return Err(Error::Domain(alloc::format!("total power must be positive, got {total_power}")));
        }
        let g = partition.num_groups() as f64;
        let common = (1.0 - alpha) * total_power;
        let p_ic = vec![common * beta / g; partition.num_groups()];
        let mut p_priv = vec![0.0; partition.num_users()];
        for block in partition.blocks() {
            let p = common * (1.0 - beta) / (g * block.len() as f64);
            for &u in block {
                p_priv[u] = p;
            }
        }
        Ok(PowerAllocation { alpha, beta, p_oc: alpha * total_power, p_ic, p_priv })
    }

    pub fn total(&self) -> f64 {
        self.p_oc + self.p_ic.iter().sum::<f64>() + self.p_priv.iter().sum::<f64>()
    }
}

/// Rate components in bits/s/Hz with the power split that achieved them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub r_oc: f64,
    pub r_ic: f64,
    pub r_p: f64,
    pub r_total: f64,
    pub best_alpha: f64,
    pub best_beta: f64,
    pub feasible: bool,
}

impl RateBreakdown {
    pub fn infeasible() -> Self {
        RateBreakdown { r_oc: 0.0, r_ic: 0.0, r_p: 0.0, r_total: 0.0, best_alpha: 0.0, best_beta: 0.0, feasible: false }
    }
}

/// Squared gains `|h_u^H v|^2` of every user towards every transmitted beam.
#[derive(Debug, Clone)]
pub struct GainTable {
    group_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    outer_common: Vec<f64>,
    /// `[u][l]`: user `u` towards group `l`'s inner common beam.
    inner_common: Vec<Vec<f64>>,
    /// `[u][v]`: user `u` towards user `v`'s private beam.
    private: Vec<Vec<f64>>,
}

/// SINRs of one user for the three layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSinr {
    pub outer_common: f64,
    pub inner_common: f64,
    pub private: f64,
    /// Denominators `1 + I`, `1 + I - own ic`, `1 + I - own ic - own private`.
    pub denominators: [f64; 3],
}

impl GainTable {
    pub fn new(h_true: &CMat, partition: &Partition, precoders: &PrecoderSet) -> Result<Self> {
        let n = partition.num_users();
        if h_true.cols() != n {
            return Err(Error::Shape(alloc::format!("{} channel columns for {n} users", h_true.cols())));
        }
        let m = h_true.rows();
        if precoders.outer_common.len() != m || precoders.outer.len() != partition.num_groups() {
            return Err(Error::Shape("precoders do not match channel/partition".into()));
        }
        let mut ic_beams = Vec::with_capacity(partition.num_groups());
        let mut priv_beams = vec![Vec::new(); n];
        for (l, block) in partition.blocks().iter().enumerate() {
            let b = &precoders.outer[l];
            let w = &precoders.private[l];
            if b.rows() != m || w.cols() != block.len() || w.rows() != b.cols() {
                return Err(Error::Shape(alloc::format!("precoder shapes of group {l} inconsistent")));
            }
            ic_beams.push(b.mul_vec(&precoders.inner_common[l]));
            for (k, &v) in block.iter().enumerate() {
                priv_beams[v] = b.mul_vec(w.col(k));
            }
        }
        let gain = |u: usize, beam: &[Complex64]| dot_h(h_true.col(u), beam).norm_sqr();
        Ok(GainTable {
            group_of: partition.group_of(),
            members: partition.blocks().to_vec(),
            outer_common: (0..n).map(|u| gain(u, &precoders.outer_common)).collect(),
            inner_common: (0..n).map(|u| ic_beams.iter().map(|b| gain(u, b)).collect()).collect(),
            private: (0..n).map(|u| priv_beams.iter().map(|b| gain(u, b)).collect()).collect(),
        })
    }

    pub fn sinr(&self, u: usize, power: &PowerAllocation) -> Result<UserSinr> {
        let g = self.group_of[u];
        let interference: f64 = power.p_ic.iter().zip(&self.inner_common[u]).map(|(p, x)| p * x).sum::<f64>()
            + power.p_priv.iter().zip(&self.private[u]).map(|(p, x)| p * x).sum::<f64>();
        let own_ic = power.p_ic[g] * self.inner_common[u][g];
        let own_p = power.p_priv[u] * self.private[u][u];
        let d_oc = 1.0 + interference;
        let d_ic = d_oc - own_ic;
        let d_p = d_oc - (own_ic + own_p);
        if d_ic < 1.0 - 1e-12 * d_oc.max(1.0) || d_p < 1.0 - 1e-12 * d_oc.max(1.0) {
            return Err(Error::Numerical(alloc::format!(
                "SINR denominator below noise floor for user {u} ({d_ic}, {d_p})"
            )));
        }
        let d_ic = d_ic.max(1.0);
        let d_p = d_p.max(1.0);
        Ok(UserSinr {
            outer_common: power.p_oc * self.outer_common[u] / d_oc,
            inner_common: own_ic / d_ic,
            private: own_p / d_p,
            denominators: [d_oc, d_ic, d_p],
        })
    }

    /// Rate components for one power split.
    pub fn rates(&self, power: &PowerAllocation) -> Result<RateBreakdown> {
        let n = self.group_of.len();
        if power.p_priv.len() != n || power.p_ic.len() != self.members.len() {
            return Err(Error::Shape("power allocation does not match partition".into()));
        }
        let mut sinrs = Vec::with_capacity(n);
        for u in 0..n {
            sinrs.push(self.sinr(u, power)?);
        }
        let log = |x: f64| libm::log2(1.0 + x);
        let r_oc = sinrs.iter().map(|s| log(s.outer_common)).fold(f64::INFINITY, f64::min);
        let r_oc = if r_oc.is_finite() { r_oc } else { 0.0 };
        let r_ic: f64 = self
            .members
            .iter()
            .map(|block| block.iter().map(|&u| log(sinrs[u].inner_common)).fold(f64::INFINITY, f64::min))
            .sum();
        let r_p: f64 = sinrs.iter().map(|s| log(s.private)).sum();
        Ok(RateBreakdown {
            r_oc,
            r_ic,
            r_p,
            r_total: r_oc + r_ic + r_p,
            best_alpha: power.alpha,
            best_beta: power.beta,
            feasible: true,
        })
    }
}

/// Exact SINRs and rates of `precoders` on the true channels for one fixed
/// power split.
pub fn compute_sinr_and_rate(
    h_true: &CMat,
    partition: &Partition,
    precoders: &PrecoderSet,
    power: &PowerAllocation,
) -> Result<RateBreakdown> {
    GainTable::new(h_true, partition, precoders)?.rates(power)
}

/// Best rate of `partition` over the `(alpha, beta)` grid. Infeasible
/// partitions score zero.
pub fn evaluate_partition(channels: &ChannelSet, partition: &Partition, config: &HrsConfig) -> Result<RateBreakdown> {
    if partition.num_users() != channels.num_users() {
        return Err(Error::Shape(alloc::format!(
            "partition over {} users for {} channels",
            partition.num_users(),
            channels.num_users()
        )));
    }
    let precoders = match build_precoders(&channels.h_hat, partition, config) {
        Ok(p) => p,
        Err(Error::Infeasible(_)) => return Ok(RateBreakdown::infeasible()),
        Err(e) => return Err(e),
    };
    let table = GainTable::new(&channels.h_true, partition, &precoders)?;
    // A single group has no inter-group leakage; keep the outer layer off.
    let lowest = [config.alpha_grid.iter().copied().fold(f64::INFINITY, f64::min)];
    let alphas: &[f64] = if partition.num_groups() == 1 { &lowest } else { &config.alpha_grid };
    let mut best: Option<RateBreakdown> = None;
    for &alpha in alphas {
        for &beta in &config.beta_grid {
            let power = PowerAllocation::new(alpha, beta, config.total_power, partition)?;
            let rate = table.rates(&power)?;
            if best.map_or(true, |b| rate.r_total > b.r_total) {
                best = Some(rate);
            }
        }
    }
    best.ok_or_else(|| Error::Config("empty power grid".into()))
}
