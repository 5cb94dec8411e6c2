//! Agglomerative user clustering and rate-based level selection.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::hrs::{evaluate_partition, HrsConfig, RateBreakdown};
use crate::linalg::{left_singular, rank_from_sq, CMat};
use crate::partition::{enumerate_partitions, Partition};
use crate::similarity::{orthonormal_basis, similarity_of_bases, standardize, SimilarityCalibration, MAX_CONDITION};
use crate::{Error, Result};

/// Largest user count the exhaustive oracle accepts.
pub const MAX_EXHAUSTIVE_USERS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    /// Index of the level produced by this merge.
    pub level: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub similarity: f64,
}

/// Nested partitions from all singletons (`levels[0]`) to the universal
/// partition (`levels[N-1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub levels: Vec<Partition>,
    pub merges: Vec<MergeStep>,
}

impl Dendrogram {
    pub fn contains(&self, p: &Partition) -> bool {
        self.levels.iter().any(|l| l == p)
    }
}

/// Column-space basis of a block. Blocks wider than the array span the
/// whole space and get an `M`-dimensional basis.
fn block_basis(h: &CMat) -> Result<CMat> {
    if h.cols() <= h.rows() {
        return orthonormal_basis(h);
    }
    let svd = left_singular(h)?;
    let m = h.rows();
    let rank = rank_from_sq(&svd.values, 1.0 / (MAX_CONDITION * MAX_CONDITION));
    if rank < m {
        return Err(Error::Degenerate(alloc::format!("wide block of rank {rank} < {m}")));
    }
    Ok(svd.vectors)
}

/// Bottom-up clustering: repeatedly merges the pair of blocks with the
/// highest normalised similarity. Ties go to the lexicographically smallest
/// pair of block minima.
pub fn agglomerate(h_hat: &CMat, calib: &SimilarityCalibration) -> Result<Dendrogram> {
    let n = h_hat.cols();
    if n == 0 {
        return Err(Error::Domain("cannot cluster zero users".into()));
    }
    let m = h_hat.rows();
    let mut current = Partition::singletons(n);
    let mut bases: Vec<CMat> = current.blocks().iter().map(|b| block_basis(&h_hat.select_cols(b))).collect::<Result<_>>()?;
    let mut levels = Vec::with_capacity(n);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    levels.push(current.clone());

    while current.num_groups() > 1 {
        let blocks = current.blocks();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                let raw = similarity_of_bases(&bases[i], &bases[j]);
                let score = standardize(raw, m, blocks[i].len(), blocks[j].len(), calib)?;
                if best.map_or(true, |(_, _, s)| score > s) {
                    best = Some((i, j, score));
                }
            }
        }
        let (i, j, score) = best.expect("at least two blocks");
        let step = MergeStep { level: levels.len(), left: blocks[i].clone(), right: blocks[j].clone(), similarity: score };
        current = current.merge(i, j);
        // i < j, and the merged block keeps the smaller minimum, so it lands
        // at index i and block j disappears.
        bases.remove(j);
        bases[i] = block_basis(&h_hat.select_cols(&current.blocks()[i]))?;
        merges.push(step);
        levels.push(current.clone());
    }
    Ok(Dendrogram { levels, merges })
}

/// Rate of every dendrogram level, in level order.
pub fn evaluate_levels(channels: &ChannelSet, dendrogram: &Dendrogram, config: &HrsConfig) -> Result<Vec<RateBreakdown>> {
    dendrogram.levels.iter().map(|p| evaluate_partition(channels, p, config)).collect()
}

fn pick_best<'a>(candidates: impl Iterator<Item = (&'a Partition, RateBreakdown)>) -> Result<(Partition, RateBreakdown)> {
    let mut best: Option<(&Partition, RateBreakdown)> = None;
    for (p, r) in candidates {
        if !r.feasible {
            continue;
        }
        if best.as_ref().map_or(true, |(_, b)| r.r_total > b.r_total) {
            best = Some((p, r));
        }
    }
    best.map(|(p, r)| (p.clone(), r)).ok_or(Error::NoFeasiblePartition)
}

/// Highest-rate feasible dendrogram level; ties go to fewer groups.
pub fn best_partition(channels: &ChannelSet, dendrogram: &Dendrogram, config: &HrsConfig) -> Result<(Partition, RateBreakdown)> {
    let rates = evaluate_levels(channels, dendrogram, config)?;
    pick_best(dendrogram.levels.iter().zip(rates).rev())
}

/// Global optimum over every set partition (small `N` only).
pub fn exhaustive_best(channels: &ChannelSet, config: &HrsConfig) -> Result<(Partition, RateBreakdown)> {
    let n = channels.num_users();
    if n > MAX_EXHAUSTIVE_USERS {
        return Err(Error::ResourceGuard(alloc::format!(
            "exhaustive search limited to N <= {MAX_EXHAUSTIVE_USERS}, got {n}"
        )));
    }
    let mut parts = enumerate_partitions(n)?;
    parts.sort_by_key(Partition::num_groups);
    let rates: Vec<RateBreakdown> = parts.iter().map(|p| evaluate_partition(channels, p, config)).collect::<Result<_>>()?;
    pick_best(parts.iter().zip(rates))
}
