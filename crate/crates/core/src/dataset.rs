//! Labeled clustering datasets: generation, balancing, augmentation and
//! stratified splitting.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{build_covariance, corrupt_csi, sample_channels, ArrayGeometry, ChannelSet, CovarianceMatrix};
use crate::cluster::{agglomerate, best_partition};
use crate::hrs::HrsConfig;
use crate::linalg::CMat;
use crate::partition::Partition;
use crate::rng::{derive_seed, seeded};
use crate::similarity::SimilarityCalibration;
use crate::{Error, Result};

/// The six `(N, M)` pairs used for the standard sweep.
pub const REFERENCE_SCENARIOS: [(usize, usize); 6] = [(8, 4), (8, 8), (8, 12), (12, 6), (12, 12), (12, 16)];

/// All generation parameters for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_users: usize,
    pub num_antennas: usize,
    /// CSI quality `tau^2`.
    pub tau_sq: f64,
    pub num_covs: usize,
    /// `theta_g = azimuth_start + (g - 1) azimuth_step`.
    pub azimuth_start: f64,
    pub azimuth_step: f64,
    /// Angular half-width of every sector.
    pub spread: f64,
    pub integration_points: usize,
    pub samples: usize,
    pub total_power: f64,
    pub seed: u64,
    pub rate_floor_frac: f64,
    pub min_class: usize,
    pub max_class: usize,
    pub num_shuffles: usize,
    pub calibration_draws: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_users: 8,
            num_antennas: 8,
            tau_sq: 0.4,
            num_covs: 4,
            azimuth_start: -PI / 2.0,
            azimuth_step: PI / 3.0,
            spread: PI / 6.0,
            integration_points: 512,
            samples: 2000,
            total_power: 100.0,
            seed: 1,
            rate_floor_frac: 0.25,
            min_class: 50,
            max_class: 200,
            num_shuffles: 10,
            calibration_draws: 2000,
        }
    }
}

impl ScenarioConfig {
    pub fn new(num_users: usize, num_antennas: usize) -> Self {
        ScenarioConfig { num_users, num_antennas, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.num_users == 0 || self.num_antennas == 0 {
            return bad(alloc::format!("need users and antennas, got N={} M={}", self.num_users, self.num_antennas));
        }
        if !(0.0..=1.0).contains(&self.tau_sq) {
            return bad(alloc::format!("tau_sq {} outside [0, 1]", self.tau_sq));
        }
        if self.num_covs == 0 {
            return bad("num_covs must be positive".into());
        }
        if !(self.spread > 0.0) {
            return bad(alloc::format!("spread {} must be positive", self.spread));
        }
        if self.integration_points < 64 {
            return bad(alloc::format!("integration_points {} < 64", self.integration_points));
        }
        if !(self.total_power > 0.0) {
            return bad(alloc::format!("total_power {} must be positive", self.total_power));
        }
        if !(self.rate_floor_frac > 0.0) || self.min_class == 0 || self.max_class == 0 {
            return bad("balancing thresholds must be positive".into());
        }
        if self.calibration_draws < 2 {
            return bad("calibration_draws must be at least 2".into());
        }
        Ok(())
    }

    pub fn azimuths(&self) -> Vec<f64> {
        (0..self.num_covs).map(|g| self.azimuth_start + self.azimuth_step * g as f64).collect()
    }

    pub fn tau(&self) -> f64 {
        libm::sqrt(self.tau_sq)
    }

    pub fn hrs_config(&self) -> HrsConfig {
        HrsConfig::with_power(self.total_power)
    }
}

/// Precomputed state shared by every sample of a scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub geometry: ArrayGeometry,
    pub covariances: Vec<CovarianceMatrix>,
    pub calibration: SimilarityCalibration,
    pub hrs: HrsConfig,
}

impl Scenario {
    pub fn prepare(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let geometry = ArrayGeometry::uca(config.num_antennas)?;
        let covariances = config
            .azimuths()
            .into_iter()
            .map(|az| build_covariance(&geometry, az, config.spread, config.integration_points))
            .collect::<Result<Vec<_>>>()?;
        let calibration = SimilarityCalibration::for_users(
            config.num_antennas,
            config.num_users,
            config.calibration_draws,
            derive_seed(config.seed, 0xCA11),
        )?;
        let hrs = config.hrs_config();
        hrs.validate()?;
        Ok(Scenario { config: config.clone(), geometry, covariances, calibration, hrs })
    }

    /// Channels of sample `index`: random covariance per user, true draw,
    /// then CSI corruption.
    pub fn draw_channels(&self, index: u64) -> Result<ChannelSet> {
        let seed = derive_seed(self.config.seed, index);
        let mut rng = seeded(seed, 2);
        let assignment: Vec<usize> =
            (0..self.config.num_users).map(|_| rng.random_range(0..self.covariances.len())).collect();
        let clean = sample_channels(&self.covariances, &assignment, seed)?;
        corrupt_csi(&clean, &self.covariances, self.config.tau(), seed)
    }

    /// One labeled sample.
    pub fn generate_sample(&self, index: u64) -> Result<Sample> {
        let channels = self.draw_channels(index)?;
        let dendrogram = agglomerate(&channels.h_hat, &self.calibration)?;
        let (label, rate) = best_partition(&channels, &dendrogram, &self.hrs)?;
        Ok(Sample {
            h_true: channels.h_true,
            h_hat: channels.h_hat,
            label,
            label_rate: rate.r_total,
            cov_assignment: channels.cov_assignment,
        })
    }
}

/// One labeled realisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub h_true: CMat,
    pub h_hat: CMat,
    pub label: Partition,
    pub label_rate: f64,
    pub cov_assignment: Vec<usize>,
}

impl Sample {
    pub fn channels(&self, tau: f64) -> Result<ChannelSet> {
        ChannelSet::from_matrices(self.h_true.clone(), self.h_hat.clone(), self.cov_assignment.clone(), tau)
    }

    pub fn num_users(&self) -> usize {
        self.h_hat.cols()
    }

    pub fn num_antennas(&self) -> usize {
        self.h_hat.rows()
    }

    /// Relabels users (new user `i` is old user `perm[i]`), carrying the
    /// label along.
    pub fn permute_users(&self, perm: &[usize]) -> Result<Self> {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let blocks = self.label.blocks().iter().map(|b| b.iter().map(|&u| inverse[u]).collect()).collect();
        Ok(Sample {
            h_true: self.h_true.permute_cols(perm),
            h_hat: self.h_hat.permute_cols(perm),
            label: Partition::new(blocks, perm.len())?,
            label_rate: self.label_rate,
            cov_assignment: perm.iter().map(|&p| self.cov_assignment[p]).collect(),
        })
    }
}

/// Generates `config.samples` labeled samples sequentially.
pub fn generate_samples(config: &ScenarioConfig) -> Result<Vec<Sample>> {
    let scenario = Scenario::prepare(config)?;
    (0..config.samples as u64).map(|i| scenario.generate_sample(i)).collect()
}

/// Groups sample indices by label, in first-appearance order.
fn by_class(samples: &[Sample]) -> Vec<(Partition, Vec<usize>)> {
    let mut order: Vec<(Partition, Vec<usize>)> = Vec::new();
    let mut pos: BTreeMap<&Partition, usize> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        match pos.get(&s.label) {
            Some(&p) => order[p].1.push(i),
            None => {
                pos.insert(&s.label, order.len());
                order.push((s.label.clone(), vec![i]));
            }
        }
    }
    order
}

/// Drops classes that are both low-rate (class mean below
/// `rate_floor_frac` of the scenario mean) and rare (fewer than
/// `min_class` samples), then keeps at most `max_class` samples per class.
pub fn balance(samples: &[Sample], config: &ScenarioConfig) -> Result<Vec<Sample>> {
    if samples.is_empty() {
        return Err(Error::DegenerateScenario("no samples to balance".into()));
    }
    let mean = samples.iter().map(|s| s.label_rate).sum::<f64>() / samples.len() as f64;
    let floor = config.rate_floor_frac * mean;
    let mut keep = vec![false; samples.len()];
    for (_, idx) in by_class(samples) {
        let class_mean = idx.iter().map(|&i| samples[i].label_rate).sum::<f64>() / idx.len() as f64;
        if class_mean < floor && idx.len() < config.min_class {
            continue;
        }
        for &i in idx.iter().take(config.max_class) {
            keep[i] = true;
        }
    }
    let out: Vec<Sample> = samples.iter().zip(&keep).filter(|(_, &k)| k).map(|(s, _)| s.clone()).collect();
    if out.is_empty() {
        return Err(Error::DegenerateScenario("balancing removed every class".into()));
    }
    Ok(out)
}

/// Within-block user permutation drawn from `rng`.
fn block_shuffle<R: Rng + ?Sized>(label: &Partition, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..label.num_users()).collect();
    for block in label.blocks() {
        let mut shuffled = block.clone();
        shuffled.shuffle(rng);
        for (&slot, &src) in block.iter().zip(&shuffled) {
            perm[slot] = src;
        }
    }
    perm
}

/// Emits every sample followed by `num_shuffles` copies whose users are
/// permuted within their label blocks.
pub fn augment(samples: &[Sample], config: &ScenarioConfig, rng_seed: u64) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(samples.len() * (config.num_shuffles + 1));
    for (i, s) in samples.iter().enumerate() {
        let mut rng = seeded(derive_seed(rng_seed, i as u64), 3);
        out.push(s.clone());
        for _ in 0..config.num_shuffles {
            let perm = block_shuffle(&s.label, &mut rng);
            let copy = s.permute_users(&perm)?;
            debug_assert_eq!(copy.label, s.label);
            out.push(copy);
        }
    }
    Ok(out)
}

/// Train / validation / test sets with the class vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
    /// Sorted class labels; position is the class id.
    pub class_index: Vec<Partition>,
}

impl DatasetSplit {
    pub fn num_classes(&self) -> usize {
        self.class_index.len()
    }

    pub fn class_of(&self, label: &Partition) -> Option<usize> {
        self.class_index.binary_search(label).ok()
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Class ids of a sample list.
    pub fn labels(&self, samples: &[Sample]) -> Result<Vec<usize>> {
        samples
            .iter()
            .map(|s| self.class_of(&s.label).ok_or_else(|| Error::Domain(alloc::format!("label {} not in class index", s.label))))
            .collect()
    }
}

fn round_half_up(x: f64) -> usize {
    libm::floor(x + 0.5) as usize
}

/// Stratified 80/10/10 split. Every class needs at least three samples.
pub fn split(samples: Vec<Sample>, rng_seed: u64) -> Result<DatasetSplit> {
    let classes = by_class(&samples);
    if let Some((label, _)) = classes.iter().find(|(_, idx)| idx.len() < 3) {
        return Err(Error::Stratification(label.key()));
    }
    let mut class_index: Vec<Partition> = classes.iter().map(|(p, _)| p.clone()).collect();
    class_index.sort();
    // 0 = train, 1 = validation, 2 = test
    let mut bucket = vec![0u8; samples.len()];
    for (label, mut idx) in classes {
        let cid = class_index.binary_search(&label).expect("indexed above") as u64;
        let mut rng = seeded(derive_seed(rng_seed, cid), 4);
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_train = round_half_up(0.8 * n as f64);
        let n_val = round_half_up(0.1 * n as f64).min(n - n_train);
        for (k, &i) in idx.iter().enumerate() {
            bucket[i] = if k < n_train {
                0
            } else if k < n_train + n_val {
                1
            } else {
                2
            };
        }
    }
    let mut out = DatasetSplit { train: Vec::new(), validation: Vec::new(), test: Vec::new(), class_index };
    for (s, b) in samples.into_iter().zip(bucket) {
        match b {
            0 => out.train.push(s),
            1 => out.validation.push(s),
            _ => out.test.push(s),
        }
    }
    Ok(out)
}

/// Seeds used by the post-generation stages.
pub fn stage_seed(config: &ScenarioConfig, stage: &str) -> u64 {
    let tag = stage.bytes().fold(0u64, |acc, b| acc.wrapping_mul(131).wrapping_add(b as u64));
    derive_seed(config.seed, tag)
}

/// Balances, augments and splits already generated samples.
pub fn finish_dataset(samples: &[Sample], config: &ScenarioConfig) -> Result<DatasetSplit> {
    let balanced = balance(samples, config)?;
    let augmented = augment(&balanced, config, stage_seed(config, "augment"))?;
    split(augmented, stage_seed(config, "split"))
}

/// Full sequential pipeline: generate, balance, augment, split.
pub fn build_dataset(config: &ScenarioConfig) -> Result<DatasetSplit> {
    finish_dataset(&generate_samples(config)?, config)
}
