//! Parallel drivers around the core pipeline.

use hrs_core::dataset::{finish_dataset, Sample, Scenario, ScenarioConfig};
use hrs_core::eval::{evaluate_sample, relative_rate, summarize, BaselineRecord, MethodResult};
use hrs_core::mlp::{train, MlpModel, TrainHyper, TrainReport};
use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::format::{Checkpoint, DatasetFile};

/// Builds a pool with `threads` workers (all cores when `None`).
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(SimError::Config("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| SimError::Config(e.to_string()))
}

/// Short scenario name used in reports, e.g. `N8_M4`.
pub fn scenario_name(cfg: &ScenarioConfig) -> String {
    format!("N{}_M{}", cfg.num_users, cfg.num_antennas)
}

/// Labeled samples `0..config.samples`. Output order is independent of
/// the number of threads.
pub fn generate_samples_par(scenario: &Scenario) -> Result<Vec<Sample>> {
    let samples = (0..scenario.config.samples as u64)
        .into_par_iter()
        .map(|i| scenario.generate_sample(i))
        .collect::<hrs_core::Result<Vec<_>>>()?;
    Ok(samples)
}

/// Generate, balance, augment and split.
pub fn generate_dataset(config: &ScenarioConfig) -> Result<DatasetFile> {
    let scenario = Scenario::prepare(config)?;
    let samples = generate_samples_par(&scenario)?;
    let split = finish_dataset(&samples, config)?;
    Ok(DatasetFile { config: config.clone(), split })
}

pub fn train_checkpoint(data: &DatasetFile, hyper: &TrainHyper) -> Result<Checkpoint> {
    let (model, report) = train(&data.split, hyper)?;
    Ok(Checkpoint { model, scenario: Some(data.config.clone()), report: Some(report) })
}

/// All four baselines on every sample, indexed by position in `samples`.
pub fn run_baselines(scenario: &Scenario, model: &MlpModel, samples: &[Sample]) -> Result<Vec<BaselineRecord>> {
    let per_sample = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| evaluate_sample(scenario, model, s, i))
        .collect::<hrs_core::Result<Vec<_>>>()?;
    Ok(per_sample.into_iter().flatten().collect())
}

/// Baseline results for one scenario's test split.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub scenario: String,
    pub records: Vec<BaselineRecord>,
    pub results: Vec<MethodResult>,
    pub relative_rate: Option<f64>,
    pub report: TrainReport,
}

impl Evaluation {
    pub fn median(&self, method: hrs_core::eval::Method) -> Option<f64> {
        self.results.iter().find(|r| r.method == method).map(|r| r.summary.median)
    }
}

/// Evaluates a checkpoint on the test split of `data`. `config` may differ
/// from the dataset's only in `total_power`.
pub fn evaluate(data: &DatasetFile, checkpoint: &Checkpoint, config: &ScenarioConfig) -> Result<Evaluation> {
    let model = &checkpoint.model;
    let expected: Vec<String> = data.split.class_index.iter().map(|p| p.key()).collect();
    if model.class_labels != expected {
        return Err(SimError::Config("model classes do not match the dataset classes".into()));
    }
    let scenario = Scenario::prepare(config)?;
    let records = run_baselines(&scenario, model, &data.split.test)?;
    let results = summarize(&records)?;
    let relative_rate = relative_rate(&records).ok();
    let mut report = checkpoint.report.clone().unwrap_or_default();
    report.relative_rate = relative_rate;
    Ok(Evaluation { scenario: scenario_name(config), records, results, relative_rate, report })
}
