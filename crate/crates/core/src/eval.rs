//! Baseline comparison and summary statistics.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::cluster::{agglomerate, best_partition};
use crate::dataset::{Sample, Scenario};
use crate::hrs::{evaluate_partition, RateBreakdown};
use crate::mlp::{ranked_classes, MlpModel};
use crate::partition::Partition;
use crate::{Error, Result};

/// Clustering strategies compared in the reports, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Best dendrogram level.
    #[serde(rename = "HC")]
    Hc,
    /// Top-1 class predicted by the network.
    #[serde(rename = "NN")]
    Nn,
    /// Everyone in one group.
    #[serde(rename = "UNI")]
    Uni,
    /// One group per user.
    #[serde(rename = "SING")]
    Sing,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Hc, Method::Nn, Method::Uni, Method::Sing];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hc => "HC",
            Method::Nn => "NN",
            Method::Uni => "UNI",
            Method::Sing => "SING",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rate of one method on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub sample: usize,
    pub method: Method,
    pub partition: String,
    pub rate: RateBreakdown,
    /// Whether the partition is one of the sample's dendrogram levels.
    pub on_dendrogram: bool,
}

/// Rates of all four methods on one sample.
pub fn evaluate_sample(scenario: &Scenario, model: &MlpModel, sample: &Sample, index: usize) -> Result<[BaselineRecord; 4]> {
    let n = scenario.config.num_users;
    let m = scenario.config.num_antennas;
    if sample.num_users() != n || sample.num_antennas() != m {
        return Err(Error::Config(alloc::format!(
            "sample is {}x{} but the scenario is M={m}, N={n}",
            sample.num_antennas(),
            sample.num_users()
        )));
    }
    if model.layers[0].inputs != 2 * n * m {
        return Err(Error::Config(alloc::format!(
            "model expects {} inputs, scenario has {}",
            model.layers[0].inputs,
            2 * n * m
        )));
    }
    let channels = sample.channels(scenario.config.tau())?;
    let dendrogram = agglomerate(&channels.h_hat, &scenario.calibration)?;
    let (hc_part, hc_rate) = best_partition(&channels, &dendrogram, &scenario.hrs)?;

    let probs = model.predict_proba(sample)?;
    let top = ranked_classes(&probs)[0];
    let nn_part: Partition = model.class_labels[top].parse()?;
    if nn_part.num_users() != n {
        return Err(Error::Config(alloc::format!("model class {} does not cover {n} users", nn_part)));
    }
    let nn_rate = evaluate_partition(&channels, &nn_part, &scenario.hrs)?;

    let uni = Partition::universal(n);
    let sing = Partition::singletons(n);
    let uni_rate = evaluate_partition(&channels, &uni, &scenario.hrs)?;
    let sing_rate = evaluate_partition(&channels, &sing, &scenario.hrs)?;

    let rec = |method, p: &Partition, rate| BaselineRecord {
        sample: index,
        method,
        partition: p.key(),
        rate,
        on_dendrogram: dendrogram.contains(p),
    };
    Ok([
        rec(Method::Hc, &hc_part, hc_rate),
        rec(Method::Nn, &nn_part, nn_rate),
        rec(Method::Uni, &uni, uni_rate),
        rec(Method::Sing, &sing, sing_rate),
    ])
}

/// Boxplot statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub p1: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub p99: f64,
    /// Values outside `[p1, p99]`.
    pub outliers: Vec<f64>,
}

/// Percentile `q` in `[0, 1]` of sorted data, linear interpolation between
/// order statistics.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn boxplot_stats(values: &[f64]) -> Result<BoxSummary> {
    if values.is_empty() {
        return Err(Error::Domain("boxplot of an empty list".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("boxplot of non-finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let p = |q| percentile_sorted(&sorted, q);
    let (p1, p99) = (p(0.01), p(0.99));
    let outliers = sorted.iter().copied().filter(|&v| v < p1 || v > p99).collect();
    Ok(BoxSummary { p1, p25: p(0.25), median: p(0.5), p75: p(0.75), p99, outliers })
}

/// Per-method rates with their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub rates: Vec<f64>,
    pub summary: BoxSummary,
}

/// Collects per-sample records into one result per method, in
/// [`Method::ALL`] order. Methods without records are skipped.
pub fn summarize(records: &[BaselineRecord]) -> Result<Vec<MethodResult>> {
    let mut out = Vec::new();
    for method in Method::ALL {
        let rates: Vec<f64> = records.iter().filter(|r| r.method == method).map(|r| r.rate.r_total).collect();
        if rates.is_empty() {
            continue;
        }
        let summary = boxplot_stats(&rates)?;
        out.push(MethodResult { method, rates, summary });
    }
    Ok(out)
}

/// `mean(NN rate) / mean(HC rate)`.
pub fn relative_rate(records: &[BaselineRecord]) -> Result<f64> {
    let mean = |m: Method| {
        let v: Vec<f64> = records.iter().filter(|r| r.method == m).map(|r| r.rate.r_total).collect();
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    match (mean(Method::Nn), mean(Method::Hc)) {
        (Some(nn), Some(hc)) if hc > 0.0 => Ok(nn / hc),
        _ => Err(Error::Domain("relative rate needs NN and HC records with positive HC mean".into())),
    }
}
