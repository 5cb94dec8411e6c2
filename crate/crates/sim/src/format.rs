//! Binary dataset and model checkpoint files.
//!
//! Both formats share one layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes   "HRSDAT01" or "HRSMLP01"
//! header_len   u64
//! header       header_len bytes of JSON
//! payload      float64 values
//! crc32        u32 over every preceding byte
//! ```
//!
//! Dataset payload: one record per sample, `H_true` then `H_hat`, each as
//! interleaved `(re, im)` pairs in column-major order. The header lists the
//! byte offset of every record relative to the payload start.
//!
//! Checkpoint payload: the parameter tensors `W0, b0, W1, b1, ...` in order.
//! `W_l` is stored input-major (`inputs x outputs`).

use std::fs;
use std::path::Path;

use hrs_core::dataset::{DatasetSplit, Sample, ScenarioConfig};
use hrs_core::linalg::CMat;
use hrs_core::mlp::{FeatureStats, Layer, MlpModel, TrainReport};
use hrs_core::partition::Partition;
use hrs_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const DATASET_MAGIC: &[u8; 8] = b"HRSDAT01";
pub const MODEL_MAGIC: &[u8; 8] = b"HRSMLP01";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecordMeta {
    split: SplitName,
    label: String,
    label_rate: f64,
    cov_assignment: Vec<usize>,
    offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DatasetHeader {
    version: u32,
    config: ScenarioConfig,
    num_antennas: usize,
    num_users: usize,
    class_index: Vec<String>,
    record_count: usize,
    records: Vec<RecordMeta>,
}

/// A dataset split together with the scenario that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub config: ScenarioConfig,
    pub split: DatasetSplit,
}

fn push_matrix(out: &mut Vec<u8>, m: &CMat) {
    for z in m.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

fn frame(magic: &[u8; 8], header: &[u8], payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 + header.len() + payload.len() + 4);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header);
    out.extend_from_slice(payload);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Checks magic and CRC; returns `(header, payload)`.
fn unframe<'a>(bytes: &'a [u8], magic: &[u8; 8], path: &Path) -> Result<(&'a [u8], &'a [u8])> {
    if bytes.len() < 8 + 8 + 4 {
        return Err(SimError::format(path, "file truncated"));
    }
    if &bytes[..8] != magic {
        return Err(SimError::format(
            path,
            format!("bad magic {:?}, expected {:?}", String::from_utf8_lossy(&bytes[..8]), String::from_utf8_lossy(magic)),
        ));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    let actual = crc32fast::hash(body);
    if stored != actual {
        return Err(SimError::format(path, format!("checksum mismatch (stored {stored:08x}, computed {actual:08x})")));
    }
    let header_len = u64::from_le_bytes(body[8..16].try_into().expect("8 bytes"));
    let header_end = 16u64
        .checked_add(header_len)
        .filter(|&e| e <= body.len() as u64)
        .ok_or_else(|| SimError::format(path, "header length exceeds file size"))? as usize;
    Ok((&body[16..header_end], &body[header_end..]))
}

fn read_f64s(bytes: &[u8]) -> impl Iterator<Item = f64> + '_ {
    bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
}

fn read_matrix(bytes: &[u8], rows: usize, cols: usize) -> CMat {
    let vals: Vec<f64> = read_f64s(bytes).collect();
    let data = vals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    CMat::from_col_major(rows, cols, data).expect("sized by caller")
}

pub fn encode_dataset(file: &DatasetFile) -> Result<Vec<u8>> {
    let cfg = &file.config;
    let (m, n) = (cfg.num_antennas, cfg.num_users);
    let record_bytes = 2 * m * n * 16;
    let mut payload = Vec::with_capacity(record_bytes * file.split.len());
    let mut records = Vec::with_capacity(file.split.len());
    let parts = [
        (SplitName::Train, &file.split.train),
        (SplitName::Validation, &file.split.validation),
        (SplitName::Test, &file.split.test),
    ];
    for (split, samples) in parts {
        for s in samples.iter() {
            if s.num_antennas() != m || s.num_users() != n || s.h_true.rows() != m || s.h_true.cols() != n {
                return Err(SimError::Config(format!(
                    "sample is {}x{} but the scenario is M={m}, N={n}",
                    s.num_antennas(),
                    s.num_users()
                )));
            }
            records.push(RecordMeta {
                split,
                label: s.label.key(),
                label_rate: s.label_rate,
                cov_assignment: s.cov_assignment.clone(),
                offset: payload.len() as u64,
            });
            push_matrix(&mut payload, &s.h_true);
            push_matrix(&mut payload, &s.h_hat);
        }
    }
    let header = DatasetHeader {
        version: FORMAT_VERSION,
        config: cfg.clone(),
        num_antennas: m,
        num_users: n,
        class_index: file.split.class_index.iter().map(Partition::key).collect(),
        record_count: records.len(),
        records,
    };
    let header = serde_json::to_vec(&header).map_err(|e| SimError::Config(e.to_string()))?;
    Ok(frame(DATASET_MAGIC, &header, &payload))
}

pub fn decode_dataset(bytes: &[u8], path: &Path) -> Result<DatasetFile> {
    let (header, payload) = unframe(bytes, DATASET_MAGIC, path)?;
    let header: DatasetHeader =
        serde_json::from_slice(header).map_err(|e| SimError::format(path, format!("bad header: {e}")))?;
    if header.version != FORMAT_VERSION {
        return Err(SimError::format(path, format!("unsupported version {}", header.version)));
    }
    if header.record_count != header.records.len() {
        return Err(SimError::format(path, "record count does not match the record table"));
    }
    let (m, n) = (header.num_antennas, header.num_users);
    let matrix_bytes = m * n * 16;
    let record_bytes = 2 * matrix_bytes;
    if payload.len() != record_bytes * header.record_count {
        return Err(SimError::format(path, "payload size does not match the record table"));
    }
    let parse = |key: &str| key.parse::<Partition>().map_err(|e| SimError::format(path, format!("bad label {key:?}: {e}")));
    let class_index = header.class_index.iter().map(|k| parse(k)).collect::<Result<Vec<_>>>()?;
    let mut split = DatasetSplit { train: Vec::new(), validation: Vec::new(), test: Vec::new(), class_index };
    for rec in header.records {
        let start = rec.offset as usize;
        let bytes = payload
            .get(start..start + record_bytes)
            .ok_or_else(|| SimError::format(path, format!("record offset {start} out of range")))?;
        let label = parse(&rec.label)?;
        if label.num_users() != n || rec.cov_assignment.len() != n {
            return Err(SimError::format(path, format!("record label {} does not cover {n} users", rec.label)));
        }
        let sample = Sample {
            h_true: read_matrix(&bytes[..matrix_bytes], m, n),
            h_hat: read_matrix(&bytes[matrix_bytes..], m, n),
            label,
            label_rate: rec.label_rate,
            cov_assignment: rec.cov_assignment,
        };
        match rec.split {
            SplitName::Train => split.train.push(sample),
            SplitName::Validation => split.validation.push(sample),
            SplitName::Test => split.test.push(sample),
        }
    }
    Ok(DatasetFile { config: header.config, split })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelHeader {
    version: u32,
    dims: Vec<usize>,
    feature_stats: FeatureStats,
    class_index: Vec<String>,
    scenario: Option<ScenarioConfig>,
    report: Option<TrainReport>,
}

/// A trained model with the metadata written next to its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: MlpModel,
    pub scenario: Option<ScenarioConfig>,
    pub report: Option<TrainReport>,
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Result<Vec<u8>> {
    let header = ModelHeader {
        version: FORMAT_VERSION,
        dims: ck.model.dims(),
        feature_stats: ck.model.feature_stats.clone(),
        class_index: ck.model.class_labels.clone(),
        scenario: ck.scenario.clone(),
        report: ck.report.clone(),
    };
    let header = serde_json::to_vec(&header).map_err(|e| SimError::Config(e.to_string()))?;
    let mut payload = Vec::with_capacity(8 * ck.model.num_parameters());
    for t in ck.model.tensors() {
        for v in t {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(frame(MODEL_MAGIC, &header, &payload))
}

pub fn decode_checkpoint(bytes: &[u8], path: &Path) -> Result<Checkpoint> {
    let (header, payload) = unframe(bytes, MODEL_MAGIC, path)?;
    let header: ModelHeader =
        serde_json::from_slice(header).map_err(|e| SimError::format(path, format!("bad header: {e}")))?;
    if header.version != FORMAT_VERSION {
        return Err(SimError::format(path, format!("unsupported version {}", header.version)));
    }
    let dims = &header.dims;
    if dims.len() < 2 || header.feature_stats.dim() != dims[0] || header.class_index.len() != dims[dims.len() - 1] {
        return Err(SimError::format(path, "inconsistent model dimensions"));
    }
    let expected: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    if payload.len() != 8 * expected {
        return Err(SimError::format(path, format!("expected {expected} parameters, found {} bytes", payload.len())));
    }
    let mut values = read_f64s(payload);
    let layers = dims
        .windows(2)
        .map(|w| Layer {
            inputs: w[0],
            outputs: w[1],
            weights: values.by_ref().take(w[0] * w[1]).collect(),
            bias: values.by_ref().take(w[1]).collect(),
        })
        .collect();
    Ok(Checkpoint {
        model: MlpModel { layers, feature_stats: header.feature_stats, class_labels: header.class_index },
        scenario: header.scenario,
        report: header.report,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| SimError::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| SimError::io(path, e))
}

pub fn save_dataset(file: &DatasetFile, path: &Path) -> Result<()> {
    write_bytes(path, &encode_dataset(file)?)
}

pub fn load_dataset(path: &Path) -> Result<DatasetFile> {
    decode_dataset(&read_bytes(path)?, path)
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    write_bytes(path, &encode_checkpoint(ck)?)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&read_bytes(path)?, path)
}
