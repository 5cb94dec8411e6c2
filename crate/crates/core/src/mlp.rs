//! Shallow float64 classifier: dense ReLU layers, softmax output,
//! cross-entropy loss and Adam.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetSplit, Sample};
use crate::rng::seeded;
use crate::{Error, Result};

/// Hidden layer widths.
pub const HIDDEN: [usize; 2] = [256, 128];
/// Floor applied to feature standard deviations.
pub const MIN_STD: f64 = 1e-8;
/// Floor applied to probabilities inside the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Row-major real matrix; one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Batch {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(alloc::format!("{} values for a {rows}x{cols} batch", data.len())));
        }
        Ok(Batch { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged batch rows".into()));
        }
        Ok(Batch { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn select(&self, idx: &[usize]) -> Batch {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Batch { rows: idx.len(), cols: self.cols, data }
    }
}

/// Per-feature standardisation fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Interleaved `(re, im)` of the estimated channel, column-major. The true
/// channel is never read.
pub fn raw_features(sample: &Sample) -> Vec<f64> {
    sample.h_hat.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

impl FeatureStats {
    pub fn fit(samples: &[Sample]) -> Result<Self> {
        let first = samples.first().ok_or_else(|| Error::Domain("cannot fit feature statistics on no samples".into()))?;
        let dim = 2 * first.h_hat.as_slice().len();
        let mut mean = vec![0.0; dim];
        let rows: Vec<Vec<f64>> = samples.iter().map(raw_features).collect();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("samples differ in channel size".into()));
        }
        let n = rows.len() as f64;
        for r in &rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in &rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| libm::sqrt(v / n).max(MIN_STD)).collect();
        Ok(FeatureStats { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Standardised feature vector of `sample`.
pub fn featurize(sample: &Sample, stats: &FeatureStats) -> Result<Vec<f64>> {
    let raw = raw_features(sample);
    if raw.len() != stats.dim() {
        return Err(Error::Shape(alloc::format!("{} features for a model expecting {}", raw.len(), stats.dim())));
    }
    Ok(raw.iter().zip(&stats.mean).zip(&stats.std).map(|((x, m), s)| (x - m) / s).collect())
}

pub fn featurize_all(samples: &[Sample], stats: &FeatureStats) -> Result<Batch> {
    let rows = samples.iter().map(|s| featurize(s, stats)).collect::<Result<Vec<_>>>()?;
    Batch::new(rows.len(), stats.dim(), rows.concat())
}

/// Dense layer. `weights[i * outputs + o]` connects input `i` to output `o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    /// He-uniform weights, zero bias.
    fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = libm::sqrt(6.0 / inputs as f64);
        let weights = (0..inputs * outputs).map(|_| rng.random_range(-limit..limit)).collect();
        Layer { inputs, outputs, weights, bias: vec![0.0; outputs] }
    }

    fn forward_row(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let w = &self.weights[i * self.outputs..(i + 1) * self.outputs];
            for (o, wv) in out.iter_mut().zip(w) {
                *o += xi * wv;
            }
        }
    }
}

/// Two-hidden-layer classifier with its input standardisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub feature_stats: FeatureStats,
    /// Class labels in output order.
    pub class_labels: Vec<String>,
}

impl MlpModel {
    /// Randomly initialised model with the given layer widths.
    pub fn new(dims: &[usize], feature_stats: FeatureStats, class_labels: Vec<String>, seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::Config(alloc::format!("invalid layer dims {dims:?}")));
        }
        if feature_stats.dim() != dims[0] {
            return Err(Error::Shape(alloc::format!("{} feature stats for input width {}", feature_stats.dim(), dims[0])));
        }
        if class_labels.len() != dims[dims.len() - 1] {
            return Err(Error::Shape(alloc::format!("{} labels for {} outputs", class_labels.len(), dims[dims.len() - 1])));
        }
        let mut rng = seeded(seed, 5);
        let layers = dims.windows(2).map(|w| Layer::init(w[0], w[1], &mut rng)).collect();
        Ok(MlpModel { layers, feature_stats, class_labels })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].inputs];
        d.extend(self.layers.iter().map(|l| l.outputs));
        d
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameter tensors in `[W0, b0, W1, b1, ...]` order.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()]).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()]).collect()
    }

    /// Class probabilities for one sample.
    pub fn predict_proba(&self, sample: &Sample) -> Result<Vec<f64>> {
        let x = featurize(sample, &self.feature_stats)?;
        Ok(forward(self, &Batch::new(1, x.len(), x)?)?.data)
    }
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of every layer (post-activation of the previous one).
    pub inputs: Vec<Batch>,
    /// Output probabilities.
    pub probs: Batch,
}

/// In-place row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &mut Batch) {
    let cols = logits.cols;
    for row in logits.data.chunks_mut(cols) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - max);
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

pub fn forward_cached(model: &MlpModel, batch: &Batch) -> Result<ForwardCache> {
    let first = &model.layers[0];
    if batch.cols != first.inputs {
        return Err(Error::Shape(alloc::format!("batch width {} for input width {}", batch.cols, first.inputs)));
    }
    let mut inputs = Vec::with_capacity(model.layers.len());
    let mut current = batch.clone();
    let last = model.layers.len() - 1;
    for (li, layer) in model.layers.iter().enumerate() {
        let mut out = Batch { rows: current.rows, cols: layer.outputs, data: vec![0.0; current.rows * layer.outputs] };
        for r in 0..current.rows {
            layer.forward_row(current.row(r), &mut out.data[r * layer.outputs..(r + 1) * layer.outputs]);
        }
        if out.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(alloc::format!("non-finite activation in layer {li}")));
        }
        if li < last {
            out.data.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        inputs.push(current);
        current = out;
    }
    softmax_rows(&mut current);
    Ok(ForwardCache { inputs, probs: current })
}

/// Class probabilities; rows sum to one.
pub fn forward(model: &MlpModel, batch: &Batch) -> Result<Batch> {
    Ok(forward_cached(model, batch)?.probs)
}

/// Mean categorical cross-entropy.
pub fn loss(probs: &Batch, labels: &[usize]) -> Result<f64> {
    if labels.len() != probs.rows {
        return Err(Error::Shape(alloc::format!("{} labels for {} rows", labels.len(), probs.rows)));
    }
    let mut total = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        if y >= probs.cols {
            return Err(Error::Domain(alloc::format!("label {y} out of range for {} classes", probs.cols)));
        }
        total -= libm::log(probs.row(r)[y].max(PROB_FLOOR));
    }
    Ok(total / labels.len().max(1) as f64)
}

/// Gradients mirroring [`MlpModel::tensors`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

/// Exact gradients of the mean loss for the cached forward pass.
pub fn backward(model: &MlpModel, cache: &ForwardCache, labels: &[usize]) -> Result<Gradients> {
    let rows = cache.probs.rows;
    if labels.len() != rows || cache.inputs.len() != model.layers.len() {
        return Err(Error::Shape("backward inputs do not match the forward cache".into()));
    }
    let scale = 1.0 / rows as f64;
    // softmax + cross-entropy: dL/dz = (p - onehot) / B
    let mut delta = cache.probs.clone();
    for (r, &y) in labels.iter().enumerate() {
        if y >= delta.cols {
            return Err(Error::Domain(alloc::format!("label {y} out of range for {} classes", delta.cols)));
        }
        delta.data[r * delta.cols + y] -= 1.0;
    }
    delta.data.iter_mut().for_each(|v| *v *= scale);

    let mut grads: Vec<Vec<f64>> = Vec::with_capacity(2 * model.layers.len());
    for (li, layer) in model.layers.iter().enumerate().rev() {
        let input = &cache.inputs[li];
        let mut dw = vec![0.0; layer.weights.len()];
        let mut db = vec![0.0; layer.outputs];
        let mut next = if li > 0 { Some(Batch { rows, cols: layer.inputs, data: vec![0.0; rows * layer.inputs] }) } else { None };
        for r in 0..rows {
            let d = delta.row(r);
            for (b, v) in db.iter_mut().zip(d) {
                *b += v;
            }
            let x = input.row(r);
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    // also zero ReLU derivative for hidden inputs
                    continue;
                }
                let w = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                let g = &mut dw[i * layer.outputs..(i + 1) * layer.outputs];
                for (gv, dv) in g.iter_mut().zip(d) {
                    *gv += xi * dv;
                }
                if let Some(n) = next.as_mut() {
                    // hidden inputs are ReLU outputs, so xi > 0 here
                    n.data[r * layer.inputs + i] = dot(w, d);
                }
            }
        }
        grads.push(db);
        grads.push(dw);
        if let Some(n) = next {
            delta = n;
        }
    }
    grads.reverse();
    Ok(Gradients { tensors: grads })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for k in 0..4 {
            acc[k] += a[4 * c + k] * b[4 * c + k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// Adam moments for every parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(model: &MlpModel, lr: f64) -> Self {
        let zeros: Vec<Vec<f64>> = model.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamState { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: zeros.clone(), v: zeros }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(model: &mut MlpModel, state: &mut AdamState, grads: &Gradients) -> Result<()> {
    let mut params = model.tensors_mut();
    if params.len() != grads.tensors.len() || params.len() != state.m.len() {
        return Err(Error::Shape("optimizer state does not match the model".into()));
    }
    state.step += 1;
    let t = state.step as f64;
    let c1 = 1.0 - libm::pow(state.beta1, t);
    let c2 = 1.0 - libm::pow(state.beta2, t);
    for (k, p) in params.iter_mut().enumerate() {
        let g = &grads.tensors[k];
        if g.len() != p.len() || state.m[k].len() != p.len() {
            return Err(Error::Shape(alloc::format!("tensor {k} size mismatch")));
        }
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        for i in 0..p.len() {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            let mh = m[i] / c1;
            let vh = v[i] / c2;
            p[i] -= state.lr * mh / (libm::sqrt(vh) + state.eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper { epochs: 50, batch_size: 128, lr: 1e-3, seed: 7 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
    pub val_top1: Vec<f64>,
    pub test_top1: f64,
    pub test_top3: f64,
    pub test_top5: f64,
    /// Filled in by the rate evaluation.
    pub relative_rate: Option<f64>,
}

/// Fits a model on labeled rows. Returns the model, per-epoch mean loss, and
/// per-epoch top-1 on `validation` when given.
pub fn fit(
    model: &mut MlpModel,
    x: &Batch,
    y: &[usize],
    hyper: &TrainHyper,
    validation: Option<(&Batch, &[usize])>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.rows != y.len() {
        return Err(Error::Shape("feature rows and labels differ".into()));
    }
    if hyper.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let mut state = AdamState::new(model, hyper.lr);
    let mut order: Vec<usize> = (0..x.rows).collect();
    let mut losses = Vec::with_capacity(hyper.epochs);
    let mut val = Vec::with_capacity(hyper.epochs);
    for epoch in 0..hyper.epochs {
        let mut rng = seeded(hyper.seed, 100 + epoch as u64);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let xb = x.select(chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let cache = forward_cached(model, &xb)?;
            total += loss(&cache.probs, &yb)? * chunk.len() as f64;
            let grads = backward(model, &cache, &yb)?;
            adam_step(model, &mut state, &grads)?;
        }
        losses.push(total / x.rows.max(1) as f64);
        if let Some((vx, vy)) = validation {
            if vx.rows > 0 {
                val.push(topk_accuracy(&forward(model, vx)?, vy, &[1])?[0]);
            }
        }
    }
    Ok((losses, val))
}

/// Trains the classifier on a dataset split and reports validation and
/// test accuracies.
pub fn train(split: &DatasetSplit, hyper: &TrainHyper) -> Result<(MlpModel, TrainReport)> {
    if split.train.is_empty() {
        return Err(Error::Domain("empty training set".into()));
    }
    let stats = FeatureStats::fit(&split.train)?;
    let mut dims = vec![stats.dim()];
    dims.extend(HIDDEN);
    dims.push(split.num_classes());
    let labels = split.class_index.iter().map(|p| p.key()).collect();
    let mut model = MlpModel::new(&dims, stats, labels, hyper.seed)?;

    let x = featurize_all(&split.train, &model.feature_stats)?;
    let y = split.labels(&split.train)?;
    let vx = featurize_all(&split.validation, &model.feature_stats)?;
    let vy = split.labels(&split.validation)?;
    let (epoch_loss, val_top1) = fit(&mut model, &x, &y, hyper, Some((&vx, &vy)))?;

    let mut report = TrainReport { epoch_loss, val_top1, ..Default::default() };
    if !split.test.is_empty() {
        let tx = featurize_all(&split.test, &model.feature_stats)?;
        let ty = split.labels(&split.test)?;
        let ks: Vec<usize> = [1, 3, 5].iter().map(|&k| k.min(model.num_classes())).collect();
        let acc = topk_accuracy(&forward(&model, &tx)?, &ty, &ks)?;
        report.test_top1 = acc[0];
        report.test_top3 = acc[1];
        report.test_top5 = acc[2];
    }
    Ok((model, report))
}

/// Rank of `class` in a probability row (0 = most probable); ties go to the
/// lower class index.
pub fn rank_of(row: &[f64], class: usize) -> usize {
    let p = row[class];
    row.iter().enumerate().filter(|&(j, &q)| q > p || (q == p && j < class)).count()
}

/// Classes sorted by decreasing probability, ties by index.
pub fn ranked_classes(row: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    idx
}

/// Fraction of rows whose true class is among the `k` most probable, for
/// every `k` in `ks`.
pub fn topk_accuracy(probs: &Batch, labels: &[usize], ks: &[usize]) -> Result<Vec<f64>> {
    if labels.len() != probs.rows {
        return Err(Error::Shape("labels and probability rows differ".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > probs.cols) {
        return Err(Error::Domain(alloc::format!("k = {k} outside 1..={}", probs.cols)));
    }
    let mut hits = vec![0usize; ks.len()];
    for (r, &y) in labels.iter().enumerate() {
        if y >= probs.cols {
            return Err(Error::Domain(alloc::format!("label {y} out of range")));
        }
        let rank = rank_of(probs.row(r), y);
        for (h, &k) in hits.iter_mut().zip(ks) {
            if rank < k {
                *h += 1;
            }
        }
    }
    let n = labels.len().max(1) as f64;
    Ok(hits.into_iter().map(|h| h as f64 / n).collect())
}

/// Top-k accuracies of `model` on labeled samples.
pub fn evaluate_topk(model: &MlpModel, samples: &[Sample], labels: &[usize], ks: &[usize]) -> Result<Vec<f64>> {
    let x = featurize_all(samples, &model.feature_stats)?;
    topk_accuracy(&forward(model, &x)?, labels, ks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn tiny(dims: &[usize], seed: u64) -> MlpModel {
        let stats = FeatureStats { mean: vec![0.0; dims[0]], std: vec![1.0; dims[0]] };
        let labels = (0..dims[dims.len() - 1]).map(|i| i.to_string()).collect();
        MlpModel::new(dims, stats, labels, seed).unwrap()
    }

    #[test]
    fn softmax_properties() {
        let mut b = Batch::new(1, 4, vec![0.0; 4]).unwrap();
        softmax_rows(&mut b);
        assert!(b.data.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        let mut a = Batch::new(1, 3, vec![0.3, -1.2, 2.0]).unwrap();
        let mut s = Batch::new(1, 3, vec![100.3, 98.8, 102.0]).unwrap();
        softmax_rows(&mut a);
        softmax_rows(&mut s);
        for (x, y) in a.data.iter().zip(&s.data) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut big = Batch::new(1, 3, vec![1000.0, 0.0, 0.0]).unwrap();
        softmax_rows(&mut big);
        assert!((big.data[0] - 1.0).abs() < 1e-12 && big.data.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn loss_values() {
        let p = Batch::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(loss(&p, &[0, 1]).unwrap(), 0.0);
        let u = Batch::new(1, 50, vec![1.0 / 50.0; 50]).unwrap();
        assert!((loss(&u, &[7]).unwrap() - libm::log(50.0)).abs() < 1e-12);
        assert!((loss(&u, &[7]).unwrap() - 3.912).abs() < 1e-3);
        assert!(matches!(loss(&u, &[50]), Err(Error::Domain(_))));
        // floored, finite
        assert!(loss(&p, &[1, 0]).unwrap().is_finite());
    }

    #[test]
    fn duplicated_sample_keeps_mean_gradient() {
        let m = tiny(&[3, 5, 2], 1);
        let x = Batch::new(1, 3, vec![0.4, -0.7, 1.1]).unwrap();
        let xx = Batch::new(2, 3, [x.data.clone(), x.data.clone()].concat()).unwrap();
        let g1 = backward(&m, &forward_cached(&m, &x).unwrap(), &[1]).unwrap();
        let g2 = backward(&m, &forward_cached(&m, &xx).unwrap(), &[1, 1]).unwrap();
        for (a, b) in g1.tensors.iter().zip(&g2.tensors) {
            for (u, v) in a.iter().zip(b) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dead_relu_gets_no_gradient() {
        let mut m = tiny(&[2, 2, 2], 3);
        // unit 0 of the hidden layer is always off
        m.layers[0].weights = vec![-1.0, 1.0, -1.0, 1.0];
        m.layers[0].bias = vec![-5.0, 0.0];
        let x = Batch::new(1, 2, vec![0.5, 0.25]).unwrap();
        let g = backward(&m, &forward_cached(&m, &x).unwrap(), &[0]).unwrap();
        // W0 entries feeding hidden unit 0, and its bias
        assert_eq!(g.tensors[0][0], 0.0);
        assert_eq!(g.tensors[0][2], 0.0);
        assert_eq!(g.tensors[1][0], 0.0);
        // W1 row of the dead unit
        assert_eq!(&g.tensors[2][0..2], &[0.0, 0.0]);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut m = tiny(&[3, 4, 2], 2);
        let before = m.clone();
        let mut st = AdamState::new(&m, 1e-3);
        let zero = Gradients { tensors: m.tensors().iter().map(|t| vec![0.0; t.len()]).collect() };
        adam_step(&mut m, &mut st, &zero).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        let mut m = tiny(&[2, 3, 2], 4);
        let before = m.clone();
        let mut st = AdamState::new(&m, 1e-3);
        let grads = Gradients {
            tensors: m.tensors().iter().map(|t| (0..t.len()).map(|i| if i % 2 == 0 { 0.3 } else { -2.0 }).collect()).collect(),
        };
        adam_step(&mut m, &mut st, &grads).unwrap();
        for ((a, b), g) in m.tensors().iter().zip(before.tensors()).zip(&grads.tensors) {
            for i in 0..a.len() {
                let step = a[i] - b[i];
                let expect = -1e-3 * g[i].signum();
                assert!((step - expect).abs() < 1e-3 * 1e-6, "{step} vs {expect}");
            }
        }
    }

    #[test]
    fn topk_rules() {
        let p = Batch::new(2, 3, vec![0.2, 0.5, 0.3, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let acc = topk_accuracy(&p, &[2, 1], &[1, 2, 3]).unwrap();
        // row 0: class 2 ranks second; row 1: tie, class 1 ranks second
        assert_eq!(acc, vec![0.0, 1.0, 1.0]);
        assert!(matches!(topk_accuracy(&p, &[0, 0], &[4]), Err(Error::Domain(_))));
        assert_eq!(ranked_classes(&[0.2, 0.5, 0.3]), vec![1, 2, 0]);
    }

    #[test]
    fn linearly_separable_toy_problem() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut rng = seeded(11, 0);
        for _ in 0..200 {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            if (a + b).abs() < 0.1 {
                continue;
            }
            rows.push(vec![a, b]);
            labels.push(usize::from(a + b > 0.0));
        }
        let x = Batch::from_rows(&rows).unwrap();
        let mut m = tiny(&[2, 16, 8, 2], 5);
        let hyper = TrainHyper { epochs: 200, batch_size: 32, lr: 1e-2, seed: 3 };
        let (losses, _) = fit(&mut m, &x, &labels, &hyper, None).unwrap();
        assert!(losses.last().unwrap() < &losses[0]);
        let acc = topk_accuracy(&forward(&m, &x).unwrap(), &labels, &[1]).unwrap()[0];
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn shape_errors() {
        let m = tiny(&[3, 4, 2], 1);
        let x = Batch::new(1, 2, vec![0.0; 2]).unwrap();
        assert!(matches!(forward(&m, &x), Err(Error::Shape(_))));
        assert!(MlpModel::new(&[3, 0, 2], FeatureStats { mean: vec![0.0; 3], std: vec![1.0; 3] }, vec!["a".into(), "b".into()], 0).is_err());
    }
}
