//! Triplet-loss training, evaluation and threshold selection.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EncodedObservation, SceneEmbedder, SeanNet};
use crate::rng::{derive_seed, rng_from_seed};
use crate::tensor::{cosine, Mode, ParamSet, Tape};
use crate::triplets::TripletDataset;
use crate::world::{apply_dynamics, render_observation, CameraConfig, Heading, Pose, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub lr: f64,
    pub momentum: f64,
    /// Multiplicative learning-rate decay applied every `decay_every` epochs.
    pub decay: f64,
    pub decay_every: usize,
    pub epochs: usize,
    pub margin: f64,
    pub dropout: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            lr: 0.01,
            momentum: 0.9,
            decay: 0.7,
            decay_every: 10,
            epochs: 60,
            margin: 0.1,
            dropout: 0.2,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && (0.0..1.0).contains(&self.momentum)
            && self.decay > 0.0
            && self.decay <= 1.0
            && self.decay_every >= 1
            && self.margin >= 0.0
            && (0.0..1.0).contains(&self.dropout)
            && self.batch_size >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid hyperparameters {self:?}")))
        }
    }

    /// `lr * decay^floor(epoch / decay_every)`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr * self.decay.powi((epoch / self.decay_every) as i32)
    }
}

/// `max(0, s_an + margin - s_ap)`, computed so that the result is zero
/// exactly when `s_ap - s_an >= margin`.
pub fn triplet_loss(s_ap: f64, s_an: f64, margin: f64) -> f64 {
    let gap = s_ap - s_an;
    if gap >= margin {
        0.0
    } else {
        margin - gap
    }
}

/// Derivatives of [`triplet_loss`] with respect to `(s_ap, s_an)`; zero at the hinge.
pub fn triplet_loss_grad(s_ap: f64, s_an: f64, margin: f64) -> (f64, f64) {
    if s_ap - s_an >= margin {
        (0.0, 0.0)
    } else {
        (-1.0, 1.0)
    }
}

/// SGD with heavy-ball momentum: `v <- momentum * v + g; theta <- theta - lr * v`.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub momentum: f64,
    velocity: ParamSet,
}

impl Sgd {
    pub fn new(params: &ParamSet, momentum: f64) -> Self {
        Self {
            momentum,
            velocity: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet, lr: f64) -> Result<()> {
        if let Some((name, _)) = grads.iter().find(|(_, g)| !g.is_finite()) {
            return Err(Error::Domain(format!("non-finite gradient for {name}")));
        }
        self.velocity.scale(self.momentum);
        self.velocity.axpy(1.0, grads)?;
        params.axpy(-lr, &self.velocity)
    }
}

/// Pre-encoded anchor, positive and negative.
#[derive(Debug, Clone)]
pub struct EncodedTriplet {
    pub tier: u8,
    pub anchor: EncodedObservation,
    pub positive: EncodedObservation,
    pub negative: EncodedObservation,
}

pub fn encode_dataset(model: &SeanNet, dataset: &TripletDataset) -> Result<Vec<EncodedTriplet>> {
    dataset
        .triplets
        .iter()
        .map(|t| {
            Ok(EncodedTriplet {
                tier: t.tier,
                anchor: model.encode(&t.anchor)?,
                positive: model.encode(&t.positive)?,
                negative: model.encode(&t.negative)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation accuracy (earliest
    /// on ties), the last epoch without validation data, or the
    /// initialization when no epochs ran.
    pub model: SeanNet,
    pub best_epoch: Option<usize>,
    pub initial_val_accuracy: Option<f64>,
    pub metrics: Vec<EpochMetrics>,
}

/// Render the metrics as one JSON object per line.
pub fn metrics_jsonl(metrics: &[EpochMetrics]) -> Result<String> {
    let mut s = String::new();
    for m in metrics {
        s.push_str(&serde_json::to_string(m)?);
        s.push('\n');
    }
    Ok(s)
}

/// Train `model` on `train_set`, validating on `val_set` after every epoch.
///
/// The model's dropout is replaced by `hp.dropout`. `on_epoch` sees each
/// epoch's metrics as they are produced.
pub fn train(
    mut model: SeanNet,
    train_set: &[EncodedTriplet],
    val_set: &[EncodedTriplet],
    hp: &HyperParams,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    hp.validate()?;
    if train_set.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    model.config.dropout = hp.dropout;
    let initial_val_accuracy = if val_set.is_empty() {
        None
    } else {
        Some(evaluate_encoded(&model, val_set)?.accuracy)
    };
    let mut sgd = Sgd::new(&model.params, hp.momentum);
    let mut best: Option<(f64, usize, ParamSet)> = None;
    let mut metrics = Vec::with_capacity(hp.epochs);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 0..hp.epochs {
        let lr = hp.lr_at(epoch);
        order.shuffle(&mut rng_from_seed(derive_seed(hp.seed, "shuffle", &[epoch as u64])));
        let mut loss_sum = 0.0;
        for (batch, chunk) in order.chunks(hp.batch_size).enumerate() {
            let bseed = derive_seed(hp.seed, "batch", &[epoch as u64, batch as u64]);
            let (loss, grads) = batch_gradients(&model, train_set, chunk, hp.margin, bseed).map_err(|e| {
                Error::Training {
                    epoch,
                    batch,
                    message: e.to_string(),
                }
            })?;
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    batch,
                    message: format!("loss is {loss}"),
                });
            }
            loss_sum += loss * chunk.len() as f64;
            sgd.step(&mut model.params, &grads, lr).map_err(|e| Error::Training {
                epoch,
                batch,
                message: e.to_string(),
            })?;
        }
        let val_accuracy = if val_set.is_empty() {
            None
        } else {
            Some(evaluate_encoded(&model, val_set)?.accuracy)
        };
        let m = EpochMetrics {
            epoch,
            lr,
            train_loss: loss_sum / train_set.len() as f64,
            val_accuracy,
        };
        on_epoch(&m);
        metrics.push(m);
        let score = val_accuracy.unwrap_or(f64::NEG_INFINITY);
        let better = match &best {
            None => true,
            Some((s, _, _)) => val_accuracy.is_none() || score > *s,
        };
        if better {
            best = Some((score, epoch, model.params.clone()));
        }
    }
    let best_epoch = best.as_ref().map(|b| b.1);
    if let Some((_, _, params)) = best {
        model.params = params;
    }
    Ok(TrainOutcome {
        model,
        best_epoch,
        initial_val_accuracy,
        metrics,
    })
}

/// Mean triplet loss over `indices` and its gradient.
fn batch_gradients(
    model: &SeanNet,
    set: &[EncodedTriplet],
    indices: &[usize],
    margin: f64,
    seed: u64,
) -> Result<(f64, ParamSet)> {
    let mut tape = Tape::new();
    let bound = model.params.bind(&mut tape);
    let mut loss = 0.0;
    let mut active = Vec::new();
    for (k, &idx) in indices.iter().enumerate() {
        let t = &set[idx];
        let s = |role: u64| derive_seed(seed, "dropout", &[k as u64, role]);
        let a = model.forward(&mut tape, &bound, &t.anchor, Mode::Train, s(0))?;
        let p = model.forward(&mut tape, &bound, &t.positive, Mode::Train, s(1))?;
        let n = model.forward(&mut tape, &bound, &t.negative, Mode::Train, s(2))?;
        let s_ap = tape.cosine(a, p)?;
        let s_an = tape.cosine(a, n)?;
        let (vp, vn) = (tape.value(s_ap).item(), tape.value(s_an).item());
        loss += triplet_loss(vp, vn, margin);
        if vp - vn < margin {
            active.push(tape.sub(s_an, s_ap)?);
        }
    }
    let b = indices.len() as f64;
    if active.is_empty() {
        return Ok((loss / b, model.params.zeros_like()));
    }
    let mut total = active[0];
    for &v in &active[1..] {
        total = tape.add(total, v)?;
    }
    let total = tape.scale(total, 1.0 / b);
    let grads = tape.backward(total)?;
    Ok((loss / b, model.params.gradients(&bound, &grads)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripletEval {
    /// Fraction with `s_ap > s_an` strictly.
    pub accuracy: f64,
    pub mean_s_ap: f64,
    pub mean_s_an: f64,
    pub count: usize,
}

fn summarize(pairs: &[(f64, f64)]) -> TripletEval {
    let n = pairs.len().max(1) as f64;
    TripletEval {
        accuracy: pairs.iter().filter(|(p, n)| p > n).count() as f64 / n,
        mean_s_ap: pairs.iter().map(|p| p.0).sum::<f64>() / n,
        mean_s_an: pairs.iter().map(|p| p.1).sum::<f64>() / n,
        count: pairs.len(),
    }
}

pub fn evaluate_encoded(model: &SeanNet, set: &[EncodedTriplet]) -> Result<TripletEval> {
    let pairs = set
        .iter()
        .map(|t| {
            let a = model.embed_encoded(&t.anchor)?;
            let p = model.embed_encoded(&t.positive)?;
            let n = model.embed_encoded(&t.negative)?;
            Ok((cosine(&a, &p)?, cosine(&a, &n)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&pairs))
}

/// Triplet accuracy and mean similarities of any embedder on a dataset.
pub fn evaluate(embedder: &impl SceneEmbedder, dataset: &TripletDataset) -> Result<TripletEval> {
    let pairs = dataset
        .triplets
        .iter()
        .map(|t| {
            let a = embedder.embed(&t.anchor)?;
            let p = embedder.embed(&t.positive)?;
            let n = embedder.embed(&t.negative)?;
            Ok((cosine(&a, &p)?, cosine(&a, &n)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&pairs))
}

pub fn eval_triplet_accuracy(embedder: &impl SceneEmbedder, dataset: &TripletDataset) -> Result<f64> {
    Ok(evaluate(embedder, dataset)?.accuracy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub dx: i32,
    pub dy: i32,
    pub dtheta: i32,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityStats {
    pub buckets: Vec<BucketStats>,
}

impl SimilarityStats {
    pub fn get(&self, dx: i32, dy: i32) -> Option<&BucketStats> {
        self.buckets.iter().find(|b| b.dx == dx && b.dy == dy && b.dtheta == 0)
    }

    /// Mean of bucket means at Manhattan distance `k`, weighted by count.
    pub fn mean_at_distance(&self, k: i32) -> Option<f64> {
        let (sum, n) = self
            .buckets
            .iter()
            .filter(|b| b.dx.abs() + b.dy.abs() == k && b.dtheta == 0)
            .fold((0.0, 0usize), |(s, n), b| (s + b.mean * b.count as f64, n + b.count));
        (n > 0).then(|| sum / n as f64)
    }

    /// Parse the output of [`SimilarityStats::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(STATS_CSV_HEADER) {
            return Err(Error::Format(format!("statistics must start with the header {STATS_CSV_HEADER}")));
        }
        let bad = |line: &str| Error::Format(format!("bad statistics row {line:?}"));
        let mut buckets = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 6 {
                return Err(bad(line));
            }
            let int = |k: usize| f[k].parse::<i32>().map_err(|_| bad(line));
            let real = |k: usize| f[k].parse::<f64>().map_err(|_| bad(line));
            buckets.push(BucketStats {
                dx: int(0)?,
                dy: int(1)?,
                dtheta: int(2)?,
                mean: real(3)?,
                std: real(4)?,
                count: f[5].parse().map_err(|_| bad(line))?,
            });
        }
        Ok(Self { buckets })
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{STATS_CSV_HEADER}\n");
        for b in &self.buckets {
            let _ = writeln!(s, "{},{},{},{},{},{}", b.dx, b.dy, b.dtheta, b.mean, b.std, b.count);
        }
        s
    }
}

fn bucket(dx: i32, dy: i32, values: &[f64]) -> BucketStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    BucketStats {
        dx,
        dy,
        dtheta: 0,
        mean,
        std: var.sqrt(),
        count: values.len(),
    }
}

pub const STATS_CSV_HEADER: &str = "dx,dy,dtheta,mean,std,count";

/// Largest grid offset covered by [`similarity_stats`].
pub const STATS_RADIUS: i32 = 4;

/// Similarity as a function of grid offset with the heading held fixed.
///
/// For every `(dx, dy)` in `[-4, 4]^2`, up to `n_pairs` anchors are drawn
/// whose offset pose is reachable. The `(0, 0)` bucket compares each
/// anchor with the same pose after object dynamics.
pub fn similarity_stats(
    embedder: &impl SceneEmbedder,
    world: &WorldState,
    camera: &CameraConfig,
    n_pairs: usize,
    seed: u64,
) -> Result<SimilarityStats> {
    let cells: Vec<(i32, i32)> = world.reachable.iter().copied().collect();
    if cells.is_empty() || n_pairs == 0 {
        return Err(Error::Usage("similarity statistics need reachable cells and n_pairs > 0".into()));
    }
    let mut cache: HashMap<Pose, Vec<f64>> = HashMap::new();
    let mut embed = |pose: Pose| -> Result<Vec<f64>> {
        if let Some(v) = cache.get(&pose) {
            return Ok(v.clone());
        }
        let v = embedder.embed(&render_observation(world, &pose, camera)?)?;
        cache.insert(pose, v.clone());
        Ok(v)
    };
    let mut buckets = Vec::new();
    for dx in -STATS_RADIUS..=STATS_RADIUS {
        for dy in -STATS_RADIUS..=STATS_RADIUS {
            let mut rng = rng_from_seed(derive_seed(seed, "stats", &[dx as u64, dy as u64]));
            let mut values = Vec::with_capacity(n_pairs);
            for attempt in 0..n_pairs * 20 {
                if values.len() == n_pairs {
                    break;
                }
                let (i, j) = cells[rng.random_range(0..cells.len())];
                let heading = Heading::ALL[rng.random_range(0..4)];
                let a = Pose::new(i, j, heading);
                let b = a.offset(dx, dy);
                if !world.is_reachable(&b) {
                    continue;
                }
                let va = embed(a)?;
                let vb = if (dx, dy) == (0, 0) {
                    let moved = apply_dynamics(world, derive_seed(seed, "stats_dynamics", &[attempt as u64]));
                    embedder.embed(&render_observation(&moved, &b, camera)?)?
                } else {
                    embed(b)?
                };
                values.push(cosine(&va, &vb)?);
            }
            if !values.is_empty() {
                buckets.push(bucket(dx, dy, &values));
            }
        }
    }
    Ok(SimilarityStats { buckets })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum ThresholdMethod {
    /// `mean - k * std` of the same-pose bucket.
    MeanMinusStd { k: f64 },
    /// Halfway between the same-pose mean and the one-step mean.
    Midpoint,
}

impl Default for ThresholdMethod {
    fn default() -> Self {
        ThresholdMethod::MeanMinusStd { k: 1.0 }
    }
}

pub const THRESHOLD_CLAMP: f64 = 1e-6;

/// Choose the localization threshold from similarity statistics.
///
/// The value is rounded to a 1e-9 grid, so `0.95 - 0.05` yields exactly
/// `0.9`, then clamped to `[-1 + 1e-6, 1 - 1e-6]`.
pub fn select_threshold(stats: &SimilarityStats, method: ThresholdMethod) -> Result<f64> {
    let center = stats
        .get(0, 0)
        .ok_or_else(|| Error::Usage("similarity statistics lack the (0,0) bucket".into()))?;
    let raw = match method {
        ThresholdMethod::MeanMinusStd { k } => center.mean - k * center.std,
        ThresholdMethod::Midpoint => {
            let one = stats
                .mean_at_distance(1)
                .ok_or_else(|| Error::Usage("similarity statistics lack one-step buckets".into()))?;
            (center.mean + one) / 2.0
        }
    };
    let rounded = (raw * 1e9).round() / 1e9;
    Ok(rounded.clamp(-1.0 + THRESHOLD_CLAMP, 1.0 - THRESHOLD_CLAMP))
}
