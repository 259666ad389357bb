use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{encode_observation, EmbeddingTable, EncodedObservation, ModelConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::tensor::{cosine, read_archive, write_archive, Archive, BoundParams, Mode, ParamSet, Tape, Tensor, Var};
use crate::world::Observation;

pub const OBJECT_WEIGHT: &str = "object.weight";
pub const OBJECT_BIAS: &str = "object.bias";
pub const GRAPH_FUSION_WEIGHT: &str = "graph_fusion.weight";
pub const GRAPH_FUSION_BIAS: &str = "graph_fusion.bias";
pub const SCENE_FUSION_WEIGHT: &str = "scene_fusion.weight";
pub const SCENE_FUSION_BIAS: &str = "scene_fusion.bias";

/// Weight init bound multiplier: `sqrt(6)` keeps activation variance through ReLU layers.
const WEIGHT_GAIN: f64 = 2.449_489_742_783_178;

/// Pathway names in the order on, in, proximity.
pub const PATHWAYS: [&str; 3] = ["on", "in", "proximity"];

pub fn gcn_weight_name(pathway: usize, layer: usize) -> String {
    format!("gcn.{}.{layer}", PATHWAYS[pathway])
}

/// Anything that maps an observation to a fixed-length embedding.
pub trait SceneEmbedder {
    fn embed(&self, obs: &Observation) -> Result<Vec<f64>>;

    fn similarity(&self, a: &Observation, b: &Observation) -> Result<f64> {
        cosine(&self.embed(a)?, &self.embed(b)?)
    }
}

/// `ReLU(X W + b)` over the detected rows.
pub fn object_embed(tape: &mut Tape, input: Var, weight: Var, bias: Var) -> Result<Var> {
    let h = tape.matmul(input, weight)?;
    let h = tape.add_row_bias(h, bias)?;
    Ok(tape.relu(h))
}

/// Three layers of `X <- dropout(ReLU(Â X W))`.
pub fn gcn_pathway(
    tape: &mut Tape,
    a_hat: Var,
    x0: Var,
    weights: [Var; 3],
    p: f64,
    mode: Mode,
    seed: u64,
) -> Result<Var> {
    let mut x = x0;
    for (layer, w) in weights.into_iter().enumerate() {
        let ax = tape.matmul(a_hat, x)?;
        let h = tape.matmul(ax, w)?;
        let h = tape.relu(h);
        x = tape.dropout(h, p, mode, derive_seed(seed, "gcn_dropout", &[layer as u64]))?;
    }
    Ok(x)
}

/// Localization decision: same place iff the similarity strictly exceeds `epsilon`.
pub fn localize(s: f64, epsilon: f64) -> bool {
    s > epsilon
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointMeta {
    config: ModelConfig,
    words: EmbeddingTable,
}

/// The scene embedder: object embedding, three relation pathways, and the
/// graph and scene fusion layers.
#[derive(Debug, Clone, PartialEq)]
pub struct SeanNet {
    pub config: ModelConfig,
    pub params: ParamSet,
    pub words: EmbeddingTable,
}

impl SeanNet {
    /// Random initialization: weights uniform in `±sqrt(6/fan_in)`, biases in `±1/sqrt(fan_in)`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let words = EmbeddingTable::fallback(config.word_dim);
        Self::with_words(config, words, seed)
    }

    pub fn with_words(config: ModelConfig, words: EmbeddingTable, seed: u64) -> Result<Self> {
        config.validate()?;
        if words.dim != config.word_dim {
            return Err(Error::Config(format!(
                "word table has {} dims, model expects {}",
                words.dim, config.word_dim
            )));
        }
        let mut shapes: Vec<(String, [usize; 2], usize)> = vec![
            (OBJECT_WEIGHT.into(), [config.object_input_dim(), config.object_dim], config.object_input_dim()),
            (OBJECT_BIAS.into(), [1, config.object_dim], config.object_input_dim()),
        ];
        for p in 0..3 {
            let mut fan_in = config.object_dim;
            for (l, &out) in config.gcn_dims.iter().enumerate() {
                shapes.push((gcn_weight_name(p, l), [fan_in, out], fan_in));
                fan_in = out;
            }
        }
        let g = config.graph_concat_dim();
        shapes.push((GRAPH_FUSION_WEIGHT.into(), [g, config.sg_dim], g));
        shapes.push((GRAPH_FUSION_BIAS.into(), [1, config.sg_dim], g));
        let s = config.visual_dim + config.sg_dim;
        shapes.push((SCENE_FUSION_WEIGHT.into(), [s, config.scene_dim], s));
        shapes.push((SCENE_FUSION_BIAS.into(), [1, config.scene_dim], s));

        let mut params = ParamSet::new();
        for (k, (name, shape, fan_in)) in shapes.into_iter().enumerate() {
            let bound = if shape[0] == 1 { 1.0 } else { WEIGHT_GAIN } / (fan_in as f64).sqrt();
            let mut rng = rng_from_seed(derive_seed(seed, "init", &[k as u64]));
            let values = (0..shape[0] * shape[1]).map(|_| rng.random_range(-bound..bound)).collect();
            params.insert(&name, Tensor::new(&shape, values)?)?;
        }
        Ok(Self { config, params, words })
    }

    pub fn encode(&self, obs: &Observation) -> Result<EncodedObservation> {
        encode_observation(obs, &self.config, &self.words)
    }

    /// Scene-graph branch: pathways, flatten, concatenate, fuse.
    pub fn scene_graph_embed(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        enc: &EncodedObservation,
        mode: Mode,
        seed: u64,
    ) -> Result<Var> {
        let c = &self.config;
        let x0 = if enc.rows.is_empty() {
            tape.constant(Tensor::zeros(&[c.max_instances, c.object_dim]))
        } else {
            let input = tape.constant(enc.features.clone());
            let h = object_embed(tape, input, bound.var(OBJECT_WEIGHT)?, bound.var(OBJECT_BIAS)?)?;
            tape.scatter_rows(h, &enc.rows, c.max_instances)?
        };
        let mut flats = Vec::with_capacity(3);
        for (p, a) in enc.adjacency.iter().enumerate() {
            let a_hat = tape.constant(a.clone());
            let weights = [
                bound.var(&gcn_weight_name(p, 0))?,
                bound.var(&gcn_weight_name(p, 1))?,
                bound.var(&gcn_weight_name(p, 2))?,
            ];
            let out = gcn_pathway(
                tape,
                a_hat,
                x0,
                weights,
                c.dropout,
                mode,
                derive_seed(seed, "pathway", &[p as u64]),
            )?;
            flats.push(tape.flatten(out)?);
        }
        let cat = tape.concat_cols(&flats)?;
        let sg = tape.matmul(cat, bound.var(GRAPH_FUSION_WEIGHT)?)?;
        let sg = tape.add_row_bias(sg, bound.var(GRAPH_FUSION_BIAS)?)?;
        Ok(tape.relu(sg))
    }

    /// Full embedding `1 x scene_dim` recorded on `tape`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        enc: &EncodedObservation,
        mode: Mode,
        seed: u64,
    ) -> Result<Var> {
        let sg = self.scene_graph_embed(tape, bound, enc, mode, seed)?;
        let vis = tape.constant(enc.visual_mean.clone());
        let joint = tape.concat_cols(&[vis, sg])?;
        let z = tape.matmul(joint, bound.var(SCENE_FUSION_WEIGHT)?)?;
        tape.add_row_bias(z, bound.var(SCENE_FUSION_BIAS)?)
    }

    /// Eval-mode embedding of pre-encoded inputs.
    pub fn embed_encoded(&self, enc: &EncodedObservation) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let z = self.forward(&mut tape, &bound, enc, Mode::Eval, 0)?;
        Ok(tape.value(z).data().to_vec())
    }

    pub fn similarity_encoded(&self, a: &EncodedObservation, b: &EncodedObservation) -> Result<f64> {
        cosine(&self.embed_encoded(a)?, &self.embed_encoded(b)?)
    }

    /// Eval-mode cosine similarity and its gradient with respect to every parameter.
    pub fn similarity_with_gradients(&self, a: &EncodedObservation, b: &EncodedObservation) -> Result<(f64, ParamSet)> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let za = self.forward(&mut tape, &bound, a, Mode::Eval, 0)?;
        let zb = self.forward(&mut tape, &bound, b, Mode::Eval, 0)?;
        let s = tape.cosine(za, zb)?;
        let grads = tape.backward(s)?;
        Ok((tape.value(s).item(), self.params.gradients(&bound, &grads)))
    }

    pub fn to_archive(&self) -> Result<Archive> {
        let meta = serde_json::to_value(CheckpointMeta {
            config: self.config.clone(),
            words: self.words.clone(),
        })?;
        Ok(Archive {
            params: self.params.clone(),
            meta,
        })
    }

    pub fn from_archive(archive: Archive) -> Result<Self> {
        let meta: CheckpointMeta = serde_json::from_value(archive.meta)?;
        let template = Self::with_words(meta.config, meta.words, 0)?;
        let names: Vec<&str> = template.params.names().collect();
        let loaded: Vec<&str> = archive.params.names().collect();
        if names != loaded {
            return Err(Error::Format("checkpoint tensors do not match the model layout".into()));
        }
        for (name, t) in template.params.iter() {
            if archive.params.require(name)?.shape() != t.shape() {
                return Err(Error::Format(format!("checkpoint tensor {name} has the wrong shape")));
            }
        }
        Ok(Self {
            params: archive.params,
            ..template
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_archive(path, &self.to_archive()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_archive(read_archive(path)?)
    }
}

impl SceneEmbedder for SeanNet {
    fn embed(&self, obs: &Observation) -> Result<Vec<f64>> {
        self.embed_encoded(&self.encode(obs)?)
    }
}
