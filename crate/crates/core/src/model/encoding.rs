use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::rng::{unit_gaussian, SeedHasher};
use crate::scenegraph::{build_adjacency, Relation};
use crate::tensor::Tensor;
use crate::world::Observation;

/// Sinusoidal encoding of one scalar: `[sin(p/w_0), cos(p/w_0), sin(p/w_1), ...]`
/// with `w_i = 10000^(2i/dim)`.
pub fn positional_encode(p: f64, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim / 2 {
        let w = 10000f64.powf(2.0 * i as f64 / dim as f64);
        out.push((p / w).sin());
        out.push((p / w).cos());
    }
    out
}

/// `[PE(u1) | PE(v1) | PE(u2) | PE(v2)]`.
pub fn bbox_embed(bbox: [f64; 4], pe_dim: usize) -> Vec<f64> {
    bbox.iter().flat_map(|&c| positional_encode(c, pe_dim)).collect()
}

/// Word vectors keyed by class label.
///
/// Labels missing from the table get a seeded unit-Gaussian vector unless
/// the table is strict, in which case lookup fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub rows: BTreeMap<String, Vec<f64>>,
    pub strict: bool,
}

impl EmbeddingTable {
    /// Empty table: every label uses the fallback.
    pub fn fallback(dim: usize) -> Self {
        Self {
            dim,
            rows: BTreeMap::new(),
            strict: false,
        }
    }

    /// Parse lines of the form `label v1 v2 ... vD`; blank lines are skipped.
    pub fn parse(text: &str, strict: bool) -> Result<Self> {
        let mut rows = BTreeMap::new();
        let mut dim = None;
        for (n, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(label) = parts.next() else { continue };
            let values = parts
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("embedding line {}: {e}", n + 1)))?;
            if values.is_empty() || *dim.get_or_insert(values.len()) != values.len() {
                return Err(Error::Format(format!("embedding line {}: wrong number of values", n + 1)));
            }
            rows.insert(label.to_string(), values);
        }
        let dim = dim.ok_or_else(|| Error::Format("embedding table is empty".into()))?;
        Ok(Self { dim, rows, strict })
    }

    pub fn load(path: &Path, strict: bool) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, strict)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (label, v) in &self.rows {
            s.push_str(label);
            for x in v {
                let _ = write!(s, " {x}");
            }
            s.push('\n');
        }
        s
    }

    pub fn lookup(&self, label: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.rows.get(label) {
            return Ok(v.clone());
        }
        if self.strict {
            return Err(Error::Lookup(format!("no word vector for label {label:?}")));
        }
        Ok(unit_gaussian(SeedHasher::new("word").str(label).finish(), self.dim))
    }
}

/// Network inputs derived from one observation; independent of parameters,
/// so it can be computed once and reused across epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedObservation {
    /// Detected object ids, ascending; row `r` of `features` belongs to `rows[r]`.
    pub rows: Vec<usize>,
    /// `k x (4 pe + D_v + D_w)` object input rows.
    pub features: Tensor,
    /// Row-normalized adjacency for the on, in and proximity pathways.
    pub adjacency: [Tensor; 3],
    /// `1 x D_v` mean visual feature; zero for an empty observation.
    pub visual_mean: Tensor,
}

pub fn encode_observation(obs: &Observation, config: &ModelConfig, words: &EmbeddingTable) -> Result<EncodedObservation> {
    if words.dim != config.word_dim {
        return Err(Error::Shape(format!(
            "word table has {} dims, model expects {}",
            words.dim, config.word_dim
        )));
    }
    let m = config.max_instances;
    let adj = build_adjacency(&obs.scene_graph, m)?;
    let mut dets: Vec<_> = obs.detections.iter().collect();
    dets.sort_by_key(|d| d.object_id);
    let width = config.object_input_dim();
    let mut features = Vec::with_capacity(dets.len() * width);
    let mut visual_sum = vec![0.0; config.visual_dim];
    let mut rows = Vec::with_capacity(dets.len());
    for det in &dets {
        if det.object_id >= m {
            return Err(Error::Domain(format!("object id {} exceeds M = {m}", det.object_id)));
        }
        if det.visual_feature.len() != config.visual_dim {
            return Err(Error::Shape(format!(
                "visual feature has {} dims, model expects {}",
                det.visual_feature.len(),
                config.visual_dim
            )));
        }
        rows.push(det.object_id);
        features.extend(bbox_embed(det.bbox2d, config.pe_dim));
        features.extend_from_slice(&det.visual_feature);
        features.extend(words.lookup(&det.class_label)?);
        visual_sum.iter_mut().zip(&det.visual_feature).for_each(|(s, v)| *s += v);
    }
    if rows.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain("observation detects an object twice".into()));
    }
    if !dets.is_empty() {
        let k = dets.len() as f64;
        visual_sum.iter_mut().for_each(|s| *s /= k);
    }
    // scene-graph nodes must be exactly the detections
    if adj.detected != rows {
        return Err(Error::Domain("scene graph nodes differ from detections".into()));
    }
    let adjacency = [
        adj.normalized(Relation::On),
        adj.normalized(Relation::In),
        adj.normalized(Relation::Proximity),
    ];
    Ok(EncodedObservation {
        features: Tensor::new(&[rows.len(), width], features)?,
        rows,
        adjacency,
        visual_mean: Tensor::row(visual_sum),
    })
}
