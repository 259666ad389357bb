use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of the scene embedder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Maximum object instances `M` (rows of the feature and adjacency matrices).
    pub max_instances: usize,
    /// Positional-encoding width per pixel coordinate; must be even.
    pub pe_dim: usize,
    /// Visual feature width `D_v`.
    pub visual_dim: usize,
    /// Word vector width `D_w`.
    pub word_dim: usize,
    /// Object embedding width `V`.
    pub object_dim: usize,
    /// Output widths of the three graph-convolution layers of each pathway.
    pub gcn_dims: [usize; 3],
    pub sg_dim: usize,
    pub scene_dim: usize,
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ModelConfig {
    /// Small defaults that train in minutes on one core.
    pub fn desk() -> Self {
        Self {
            max_instances: 32,
            pe_dim: 64,
            visual_dim: 64,
            word_dim: 32,
            object_dim: 96,
            gcn_dims: [64, 32, 8],
            sg_dim: 128,
            scene_dim: 128,
            dropout: 0.2,
        }
    }

    /// Full-size widths: 256 instances, 2048-d visual features, 300-d word
    /// vectors, 256 x 8 pathway outputs and 2048-d embeddings.
    pub fn paper() -> Self {
        Self {
            max_instances: 256,
            pe_dim: 64,
            visual_dim: 2048,
            word_dim: 300,
            object_dim: 512,
            gcn_dims: [128, 32, 8],
            sg_dim: 2048,
            scene_dim: 2048,
            dropout: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.max_instances,
            self.pe_dim,
            self.visual_dim,
            self.word_dim,
            self.object_dim,
            self.gcn_dims[0],
            self.gcn_dims[1],
            self.gcn_dims[2],
            self.sg_dim,
            self.scene_dim,
        ];
        if dims.contains(&0) {
            return Err(Error::Config(format!("model dimensions must be positive: {self:?}")));
        }
        if !self.pe_dim.is_multiple_of(2) {
            return Err(Error::Config(format!("pe_dim must be even, got {}", self.pe_dim)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must be in [0, 1), got {}", self.dropout)));
        }
        Ok(())
    }

    /// Width of one object's input row `[x_b | x_v | x_w]`.
    pub fn object_input_dim(&self) -> usize {
        4 * self.pe_dim + self.visual_dim + self.word_dim
    }

    /// Length of the three flattened pathway outputs, concatenated.
    pub fn graph_concat_dim(&self) -> usize {
        3 * self.max_instances * self.gcn_dims[2]
    }
}
