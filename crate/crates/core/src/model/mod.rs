//! The scene embedder and its inputs.

mod config;
mod encoding;
mod net;

pub use config::ModelConfig;
pub use encoding::{bbox_embed, encode_observation, positional_encode, EmbeddingTable, EncodedObservation};
pub use net::{
    gcn_pathway, gcn_weight_name, localize, object_embed, SceneEmbedder, SeanNet, GRAPH_FUSION_BIAS,
    GRAPH_FUSION_WEIGHT, OBJECT_BIAS, OBJECT_WEIGHT, PATHWAYS, SCENE_FUSION_BIAS, SCENE_FUSION_WEIGHT,
};
