//! Scene-graph embeddings for place recognition under object dynamics.
//!
//! The crate simulates small rooms on a grid, renders object detections,
//! turns each view into a typed scene graph, embeds it with a graph
//! convolutional network trained on cascaded triplets, and uses cosine
//! similarity of embeddings to localize while navigating a topological map.
//!
//! * [`world`]: room generation, object dynamics and the camera model.
//! * [`scenegraph`]: pairwise relations and adjacency matrices.
//! * [`tensor`]: `f64` tensors, a reverse-mode tape and checkpoints.
//! * [`model`]: input encoding and the embedding network.
//! * [`triplets`]: tiered triplet sampling and dataset files.
//! * [`training`]: the triplet loss, SGD, evaluation, similarity statistics.
//! * [`navigation`]: maps, planning, trials and benchmarks.
//! * [`cli`]: the `seannet` command-line tool.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod model;
pub mod navigation;
pub mod rng;
pub mod scenegraph;
pub mod tensor;
pub mod training;
pub mod triplets;
pub mod world;

pub use error::{Error, Result};
