//! Typed inter-object relations and the adjacency matrices built from them.
//!
//! Relations are decided per ordered pair `(i, j)` with precedence
//! `on > in > proximity > disjoint`:
//!
//! * `on` when the world's support ground truth says `o_j` rests on `o_i`;
//! * `in` when all eight corners of `B_i` lie inside `B_j`;
//! * `proximity` when the center distance is at most `r(B_i) + r(B_j)`,
//!   with `r` the radius of the box's bounding sphere;
//! * `disjoint` otherwise.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Box3;
use crate::tensor::Tensor;
use crate::world::{Observation, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    On,
    In,
    Proximity,
    Disjoint,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::On, Relation::In, Relation::Proximity, Relation::Disjoint];

    /// Relations that carry messages in the graph network; `disjoint` does not.
    pub const PROPAGATING: [Relation; 3] = [Relation::On, Relation::In, Relation::Proximity];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Relation of the ordered pair `(i, j)`; `j_rests_on_i` is the support ground truth.
pub fn relation(box_i: &Box3, box_j: &Box3, j_rests_on_i: bool) -> Relation {
    if j_rests_on_i {
        Relation::On
    } else if box_j.contains_box(box_i) {
        Relation::In
    } else if box_i.center_distance(box_j) <= box_i.bounding_radius() + box_j.bounding_radius() {
        Relation::Proximity
    } else {
        Relation::Disjoint
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneNode {
    pub id: usize,
    pub class_label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub relation: Relation,
}

/// Nodes are detected objects; edges cover every ordered pair of distinct nodes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub nodes: Vec<SceneNode>,
    /// Sorted by `(from, to)`.
    pub edges: Vec<Edge>,
}

impl SceneGraph {
    pub fn relation(&self, from: usize, to: usize) -> Option<Relation> {
        self.edges
            .binary_search_by(|e| (e.from, e.to).cmp(&(from, to)))
            .ok()
            .map(|k| self.edges[k].relation)
    }

    pub fn node_ids(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Build the scene graph over the detected objects of `observation`.
pub fn extract_scene_graph(observation: &Observation, world: &WorldState) -> Result<SceneGraph> {
    let mut objects = Vec::with_capacity(observation.detections.len());
    let mut seen = BTreeSet::new();
    for det in &observation.detections {
        let obj = world
            .object(det.object_id)
            .ok_or_else(|| Error::Domain(format!("detection references unknown object {}", det.object_id)))?;
        if !seen.insert(obj.id) {
            return Err(Error::Domain(format!("object {} detected twice", obj.id)));
        }
        objects.push(obj);
    }
    objects.sort_by_key(|o| o.id);

    let nodes = objects
        .iter()
        .map(|o| SceneNode {
            id: o.id,
            class_label: o.class_label.clone(),
        })
        .collect();
    let mut edges = Vec::new();
    for a in &objects {
        for b in &objects {
            if a.id == b.id {
                continue;
            }
            let supported = world.support_pairs.contains(&(a.id, b.id));
            edges.push(Edge {
                from: a.id,
                to: b.id,
                relation: relation(&a.bbox, &b.bbox, supported),
            });
        }
    }
    Ok(SceneGraph { nodes, edges })
}

/// `M x M` typed adjacency and its per-relation binary decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    pub size: usize,
    /// Ids of the graph's nodes (detected objects), ascending.
    pub detected: Vec<usize>,
    /// Row-major typed entries; `None` where no relation exists.
    pub typed: Vec<Option<Relation>>,
    parts: [Tensor; 4],
}

impl AdjacencyMatrix {
    /// Binary matrix of one relation type.
    pub fn part(&self, r: Relation) -> &Tensor {
        &self.parts[r.index()]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<Relation> {
        self.typed[i * self.size + j]
    }

    /// Row-normalized matrix with self-loops on detected nodes.
    pub fn normalized(&self, r: Relation) -> Tensor {
        row_normalize(self.part(r), &self.detected).expect("adjacency parts are square")
    }
}

/// Decompose a scene graph into four binary `M x M` relation matrices.
pub fn build_adjacency(sg: &SceneGraph, m: usize) -> Result<AdjacencyMatrix> {
    for n in &sg.nodes {
        if n.id >= m {
            return Err(Error::Domain(format!("node id {} exceeds matrix size {m}", n.id)));
        }
    }
    let mut typed = vec![None; m * m];
    let mut parts = [Tensor::zeros(&[m, m]), Tensor::zeros(&[m, m]), Tensor::zeros(&[m, m]), Tensor::zeros(&[m, m])];
    for e in &sg.edges {
        if e.from >= m || e.to >= m {
            return Err(Error::Domain(format!("edge ({},{}) exceeds matrix size {m}", e.from, e.to)));
        }
        typed[e.from * m + e.to] = Some(e.relation);
        parts[e.relation.index()].data_mut()[e.from * m + e.to] = 1.0;
    }
    let mut detected = sg.node_ids();
    detected.sort_unstable();
    Ok(AdjacencyMatrix {
        size: m,
        detected,
        typed,
        parts,
    })
}

/// `D^-1 (A_r + I_detected)`: self-loops only on detected rows, undetected rows zero.
pub fn row_normalize(a: &Tensor, detected: &[usize]) -> Result<Tensor> {
    let [m, n] = a.dims2()?;
    if m != n {
        return Err(Error::Shape(format!("adjacency must be square, got {m}x{n}")));
    }
    let mut out = Tensor::zeros(&[m, m]);
    let src = a.data();
    let dst = out.data_mut();
    for &i in detected {
        if i >= m {
            return Err(Error::Domain(format!("detected id {i} exceeds matrix size {m}")));
        }
        let row = &mut dst[i * m..(i + 1) * m];
        row.copy_from_slice(&src[i * m..(i + 1) * m]);
        row[i] += 1.0;
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
    }
    Ok(out)
}
