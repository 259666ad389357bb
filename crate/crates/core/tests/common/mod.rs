//! Scene generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seannet::geometry::Box3;
use seannet::navigation::{RotationModel, SubNodeId, TopoMap, TopoNode, TranslationEdge};
use seannet::scenegraph::{Relation, SceneGraph};
use seannet::tensor::{Tape, Tensor, Var};
use seannet::world::{Detection, Dynamics, Heading, ObjectInstance, Observation, Pose, WorldState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_box(rng: &mut ChaCha8Rng) -> Box3 {
    let half = [rng.random_range(0.05..0.8), rng.random_range(0.05..0.8), rng.random_range(0.05..0.8)];
    let center = [rng.random_range(0.0..4.0), rng.random_range(0.0..4.0), rng.random_range(0.0..2.0)];
    Box3::new(center, half, rng.random_range(0.0..2.0 * PI)).unwrap()
}

/// A box strictly inside `outer`, sharing its yaw.
fn nested_box(rng: &mut ChaCha8Rng, outer: &Box3) -> Box3 {
    let frac: f64 = rng.random_range(0.2..0.6);
    let half = outer.half_extents.map(|h| h * frac);
    let (s, c) = outer.yaw.sin_cos();
    let shift = [
        rng.random_range(-0.3..0.3) * outer.half_extents[0],
        rng.random_range(-0.3..0.3) * outer.half_extents[1],
        rng.random_range(-0.3..0.3) * outer.half_extents[2],
    ];
    let center = [
        outer.center[0] + c * shift[0] - s * shift[1],
        outer.center[1] + s * shift[0] + c * shift[1],
        outer.center[2] + shift[2],
    ];
    Box3::new(center, half, outer.yaw).unwrap()
}

/// `n` random objects, some nested inside others and some with support
/// ground truth, all detected by a single observation.
pub fn random_scene(rng: &mut ChaCha8Rng, n: usize) -> (WorldState, Observation) {
    let mut objects: Vec<ObjectInstance> = Vec::new();
    for id in 0..n {
        let bbox = if id > 0 && rng.random::<f64>() < 0.3 {
            let outer = objects[rng.random_range(0..id)].bbox;
            nested_box(rng, &outer)
        } else if id > 0 && rng.random::<f64>() < 0.2 {
            objects[rng.random_range(0..id)].bbox
        } else {
            random_box(rng)
        };
        objects.push(ObjectInstance {
            id,
            class_label: format!("class{}", rng.random_range(0..4)),
            dynamics: Dynamics::Static,
            bbox,
            texture_id: 0,
        });
    }
    let mut support_pairs = BTreeSet::new();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.random::<f64>() < 0.08 {
                support_pairs.insert((s, t));
            }
        }
    }
    let world = WorldState {
        objects,
        support_pairs,
        bounds: [10.0, 10.0, 3.0],
        reachable: [(0, 0)].into_iter().collect(),
        d: 0.25,
        max_instances: 8,
    };
    let detections = world
        .objects
        .iter()
        .map(|o| Detection {
            object_id: o.id,
            class_label: o.class_label.clone(),
            bbox2d: [0.0, 0.0, 1.0, 1.0],
            visual_feature: vec![1.0; 4],
        })
        .collect();
    let mut obs = Observation {
        pose: Pose::new(0, 0, Heading::East),
        detections,
        scene_graph: SceneGraph::default(),
    };
    obs.scene_graph = seannet::scenegraph::extract_scene_graph(&obs, &world).unwrap();
    (world, obs)
}

/// Relation of `(i, j)` from first principles: support first, then corner
/// containment of `B_i` in `B_j`, then bounding-sphere proximity.
pub fn oracle_relation(a: &Box3, b: &Box3, b_rests_on_a: bool) -> Relation {
    if b_rests_on_a {
        return Relation::On;
    }
    let corners = |x: &Box3| {
        let (s, c) = x.yaw.sin_cos();
        let mut out = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let (lx, ly, lz) = (sx * x.half_extents[0], sy * x.half_extents[1], sz * x.half_extents[2]);
                    out.push([x.center[0] + c * lx - s * ly, x.center[1] + s * lx + c * ly, x.center[2] + lz]);
                }
            }
        }
        out
    };
    let inside = |p: [f64; 3], x: &Box3| {
        let (s, c) = x.yaw.sin_cos();
        let (dx, dy, dz) = (p[0] - x.center[0], p[1] - x.center[1], p[2] - x.center[2]);
        let local = [c * dx + s * dy, -s * dx + c * dy, dz];
        (0..3).all(|k| local[k].abs() <= x.half_extents[k] + 1e-9)
    };
    if corners(a).into_iter().all(|p| inside(p, b)) {
        return Relation::In;
    }
    let radius = |x: &Box3| x.half_extents.iter().map(|h| h * h).sum::<f64>().sqrt();
    let dist = (0..3).map(|k| (a.center[k] - b.center[k]).powi(2)).sum::<f64>().sqrt();
    if dist <= radius(a) + radius(b) {
        Relation::Proximity
    } else {
        Relation::Disjoint
    }
}

fn blank_node(cell: (i32, i32)) -> TopoNode {
    let obs = |h| Observation {
        pose: Pose::new(cell.0, cell.1, h),
        detections: vec![],
        scene_graph: SceneGraph::default(),
    };
    TopoNode {
        cell,
        observations: Heading::ALL.map(obs),
    }
}

/// Up to `max_nodes` places on a small grid with random straight-line edges.
pub fn random_map(rng: &mut ChaCha8Rng, max_nodes: usize) -> TopoMap {
    let n = rng.random_range(1..=max_nodes);
    let mut cells = Vec::new();
    while cells.len() < n {
        let c: (i32, i32) = (rng.random_range(0..5), rng.random_range(0..5));
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (ca, cb) = (cells[a], cells[b]);
            if (ca.0 == cb.0 || ca.1 == cb.1) && rng.random::<f64>() < 0.75 {
                let cost = ((ca.0 - cb.0).abs() + (ca.1 - cb.1).abs()) as u32;
                edges.push(TranslationEdge { a, b, cost });
            }
        }
    }
    TopoMap {
        nodes: cells.into_iter().map(blank_node).collect(),
        edges,
        rotation: RotationModel {
            full: rng.random(),
            cost: rng.random_range(1..=3),
        },
    }
}

/// Cheapest route by enumerating every simple path within a growing cost budget.
pub fn exhaustive_cost(map: &TopoMap, start: SubNodeId, goal: SubNodeId) -> Option<u32> {
    fn reaches(map: &TopoMap, s: SubNodeId, goal: SubNodeId, budget: u32, seen: &mut Vec<SubNodeId>) -> bool {
        if s == goal {
            return true;
        }
        seen.push(s);
        let found = map
            .neighbors(s)
            .into_iter()
            .any(|(n, c)| c <= budget && !seen.contains(&n) && reaches(map, n, goal, budget - c, seen));
        seen.pop();
        found
    }
    // plain reachability first, so unreachable goals need no enumeration
    let mut stack = vec![start];
    let mut visited = vec![start];
    while let Some(s) = stack.pop() {
        for (n, _) in map.neighbors(s) {
            if !visited.contains(&n) {
                visited.push(n);
                stack.push(n);
            }
        }
    }
    if !visited.contains(&goal) {
        return None;
    }
    (0..).find(|&b| reaches(map, start, goal, b, &mut Vec::new()))
}

/// Max relative error between backprop and central differences for the
/// scalar `sum_k w_k out_k`, over every input entry.
pub fn op_gradient_error(inputs: &[Tensor], h: f64, build: &dyn Fn(&mut Tape, &[Var]) -> Var) -> f64 {
    let loss_of = |xs: &[Tensor]| -> (Tape, Vec<Var>, Var) {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|x| tape.param(x.clone())).collect();
        let out = build(&mut tape, &vars);
        let flat = tape.flatten(out).unwrap();
        let n = tape.value(flat).len();
        let w: Vec<f64> = (0..n).map(|k| ((k as f64 + 1.0) * 0.737).sin() + 0.25).collect();
        let w = tape.constant(Tensor::new(&[n, 1], w).unwrap());
        let loss = tape.matmul(flat, w).unwrap();
        (tape, vars, loss)
    };
    let (tape, vars, loss) = loss_of(inputs);
    let grads = tape.backward(loss).unwrap();
    let mut worst: f64 = 0.0;
    for (k, x) in inputs.iter().enumerate() {
        let analytic = grads.get_or_zeros(vars[k], x.shape());
        for idx in 0..x.len() {
            let mut probe = inputs.to_vec();
            probe[k].data_mut()[idx] += h;
            let (t, _, l) = loss_of(&probe);
            let up = t.value(l).item();
            probe[k].data_mut()[idx] -= 2.0 * h;
            let (t, _, l) = loss_of(&probe);
            let down = t.value(l).item();
            let numeric = (up - down) / (2.0 * h);
            let a = analytic.data()[idx];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
    }
    worst
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}
