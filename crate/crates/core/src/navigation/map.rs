use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{render_observation, CameraConfig, Heading, Observation, Pose, WorldState};

/// Robot actions: two rotations and three translations of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "rotate_left_90")]
    RotateLeft90,
    #[serde(rename = "rotate_right_90")]
    RotateRight90,
    #[serde(rename = "forward_d")]
    Forward,
    #[serde(rename = "leftward_d")]
    Leftward,
    #[serde(rename = "rightward_d")]
    Rightward,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::RotateLeft90,
        Action::RotateRight90,
        Action::Forward,
        Action::Leftward,
        Action::Rightward,
    ];

    pub fn is_rotation(self) -> bool {
        matches!(self, Action::RotateLeft90 | Action::RotateRight90)
    }

    /// Pose after executing the action from `pose`.
    pub fn apply(self, pose: &Pose) -> Pose {
        let (fx, fy) = pose.heading.forward();
        let (lx, ly) = pose.heading.left();
        match self {
            Action::RotateLeft90 => pose.with_heading(pose.heading.rotated(1)),
            Action::RotateRight90 => pose.with_heading(pose.heading.rotated(-1)),
            Action::Forward => pose.offset(fx, fy),
            Action::Leftward => pose.offset(lx, ly),
            Action::Rightward => pose.offset(-lx, -ly),
        }
    }
}

/// A node's heading-specific slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubNodeId {
    pub node: usize,
    pub heading: Heading,
}

impl SubNodeId {
    pub fn new(node: usize, heading: Heading) -> Self {
        Self { node, heading }
    }
}

impl fmt::Display for SubNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.node, self.heading)
    }
}

impl std::str::FromStr for SubNodeId {
    type Err = Error;

    /// Parse `node@degrees`, e.g. `3@90`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("expected node@degrees (degrees in 0, 90, 180, 270), got {s:?}"));
        let (node, deg) = s.split_once('@').ok_or_else(bad)?;
        let node = node.trim().parse().map_err(|_| bad())?;
        let heading = match deg.trim() {
            "0" => Heading::East,
            "90" => Heading::North,
            "180" => Heading::West,
            "270" => Heading::South,
            _ => return Err(bad()),
        };
        Ok(Self { node, heading })
    }
}

/// A place with the observations captured at its four headings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoNode {
    pub cell: (i32, i32),
    /// Indexed by heading in East, North, West, South order.
    pub observations: [Observation; 4],
}

impl TopoNode {
    pub fn pose(&self, heading: Heading) -> Pose {
        Pose::new(self.cell.0, self.cell.1, heading)
    }

    pub fn observation(&self, heading: Heading) -> &Observation {
        &self.observations[heading.quarter_turns() as usize]
    }
}

/// Undirected translation edge between two places on a clear straight line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationEdge {
    pub a: usize,
    pub b: usize,
    /// Manhattan distance in cells.
    pub cost: u32,
}

/// Costs of turning in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationModel {
    /// Connect every pair of headings (a half turn is one edge) instead of
    /// only neighbouring headings.
    pub full: bool,
    pub cost: u32,
}

impl Default for RotationModel {
    fn default() -> Self {
        Self { full: true, cost: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoMap {
    pub nodes: Vec<TopoNode>,
    pub edges: Vec<TranslationEdge>,
    pub rotation: RotationModel,
}

/// Every reachable cell whose coordinates are both multiples of `stride`.
pub fn default_places(world: &WorldState, stride: i32) -> Vec<(i32, i32)> {
    let stride = stride.max(1);
    world
        .reachable
        .iter()
        .copied()
        .filter(|&(i, j)| i.rem_euclid(stride) == 0 && j.rem_euclid(stride) == 0)
        .collect()
}

/// Build a map over `places`, rendering four observations per place.
///
/// Two places on the same row or column are joined when every cell between
/// them is reachable.
pub fn build_topo_map(
    world: &WorldState,
    places: &[(i32, i32)],
    camera: &CameraConfig,
    rotation: RotationModel,
) -> Result<TopoMap> {
    let mut nodes = Vec::with_capacity(places.len());
    for (k, &cell) in places.iter().enumerate() {
        if places[..k].contains(&cell) {
            return Err(Error::Domain(format!("place {cell:?} listed twice")));
        }
        let obs: Vec<Observation> = Heading::ALL
            .iter()
            .map(|&h| render_observation(world, &Pose::new(cell.0, cell.1, h), camera))
            .collect::<Result<_>>()?;
        let observations: [Observation; 4] = obs.try_into().expect("four headings");
        nodes.push(TopoNode { cell, observations });
    }
    let mut edges = Vec::new();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let (ca, cb) = (nodes[a].cell, nodes[b].cell);
            if ca.0 != cb.0 && ca.1 != cb.1 {
                continue;
            }
            let steps = (ca.0 - cb.0).abs() + (ca.1 - cb.1).abs();
            let (si, sj) = ((cb.0 - ca.0).signum(), (cb.1 - ca.1).signum());
            let clear = (0..=steps).all(|t| world.reachable.contains(&(ca.0 + si * t, ca.1 + sj * t)));
            if clear {
                edges.push(TranslationEdge {
                    a,
                    b,
                    cost: steps as u32,
                });
            }
        }
    }
    Ok(TopoMap { nodes, edges, rotation })
}

impl TopoMap {
    pub fn sub_nodes(&self) -> impl Iterator<Item = SubNodeId> + '_ {
        (0..self.nodes.len()).flat_map(|n| Heading::ALL.iter().map(move |&h| SubNodeId::new(n, h)))
    }

    pub fn contains(&self, s: SubNodeId) -> bool {
        s.node < self.nodes.len()
    }

    pub fn pose(&self, s: SubNodeId) -> Pose {
        self.nodes[s.node].pose(s.heading)
    }

    pub fn observation(&self, s: SubNodeId) -> &Observation {
        self.nodes[s.node].observation(s.heading)
    }

    /// Outgoing sub-node edges with their costs, sorted by target.
    ///
    /// Translations keep the heading and must point forward, left or right
    /// of it, since the robot cannot move backwards.
    pub fn neighbors(&self, s: SubNodeId) -> Vec<(SubNodeId, u32)> {
        let mut out = Vec::new();
        for &h in &Heading::ALL {
            if h == s.heading {
                continue;
            }
            let turns = (h.quarter_turns() - s.heading.quarter_turns()).rem_euclid(4);
            if self.rotation.full || turns != 2 {
                out.push((SubNodeId::new(s.node, h), self.rotation.cost));
            }
        }
        let here = self.nodes[s.node].cell;
        for e in &self.edges {
            let other = if e.a == s.node {
                e.b
            } else if e.b == s.node {
                e.a
            } else {
                continue;
            };
            let there = self.nodes[other].cell;
            let dir = ((there.0 - here.0).signum(), (there.1 - here.1).signum());
            let (lx, ly) = s.heading.left();
            if dir == s.heading.forward() || dir == (lx, ly) || dir == (-lx, -ly) {
                out.push((SubNodeId::new(other, s.heading), e.cost));
            }
        }
        out.sort();
        out
    }

    /// Cost of moving along `path`, or `None` if two consecutive entries are not adjacent.
    pub fn path_cost(&self, path: &[SubNodeId]) -> Option<u32> {
        let mut total = 0;
        for w in path.windows(2) {
            let c = self.neighbors(w[0]).into_iter().find(|(n, _)| *n == w[1])?.1;
            total += c;
        }
        Some(total)
    }
}

/// Dijkstra shortest path between two sub-nodes.
///
/// Among equal-cost paths the search settles sub-nodes in `(cost, node,
/// heading)` order and keeps the first predecessor found, so results are
/// deterministic.
pub fn plan(map: &TopoMap, start: SubNodeId, goal: SubNodeId) -> Result<(Vec<SubNodeId>, u32)> {
    for s in [start, goal] {
        if !map.contains(s) {
            return Err(Error::Domain(format!("sub-node {s} is not in the map")));
        }
    }
    let mut dist: BTreeMap<SubNodeId, u32> = BTreeMap::new();
    let mut prev: BTreeMap<SubNodeId, SubNodeId> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start, 0);
    heap.push(Reverse((0u32, start)));
    while let Some(Reverse((d, s))) = heap.pop() {
        if dist.get(&s).is_some_and(|&best| d > best) {
            continue;
        }
        if s == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while let Some(&p) = prev.get(&cur) {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Ok((path, d));
        }
        for (n, c) in map.neighbors(s) {
            let nd = d + c;
            if dist.get(&n).is_none_or(|&old| nd < old) {
                dist.insert(n, nd);
                prev.insert(n, s);
                heap.push(Reverse((nd, n)));
            }
        }
    }
    Err(Error::NoPath {
        from: start.to_string(),
        to: goal.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegraph::SceneGraph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blank(cell: (i32, i32)) -> TopoNode {
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

    fn random_map(rng: &mut ChaCha8Rng) -> TopoMap {
        let n = rng.random_range(1..=10);
        let mut cells = Vec::new();
        while cells.len() < n {
            let c = (rng.random_range(0..4), rng.random_range(0..4));
            if !cells.contains(&c) {
                cells.push(c);
            }
        }
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let (ca, cb): ((i32, i32), (i32, i32)) = (cells[a], cells[b]);
                if (ca.0 == cb.0 || ca.1 == cb.1) && rng.random::<f64>() < 0.6 {
                    let cost = ((ca.0 - cb.0).abs() + (ca.1 - cb.1).abs()) as u32;
                    edges.push(TranslationEdge { a, b, cost });
                }
            }
        }
        TopoMap {
            nodes: cells.into_iter().map(blank).collect(),
            edges,
            rotation: RotationModel {
                full: rng.random(),
                cost: rng.random_range(1..=3),
            },
        }
    }

    /// Cheapest simple path by enumerating every simple path within a cost
    /// budget, raising the budget until the goal is reached.
    fn brute_force(map: &TopoMap, s: SubNodeId, goal: SubNodeId) -> Option<u32> {
        fn reaches(map: &TopoMap, s: SubNodeId, goal: SubNodeId, budget: u32, seen: &mut Vec<SubNodeId>) -> bool {
            if s == goal {
                return true;
            }
            seen.push(s);
            let found = map.neighbors(s).into_iter().any(|(n, c)| {
                c <= budget && !seen.contains(&n) && reaches(map, n, goal, budget - c, seen)
            });
            seen.pop();
            found
        }
        let total: u32 = map.edges.iter().map(|e| e.cost).sum::<u32>() + 3 * map.rotation.cost * map.nodes.len() as u32;
        (0..=total).find(|&b| reaches(map, s, goal, b, &mut vec![]))
    }

    #[test]
    fn dijkstra_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let map = random_map(&mut rng);
            let subs: Vec<SubNodeId> = map.sub_nodes().collect();
            let s = subs[rng.random_range(0..subs.len())];
            let g = subs[rng.random_range(0..subs.len())];
            match (plan(&map, s, g), brute_force(&map, s, g)) {
                (Ok((path, cost)), Some(best)) => {
                    assert_eq!(cost, best);
                    assert_eq!(map.path_cost(&path), Some(cost));
                    assert_eq!((path[0], *path.last().unwrap()), (s, g));
                }
                (Err(Error::NoPath { .. }), None) => {}
                (p, b) => panic!("planner {p:?} vs oracle {b:?}"),
            }
        }
    }

    #[test]
    fn single_place_rotations_only() {
        let map = TopoMap {
            nodes: vec![blank((0, 0))],
            edges: vec![],
            rotation: RotationModel::default(),
        };
        let (path, cost) = plan(&map, SubNodeId::new(0, Heading::East), SubNodeId::new(0, Heading::West)).unwrap();
        assert_eq!((path.len(), cost), (2, 1));
        let half = TopoMap {
            rotation: RotationModel { full: false, cost: 1 },
            ..map
        };
        let (_, cost) = plan(&half, SubNodeId::new(0, Heading::East), SubNodeId::new(0, Heading::West)).unwrap();
        assert_eq!(cost, 2);
        assert!(matches!(
            plan(&half, SubNodeId::new(0, Heading::East), SubNodeId::new(1, Heading::East)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn long_edge_cost_and_no_backward_move() {
        let map = TopoMap {
            nodes: vec![blank((0, 0)), blank((3, 0))],
            edges: vec![TranslationEdge { a: 0, b: 1, cost: 3 }],
            rotation: RotationModel::default(),
        };
        let east = plan(&map, SubNodeId::new(0, Heading::East), SubNodeId::new(1, Heading::East)).unwrap();
        assert_eq!(east.1, 3);
        // facing west the place lies behind: turn, move, turn back
        let west = plan(&map, SubNodeId::new(0, Heading::West), SubNodeId::new(1, Heading::West)).unwrap();
        assert_eq!(west.1, 5);
        let disconnected = TopoMap { edges: vec![], ..map };
        assert!(matches!(
            plan(&disconnected, SubNodeId::new(0, Heading::East), SubNodeId::new(1, Heading::East)),
            Err(Error::NoPath { .. })
        ));
    }

    #[test]
    fn actions_move_in_robot_frame() {
        let p = Pose::new(5, 5, Heading::North);
        assert_eq!(Action::Forward.apply(&p), Pose::new(5, 6, Heading::North));
        assert_eq!(Action::Leftward.apply(&p), Pose::new(4, 5, Heading::North));
        assert_eq!(Action::Rightward.apply(&p), Pose::new(6, 5, Heading::North));
        assert_eq!(Action::RotateRight90.apply(&p), Pose::new(5, 5, Heading::East));
    }
}
