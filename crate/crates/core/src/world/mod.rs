//! Synthetic indoor worlds with object-level dynamics.
//!
//! A [`WorldState`] is a room holding oriented 3D object boxes plus the set of
//! grid cells the robot may occupy. Objects belong to one of three dynamics
//! classes: static objects never move, low-dynamic objects move locally
//! (within their bounding-sphere radius) and high-dynamic objects can be
//! re-placed anywhere in the room. [`render_observation`] stands in for a
//! camera plus object detector: it projects visible boxes into a pinhole
//! image and attaches a procedural per-object visual feature.

mod camera;
mod catalog;
mod dynamics;
mod generate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Box3;
use crate::scenegraph::SceneGraph;

pub use camera::{procedural_feature, render_observation, CameraConfig};
pub use catalog::{default_catalog, ClassSpec, Placement};
pub use dynamics::apply_dynamics;
pub use generate::{gen_world, WorldConfig};

/// One of the four robot headings, counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Heading {
    East,
    North,
    West,
    South,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::East, Heading::North, Heading::West, Heading::South];

    pub fn from_quarter_turns(k: i32) -> Self {
        Self::ALL[k.rem_euclid(4) as usize]
    }

    pub fn quarter_turns(self) -> i32 {
        self as i32
    }

    pub fn degrees(self) -> u16 {
        (self as u16) * 90
    }

    pub fn radians(self) -> f64 {
        f64::from(self.degrees()).to_radians()
    }

    pub fn rotated(self, quarter_turns: i32) -> Self {
        Self::from_quarter_turns(self.quarter_turns() + quarter_turns)
    }

    /// Grid step taken by moving forward.
    pub fn forward(self) -> (i32, i32) {
        match self {
            Heading::East => (1, 0),
            Heading::North => (0, 1),
            Heading::West => (-1, 0),
            Heading::South => (0, -1),
        }
    }

    /// Grid step taken by moving leftward (sideways, heading unchanged).
    pub fn left(self) -> (i32, i32) {
        self.rotated(1).forward()
    }
}

impl TryFrom<u16> for Heading {
    type Error = Error;

    fn try_from(deg: u16) -> Result<Self> {
        match deg {
            0 => Ok(Heading::East),
            90 => Ok(Heading::North),
            180 => Ok(Heading::West),
            270 => Ok(Heading::South),
            other => Err(Error::Domain(format!("heading must be 0/90/180/270, got {other}"))),
        }
    }
}

impl From<Heading> for u16 {
    fn from(h: Heading) -> u16 {
        h.degrees()
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

/// Grid cell plus heading. Metric position is `(i * d, j * d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub i: i32,
    pub j: i32,
    pub heading: Heading,
}

impl Pose {
    pub fn new(i: i32, j: i32, heading: Heading) -> Self {
        Self { i, j, heading }
    }

    pub fn cell(&self) -> (i32, i32) {
        (self.i, self.j)
    }

    pub fn position(&self, d: f64) -> [f64; 2] {
        [f64::from(self.i) * d, f64::from(self.j) * d]
    }

    pub fn offset(&self, di: i32, dj: i32) -> Self {
        Self::new(self.i + di, self.j + dj, self.heading)
    }

    pub fn with_heading(&self, heading: Heading) -> Self {
        Self::new(self.i, self.j, heading)
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.heading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Static,
    LowDynamic,
    HighDynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: usize,
    pub class_label: String,
    pub dynamics: Dynamics,
    #[serde(rename = "box")]
    pub bbox: Box3,
    pub texture_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub objects: Vec<ObjectInstance>,
    /// `(i, j)`: object `j` rests on object `i`.
    pub support_pairs: BTreeSet<(usize, usize)>,
    /// Room extents in meters; the room spans `[0, bounds[k]]` on each axis.
    pub bounds: [f64; 3],
    pub reachable: BTreeSet<(i32, i32)>,
    /// Grid cell length in meters.
    pub d: f64,
    /// Maximum instance count `M`.
    pub max_instances: usize,
}

impl WorldState {
    pub fn object(&self, id: usize) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn is_reachable(&self, pose: &Pose) -> bool {
        self.reachable.contains(&pose.cell())
    }

    /// All reachable poses, in cell-then-heading order.
    pub fn reachable_poses(&self) -> Vec<Pose> {
        self.reachable
            .iter()
            .flat_map(|&(i, j)| Heading::ALL.iter().map(move |&h| Pose::new(i, j, h)))
            .collect()
    }

    pub fn inside_bounds(&self, b: &Box3) -> bool {
        let (lo, hi) = b.aabb();
        (0..3).all(|k| lo[k] >= -1e-9 && hi[k] <= self.bounds[k] + 1e-9)
    }

    /// Check the structural invariants of the world.
    pub fn validate(&self) -> Result<()> {
        if self.objects.len() > self.max_instances {
            return Err(Error::Domain(format!(
                "{} objects exceed M = {}",
                self.objects.len(),
                self.max_instances
            )));
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if o.id >= self.max_instances || !ids.insert(o.id) {
                return Err(Error::Domain(format!("bad or duplicate object id {}", o.id)));
            }
        }
        for &(a, b) in &self.support_pairs {
            if !ids.contains(&a) || !ids.contains(&b) {
                return Err(Error::Domain(format!("support pair ({a},{b}) names a missing object")));
            }
        }
        let (ni, nj) = self.grid_extent();
        if self
            .reachable
            .iter()
            .any(|&(i, j)| i < 0 || j < 0 || i > ni || j > nj)
        {
            return Err(Error::Domain("reachable cell outside bounds".into()));
        }
        Ok(())
    }

    /// Largest grid indices whose positions lie inside the room.
    pub fn grid_extent(&self) -> (i32, i32) {
        (
            (self.bounds[0] / self.d + 1e-9).floor() as i32,
            (self.bounds[1] / self.d + 1e-9).floor() as i32,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: WorldState = serde_json::from_str(s)?;
        w.validate()?;
        Ok(w)
    }
}

/// A detected object as seen from one pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub object_id: usize,
    pub class_label: String,
    /// `(u1, v1, u2, v2)` pixel corners with `u1 < u2`, `v1 < v2`.
    pub bbox2d: [f64; 4],
    pub visual_feature: Vec<f64>,
}

/// Everything the localizer sees at one pose: detections plus their scene graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub pose: Pose,
    pub detections: Vec<Detection>,
    pub scene_graph: SceneGraph,
}

impl Observation {
    pub fn detection(&self, object_id: usize) -> Option<&Detection> {
        self.detections.iter().find(|d| d.object_id == object_id)
    }
}
