use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::catalog::{default_catalog, ClassSpec, Placement};
use super::{Dynamics, ObjectInstance, WorldState};
use crate::error::{Error, Result};
use crate::geometry::Box3;
use crate::rng::{derive_seed, rng_from_seed};

/// Placement attempts before giving up on one object.
pub(crate) const PLACEMENT_RETRIES: usize = 100;
const WALL_MOUNT_HEIGHT: f64 = 1.4;
/// Static objects whose bottom is above this height do not block the robot.
const BLOCKING_HEIGHT: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    /// Room extents `[x, y, z]` in meters.
    pub bounds: [f64; 3],
    /// Grid cell length.
    pub d: f64,
    pub n_objects: usize,
    pub max_instances: usize,
    pub catalog: Vec<ClassSpec>,
    pub static_fraction: f64,
    pub low_dynamic_fraction: f64,
    /// Minimum distance between a reachable cell and a wall.
    pub wall_margin: f64,
    pub robot_radius: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            bounds: [5.0, 5.0, 2.5],
            d: 0.25,
            n_objects: 30,
            max_instances: 32,
            catalog: default_catalog(),
            static_fraction: 0.50,
            low_dynamic_fraction: 0.30,
            wall_margin: 0.5,
            robot_radius: 0.2,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bounds.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Config(format!("bounds must be positive, got {:?}", self.bounds)));
        }
        if !(self.d > 0.0) {
            return Err(Error::Config(format!("cell length must be positive, got {}", self.d)));
        }
        if self.max_instances == 0 {
            return Err(Error::Config("max_instances must be at least 1".into()));
        }
        if self.n_objects == 0 {
            return Err(Error::Config("n_objects must be at least 1".into()));
        }
        if self.catalog.is_empty() {
            return Err(Error::Config("empty class catalog".into()));
        }
        for c in &self.catalog {
            if (c.supporter || c.container) && c.dynamics != Dynamics::Static {
                return Err(Error::Config(format!(
                    "class {} is a supporter/container but not static",
                    c.label
                )));
            }
        }
        Ok(())
    }

    fn composition(&self) -> [usize; 3] {
        let n = self.n_objects.min(self.max_instances);
        let n_static = ((n as f64 * self.static_fraction).ceil() as usize).clamp(1, n);
        let n_low = ((n as f64 * self.low_dynamic_fraction).round() as usize).min(n - n_static);
        [n_static, n_low, n - n_static - n_low]
    }
}

/// Generate a world deterministically from `(seed, config)`.
pub fn gen_world(seed: u64, config: &WorldConfig) -> Result<WorldState> {
    config.validate()?;
    let mut rng = rng_from_seed(derive_seed(seed, "gen_world", &[]));
    let placer = Placer {
        bounds: config.bounds,
    };

    let mut objects: Vec<ObjectInstance> = Vec::new();
    let mut support_pairs = BTreeSet::new();
    let categories = [Dynamics::Static, Dynamics::LowDynamic, Dynamics::HighDynamic];

    for (cat, &count) in categories.iter().zip(config.composition().iter()) {
        let classes: Vec<&ClassSpec> = config.catalog.iter().filter(|c| c.dynamics == *cat).collect();
        if count > 0 && classes.is_empty() {
            return Err(Error::Config(format!("catalog has no {cat:?} classes")));
        }
        for k in 0..count {
            // lead with a supporter so surface objects have somewhere to go
            let spec = if *cat == Dynamics::Static && k == 0 {
                let supporters: Vec<&&ClassSpec> = classes.iter().filter(|c| c.supporter).collect();
                if supporters.is_empty() {
                    classes[rng.random_range(0..classes.len())]
                } else {
                    supporters[rng.random_range(0..supporters.len())]
                }
            } else {
                classes[rng.random_range(0..classes.len())]
            };
            let id = objects.len();
            // an object that finds no free spot is left out of the room
            let Some((bbox, support)) = placer.place(&mut rng, spec, &objects, config) else {
                continue;
            };
            if let Some(s) = support {
                support_pairs.insert((s, id));
            }
            objects.push(ObjectInstance {
                id,
                class_label: spec.label.clone(),
                dynamics: spec.dynamics,
                bbox,
                texture_id: 0,
            });
        }
    }

    let reachable = reachable_cells(&objects, config);
    if reachable.is_empty() {
        return Err(Error::Config("world has no reachable cells".into()));
    }

    let world = WorldState {
        objects,
        support_pairs,
        bounds: config.bounds,
        reachable,
        d: config.d,
        max_instances: config.max_instances,
    };
    world.validate()?;
    Ok(world)
}

fn reachable_cells(objects: &[ObjectInstance], config: &WorldConfig) -> BTreeSet<(i32, i32)> {
    let ni = (config.bounds[0] / config.d + 1e-9).floor() as i32;
    let nj = (config.bounds[1] / config.d + 1e-9).floor() as i32;
    let blockers: Vec<([f64; 3], [f64; 3])> = objects
        .iter()
        .filter(|o| o.dynamics == Dynamics::Static && o.bbox.bottom() < BLOCKING_HEIGHT)
        .map(|o| o.bbox.aabb())
        .collect();
    let m = config.wall_margin;
    let r = config.robot_radius;
    let mut cells = BTreeSet::new();
    for i in 0..=ni {
        for j in 0..=nj {
            let x = f64::from(i) * config.d;
            let y = f64::from(j) * config.d;
            if x < m - 1e-9 || y < m - 1e-9 || x > config.bounds[0] - m + 1e-9 || y > config.bounds[1] - m + 1e-9 {
                continue;
            }
            let blocked = blockers
                .iter()
                .any(|(lo, hi)| x > lo[0] - r && x < hi[0] + r && y > lo[1] - r && y < hi[1] + r);
            if !blocked {
                cells.insert((i, j));
            }
        }
    }
    cells
}

/// Rejection-sampling object placement inside a room.
pub(crate) struct Placer {
    pub bounds: [f64; 3],
}

impl Placer {
    /// Place an instance of `spec`, avoiding `others`. Returns the box and the
    /// id of the supporting object, if any.
    pub fn place(
        &self,
        rng: &mut ChaCha8Rng,
        spec: &ClassSpec,
        others: &[ObjectInstance],
        config: &WorldConfig,
    ) -> Option<(Box3, Option<usize>)> {
        let supporters: Vec<&ObjectInstance> = others
            .iter()
            .filter(|o| class_of(config, &o.class_label).is_some_and(|c| c.supporter))
            .collect();
        let containers: Vec<&ObjectInstance> = others
            .iter()
            .filter(|o| class_of(config, &o.class_label).is_some_and(|c| c.container))
            .collect();

        for _ in 0..PLACEMENT_RETRIES {
            let attempt = match spec.placement {
                Placement::Floor => self.floor(rng, spec).map(|b| (b, None, None)),
                Placement::Wall => self.wall(rng, spec).map(|b| (b, None, None)),
                Placement::AgainstWall => self.against_wall(rng, spec).map(|b| (b, None, None)),
                // crowded supporters push surface objects to the floor
                Placement::Surface if !supporters.is_empty() && rng.random::<f64>() < 0.8 => {
                    let s = supporters[rng.random_range(0..supporters.len())];
                    self.on_surface(rng, spec.half_extents, s).map(|b| (b, Some(s.id), None))
                }
                Placement::Surface => self.floor(rng, spec).map(|b| (b, None, None)),
                Placement::Small => {
                    let u: f64 = rng.random();
                    if u < 0.6 && !supporters.is_empty() {
                        let s = supporters[rng.random_range(0..supporters.len())];
                        self.on_surface(rng, spec.half_extents, s).map(|b| (b, Some(s.id), None))
                    } else if u < 0.85 && !containers.is_empty() {
                        let c = containers[rng.random_range(0..containers.len())];
                        self.inside(rng, spec.half_extents, c).map(|b| (b, None, Some(c.id)))
                    } else {
                        self.floor(rng, spec).map(|b| (b, None, None))
                    }
                }
            };
            let Some((bbox, support, container)) = attempt else {
                continue;
            };
            if !self.in_bounds(&bbox) {
                continue;
            }
            let clash = others
                .iter()
                .filter(|o| Some(o.id) != container)
                .any(|o| o.bbox.aabb_overlaps(&bbox));
            if !clash {
                return Some((bbox, support));
            }
        }
        None
    }

    pub fn in_bounds(&self, b: &Box3) -> bool {
        let (lo, hi) = b.aabb();
        (0..3).all(|k| lo[k] >= -1e-9 && hi[k] <= self.bounds[k] + 1e-9)
    }

    fn floor(&self, rng: &mut ChaCha8Rng, spec: &ClassSpec) -> Option<Box3> {
        let yaw = if spec.dynamics == Dynamics::Static {
            quarter_turn(rng, 2)
        } else {
            rng.random_range(0.0..TAU)
        };
        let h = spec.half_extents;
        let x = rng.random_range(0.0..self.bounds[0]);
        let y = rng.random_range(0.0..self.bounds[1]);
        Box3::new([x, y, h[2]], h, yaw).ok()
    }

    fn wall(&self, rng: &mut ChaCha8Rng, spec: &ClassSpec) -> Option<Box3> {
        let h = spec.half_extents;
        let z = WALL_MOUNT_HEIGHT.min(self.bounds[2] - h[2]).max(h[2]);
        let side = rng.random_range(0..4);
        let (center, yaw) = match side {
            0 => ([rng.random_range(0.0..self.bounds[0]), h[1], z], 0.0),
            1 => ([rng.random_range(0.0..self.bounds[0]), self.bounds[1] - h[1], z], 0.0),
            2 => ([h[1], rng.random_range(0.0..self.bounds[1]), z], FRAC_PI_2),
            _ => ([self.bounds[0] - h[1], rng.random_range(0.0..self.bounds[1]), z], FRAC_PI_2),
        };
        Box3::new(center, h, yaw).ok()
    }

    fn against_wall(&self, rng: &mut ChaCha8Rng, spec: &ClassSpec) -> Option<Box3> {
        let h = spec.half_extents;
        let side = rng.random_range(0..4);
        let (center, yaw) = match side {
            0 => ([sample_between(rng, h[0], self.bounds[0] - h[0]), h[1], h[2]], 0.0),
            1 => ([sample_between(rng, h[0], self.bounds[0] - h[0]), self.bounds[1] - h[1], h[2]], 0.0),
            2 => ([h[1], sample_between(rng, h[0], self.bounds[1] - h[0]), h[2]], FRAC_PI_2),
            _ => ([self.bounds[0] - h[1], sample_between(rng, h[0], self.bounds[1] - h[0]), h[2]], FRAC_PI_2),
        };
        Box3::new(center, h, yaw).ok()
    }

    /// Rest a box on the top face of `support`; the box footprint stays inside the face.
    pub fn on_surface(&self, rng: &mut ChaCha8Rng, half: [f64; 3], support: &ObjectInstance) -> Option<Box3> {
        let yaw = quarter_turn(rng, 4);
        let (fx, fy) = footprint_half(half, yaw);
        let (lo, hi) = support.bbox.aabb();
        if hi[0] - lo[0] < 2.0 * fx || hi[1] - lo[1] < 2.0 * fy {
            return None;
        }
        let x = sample_between(rng, lo[0] + fx, hi[0] - fx);
        let y = sample_between(rng, lo[1] + fy, hi[1] - fy);
        Box3::new([x, y, support.bbox.top() + half[2]], half, yaw).ok()
    }

    fn inside(&self, rng: &mut ChaCha8Rng, half: [f64; 3], container: &ObjectInstance) -> Option<Box3> {
        let yaw = quarter_turn(rng, 4);
        let (fx, fy) = footprint_half(half, yaw);
        let (lo, hi) = container.bbox.aabb();
        if hi[0] - lo[0] < 2.0 * fx || hi[1] - lo[1] < 2.0 * fy || hi[2] - lo[2] < 2.0 * half[2] {
            return None;
        }
        let x = sample_between(rng, lo[0] + fx, hi[0] - fx);
        let y = sample_between(rng, lo[1] + fy, hi[1] - fy);
        let z = sample_between(rng, lo[2] + half[2], hi[2] - half[2]);
        Box3::new([x, y, z], half, yaw).ok()
    }
}

pub(crate) fn class_of<'a>(config: &'a WorldConfig, label: &str) -> Option<&'a ClassSpec> {
    config.catalog.iter().find(|c| c.label == label)
}

/// Uniform multiple of 90 degrees among the first `n` quarter turns.
pub(crate) fn quarter_turn(rng: &mut ChaCha8Rng, n: u32) -> f64 {
    f64::from(rng.random_range(0..n)) * FRAC_PI_2
}

/// World-axis footprint half-widths of a box rotated by a quarter-turn yaw.
pub(crate) fn footprint_half(half: [f64; 3], yaw: f64) -> (f64, f64) {
    let odd = ((yaw / FRAC_PI_2).round() as i64).rem_euclid(2) == 1;
    if odd {
        (half[1], half[0])
    } else {
        (half[0], half[1])
    }
}

fn sample_between(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}
