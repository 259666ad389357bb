use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use rand::Rng;

use super::catalog::{default_catalog, ClassSpec, Placement};
use super::generate::{class_of, Placer, WorldConfig, PLACEMENT_RETRIES};
use super::{Dynamics, ObjectInstance, WorldState};
use crate::geometry::Box3;
use crate::rng::{derive_seed, rng_from_seed};

/// Texture states a high-dynamic object can switch between.
const TEXTURE_STATES: u32 = 4;

/// Apply one round of object dynamics using the default class catalog.
pub fn apply_dynamics(world: &WorldState, seed: u64) -> WorldState {
    apply_dynamics_with_catalog(world, seed, &default_catalog())
}

/// Apply one round of object dynamics.
///
/// Static objects keep their boxes bit-for-bit. Low-dynamic objects move
/// to a new center within their bounding-sphere radius of the old one,
/// staying on their supporter if they have one. High-dynamic objects are
/// re-placed anywhere in the room and may change texture state. Placement
/// uses rejection sampling; when every attempt collides the old pose is kept.
pub fn apply_dynamics_with_catalog(world: &WorldState, seed: u64, catalog: &[ClassSpec]) -> WorldState {
    let mut rng = rng_from_seed(derive_seed(seed, "apply_dynamics", &[]));
    let config = WorldConfig {
        bounds: world.bounds,
        d: world.d,
        max_instances: world.max_instances,
        catalog: catalog.to_vec(),
        ..WorldConfig::default()
    };
    let placer = Placer { bounds: world.bounds };
    let mut next = world.clone();

    for idx in 0..next.objects.len() {
        let obj = next.objects[idx].clone();
        match obj.dynamics {
            Dynamics::Static => {}
            Dynamics::LowDynamic => {
                let supporter = next
                    .support_pairs
                    .iter()
                    .find(|&&(_, t)| t == obj.id)
                    .map(|&(s, _)| s);
                let others: Vec<&ObjectInstance> = next.objects.iter().filter(|o| o.id != obj.id).collect();
                let radius = obj.bbox.bounding_radius();
                for _ in 0..PLACEMENT_RETRIES {
                    let rho = radius * rng.random::<f64>().sqrt();
                    let phi = rng.random_range(0.0..TAU);
                    let yaw = if supporter.is_some() {
                        obj.bbox.yaw + f64::from(rng.random_range(-1i32..=1)) * FRAC_PI_2
                    } else {
                        obj.bbox.yaw + rng.random_range(-FRAC_PI_4..FRAC_PI_4)
                    };
                    let c = obj.bbox.center;
                    let Ok(candidate) =
                        Box3::new([c[0] + rho * phi.cos(), c[1] + rho * phi.sin(), c[2]], obj.bbox.half_extents, yaw)
                    else {
                        continue;
                    };
                    if !placer.in_bounds(&candidate) {
                        continue;
                    }
                    if let Some(s) = supporter {
                        let (lo, hi) = next.objects[s].bbox.aabb();
                        let (clo, chi) = candidate.aabb();
                        if clo[0] < lo[0] - 1e-9 || clo[1] < lo[1] - 1e-9 || chi[0] > hi[0] + 1e-9 || chi[1] > hi[1] + 1e-9 {
                            continue;
                        }
                    }
                    let clash = others
                        .iter()
                        .filter(|o| !o.bbox.contains_box(&obj.bbox))
                        .any(|o| o.bbox.aabb_overlaps(&candidate));
                    if !clash {
                        next.objects[idx].bbox = candidate;
                        break;
                    }
                }
            }
            Dynamics::HighDynamic => {
                let spec = class_of(&config, &obj.class_label).cloned().unwrap_or_else(|| ClassSpec {
                    label: obj.class_label.clone(),
                    dynamics: Dynamics::HighDynamic,
                    half_extents: obj.bbox.half_extents,
                    placement: Placement::Floor,
                    supporter: false,
                    container: false,
                });
                let others: Vec<ObjectInstance> =
                    next.objects.iter().filter(|o| o.id != obj.id).cloned().collect();
                if let Some((bbox, support)) = placer.place(&mut rng, &spec, &others, &config) {
                    next.objects[idx].bbox = bbox;
                    next.support_pairs.retain(|&(_, t)| t != obj.id);
                    if let Some(s) = support {
                        next.support_pairs.insert((s, obj.id));
                    }
                }
                if rng.random::<f64>() < 0.5 {
                    next.objects[idx].texture_id = rng.random_range(0..TEXTURE_STATES);
                }
            }
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::gen_world;

    fn world(seed: u64) -> WorldState {
        gen_world(seed, &WorldConfig::default()).unwrap()
    }

    #[test]
    fn static_only_world_unchanged() {
        let mut w = world(1);
        w.objects.retain(|o| o.dynamics == Dynamics::Static);
        w.support_pairs.clear();
        assert_eq!(apply_dynamics(&w, 5), w);
    }

    #[test]
    fn deterministic_per_seed() {
        let w = world(2);
        assert_eq!(apply_dynamics(&w, 9), apply_dynamics(&w, 9));
        assert_ne!(apply_dynamics(&w, 9), apply_dynamics(&w, 10));
    }

    #[test]
    fn low_dynamic_displacement_bounded() {
        for seed in 0..30 {
            let w = world(seed);
            let moved = apply_dynamics(&w, seed + 100);
            for (a, b) in w.objects.iter().zip(&moved.objects) {
                match a.dynamics {
                    Dynamics::Static => assert_eq!(a.bbox, b.bbox),
                    Dynamics::LowDynamic => {
                        assert!(a.bbox.center_distance(&b.bbox) <= a.bbox.bounding_radius() + 1e-9)
                    }
                    Dynamics::HighDynamic => {}
                }
                assert!(moved.inside_bounds(&b.bbox));
            }
            moved.validate().unwrap();
        }
    }

    #[test]
    fn support_pairs_stay_physical() {
        for seed in 0..30 {
            let moved = apply_dynamics(&world(seed), seed);
            for &(s, t) in &moved.support_pairs {
                assert!((moved.objects[s].bbox.top() - moved.objects[t].bbox.bottom()).abs() < 1e-9);
            }
        }
    }
}
