use std::f64::consts::FRAC_PI_2;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Detection, ObjectInstance, Observation, Pose, WorldState};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, unit_gaussian, SeedHasher};
use crate::scenegraph::{extract_scene_graph, SceneGraph};

/// Weight of the state-dependent component in a procedural visual feature.
const STATE_WEIGHT: f64 = 0.25;

/// Pinhole camera mounted on the robot, looking along its heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    /// Horizontal and vertical field of view (square image).
    pub fov_deg: f64,
    pub image_size: u32,
    /// Objects whose center depth exceeds this are not detected.
    pub max_range: f64,
    pub height: f64,
    pub near: f64,
    /// Visual feature dimension `D_v`.
    pub feature_dim: usize,
    /// Standard deviation of optional pixel noise on box corners. Zero means
    /// ground-truth detections.
    #[serde(default)]
    pub noise_px: f64,
    #[serde(default)]
    pub noise_seed: u64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            fov_deg: 90.0,
            image_size: 224,
            max_range: 5.0,
            height: 1.0,
            near: 0.1,
            feature_dim: 64,
            noise_px: 0.0,
            noise_seed: 0,
        }
    }
}

impl CameraConfig {
    pub fn focal_px(&self) -> f64 {
        f64::from(self.image_size) / 2.0 / (self.fov_deg.to_radians() / 2.0).tan()
    }

    fn validate(&self) -> Result<()> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) || self.image_size < 2 || !(self.max_range > self.near) {
            return Err(Error::Config(format!("invalid camera configuration {self:?}")));
        }
        if self.near <= 0.0 || self.feature_dim == 0 || self.noise_px < 0.0 {
            return Err(Error::Config(format!("invalid camera configuration {self:?}")));
        }
        Ok(())
    }
}

/// Camera-frame coordinates `(depth, left, up)` of a world point.
fn to_camera(pose: &Pose, d: f64, camera_height: f64, p: [f64; 3]) -> [f64; 3] {
    let [x, y] = pose.position(d);
    let (s, c) = pose.heading.radians().sin_cos();
    let dx = p[0] - x;
    let dy = p[1] - y;
    [c * dx + s * dy, -s * dx + c * dy, p[2] - camera_height]
}

/// Render the detections visible from `pose` and attach their scene graph.
///
/// An object is detected when its box center lies inside the view frustum.
/// Its 2D box is the pixel-clipped hull of the eight projected corners.
pub fn render_observation(world: &WorldState, pose: &Pose, camera: &CameraConfig) -> Result<Observation> {
    camera.validate()?;
    if !world.is_reachable(pose) {
        return Err(Error::Domain(format!("pose {pose} is not reachable")));
    }
    let focal = camera.focal_px();
    let size = f64::from(camera.image_size);
    let half = size / 2.0;
    let max_px = size - 1.0;
    let tan_half = (camera.fov_deg.to_radians() / 2.0).tan();

    let mut detections = Vec::new();
    for obj in &world.objects {
        let [depth, left, up] = to_camera(pose, world.d, camera.height, obj.bbox.center);
        let in_frustum = depth > camera.near
            && depth <= camera.max_range
            && left.abs() <= depth * tan_half
            && up.abs() <= depth * tan_half;
        if !in_frustum {
            continue;
        }
        let (mut u1, mut v1, mut u2, mut v2) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for corner in obj.bbox.corners() {
            let [z, l, h] = to_camera(pose, world.d, camera.height, corner);
            let z = z.max(camera.near);
            let u = half - focal * l / z;
            let v = half - focal * h / z;
            u1 = u1.min(u);
            u2 = u2.max(u);
            v1 = v1.min(v);
            v2 = v2.max(v);
        }
        let mut bbox = [u1, v1, u2, v2];
        if camera.noise_px > 0.0 {
            let seed = derive_seed(
                camera.noise_seed,
                "detection_noise",
                &[pose.i as u64, pose.j as u64, u64::from(pose.heading.degrees()), obj.id as u64],
            );
            let mut rng = rng_from_seed(seed);
            let normal = Normal::new(0.0, camera.noise_px).map_err(|e| Error::Config(e.to_string()))?;
            for c in bbox.iter_mut() {
                *c += normal.sample(&mut rng);
            }
            if bbox[0] > bbox[2] {
                bbox.swap(0, 2);
            }
            if bbox[1] > bbox[3] {
                bbox.swap(1, 3);
            }
        }
        detections.push(Detection {
            object_id: obj.id,
            class_label: obj.class_label.clone(),
            bbox2d: clip_box(bbox, max_px),
            visual_feature: procedural_feature(obj, camera.feature_dim, world.d),
        });
    }

    let mut obs = Observation {
        pose: *pose,
        detections,
        scene_graph: SceneGraph::default(),
    };
    obs.scene_graph = extract_scene_graph(&obs, world)?;
    Ok(obs)
}

/// Clip to `[0, max_px]` keeping at least one pixel of width and height.
fn clip_box(b: [f64; 4], max_px: f64) -> [f64; 4] {
    let clip_axis = |lo: f64, hi: f64| {
        let lo = lo.clamp(0.0, max_px);
        let hi = hi.clamp(0.0, max_px);
        if hi - lo >= 1.0 {
            (lo, hi)
        } else if lo + 1.0 <= max_px {
            (lo, lo + 1.0)
        } else {
            (max_px - 1.0, max_px)
        }
    };
    let (u1, u2) = clip_axis(b[0], b[2]);
    let (v1, v2) = clip_axis(b[1], b[3]);
    [u1, v1, u2, v2]
}

/// Deterministic unit-norm stand-in for a CNN object feature.
///
/// The feature mixes an instance component keyed by `(class, id)` with a
/// smaller state component keyed by texture and the object's pose quantized
/// to the grid cell and to quarter turns.
pub fn procedural_feature(object: &ObjectInstance, dim: usize, d: f64) -> Vec<f64> {
    let base_seed = SeedHasher::new("feature.base")
        .str(&object.class_label)
        .u64(object.id as u64)
        .finish();
    let c = object.bbox.center;
    let quarter = ((object.bbox.yaw / FRAC_PI_2).round() as i64).rem_euclid(4);
    let state_seed = SeedHasher::new("feature.state")
        .str(&object.class_label)
        .u64(object.id as u64)
        .u64(u64::from(object.texture_id))
        .i64((c[0] / d).round() as i64)
        .i64((c[1] / d).round() as i64)
        .i64((c[2] / d).round() as i64)
        .i64(quarter)
        .finish();
    let base = unit_gaussian(base_seed, dim);
    let state = unit_gaussian(state_seed, dim);
    let mut v: Vec<f64> = base.iter().zip(&state).map(|(b, s)| b + STATE_WEIGHT * s).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}
