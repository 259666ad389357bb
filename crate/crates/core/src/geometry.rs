//! Oriented 3D boxes (yaw-only rotation about the vertical axis).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for closed-set containment tests.
pub const CONTAINMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    /// Rotation about +z in radians.
    pub yaw: f64,
}

impl Box3 {
    pub fn new(center: [f64; 3], half_extents: [f64; 3], yaw: f64) -> Result<Self> {
        if half_extents.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::Domain(format!(
                "box half-extents must be positive, got {half_extents:?}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) || !yaw.is_finite() {
            return Err(Error::Domain("box center and yaw must be finite".into()));
        }
        Ok(Self {
            center,
            half_extents,
            yaw,
        })
    }

    /// Axis-aligned box.
    pub fn aligned(center: [f64; 3], half_extents: [f64; 3]) -> Result<Self> {
        Self::new(center, half_extents, 0.0)
    }

    /// Radius of the smallest sphere enclosing the box.
    pub fn bounding_radius(&self) -> f64 {
        let [a, b, c] = self.half_extents;
        (a * a + b * b + c * c).sqrt()
    }

    pub fn center_distance(&self, other: &Box3) -> f64 {
        let d: f64 = (0..3)
            .map(|k| (self.center[k] - other.center[k]).powi(2))
            .sum();
        d.sqrt()
    }

    pub fn corners(&self) -> [[f64; 3]; 8] {
        let (s, c) = self.yaw.sin_cos();
        let [hx, hy, hz] = self.half_extents;
        let mut out = [[0.0; 3]; 8];
        for (k, corner) in out.iter_mut().enumerate() {
            let lx = if k & 1 == 0 { -hx } else { hx };
            let ly = if k & 2 == 0 { -hy } else { hy };
            let lz = if k & 4 == 0 { -hz } else { hz };
            *corner = [
                self.center[0] + c * lx - s * ly,
                self.center[1] + s * lx + c * ly,
                self.center[2] + lz,
            ];
        }
        out
    }

    /// Express a world point in the box's local frame.
    pub fn to_local(&self, p: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.yaw.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        [c * dx + s * dy, -s * dx + c * dy, p[2] - self.center[2]]
    }

    /// Closed-set point containment; points on a face count as inside.
    pub fn contains_point(&self, p: [f64; 3]) -> bool {
        let l = self.to_local(p);
        (0..3).all(|k| l[k].abs() <= self.half_extents[k] + CONTAINMENT_TOL)
    }

    /// True when all eight corners of `other` lie inside `self`.
    pub fn contains_box(&self, other: &Box3) -> bool {
        other.corners().iter().all(|&p| self.contains_point(p))
    }

    /// Axis-aligned bounds `(min, max)` of the rotated box.
    pub fn aabb(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in self.corners() {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    pub fn bottom(&self) -> f64 {
        self.center[2] - self.half_extents[2]
    }

    pub fn top(&self) -> f64 {
        self.center[2] + self.half_extents[2]
    }

    /// Strict interior overlap of the axis-aligned bounds; touching faces do not count.
    pub fn aabb_overlaps(&self, other: &Box3) -> bool {
        let (a_lo, a_hi) = self.aabb();
        let (b_lo, b_hi) = other.aabb();
        (0..3).all(|k| a_lo[k] < b_hi[k] - 1e-9 && b_lo[k] < a_hi[k] - 1e-9)
    }
}
