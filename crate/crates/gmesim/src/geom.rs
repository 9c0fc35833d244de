//! Spatial vectors and four-vectors on flat spacetime.
//!
//! Metric signature is (−,+,+,+): `η = diag(−1, 1, 1, 1)`, so the Minkowski
//! product of two normalized four-velocities is ≤ −1, with equality for
//! comoving observers.

use serde::{Deserialize, Serialize};

/// Spatial 3-vector (internal units, c = 1).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector in the same direction. Returns `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 {
            Some(self.scale(1.0 / n))
        } else {
            None
        }
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Contravariant four-vector `(t-component, spatial part)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourVector {
    pub t: f64,
    pub space: Vec3,
}

impl FourVector {
    pub fn new(t: f64, space: Vec3) -> Self {
        FourVector { t, space }
    }

    /// Minkowski product `η_{μν} a^μ b^ν = −a⁰b⁰ + a·b`.
    pub fn minkowski_dot(self, o: FourVector) -> f64 {
        -self.t * o.t + self.space.dot(o.space)
    }
}

/// Closest distance between the segments `[a0, a1]` and `[b0, b1]`.
///
/// Standard clamped closest-point computation; degenerate segments (points)
/// are handled by the clamping. Used for causal-support analysis, where the
/// spatial support of every worldline family in this crate is a segment.
pub fn segment_distance(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let a = d1.norm_sq();
    let e = d2.norm_sq();
    let f = d2.dot(r);
    let (mut s, mut t);
    let tiny = 1e-300;
    if a <= tiny && e <= tiny {
        return r.norm();
    }
    if a <= tiny {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= tiny {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            s = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    let p = a0 + d1.scale(s);
    let q = b0 + d2.scale(t);
    (p - q).norm()
}

/// Largest distance between two segments; attained at endpoints by convexity.
pub fn segment_max_distance(a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
    [(a0, b0), (a0, b1), (a1, b0), (a1, b1)]
        .into_iter()
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_signature() {
        let e0 = FourVector::new(1.0, Vec3::ZERO);
        let ex = FourVector::new(0.0, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(e0.minkowski_dot(e0), -1.0);
        assert_eq!(ex.minkowski_dot(ex), 1.0);
        assert_eq!(e0.minkowski_dot(ex), 0.0);
    }

    #[test]
    fn segment_distance_parallel_and_crossing() {
        // Two parallel unit segments one apart.
        let d = segment_distance(
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        );
        assert!((d - 1.0).abs() < 1e-14);
        // Crossing segments touch.
        let d = segment_distance(
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        );
        assert!(d.abs() < 1e-14);
        // Point-to-point degenerate case.
        let d = segment_distance(Vec3::ZERO, Vec3::ZERO, Vec3::new(0.0, 3.0, 4.0), Vec3::new(0.0, 3.0, 4.0));
        assert!((d - 5.0).abs() < 1e-14);
    }

    #[test]
    fn segment_max_distance_at_endpoints() {
        let d = segment_max_distance(
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        );
        assert!((d - 2.0f64.sqrt()).abs() < 1e-14);
    }
}
