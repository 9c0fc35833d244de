//! Worldlines and branch configurations.
//!
//! Trajectories are closed form so the retarded-time solver and the kernel
//! quadratures can evaluate positions and velocities anywhere without
//! interpolation error. Three families are supported:
//!
//! * `Static` — at rest at a fixed point,
//! * `Uniform` — constant subluminal drift (used mainly by oracles and the
//!   slow-motion checks),
//! * `SplitReturn` — at rest at `base`, displaced to `base + offset` through a
//!   C² quintic-smoothstep ramp of duration `ramp`, held, and brought back by
//!   the mirrored ramp at the end of the window. This is the interferometer
//!   arm: branches separate, hold, and recombine so the branch basis closes.
//!
//! Outside its window a `SplitReturn` worldline rests at `base` (the natural
//! C² extension); `Static` and `Uniform` extend to all times. Every family
//! keeps `|ż| < 1`, enforced at construction, so four-velocities are always
//! normalizable: `u^μ = γ(1, ż)` with `η u u = −1` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{GmeError, GmeResult};
use crate::geom::{FourVector, Vec3};

/// Quintic smoothstep `6τ⁵ − 15τ⁴ + 10τ³`: C² when glued to constants at
/// `τ = 0, 1`. Its slope peaks at `s'(½) = 15/8`.
fn smoothstep5(tau: f64) -> f64 {
    tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
}

fn smoothstep5_deriv(tau: f64) -> f64 {
    30.0 * tau * tau * (1.0 - tau) * (1.0 - tau)
}

/// Peak of `s'` for the quintic smoothstep.
const SMOOTHSTEP5_MAX_SLOPE: f64 = 15.0 / 8.0;

/// Motion profile of a single branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Motion {
    Static {
        position: Vec3,
    },
    Uniform {
        position0: Vec3,
        velocity: Vec3,
    },
    SplitReturn {
        base: Vec3,
        offset: Vec3,
        /// Ramp duration of each smoothstep leg.
        ramp: f64,
        /// Total window; the return ramp occupies `[window − ramp, window]`.
        window: f64,
    },
}

/// A massive pointlike body on a closed-form trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Worldline {
    /// Mass in internal (inverse-length) units; strictly positive.
    pub mass: f64,
    pub motion: Motion,
}

impl Worldline {
    pub fn at_rest(mass: f64, position: Vec3) -> GmeResult<Self> {
        Worldline { mass, motion: Motion::Static { position } }.validated()
    }

    pub fn uniform(mass: f64, position0: Vec3, velocity: Vec3) -> GmeResult<Self> {
        Worldline { mass, motion: Motion::Uniform { position0, velocity } }.validated()
    }

    /// Split–hold–recombine branch: rests at `base`, moves to `base + offset`
    /// over `[0, ramp]`, holds, and returns over `[window − ramp, window]`.
    pub fn split_return(
        mass: f64,
        base: Vec3,
        offset: Vec3,
        ramp: f64,
        window: f64,
    ) -> GmeResult<Self> {
        Worldline { mass, motion: Motion::SplitReturn { base, offset, ramp, window } }.validated()
    }

    fn validated(self) -> GmeResult<Self> {
        let mut violations = Vec::new();
        if !(self.mass.is_finite() && self.mass > 0.0) {
            violations.push(format!("mass must be positive and finite, got {}", self.mass));
        }
        match self.motion {
            Motion::Static { .. } => {}
            Motion::Uniform { velocity, .. } => {
                let v = velocity.norm();
                if !(v < 1.0) {
                    violations.push(format!("drift speed must satisfy |v| < 1, got {v}"));
                }
            }
            Motion::SplitReturn { offset, ramp, window, .. } => {
                if !(ramp.is_finite() && ramp > 0.0) {
                    violations.push(format!("ramp must be positive and finite, got {ramp}"));
                }
                if !(window.is_finite() && window > 0.0) {
                    violations.push(format!("window must be positive and finite, got {window}"));
                }
                if ramp > 0.0 && window > 0.0 && 2.0 * ramp > window {
                    violations.push(format!(
                        "ramps must fit in the window: 2·ramp = {} > window = {}",
                        2.0 * ramp,
                        window
                    ));
                }
                let peak = SMOOTHSTEP5_MAX_SLOPE * offset.norm() / ramp;
                if ramp > 0.0 && !(peak < 1.0) {
                    violations.push(format!(
                        "ramp is superluminal: peak speed 15|offset|/(8·ramp) = {peak} ≥ 1"
                    ));
                }
            }
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(GmeError::Validation(violations.join("\n")))
        }
    }

    fn check_time(t: f64) -> GmeResult<()> {
        if t.is_finite() {
            Ok(())
        } else {
            Err(GmeError::Domain(format!("time must be finite, got {t}")))
        }
    }

    /// Displacement fraction of a `SplitReturn` profile, in `[0, 1]`.
    fn split_fraction(ramp: f64, window: f64, t: f64) -> f64 {
        if t <= 0.0 || t >= window {
            0.0
        } else if t < ramp {
            smoothstep5(t / ramp)
        } else if t <= window - ramp {
            1.0
        } else {
            smoothstep5((window - t) / ramp)
        }
    }

    fn split_fraction_deriv(ramp: f64, window: f64, t: f64) -> f64 {
        if t <= 0.0 || t >= window {
            0.0
        } else if t < ramp {
            smoothstep5_deriv(t / ramp) / ramp
        } else if t <= window - ramp {
            0.0
        } else {
            -smoothstep5_deriv((window - t) / ramp) / ramp
        }
    }

    pub fn position(&self, t: f64) -> GmeResult<Vec3> {
        Self::check_time(t)?;
        Ok(match self.motion {
            Motion::Static { position } => position,
            Motion::Uniform { position0, velocity } => position0 + velocity.scale(t),
            Motion::SplitReturn { base, offset, ramp, window } => {
                base + offset.scale(Self::split_fraction(ramp, window, t))
            }
        })
    }

    pub fn velocity(&self, t: f64) -> GmeResult<Vec3> {
        Self::check_time(t)?;
        Ok(match self.motion {
            Motion::Static { .. } => Vec3::ZERO,
            Motion::Uniform { velocity, .. } => velocity,
            Motion::SplitReturn { offset, ramp, window, .. } => {
                offset.scale(Self::split_fraction_deriv(ramp, window, t))
            }
        })
    }

    /// Lorentz factor `γ(t) = 1/√(1 − |ż|²)`.
    pub fn gamma(&self, t: f64) -> GmeResult<f64> {
        let v2 = self.velocity(t)?.norm_sq();
        Ok(1.0 / (1.0 - v2).sqrt())
    }

    /// Normalized four-velocity `u = γ(1, ż)`; satisfies `η u u = −1`.
    pub fn four_velocity(&self, t: f64) -> GmeResult<FourVector> {
        let v = self.velocity(t)?;
        let gamma = 1.0 / (1.0 - v.norm_sq()).sqrt();
        Ok(FourVector::new(gamma, v.scale(gamma)))
    }

    /// Upper bound on `|ż(t)|` over all t; strictly below 1 by validation.
    pub fn max_speed(&self) -> f64 {
        match self.motion {
            Motion::Static { .. } => 0.0,
            Motion::Uniform { velocity, .. } => velocity.norm(),
            Motion::SplitReturn { offset, ramp, .. } => {
                SMOOTHSTEP5_MAX_SLOPE * offset.norm() / ramp
            }
        }
    }

    /// Endpoints of the spatial segment swept over `[t0, t1]`.
    pub fn spatial_extent(&self, t0: f64, t1: f64) -> GmeResult<(Vec3, Vec3)> {
        match self.motion {
            Motion::Static { position } => Ok((position, position)),
            Motion::Uniform { .. } => Ok((self.position(t0)?, self.position(t1)?)),
            Motion::SplitReturn { base, offset, ramp, window } => {
                // The profile sweeps base → base + w_max·offset on the segment.
                let mut wmin = f64::INFINITY;
                let mut wmax = f64::NEG_INFINITY;
                // The fraction is monotone on each leg, so the extremes over any
                // interval are attained at its ends or at the hold plateau.
                for &t in &[t0, t1] {
                    let w = Self::split_fraction(ramp, window, t.clamp(0.0, window));
                    wmin = wmin.min(w);
                    wmax = wmax.max(w);
                }
                if t0 < window - ramp && t1 > ramp {
                    wmax = wmax.max(1.0);
                }
                if t0 < 0.0 || t1 > window || (t0 <= 0.0 && t1 >= window) {
                    wmin = wmin.min(0.0);
                }
                // Interior of a single leg never dips below the endpoint values.
                Ok((base + offset.scale(wmin), base + offset.scale(wmax)))
            }
        }
    }

    /// Whether the motion is an exact straight line over `[a, b]`, i.e. the
    /// velocity is constant there. The collapsed (one-dimensional) kernel
    /// cell evaluation is only valid on such stretches; ramp pieces of a
    /// split-return profile curve continuously and must refuse, even though
    /// their endpoint velocities happen to agree.
    pub fn velocity_is_constant_on(&self, a: f64, b: f64) -> bool {
        match self.motion {
            Motion::Static { .. } | Motion::Uniform { .. } => true,
            Motion::SplitReturn { ramp, window, .. } => a >= ramp && b <= window - ramp,
        }
    }

    /// Times in `(t0, t1)` where the motion profile changes piece (ramp
    /// boundaries). Quadratures split panels here.
    pub fn profile_breaks(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self.motion {
            Motion::Static { .. } | Motion::Uniform { .. } => Vec::new(),
            Motion::SplitReturn { ramp, window, .. } => [0.0, ramp, window - ramp, window]
                .into_iter()
                .filter(|&t| t > t0 && t < t1)
                .collect(),
        }
    }
}

/// Branch label within one interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    L,
    R,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::L, Branch::R];

    pub fn index(self) -> usize {
        match self {
            Branch::L => 0,
            Branch::R => 1,
        }
    }
}

/// Ordered pair of branch choices `(p₁, p₂)`, one per particle.
///
/// The joint Hilbert-space basis is ordered `L₁L₂, R₁L₂, L₁R₂, R₁R₂`, i.e.
/// particle 1's label varies fastest: `index = p₁ + 2·p₂`. Density matrices,
/// phase tables and functional tables all share this ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchPair {
    pub p1: Branch,
    pub p2: Branch,
}

impl BranchPair {
    pub const LL: BranchPair = BranchPair { p1: Branch::L, p2: Branch::L };
    pub const RL: BranchPair = BranchPair { p1: Branch::R, p2: Branch::L };
    pub const LR: BranchPair = BranchPair { p1: Branch::L, p2: Branch::R };
    pub const RR: BranchPair = BranchPair { p1: Branch::R, p2: Branch::R };
    pub const ALL: [BranchPair; 4] = [Self::LL, Self::RL, Self::LR, Self::RR];

    pub fn index(self) -> usize {
        self.p1.index() + 2 * self.p2.index()
    }

    pub fn label(self) -> &'static str {
        match self.index() {
            0 => "LL",
            1 => "RL",
            2 => "LR",
            _ => "RR",
        }
    }
}

/// The four branch worldlines of the two-interferometer experiment plus the
/// shared interaction window `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchConfig {
    pub left1: Worldline,
    pub right1: Worldline,
    pub left2: Worldline,
    pub right2: Worldline,
    /// Interaction window length T (internal units).
    pub window: f64,
}

impl BranchConfig {
    pub fn new(
        left1: Worldline,
        right1: Worldline,
        left2: Worldline,
        right2: Worldline,
        window: f64,
    ) -> GmeResult<Self> {
        let cfg = BranchConfig { left1, right1, left2, right2, window };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> GmeResult<()> {
        let mut violations = Vec::new();
        if !(self.window.is_finite() && self.window > 0.0) {
            violations.push(format!("window must be positive and finite, got {}", self.window));
        }
        if self.left1.mass != self.right1.mass {
            violations.push(format!(
                "particle 1 branches carry different masses: {} vs {}",
                self.left1.mass, self.right1.mass
            ));
        }
        if self.left2.mass != self.right2.mass {
            violations.push(format!(
                "particle 2 branches carry different masses: {} vs {}",
                self.left2.mass, self.right2.mass
            ));
        }
        for (name, w) in [
            ("L1", &self.left1),
            ("R1", &self.right1),
            ("L2", &self.left2),
            ("R2", &self.right2),
        ] {
            if let Motion::SplitReturn { window, .. } = w.motion {
                if (window - self.window).abs() > 1e-12 * self.window.abs() {
                    violations.push(format!(
                        "branch {name}: split worldline window {} disagrees with config window {}",
                        window, self.window
                    ));
                }
            }
            if let Motion::Uniform { .. } = w.motion {
                violations.push(format!(
                    "branch {name}: uniform-drift worldlines do not recombine and cannot form a branch basis"
                ));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(GmeError::Validation(violations.join("\n")))
        }
    }

    pub fn branch(&self, particle: usize, b: Branch) -> &Worldline {
        match (particle, b) {
            (1, Branch::L) => &self.left1,
            (1, Branch::R) => &self.right1,
            (2, Branch::L) => &self.left2,
            (2, Branch::R) => &self.right2,
            _ => panic!("particle index must be 1 or 2"),
        }
    }

    /// Worldline pair selected by a joint branch label.
    pub fn pair(&self, p: BranchPair) -> (&Worldline, &Worldline) {
        (self.branch(1, p.p1), self.branch(2, p.p2))
    }

    pub fn mass1(&self) -> f64 {
        self.left1.mass
    }

    pub fn mass2(&self) -> f64 {
        self.left2.mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(mass: f64, offset: f64, ramp: f64, window: f64) -> Worldline {
        Worldline::split_return(
            mass,
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, offset),
            ramp,
            window,
        )
        .unwrap()
    }

    #[test]
    fn four_velocity_is_normalized_everywhere() {
        let w = split(1.0, 0.3, 2.0, 10.0);
        for i in 0..=400 {
            let t = -1.0 + 12.0 * (i as f64) / 400.0;
            let u = w.four_velocity(t).unwrap();
            assert!((u.minkowski_dot(u) + 1.0).abs() <= 1e-10, "t = {t}");
        }
    }

    #[test]
    fn split_profile_is_c2_and_recombines() {
        let w = split(1.0, 0.5, 2.0, 10.0);
        // End points at rest at base.
        assert_eq!(w.position(0.0).unwrap(), Vec3::ZERO);
        assert_eq!(w.position(10.0).unwrap(), Vec3::ZERO);
        assert_eq!(w.velocity(0.0).unwrap(), Vec3::ZERO);
        assert_eq!(w.velocity(10.0).unwrap(), Vec3::ZERO);
        // Hold at full displacement.
        assert_eq!(w.position(5.0).unwrap(), Vec3::new(0.0, 0.0, 0.5));
        // Velocity is continuous across the ramp joints (C¹ numerically; the
        // quintic profile is C²).
        for &tj in &[0.0, 2.0, 8.0, 10.0] {
            let h = 1e-7;
            let v_minus = w.velocity(tj - h).unwrap().z;
            let v_plus = w.velocity(tj + h).unwrap().z;
            assert!((v_minus - v_plus).abs() < 1e-5);
        }
    }

    #[test]
    fn ramp_pieces_refuse_the_constant_velocity_claim() {
        // The claim gates the collapsed kernel-cell evaluation; ramps curve,
        // only the hold plateau (and inertial motions) qualify.
        let w = split(1.0, 0.5, 2.0, 10.0);
        assert!(!w.velocity_is_constant_on(0.0, 2.0));
        assert!(w.velocity_is_constant_on(2.0, 8.0));
        assert!(!w.velocity_is_constant_on(8.0, 10.0));
        let r = Worldline::at_rest(1.0, Vec3::ZERO).unwrap();
        assert!(r.velocity_is_constant_on(0.0, 10.0));
        let u = Worldline::uniform(1.0, Vec3::ZERO, Vec3::new(0.1, 0.0, 0.0)).unwrap();
        assert!(u.velocity_is_constant_on(0.0, 10.0));
    }

    #[test]
    fn velocity_matches_position_derivative() {
        let w = split(1.0, 0.4, 3.0, 12.0);
        for i in 0..60 {
            let t = 0.05 + 11.9 * (i as f64) / 60.0;
            let h = 1e-6;
            let num =
                (w.position(t + h).unwrap().z - w.position(t - h).unwrap().z) / (2.0 * h);
            assert!((num - w.velocity(t).unwrap().z).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn superluminal_ramp_rejected() {
        let err = Worldline::split_return(
            1.0,
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, 1.0),
            1.0,
            10.0,
        )
        .unwrap_err();
        assert!(matches!(err, GmeError::Validation(_)));
        assert!(err.to_string().contains("superluminal"));
    }

    #[test]
    fn validation_lists_all_violations() {
        let err = Worldline::split_return(
            -1.0,
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, 2.0),
            1.0,
            10.0,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mass"));
        assert!(msg.contains("superluminal"));
    }

    #[test]
    fn max_speed_bounds_sampled_speed() {
        let w = split(1.0, 0.45, 2.5, 10.0);
        let bound = w.max_speed();
        assert!(bound < 1.0);
        let mut fastest: f64 = 0.0;
        for i in 0..=1000 {
            let t = 10.0 * (i as f64) / 1000.0;
            fastest = fastest.max(w.velocity(t).unwrap().norm());
        }
        assert!(fastest <= bound + 1e-12);
        // The bound is attained mid-ramp.
        assert!((w.velocity(1.25).unwrap().norm() - bound).abs() < 1e-12);
    }

    #[test]
    fn spatial_extent_covers_sampled_positions() {
        let w = split(1.0, 0.5, 2.0, 10.0);
        let (lo, hi) = w.spatial_extent(0.0, 10.0).unwrap();
        assert_eq!(lo, Vec3::ZERO);
        assert_eq!(hi, Vec3::new(0.0, 0.0, 0.5));
        let (lo, hi) = w.spatial_extent(4.0, 6.0).unwrap();
        assert_eq!(lo.z, 0.5);
        assert_eq!(hi.z, 0.5);
    }

    #[test]
    fn branch_config_rejects_mass_mismatch_and_uniform() {
        let a = Worldline::at_rest(1.0, Vec3::ZERO).unwrap();
        let b = Worldline::at_rest(2.0, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let c = Worldline::at_rest(1.0, Vec3::new(0.0, 0.0, 3.0)).unwrap();
        assert!(BranchConfig::new(a, b, c, c, 10.0).is_err());
        let u = Worldline::uniform(1.0, Vec3::ZERO, Vec3::new(0.0, 0.0, 0.1)).unwrap();
        assert!(BranchConfig::new(a, u, c, c, 10.0).is_err());
    }

    #[test]
    fn pair_indexing_matches_basis_order() {
        assert_eq!(BranchPair::ALL[0].label(), "LL");
        assert_eq!(BranchPair::ALL[1].label(), "RL");
        assert_eq!(BranchPair::ALL[2].label(), "LR");
        assert_eq!(BranchPair::ALL[3].label(), "RR");
        for (i, p) in BranchPair::ALL.iter().enumerate() {
            assert_eq!(p.index(), i);
        }
    }

    #[test]
    fn non_finite_time_is_domain_error() {
        let w = split(1.0, 0.3, 2.0, 10.0);
        assert!(matches!(w.position(f64::NAN), Err(GmeError::Domain(_))));
        assert!(matches!(w.velocity(f64::INFINITY), Err(GmeError::Domain(_))));
    }
}
