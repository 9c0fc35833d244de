//! Retarded dynamics: light-cone time solving and the two-body interaction
//! energy sourced by retarded fields.
//!
//! For a field point `(t, x)` and a source worldline `z(s)`, the retarded time
//! solves `t − t_r = |x − z(t_r)|`. The residual `g(s) = t − s − |x − z(s)|`
//! has `g'(s) = −1 + r̂·ż ∈ (−2, 0)` for subluminal sources, so the root is
//! unique and bracketable; we polish it with bisection-safeguarded Newton.
//!
//! The instantaneous pair interaction of two masses through their mutually
//! sourced retarded fields is
//!
//! ```text
//! H_int(t) = −G m₁ m₂ Σ_{(f,s) ∈ {(1,2),(2,1)}}
//!            [ (u_f(t)·u_s(t_r))² − ½ ]
//!            / [ γ_f(t) γ_s(t_r) (1 − r̂·ż_s(t_r)) |x_f − z_s(t_r)| ]
//! ```
//!
//! with `u·u` the Minkowski product, `r̂` the unit vector from the retarded
//! source point to the field point, and `1 − r̂·ż` the retarded Doppler
//! factor from reducing the light-cone delta. At rest this collapses to the
//! Newtonian `−G m₁ m₂ / d`; emission from before the interaction window
//! (`t_r < 0`) is dropped because the source term vanishes outside it.

use crate::error::{GmeError, GmeResult};
use crate::geom::{FourVector, Vec3};
use crate::worldline::Worldline;

/// Solution of the light-cone condition for one field point / source pair.
#[derive(Debug, Clone, Copy)]
pub struct RetardedSolution {
    /// Emission time `t_r ≤ t`.
    pub t_retarded: f64,
    /// `|x − z(t_r)|`, strictly positive.
    pub distance: f64,
    /// Unit vector from the retarded source position to the field point.
    pub unit_separation: Vec3,
    /// `1 − r̂·ż(t_r)`; positive for subluminal sources.
    pub doppler: f64,
    /// True when `t_r ≥ 0`, i.e. the emission happened inside the window.
    pub in_window: bool,
}

/// Absolute residual tolerance of the retarded-time solve, scaled by the
/// problem's time scale.
const RETARDED_TOL: f64 = 1e-13;
const MAX_NEWTON_ITERS: usize = 200;

/// Solves `t − t_r = |x − z(t_r)|` for the source `src`.
///
/// Fails with a singularity error when the field point touches the source
/// trajectory (the kernel denominators vanish there), and with a solver error
/// if the iteration stalls, which does not happen for the closed-form
/// subluminal families but is guarded anyway.
pub fn solve_retarded_time(
    t: f64,
    x: Vec3,
    src: &Worldline,
) -> GmeResult<RetardedSolution> {
    if !t.is_finite() {
        return Err(GmeError::Domain(format!("field time must be finite, got {t}")));
    }
    let vmax = src.max_speed();
    debug_assert!(vmax < 1.0);
    let d_now = (x - src.position(t)?).norm();
    if d_now == 0.0 {
        return Err(GmeError::Singular(format!(
            "field point coincides with the source at t = {t}"
        )));
    }

    let residual = |s: f64| -> GmeResult<f64> { Ok(t - s - (x - src.position(s)?).norm()) };
    // g(t) = −d_now < 0; march the lower bracket end back until g > 0.
    // L > d_now/(1−vmax) guarantees it in one step, but stay defensive.
    let mut lo = t - d_now / (1.0 - vmax) - 1e-3 * d_now.max(1.0);
    let mut hi = t;
    let mut g_lo = residual(lo)?;
    let mut tries = 0;
    while g_lo <= 0.0 {
        lo = t - 2.0 * (t - lo);
        g_lo = residual(lo)?;
        tries += 1;
        if tries > 60 {
            return Err(GmeError::Solver(format!(
                "could not bracket the retarded time for field point t = {t}"
            )));
        }
    }

    let scale = d_now.max(t.abs()).max(1.0);
    let tol = RETARDED_TOL * scale;
    let mut s = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..MAX_NEWTON_ITERS {
        let sep = x - src.position(s)?;
        let r = sep.norm();
        let g = t - s - r;
        if g.abs() <= tol {
            converged = true;
            break;
        }
        if g > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        // Newton step on g(s) = t − s − |x − z(s)|; g' = −1 + r̂·ż.
        let rhat = sep.scale(1.0 / r.max(1e-300));
        let dg = -1.0 + rhat.dot(src.velocity(s)?);
        let newton = s - g / dg;
        s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GmeError::Solver(format!(
            "retarded-time iteration stalled at t = {t} (bracket [{lo}, {hi}])"
        )));
    }

    let sep = x - src.position(s)?;
    let r = sep.norm();
    if r == 0.0 {
        return Err(GmeError::Singular(format!(
            "retarded source point coincides with the field point at t = {t}"
        )));
    }
    let rhat = sep.scale(1.0 / r);
    let doppler = 1.0 - rhat.dot(src.velocity(s)?);
    Ok(RetardedSolution {
        t_retarded: s,
        distance: r,
        unit_separation: rhat,
        doppler,
        in_window: s >= 0.0,
    })
}

/// Polarization-bitensor contraction of two normalized four-velocities:
/// `(η⊗η + η⊗η − η⊗η) u u u' u' = 2(u·u')² − 1`.
///
/// Equals 1 for two comoving observers and `2γ² − 1` for relative Lorentz
/// factor γ; always ≥ 1.
pub fn bitensor_contract(u1: FourVector, u2: FourVector) -> f64 {
    let d = u1.minkowski_dot(u2);
    2.0 * d * d - 1.0
}

/// One direction of the retarded interaction: field particle `wf` at time `t`
/// against the retarded field of source `ws`. Returns the bracketed factor
/// `[(u_f·u_s)² − ½] / (γ_f γ_s doppler r)`, or 0 when the emission precedes
/// the window.
fn directed_term(wf: &Worldline, ws: &Worldline, t: f64) -> GmeResult<f64> {
    let x = wf.position(t)?;
    let sol = solve_retarded_time(t, x, ws)?;
    if !sol.in_window {
        return Ok(0.0);
    }
    let uf = wf.four_velocity(t)?;
    let us = ws.four_velocity(sol.t_retarded)?;
    let udot = uf.minkowski_dot(us);
    Ok((udot * udot - 0.5) / (uf.t * us.t * sol.doppler * sol.distance))
}

/// Instantaneous two-body interaction energy `H_int(t)` (see module docs).
///
/// Symmetric under exchanging the two worldlines; reduces to `−G m₁ m₂ / d`
/// for two static masses once both retarded times are inside the window.
pub fn pair_hamiltonian(
    w1: &Worldline,
    w2: &Worldline,
    t: f64,
    g_newton: f64,
) -> GmeResult<f64> {
    let sum = directed_term(w2, w1, t)? + directed_term(w1, w2, t)?;
    Ok(-g_newton * w1.mass * w2.mass * sum)
}
