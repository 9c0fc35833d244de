//! Pair functionals of two worldline branches against field two-point kernels.
//!
//! Everything downstream — classical phases, perturbative corrections, vacuum
//! noise — reduces to window integrals of the contracted two-point kernels of
//! a massless field sourced by point masses. With `B(u, u') = 2(u·u')² − 1`
//! the bitensor contraction of two normalized four-velocities, the three
//! functionals of a branch pair `(z₁, z₂)` over the window `[0, T]` are:
//!
//! * **phase** (retarded + advanced, delta-supported on the light cone):
//!   `Δ = Σ_dir ∫₀ᵀ dt m₁m₂ B(u_f, u_s) / (4π γ_f γ_s (1 − r̂·ż_s) r)`
//!   evaluated at the retarded source time, one term per direction, each
//!   dropped while the retarded time predates the window;
//! * **Hadamard** (symmetric, principal value across the cone):
//!   `H = ∬ dt ds m₁m₂ B(u₁, u₂) / (γ₁ γ₂ 2π²) · PV 1/σ`,
//!   `σ = |z₁(t) − z₂(s)|² − (t − s)²`, computed by smearing the kernel at a
//!   shrinking sequence of widths ε and extrapolating `ε² → 0`;
//! * **Feynman combination** `(H − iΔ)/2`, packaging both into the
//!   time-ordered form the perturbative corrections consume.
//!
//! The smeared kernel comes from shifting the time difference off the real
//! axis (`Δt → Δt − iε`) and keeping the real part:
//!
//! ```text
//! K_ε(σ, Δt) = (1/2π²) (σ + ε²) / ((σ + ε²)² + 4 ε² Δt²)
//! ```
//!
//! which is positive at coincidence, where it must reproduce vacuum
//! fluctuations rather than a principal value. Although even in ε, the window
//! integral of this kernel is not smooth at ε = 0 when the branches cross
//! light cones — its error expansion runs over integer powers of |ε|,
//! starting at first order — so the extrapolation eliminates successive
//! integer orders. Sharp switching makes the coincident-branch noise integral
//! log-divergent as ε → 0, so the vacuum noise terms are *defined* at a fixed
//! smearing width shared by every branch pair of a particle; differences of
//! such terms are what enter observables.

use crate::error::{GmeError, GmeResult};
use crate::geom::Vec3;
use crate::quad::{
    geometric_ladder, integrate2d, integrate_with_breakpoints, richardson, QuadOptions, QuadResult,
};
use crate::retarded::{bitensor_contract, solve_retarded_time};
use crate::worldline::{BranchConfig, Worldline};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tunable numerics shared by every functional evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    /// Absolute quadrature tolerance per functional.
    pub tol_abs: f64,
    /// Relative quadrature tolerance per functional.
    pub tol_rel: f64,
    /// Refinement budget per adaptive pass.
    pub max_splits: usize,
    /// First smearing width as a fraction of the closest branch approach.
    pub smear_initial_factor: f64,
    /// Geometric ratio between consecutive smearing widths (in (0, 1)).
    pub smear_ratio: f64,
    /// Number of smearing levels fed to the ε² extrapolation.
    pub smear_levels: usize,
    /// Fixed smearing width for the vacuum noise terms, in internal length
    /// units. Defaults to `smear_initial_factor` times the closest approach
    /// *between the two particles*, so it stays well-defined for coincident
    /// branches of one particle.
    pub noise_smear_width: Option<f64>,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            tol_abs: 1e-9,
            tol_rel: 1e-7,
            max_splits: 4000,
            smear_initial_factor: 1e-2,
            smear_ratio: 0.5,
            smear_levels: 5,
            noise_smear_width: None,
        }
    }
}

impl NumericsConfig {
    pub fn validated(self) -> GmeResult<Self> {
        let mut problems = Vec::new();
        if !(self.tol_abs > 0.0 && self.tol_abs.is_finite()) {
            problems.push("tol_abs must be positive and finite".to_string());
        }
        if !(self.tol_rel > 0.0 && self.tol_rel.is_finite()) {
            problems.push("tol_rel must be positive and finite".to_string());
        }
        if self.max_splits == 0 {
            problems.push("max_splits must be at least 1".to_string());
        }
        if !(self.smear_initial_factor > 0.0 && self.smear_initial_factor <= 1.0) {
            problems.push("smear_initial_factor must lie in (0, 1]".to_string());
        }
        if !(self.smear_ratio > 0.0 && self.smear_ratio < 1.0) {
            problems.push("smear_ratio must lie in (0, 1)".to_string());
        }
        if self.smear_levels < 2 {
            problems.push("smear_levels must be at least 2 for extrapolation".to_string());
        }
        if let Some(w) = self.noise_smear_width {
            if !(w > 0.0 && w.is_finite()) {
                problems.push("noise_smear_width must be positive and finite".to_string());
            }
        }
        if problems.is_empty() {
            Ok(self)
        } else {
            Err(GmeError::Validation(problems.join("; ")))
        }
    }

    fn quad_options(&self) -> QuadOptions {
        QuadOptions { tol_abs: self.tol_abs, tol_rel: self.tol_rel, max_splits: self.max_splits }
    }
}

/// A converged window functional: value, accumulated error estimate, and the
/// total number of integrand evaluations spent on it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Functional {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

impl Functional {
    const ZERO: Functional = Functional { value: 0.0, abs_error: 0.0, evaluations: 0 };
}

/// Feynman-combination value `(H − iΔ)/2` with the errors of both parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeynmanFunctional {
    pub hadamard: Functional,
    pub phase: Functional,
}

impl FeynmanFunctional {
    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(0.5 * self.hadamard.value, -0.5 * self.phase.value)
    }
}

/// Closest approach between the swept segments of two branches over a window.
///
/// Both motion families sweep straight segments, so the minimum over
/// independent times is exactly the segment–segment distance.
pub fn min_separation(a: &Worldline, b: &Worldline, window: f64) -> f64 {
    let (a0, a1) = a.spatial_extent(0.0, window).expect("finite window");
    let (b0, b1) = b.spatial_extent(0.0, window).expect("finite window");
    crate::geom::segment_distance(a0, a1, b0, b1)
}

/// Largest separation ever attained between the swept segments.
pub fn max_separation(a: &Worldline, b: &Worldline, window: f64) -> f64 {
    let (a0, a1) = a.spatial_extent(0.0, window).expect("finite window");
    let (b0, b1) = b.spatial_extent(0.0, window).expect("finite window");
    crate::geom::segment_max_distance(a0, a1, b0, b1)
}

/// Largest smearing width whose window-tail contribution stays a small
/// fraction of the functional itself.
///
/// Far from the light cones the smeared kernel differs from `1/σ` by
/// `~ε²/u⁴`, and the triangular window weight turns that into an `ε²·T/d³`
/// term in the integral while the functional itself only grows like
/// `ln(T/d)`. Long windows over short separations therefore need the width
/// to shrink like `√(d³·ln(T/d)/T)`, or the level values are dominated by
/// the tail and the extrapolation loses the limit in quadrature noise. The
/// prefactor keeps the tail under ~5% of the value at the first level.
fn tail_safe_width(d: f64, window: f64) -> f64 {
    if window <= 2.0 * d {
        f64::INFINITY
    } else {
        d * (0.075 * (1.0 + (window / d).ln()) * d / window).sqrt()
    }
}

/// `ln(a) − ln(b)` for two points in the same half plane, stable when the
/// arguments nearly coincide.
///
/// Far from both roots the direct difference subtracts two `ln|u|`-sized
/// values to leave `~1/u`, turning the antiderivative's tail into roundoff
/// noise; the series form keeps full relative precision there.
fn ln_ratio(a: Complex64, b: Complex64) -> Complex64 {
    let r = (a - b) / b;
    if r.norm_sqr() < 0.01 {
        let mut term = r;
        let mut sum = r;
        for k in 2..=16 {
            term *= -r;
            sum += term / k as f64;
        }
        sum
    } else {
        a.ln() - b.ln()
    }
}

/// True when no signal can cross between the two branches inside the window:
/// the window is shorter than the closest approach ever gets.
pub fn causally_disconnected(a: &Worldline, b: &Worldline, window: f64) -> bool {
    window <= min_separation(a, b, window)
}

/// Root of a continuous increasing function on `[lo, hi]` by bisection.
/// Returns `None` when the function does not change sign on the bracket.
fn monotone_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo), f(hi));
    if flo > 0.0 || fhi < 0.0 {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Field time at which the retarded source time crosses `s_target`:
/// solves `t − s_target = |z_f(t) − z_s(s_target)|` for `t > s_target`.
fn retarded_crossing(field: &Worldline, source: &Worldline, s_target: f64, window: f64) -> Option<f64> {
    let src_pos = source.position(s_target).ok()?;
    let g = |t: f64| {
        let x = field.position(t).expect("field position inside window");
        t - s_target - (x - src_pos).norm()
    };
    monotone_root(g, s_target, window).filter(|&t| t > s_target)
}

/// Light-cone crossing offsets `u = s − t` of the source worldline as seen
/// from the field point `(t, x)`: the backward crossing solves
/// `−u = |x − z_s(t+u)|` (u < 0), the forward one `u = |x − z_s(t+u)|`
/// (u > 0). Solved in the offset coordinate directly so the crossing keeps
/// full float resolution even when `t` itself is astronomically large.
/// `None` at branch contact, where both crossings collapse onto `u = 0`.
fn cone_offsets(t: f64, x: Vec3, source: &Worldline) -> Option<(f64, f64)> {
    let d_now = (x - source.position(t).ok()?).norm();
    if d_now == 0.0 {
        return None;
    }
    let reach = d_now / (1.0 - source.max_speed()) + 1.0;
    let r = |u: f64| (x - source.position(t + u).expect("source position")).norm();
    let back = monotone_root(|u| u + r(u), -reach, 0.0)?;
    let fwd = monotone_root(|u| u - r(u), 0.0, reach)?;
    Some((back, fwd))
}

/// One direction of the phase functional: field branch integrated against the
/// retarded signal of the source branch, zero while the retarded time
/// predates the window.
fn directed_phase(
    field: &Worldline,
    source: &Worldline,
    window: f64,
    opts: &QuadOptions,
) -> GmeResult<QuadResult> {
    let m12 = field.mass * source.mass;
    // Causal onset: before this field time the source signal predates t = 0.
    let onset = retarded_crossing(field, source, 0.0, window);
    if onset.is_none() {
        // The whole window predates causal contact in this direction.
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true });
    }
    let mut breaks = vec![onset.unwrap()];
    // Kinks of the source profile land at shifted field times; kinks of the
    // field profile land where they are.
    for c in source.profile_breaks(0.0, window) {
        if let Some(t) = retarded_crossing(field, source, c, window) {
            breaks.push(t);
        }
    }
    breaks.extend(field.profile_breaks(0.0, window));

    let onset = onset.unwrap();
    let integrand = |t: f64| {
        let x = field.position(t).expect("field position");
        let sol = match solve_retarded_time(t, x, source) {
            Ok(sol) => sol,
            Err(_) => return 0.0,
        };
        if !sol.in_window {
            return 0.0;
        }
        let uf = field.four_velocity(t).expect("field velocity");
        let us = source.four_velocity(sol.t_retarded).expect("source velocity");
        let b = bitensor_contract(uf, us);
        let gf = field.gamma(t).expect("field gamma");
        let gs = source.gamma(sol.t_retarded).expect("source gamma");
        m12 * b / (4.0 * std::f64::consts::PI * gf * gs * sol.doppler * sol.distance)
    };
    // Integrate only past the onset; the onset stays as a breakpoint for the
    // profile-kink roots that may coincide with it.
    breaks.retain(|&t| t > onset);
    let r = integrate_with_breakpoints(integrand, onset, window, &breaks, opts);
    if !r.converged {
        return Err(GmeError::Accuracy(format!(
            "phase functional failed to reach tolerance: error estimate {:.3e} after {} evaluations",
            r.abs_error, r.evaluations
        )));
    }
    Ok(r)
}

/// Phase functional `Δ` of a branch pair: both signalling directions summed.
///
/// Exactly zero — no quadrature at all — when the branches are causally
/// disconnected over the window.
pub fn phase_pair_functional(
    w1: &Worldline,
    w2: &Worldline,
    window: f64,
    numerics: &NumericsConfig,
) -> GmeResult<Functional> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(GmeError::Domain(format!("window must be positive and finite, got {window}")));
    }
    if min_separation(w1, w2, window) == 0.0 {
        return Err(GmeError::Singular(
            "branch worldlines touch; the pair potential diverges at coincidence".to_string(),
        ));
    }
    if causally_disconnected(w1, w2, window) {
        return Ok(Functional::ZERO);
    }
    let opts = numerics.quad_options();
    let a = directed_phase(w1, w2, window, &opts)?;
    let b = directed_phase(w2, w1, window, &opts)?;
    Ok(Functional {
        value: a.value + b.value,
        abs_error: a.abs_error + b.abs_error,
        evaluations: a.evaluations + b.evaluations,
    })
}

/// Smeared symmetric-kernel double integral at fixed width ε.
///
/// Used at a shrinking ε sequence for the Hadamard extrapolation and at one
/// fixed ε for the vacuum noise terms.
///
/// The domain `t ∈ [0, T], s = t + u ∈ [0, T]` is cut into cells by the
/// velocity kinks of both worldlines. Wherever the two velocities agree —
/// every rest phase, which is most of every window — σ depends on `u` alone,
/// so the `t` integral collapses analytically to the overlap length `λ(u)`
/// and the cell is evaluated as a single one-dimensional integral. That
/// collapse is what makes second-scale windows (T ~ 10¹⁴ internal units)
/// tractable: a nested evaluation would multiply the inner quadrature's
/// *absolute* error floor by the outer measure T, drowning the value, while
/// the collapsed form spends one error budget on one axis. Cells where the
/// velocities differ (ramp against rest, ramp against ramp) are genuinely
/// two-dimensional but short along `t`, so the nested evaluation is safe
/// there; it runs in cell-local coordinates with the offset `u = s − t`
/// inner, keeping every light-cone crossing at small, fully-resolved
/// positions regardless of how large `t` itself is.
fn smeared_symmetric_integral(
    w1: &Worldline,
    w2: &Worldline,
    window: f64,
    eps: f64,
    numerics: &NumericsConfig,
) -> GmeResult<QuadResult> {
    let m12 = w1.mass * w2.mass;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let opts = numerics.quad_options();

    let pieces = |w: &Worldline| -> Vec<(f64, f64)> {
        let mut edges = vec![0.0];
        edges.extend(w.profile_breaks(0.0, window));
        edges.push(window);
        edges.dedup();
        edges.windows(2).map(|p| (p[0], p[1])).collect()
    };

    // One cell with equal velocities: σ(u) = |x_ref − v·(u − u_ref)|² − u²
    // exactly, for any reference time valid at that offset, and the t
    // integral contributes the overlap length λ(u). Integrating λ·K directly
    // would pit the near-cone lobes, amplified by λ ~ T, against each other
    // beyond f64 resolution, so the cell is done by parts instead:
    // ∫λK = −∫λ′F with F the closed-form kernel antiderivative. λ vanishes
    // at the extent ends (no boundary terms), λ′ is ±1 only on the short
    // rise and fall of the trapezoid, and F stays O(ln ε) throughout — the
    // big multiplier never meets a cancellation.
    let reduced_cell = |(a1, b1): (f64, f64), (a2, b2): (f64, f64), v: Vec3| -> GmeResult<QuadResult> {
        let (u_lo, u_hi) = (a2 - b1, b2 - a1);
        let u_ref = 0.5 * (u_lo + u_hi);
        let t_ref = 0.5 * (a1.max(a2 - u_ref) + b1.min(b2 - u_ref));
        let s_ref = t_ref + u_ref;
        let x_ref = w1.position(t_ref)? - w2.position(s_ref)?;
        let b_fac = bitensor_contract(w1.four_velocity(t_ref)?, w2.four_velocity(s_ref)?);
        let g = w1.gamma(t_ref)? * w2.gamma(s_ref)?;
        let factor = m12 * b_fac / (g * 2.0 * pi2);
        // K(u) = Re 1/D with D = σ + ε² − 2iεu quadratic in δ = u − u_ref;
        // its roots give both the cone positions (Re z) and widths (Im z).
        let aq = v.norm_sq() - 1.0;
        let bq = Complex64::new(-2.0 * (x_ref.dot(v) + u_ref), -2.0 * eps);
        let cq = Complex64::new(
            x_ref.norm_sq() - u_ref * u_ref + eps * eps,
            -2.0 * eps * u_ref,
        );
        let disc = bq * bq - 4.0 * aq * cq;
        let mut sq = disc.sqrt();
        if (bq.conj() * sq).re < 0.0 {
            sq = -sq;
        }
        let q = -0.5 * (bq + sq);
        let (z1, z2) = (q / aq, cq / q);
        let spread = z1 - z2;
        let double_root = spread.norm_sqr() <= 1e-24 * (z1.norm_sqr() + z2.norm_sqr());
        let weight = if double_root { Complex64::ZERO } else { 1.0 / (aq * spread) };
        let f = move |u: f64| -> f64 {
            let d = u - u_ref;
            if double_root {
                (-1.0 / (aq * (d - z1))).re
            } else {
                (ln_ratio(d - z1, d - z2) * weight).re
            }
        };
        // λ rises with slope +1 up to the nearer overlap kink, is flat in
        // between, and falls with slope −1 past the farther one.
        let k1 = (a2 - a1).min(b2 - b1);
        let k2 = (a2 - a1).max(b2 - b1);
        let run = |lo: f64, hi: f64, sign: f64| -> QuadResult {
            let mut breaks = Vec::new();
            for z in [z1, z2] {
                let site = u_ref + z.re;
                breaks.push(site);
                geometric_ladder(site, z.im.abs().max(eps), 4.0, hi - lo, &mut breaks);
            }
            integrate_with_breakpoints(|u| sign * factor * f(u), lo, hi, &breaks, &opts)
        };
        let rise = run(u_lo, k1, -1.0);
        let fall = run(k2, u_hi, 1.0);
        Ok(QuadResult {
            value: rise.value + fall.value,
            abs_error: rise.abs_error + fall.abs_error,
            evaluations: rise.evaluations + fall.evaluations,
            converged: rise.converged && fall.converged,
        })
    };

    // A genuinely two-dimensional cell, nested in local coordinates:
    // outer τ = t − a1, inner u with bounds shifting linearly in τ.
    // Kept symmetric in the two roles (the kernel is even in the time
    // offset), so the caller can always put the shorter piece outside: any
    // constant inner truncation bias gets multiplied by the outer length.
    let nested_cell = |wf: &Worldline,
                       (af, bf): (f64, f64),
                       ws: &Worldline,
                       (as_, bs): (f64, f64)|
     -> QuadResult {
        let len = bf - af;
        let (base_lo, base_hi) = (as_ - af, bs - af);
        let inner_range = move |tau: f64| (base_lo - tau, base_hi - tau);
        let inner_breaks = |tau: f64| {
            let t = af + tau;
            let x = wf.position(t).expect("field position");
            let mut b = Vec::new();
            if let Some((back, fwd)) = cone_offsets(t, x, ws) {
                for site in [back, fwd] {
                    b.push(site);
                    geometric_ladder(site, eps, 4.0, base_hi - base_lo + len, &mut b);
                }
            }
            b
        };
        let value_at = |t: f64, u: f64| -> f64 {
            let s = t + u;
            let x1 = wf.position(t).expect("field position");
            let x2 = ws.position(s).expect("source position");
            let sigma = (x1 - x2).dot(x1 - x2) - u * u;
            let se = sigma + eps * eps;
            let kernel = se / (2.0 * pi2 * (se * se + 4.0 * eps * eps * u * u));
            let b = bitensor_contract(
                wf.four_velocity(t).expect("field velocity"),
                ws.four_velocity(s).expect("source velocity"),
            );
            m12 * b * kernel / (wf.gamma(t).expect("field gamma") * ws.gamma(s).expect("source gamma"))
        };
        // Cone transits through the cell's s-boundaries happen at its
        // corners; ε-scale ladders from both τ edges cover them.
        let mut outer_breaks = Vec::new();
        geometric_ladder(0.0, eps, 8.0, len, &mut outer_breaks);
        geometric_ladder(len, eps, 8.0, len, &mut outer_breaks);
        integrate2d(
            |tau, u| value_at(af + tau, u),
            (0.0, len),
            inner_range,
            &outer_breaks,
            inner_breaks,
            &opts,
        )
    };

    let mut total = QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true };
    for &(a1, b1) in &pieces(w1) {
        let v1 = w1.velocity(0.5 * (a1 + b1))?;
        for &(a2, b2) in &pieces(w2) {
            let v2 = w2.velocity(0.5 * (a2 + b2))?;
            // The collapse needs truly linear motion on both pieces, not just
            // matching midpoint velocities — two congruent ramps agree at
            // every sampled time yet curve within the cell.
            let r = if (v1 - v2).norm_sq() == 0.0
                && w1.velocity_is_constant_on(a1, b1)
                && w2.velocity_is_constant_on(a2, b2)
            {
                reduced_cell((a1, b1), (a2, b2), v2)?
            } else if b1 - a1 <= b2 - a2 {
                nested_cell(w1, (a1, b1), w2, (a2, b2))
            } else {
                nested_cell(w2, (a2, b2), w1, (a1, b1))
            };
            total.value += r.value;
            total.abs_error += r.abs_error;
            total.evaluations += r.evaluations;
            total.converged &= r.converged;
        }
    }
    if !total.converged {
        return Err(GmeError::Accuracy(format!(
            "smeared symmetric integral (ε = {eps:.3e}) failed to reach tolerance: \
             error estimate {:.3e} after {} evaluations",
            total.abs_error, total.evaluations
        )));
    }
    Ok(total)
}

/// Hadamard functional `H` of a branch pair: smeared double integrals at a
/// geometric ε sequence, Richardson-extrapolated to ε → 0.
pub fn hadamard_pair_functional(
    w1: &Worldline,
    w2: &Worldline,
    window: f64,
    numerics: &NumericsConfig,
) -> GmeResult<Functional> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(GmeError::Domain(format!("window must be positive and finite, got {window}")));
    }
    let d_min = min_separation(w1, w2, window);
    if d_min == 0.0 {
        return Err(GmeError::Accuracy(
            "branch worldlines touch; the principal-value functional has no finite \
             coincidence limit"
                .to_string(),
        ));
    }
    let eps0 = (numerics.smear_initial_factor * d_min).min(tail_safe_width(d_min, window));
    let mut values = Vec::with_capacity(numerics.smear_levels);
    let mut quad_err: f64 = 0.0;
    let mut evals = 0usize;
    let mut eps = eps0;
    for _ in 0..numerics.smear_levels {
        let r = smeared_symmetric_integral(w1, w2, window, eps, numerics)?;
        values.push(r.value);
        quad_err = quad_err.max(r.abs_error);
        evals += r.evaluations;
        eps *= numerics.smear_ratio;
    }
    let (limit, extrap_err) = richardson(&values, numerics.smear_ratio, 1);
    let scale = limit.abs().max(numerics.tol_abs / numerics.tol_rel);
    if !extrap_err.is_finite() || extrap_err > 1e3 * (numerics.tol_rel * scale).max(quad_err) {
        return Err(GmeError::Accuracy(format!(
            "smearing extrapolation did not settle: level values {values:?}, \
             residual {extrap_err:.3e}"
        )));
    }
    Ok(Functional { value: limit, abs_error: extrap_err + quad_err, evaluations: evals })
}

/// Feynman combination `(H − iΔ)/2` of a branch pair.
pub fn feynman_pair_functional(
    w1: &Worldline,
    w2: &Worldline,
    window: f64,
    numerics: &NumericsConfig,
) -> GmeResult<FeynmanFunctional> {
    Ok(FeynmanFunctional {
        hadamard: hadamard_pair_functional(w1, w2, window, numerics)?,
        phase: phase_pair_functional(w1, w2, window, numerics)?,
    })
}

/// Vacuum noise of one particle: self-branch and cross-branch smeared
/// integrals at the shared fixed width.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NoisePair {
    /// Self-branch noise `L_V` (same branch against itself; both branches of
    /// a congruent pair give the same value, and the left one is used).
    pub l_v: Functional,
    /// Cross-branch overlap `L_I` (left branch against right branch).
    pub l_i: Functional,
}

/// Vacuum noise terms for both particles at one fixed smearing width.
#[derive(Debug, Clone, Serialize)]
pub struct VacuumNoise {
    pub particle1: NoisePair,
    pub particle2: NoisePair,
    /// The smearing width all four integrals were evaluated at.
    pub smear_width: f64,
    /// Non-fatal observations (branch-congruence mismatches and the like).
    pub warnings: Vec<String>,
}

impl VacuumNoise {
    /// Combined damping scalar for equal per-particle noise:
    /// `(L_V − L_I)` summed over both particles.
    pub fn damping_sum(&self) -> f64 {
        (self.particle1.l_v.value - self.particle1.l_i.value)
            + (self.particle2.l_v.value - self.particle2.l_i.value)
    }
}

/// Whether two branches of one particle trace congruent paths (identical up
/// to a rigid spatial translation), so their self-noise integrals agree.
pub fn branches_congruent(a: &Worldline, b: &Worldline, window: f64) -> bool {
    if a.mass != b.mass {
        return false;
    }
    // Sample the relative displacement; rigid translation means it is
    // constant over the window.
    let d0 = b.position(0.0).expect("position") - a.position(0.0).expect("position");
    let n = 64;
    (0..=n).all(|k| {
        let t = window * k as f64 / n as f64;
        let d = b.position(t).expect("position") - a.position(t).expect("position");
        (d - d0).norm() <= 1e-12 * (1.0 + d0.norm())
    })
}

/// Vacuum noise terms of both particles at one shared smearing width.
///
/// The width is `numerics.noise_smear_width` when set, otherwise
/// `smear_initial_factor` times the closest approach between the two
/// particles (never the branch offset, which may be zero), further capped so
/// the window-tail `ε²·T/δ³` term cannot distort the self/cross difference
/// at long windows. Non-congruent branches within a particle are reported as
/// warnings, with the left branch quoting the self-noise.
pub fn vacuum_noise_terms(
    config: &BranchConfig,
    numerics: &NumericsConfig,
) -> GmeResult<VacuumNoise> {
    let window = config.window;
    let mut warnings = Vec::new();
    for (label, a, b) in [
        ("particle 1", &config.left1, &config.right1),
        ("particle 2", &config.left2, &config.right2),
    ] {
        if !branches_congruent(a, b, window) {
            warnings.push(format!(
                "{label} branches are not congruent; self-branch noise quoted from the left branch"
            ));
        }
    }
    let eps = match numerics.noise_smear_width {
        Some(w) => w,
        None => {
            let d_cross = [
                min_separation(&config.left1, &config.left2, window),
                min_separation(&config.left1, &config.right2, window),
                min_separation(&config.right1, &config.left2, window),
                min_separation(&config.right1, &config.right2, window),
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            if !(d_cross > 0.0) {
                return Err(GmeError::Singular(
                    "default noise smearing width is set by the inter-particle approach, \
                     which is zero here; set noise_smear_width explicitly"
                        .to_string(),
                ));
            }
            let mut eps = numerics.smear_initial_factor * d_cross;
            // The noise difference L_V − L_I is not extrapolated, so its
            // tail term must be small outright; the branch separation sets
            // the scale it competes against.
            for (a, b) in [(&config.left1, &config.right1), (&config.left2, &config.right2)] {
                let offset = max_separation(a, b, window);
                if offset > 0.0 {
                    eps = eps.min(tail_safe_width(offset, window));
                }
            }
            eps
        }
    };

    let noise_for = |left: &Worldline, right: &Worldline| -> GmeResult<NoisePair> {
        let lv = smeared_symmetric_integral(left, left, window, eps, numerics)?;
        let li = smeared_symmetric_integral(left, right, window, eps, numerics)?;
        let half = |r: QuadResult| Functional {
            value: 0.5 * r.value,
            abs_error: 0.5 * r.abs_error,
            evaluations: r.evaluations,
        };
        Ok(NoisePair { l_v: half(lv), l_i: half(li) })
    };
    Ok(VacuumNoise {
        particle1: noise_for(&config.left1, &config.right1)?,
        particle2: noise_for(&config.left2, &config.right2)?,
        smear_width: eps,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::worldline::Worldline;

    fn static_pair(d: f64) -> (Worldline, Worldline) {
        (
            Worldline::at_rest(1.0, Vec3::ZERO).unwrap(),
            Worldline::at_rest(1.0, Vec3::new(d, 0.0, 0.0)).unwrap(),
        )
    }

    #[test]
    fn phase_functional_matches_static_closed_form() {
        let (a, b) = static_pair(1.0);
        let numerics = NumericsConfig::default();
        for &t in &[2.0, 10.0, 100.0] {
            let got = phase_pair_functional(&a, &b, t, &numerics).unwrap();
            let want = reference::delta_static(1.0, 1.0, 1.0, t);
            assert!(
                (got.value - want).abs() < 1e-7 * want.max(1.0),
                "T={t}: {} vs {want}",
                got.value
            );
            assert!(got.abs_error < 1e-6 * want.max(1.0));
        }
    }

    #[test]
    fn phase_functional_is_zero_for_spacelike_window() {
        let (a, b) = static_pair(5.0);
        let got = phase_pair_functional(&a, &b, 4.0, &NumericsConfig::default()).unwrap();
        assert_eq!(got.value, 0.0);
        assert_eq!(got.evaluations, 0);
        assert!(causally_disconnected(&a, &b, 4.0));
        assert!(!causally_disconnected(&a, &b, 6.0));
    }

    #[test]
    fn phase_functional_rejects_touching_branches() {
        let (a, _) = static_pair(1.0);
        let err = phase_pair_functional(&a, &a.clone(), 10.0, &NumericsConfig::default());
        assert!(matches!(err, Err(GmeError::Singular(_))));
    }

    #[test]
    fn hadamard_functional_matches_static_closed_form() {
        let (a, b) = static_pair(1.0);
        let numerics = NumericsConfig::default();
        for &t in &[3.0, 10.0, 50.0] {
            let got = hadamard_pair_functional(&a, &b, t, &numerics).unwrap();
            let want = reference::hadamard_static(1.0, 1.0, 1.0, t);
            assert!(
                ((got.value - want) / want).abs() < 1e-5,
                "T={t}: {} vs {want} (err est {})",
                got.value,
                got.abs_error
            );
        }
    }

    #[test]
    fn lab_scale_windows_match_closed_forms() {
        // Fourteen decades of window over unit separations: the by-parts
        // cell evaluation has to survive the λ ~ T weight without losing
        // the near-cone cancellation.
        let t = 2.998e14;
        let numerics = NumericsConfig::default();
        let (a, b) = static_pair(1.0);
        let got = hadamard_pair_functional(&a, &b, t, &numerics).unwrap();
        let want = reference::hadamard_static(1.0, 1.0, 1.0, t);
        assert!(
            ((got.value - want) / want).abs() < 1e-9,
            "H: {} vs {want}",
            got.value
        );

        // Collinear lab-scale geometry: branch offset 1, particle gap 1.
        let w = |x: f64| Worldline::at_rest(1.0, Vec3::new(x, 0.0, 0.0)).unwrap();
        let config = BranchConfig::new(w(0.0), w(1.0), w(2.0), w(3.0), t).unwrap();
        let noise = vacuum_noise_terms(&config, &numerics).unwrap();
        let eps = noise.smear_width;
        let lv_want = reference::noise_lv_static(1.0, eps, t);
        let li_want = reference::noise_li_static(1.0, 1.0, eps, t);
        assert!(((noise.particle1.l_v.value - lv_want) / lv_want).abs() < 1e-9);
        assert!(((noise.particle1.l_i.value - li_want) / li_want).abs() < 1e-9);
        let damping_want = 2.0 * (lv_want - li_want);
        assert!(((noise.damping_sum() - damping_want) / damping_want).abs() < 1e-9);
    }

    #[test]
    fn nested_cells_agree_with_collapsed_cells_on_shared_geometry() {
        // A split-return with zero offset never moves, but its ramp pieces
        // still refuse the constant-velocity claim and route through the
        // nested two-dimensional evaluator. Same geometry, different code
        // path — the functional must come out the same.
        let window = 12.0;
        let rest = Worldline::at_rest(1.0, Vec3::ZERO).unwrap();
        let parked = Worldline::split_return(1.0, Vec3::ZERO, Vec3::ZERO, 2.0, window).unwrap();
        let far = Worldline::at_rest(1.0, Vec3::new(1.5, 0.0, 0.0)).unwrap();
        let numerics = NumericsConfig::default();
        let collapsed = hadamard_pair_functional(&rest, &far, window, &numerics).unwrap();
        let nested = hadamard_pair_functional(&parked, &far, window, &numerics).unwrap();
        assert!(
            ((nested.value - collapsed.value) / collapsed.value).abs() < 1e-7,
            "{} vs {}",
            nested.value,
            collapsed.value
        );
        // And a genuinely curved congruent pair converges cleanly: both
        // worldlines ramp identically, so midpoint velocities match in every
        // cell and only the structural gate keeps the ramps nested.
        let split_a = Worldline::split_return(
            1.0,
            Vec3::ZERO,
            Vec3::new(0.0, 0.4, 0.0),
            2.0,
            window,
        )
        .unwrap();
        let split_b = Worldline::split_return(
            1.0,
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 0.4, 0.0),
            2.0,
            window,
        )
        .unwrap();
        let moving = hadamard_pair_functional(&split_a, &split_b, window, &numerics).unwrap();
        let still = hadamard_pair_functional(
            &rest,
            &Worldline::at_rest(1.0, Vec3::new(2.0, 0.0, 0.0)).unwrap(),
            window,
            &numerics,
        )
        .unwrap();
        // Transverse common-mode motion leaves the relative geometry fixed;
        // only the velocity factors differ, and those are O(v²) ~ 1%.
        assert!(
            ((moving.value - still.value) / still.value).abs() < 0.05,
            "{} vs {}",
            moving.value,
            still.value
        );
    }

    #[test]
    fn hadamard_functional_spacelike_window_is_finite_and_positive() {
        // No light crossing, yet the symmetric kernel still correlates the
        // branches — this is what spacelike correlation harvesting feeds on.
        let (a, b) = static_pair(5.0);
        let got = hadamard_pair_functional(&a, &b, 3.0, &NumericsConfig::default()).unwrap();
        let want = reference::hadamard_static(1.0, 1.0, 5.0, 3.0);
        assert!(((got.value - want) / want).abs() < 1e-5, "{} vs {want}", got.value);
        assert!(got.value > 0.0);
    }

    #[test]
    fn hadamard_rejects_touching_branches() {
        let (a, _) = static_pair(1.0);
        let err = hadamard_pair_functional(&a, &a.clone(), 10.0, &NumericsConfig::default());
        assert!(matches!(err, Err(GmeError::Accuracy(_))));
    }

    #[test]
    fn feynman_combination_composes_both_parts() {
        let (a, b) = static_pair(1.0);
        let numerics = NumericsConfig::default();
        let f = feynman_pair_functional(&a, &b, 10.0, &numerics).unwrap();
        let v = f.value();
        assert!((v.re - 0.5 * f.hadamard.value).abs() < 1e-15);
        assert!((v.im + 0.5 * f.phase.value).abs() < 1e-15);
    }

    #[test]
    fn noise_terms_match_static_closed_forms() {
        // Two particles, each split by 1 along x, centres 10 apart.
        let sep = 10.0;
        let off = 1.0;
        let w = |x: f64| Worldline::at_rest(1.0, Vec3::new(x, 0.0, 0.0)).unwrap();
        let config = BranchConfig::new(w(0.0), w(off), w(sep), w(sep + off), 20.0).unwrap();
        let numerics = NumericsConfig::default();
        let noise = vacuum_noise_terms(&config, &numerics).unwrap();
        assert!(noise.warnings.is_empty());
        // Default width ties to the closest inter-particle approach:
        // right1 ↔ left2 at sep − off.
        let eps = numerics.smear_initial_factor * (sep - off);
        assert!((noise.smear_width - eps).abs() < 1e-12);
        let lv_want = reference::noise_lv_static(1.0, eps, 20.0);
        let li_want = reference::noise_li_static(1.0, off, eps, 20.0);
        for pair in [&noise.particle1, &noise.particle2] {
            assert!(((pair.l_v.value - lv_want) / lv_want).abs() < 1e-5);
            assert!(((pair.l_i.value - li_want) / li_want).abs() < 1e-5);
            // Smeared overlap never exceeds the self term (Cauchy–Schwarz).
            assert!(pair.l_i.value <= pair.l_v.value);
        }
    }

    #[test]
    fn noise_width_shrinks_when_window_tail_would_dominate() {
        // A thin branch offset under a long window: the default width backs
        // off from the inter-particle rule so the ε²T/δ³ tail stays small
        // against the self/cross difference.
        let off = 0.4;
        let w = |x: f64| Worldline::at_rest(1.0, Vec3::new(x, 0.0, 0.0)).unwrap();
        let config = BranchConfig::new(w(0.0), w(off), w(10.0), w(10.0 + off), 20.0).unwrap();
        let numerics = NumericsConfig::default();
        let noise = vacuum_noise_terms(&config, &numerics).unwrap();
        let uncapped = numerics.smear_initial_factor * (10.0 - off);
        assert!(noise.smear_width < uncapped);
        assert!((noise.smear_width - tail_safe_width(off, 20.0)).abs() < 1e-12);
        // The capped width still produces the matching closed-form values.
        let lv_want = reference::noise_lv_static(1.0, noise.smear_width, 20.0);
        assert!(((noise.particle1.l_v.value - lv_want) / lv_want).abs() < 1e-5);
    }

    #[test]
    fn coincident_branches_have_equal_self_and_cross_noise() {
        // Zero branch offset: L_I = L_V exactly, so the damping vanishes.
        let w = |x: f64| Worldline::at_rest(1.0, Vec3::new(x, 0.0, 0.0)).unwrap();
        let config = BranchConfig::new(w(0.0), w(0.0), w(5.0), w(5.0), 12.0).unwrap();
        let noise = vacuum_noise_terms(&config, &NumericsConfig::default()).unwrap();
        let rel = (noise.particle1.l_v.value - noise.particle1.l_i.value).abs()
            / noise.particle1.l_v.value;
        assert!(rel < 1e-9, "relative L_V − L_I = {rel}");
        assert!(noise.damping_sum().abs() < 1e-8 * noise.particle1.l_v.value);
    }

    #[test]
    fn moving_branch_phase_reduces_to_static_when_offset_vanishes() {
        // A split-return branch with zero offset is the static worldline.
        let base = Vec3::ZERO;
        let still = Worldline::at_rest(1.0, base).unwrap();
        let split = Worldline::split_return(1.0, base, Vec3::ZERO, 2.0, 10.0).unwrap();
        let far = Worldline::at_rest(1.0, Vec3::new(3.0, 0.0, 0.0)).unwrap();
        let numerics = NumericsConfig::default();
        let a = phase_pair_functional(&still, &far, 10.0, &numerics).unwrap();
        let b = phase_pair_functional(&split, &far, 10.0, &numerics).unwrap();
        assert!((a.value - b.value).abs() < 1e-9 * a.value.abs().max(1.0));
    }

    #[test]
    fn congruence_detection() {
        let w = |x: f64| Worldline::at_rest(1.0, Vec3::new(x, 0.0, 0.0)).unwrap();
        assert!(branches_congruent(&w(0.0), &w(1.0), 10.0));
        let split =
            Worldline::split_return(1.0, Vec3::ZERO, Vec3::new(0.5, 0.0, 0.0), 2.0, 10.0).unwrap();
        assert!(!branches_congruent(&w(0.0), &split, 10.0));
        // Two split-return branches displaced rigidly are congruent.
        let split2 = Worldline::split_return(
            1.0,
            Vec3::new(4.0, 0.0, 0.0),
            Vec3::new(0.5, 0.0, 0.0),
            2.0,
            10.0,
        )
        .unwrap();
        assert!(branches_congruent(&split, &split2, 10.0));
    }
}
