//! Closed-form reference values for static branch geometry.
//!
//! Two masses at rest a distance `d` apart over a sharp window `[0, T]` admit
//! hand-derived values for every pair functional. The quadrature pipeline
//! never uses these formulas — they exist so tests and the `oracle` CLI
//! subcommand can check the numerics against an independent route.
//!
//! With `u = t − t'` and the window triangle `∬_{[0,T]²} f(t−t') =
//! ∫_{−T}^{T} (T−|u|) f(u) du`:
//!
//! * retarded + advanced (phase) functional:
//!   `Δ = (m₁m₂ / 4πd) · 2(T−d)` for `T > d`, zero for a spacelike window;
//! * Hadamard functional (principal value across the light cone):
//!   `H = (m₁m₂ / 2π²) [ (T/d)·ln((T+d)/|T−d|) + ln(|T²−d²|/d²) ]`,
//!   which for `T ≫ d` tends to `(m₁m₂/π²)(1 + ln(T/d))` — logarithmic in
//!   `T`, which is why the phase part dominates long windows;
//! * the `Δt − iε`-smeared Wightman smear `S(r, ε, T)` below, which evaluates
//!   the vacuum-noise integrals in closed form (complex logarithms), including
//!   the coincident-worldline case `r = 0` where
//!   `S = ln((T² + ε²)/ε²)` — finite at fixed smearing but logarithmically
//!   divergent as `ε → 0`: the sharp switching makes the strict limit of the
//!   self-noise ill-defined, so noise terms are reported at fixed `ε`.

use num_complex::Complex64;

/// Phase-kernel pair functional for two static masses: `2 m₁m₂ (T−d)/(4πd)`.
///
/// Zero when the window is too short for light to cross (`T ≤ d`).
pub fn delta_static(m1: f64, m2: f64, d: f64, window: f64) -> f64 {
    if window <= d {
        0.0
    } else {
        2.0 * m1 * m2 * (window - d) / (4.0 * std::f64::consts::PI * d)
    }
}

/// Hadamard-kernel pair functional for two static masses (principal value).
///
/// Not defined on the light-cone graze `T = d` (logarithmically divergent).
/// Written so that lab-scale windows (`T/d ~ 10¹⁴`, where the first logarithm
/// is `ln(1 + tiny)` times a huge prefactor) keep full precision.
pub fn hadamard_static(m1: f64, m2: f64, d: f64, window: f64) -> f64 {
    let t = window;
    let pref = m1 * m2 / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
    if t > d {
        pref * ((t / d) * (2.0 * d / (t - d)).ln_1p() + (t - d).ln() + (t + d).ln() - 2.0 * d.ln())
    } else {
        pref * ((t / d) * ((t + d) / (d - t)).ln() + ((d * d - t * t) / (d * d)).ln())
    }
}

/// Window-smeared Wightman real part
/// `S(r, ε, T) = ∬_{[0,T]²} Re[ 1/(r² − (t−t'−iε)²) ] dt dt'`.
///
/// `r` is the (constant) spatial separation of the two static worldlines;
/// `r = 0` gives the self-pair. As `ε → 0` with `r > 0` this tends to the
/// principal-value smear appearing in `hadamard_static`.
pub fn wightman_smear_static(r: f64, eps: f64, window: f64) -> f64 {
    assert!(eps > 0.0 && window > 0.0 && r >= 0.0);
    let t = window;
    if r == 0.0 {
        return ((t * t + eps * eps) / (eps * eps)).ln();
    }
    let i = Complex64::new(0.0, 1.0);
    let (rc, tc, ec) = (Complex64::from(r), Complex64::from(t), i * eps);
    if t <= 2.0 * r {
        // 2 Re ∫₀ᵀ (T−u)/(r² − (u−iε)²) du via partial fractions in w = u − iε.
        let j = ((tc - rc - ec) * ((rc + ec).ln() - (rc - tc + ec).ln())
            + (tc + rc - ec) * ((rc + tc - ec).ln() - (rc - ec).ln()))
            / (2.0 * rc);
        return 2.0 * j.re;
    }
    // Same integral, regrouped for T ≫ r. In the form above the logarithms
    // carry weights ~T while 2 Re J stays O(ln T), so the cancellation costs
    // ~T/r·ε-digits — fatal at lab-scale windows. Using
    // ln(r−T+iε) = ln(T−r−iε) + iπ and splitting off the T-proportional part
    // (which is purely imaginary and never enters the real part) leaves only
    // O(r·ln T) terms plus A·ln(B/A) with A = T−r−iε, B = T+r−iε, where
    // ln(B/A) = ln(1 + 2r/A) is evaluated without forming B/A − 1.
    let a = tc - rc - ec;
    let w = 2.0 * rc / a;
    let lr = if w.norm() < 1e-3 {
        w * (1.0 + w * (-0.5 + w * (1.0 / 3.0 + w * (-0.25 + w * (0.2 - w / 6.0)))))
    } else {
        (1.0 + w).ln()
    };
    let real_part = -std::f64::consts::PI * eps + (a * lr).re + (2.0 * rc * (tc + rc - ec).ln()).re
        + ((-rc - ec) * (rc + ec).ln()).re
        - ((rc - ec) * (rc - ec).ln()).re;
    real_part / r
}

/// Self-branch vacuum noise of a static mass `m` at smearing `ε`:
/// `L_V = (m²/4π²) S(0, ε, T)`.
pub fn noise_lv_static(m: f64, eps: f64, window: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    m * m / (4.0 * pi2) * wightman_smear_static(0.0, eps, window)
}

/// Cross-branch vacuum noise of a static mass `m` whose branches sit a
/// distance `offset` apart: `L_I = (m²/4π²) S(offset, ε, T)`.
pub fn noise_li_static(m: f64, offset: f64, eps: f64, window: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    m * m / (4.0 * pi2) * wightman_smear_static(offset, eps, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_with_breakpoints, QuadOptions};

    /// Brute-force check of the complex-log smear against direct quadrature
    /// of the real kernel at a comfortably large ε.
    #[test]
    fn wightman_smear_matches_direct_quadrature() {
        let opts = QuadOptions { tol_abs: 1e-12, tol_rel: 1e-12, max_splits: 20_000 };
        for &(r, eps, t) in &[(0.0, 0.3, 10.0), (2.0, 0.25, 10.0), (2.0, 0.05, 30.0), (5.0, 0.5, 3.0)] {
            let kernel = |u: f64| {
                let sigma = r * r - u * u;
                let se = sigma + eps * eps;
                se / (se * se + 4.0 * eps * eps * u * u)
            };
            let f = |u: f64| (t - u.abs()) * kernel(u);
            let breaks = [-r - eps, -r + eps, -eps, 0.0, eps, r - eps, r + eps];
            let direct = integrate_with_breakpoints(f, -t, t, &breaks, &opts);
            let closed = wightman_smear_static(r, eps, t);
            assert!(
                (direct.value - closed).abs() < 1e-8 * closed.abs().max(1.0),
                "r={r} eps={eps} T={t}: direct {} vs closed {closed}",
                direct.value
            );
        }
    }

    /// As ε → 0 the separated-pair smear approaches the principal-value
    /// Hadamard closed form — at *first* order in ε: the pole crossing makes
    /// the window integral even in ε but not smooth at ε = 0. Order-by-order
    /// Richardson recovers the limit to high accuracy.
    #[test]
    fn smear_limit_recovers_hadamard_principal_value() {
        let (d, t) = (1.0, 100.0);
        let pv = hadamard_static(1.0, 1.0, d, t);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let via_smear = |eps: f64| wightman_smear_static(d, eps, t) / (2.0 * pi2);
        // Leading error is linear in ε: a 10× finer smear cuts it ~10×.
        let coarse = (via_smear(1e-3) - pv).abs();
        let fine = (via_smear(1e-4) - pv).abs();
        let ratio = coarse / fine;
        assert!((8.0..12.0).contains(&ratio), "error ratio {ratio}, expected ≈ 10");
        // Richardson over a halving schedule lands on the principal value.
        let vals: Vec<f64> = (0..5).map(|k| via_smear(1e-2 * 0.5f64.powi(k))).collect();
        let (lim, _) = crate::quad::richardson(&vals, 0.5, 1);
        assert!((lim - pv).abs() < 1e-9 * pv.abs(), "{lim} vs {pv}");
    }

    /// The closed form switches grouping at T = 2r; both groupings are
    /// accurate in the overlap region, so values must agree through the seam.
    #[test]
    fn smear_groupings_agree_at_moderate_windows() {
        for &(r, eps, t) in &[(1.0, 0.1, 5.0), (1.0, 1e-3, 2.0 + 1e-9), (3.0, 0.2, 50.0)] {
            let i = Complex64::new(0.0, 1.0);
            let (rc, tc, ec) = (Complex64::from(r), Complex64::from(t), i * eps);
            let j = ((tc - rc - ec) * ((rc + ec).ln() - (rc - tc + ec).ln())
                + (tc + rc - ec) * ((rc + tc - ec).ln() - (rc - ec).ln()))
                / (2.0 * rc);
            let naive = 2.0 * j.re;
            let stable = wightman_smear_static(r, eps, t);
            assert!(
                (stable - naive).abs() < 1e-11 * naive.abs().max(1.0),
                "r={r} eps={eps} T={t}: {stable} vs {naive}"
            );
        }
    }

    /// A one-second window over a micron-scale separation (T/d ≈ 3·10¹⁴).
    /// The principal-value form must hold full precision, and the smear must
    /// still extrapolate onto it once the width stays below the scale where
    /// the window-tail ε²T/d³ term would swamp the value.
    #[test]
    fn closed_forms_stay_accurate_at_lab_scale_windows() {
        let t = 2.998e14;
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let h = hadamard_static(1.0, 1.0, 1.0, t);
        let asym = (1.0 + t.ln()) / pi2;
        assert!(((h - asym) / asym).abs() < 1e-13, "{h} vs {asym}");
        let vals: Vec<f64> = (0..5)
            .map(|k| wightman_smear_static(1.0, 1e-7 * 0.5f64.powi(k), t) / (2.0 * pi2))
            .collect();
        let (lim, _) = crate::quad::richardson(&vals, 0.5, 1);
        assert!(((lim - h) / h).abs() < 1e-9, "{lim} vs {h}");
    }

    #[test]
    fn delta_static_spot_values() {
        // 2·(T−d)/(4πd) with unit masses.
        let want = 198.0 / (4.0 * std::f64::consts::PI);
        assert!((delta_static(1.0, 1.0, 1.0, 100.0) - want).abs() < 1e-12);
        assert_eq!(delta_static(1.0, 1.0, 5.0, 4.0), 0.0);
        // Bilinear in the masses.
        assert!(
            (delta_static(2.0, 3.0, 1.0, 100.0) - 6.0 * delta_static(1.0, 1.0, 1.0, 100.0)).abs()
                < 1e-9
        );
    }

    #[test]
    fn hadamard_static_asymptotics() {
        // For T ≫ d the closed form approaches (m²/π²)(1 + ln(T/d)).
        let h = hadamard_static(1.0, 1.0, 1.0, 1e6);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let asym = (1.0 + (1e6f64).ln()) / pi2;
        assert!(((h - asym) / asym).abs() < 1e-9);
    }

    #[test]
    fn self_noise_grows_logarithmically_with_shrinking_smearing() {
        let a = noise_lv_static(1.0, 1e-2, 10.0);
        let b = noise_lv_static(1.0, 1e-4, 10.0);
        // Each ε decade adds ~ m²·ln(100)/(2π²).
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert!(((b - a) - (100.0f64).ln() / (2.0 * pi2)).abs() < 1e-4);
    }
}
