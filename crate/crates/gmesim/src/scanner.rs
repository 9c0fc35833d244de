//! Parameter sweeps comparing the two models across mass, geometry, window
//! and coupling ranges.
//!
//! A sweep walks a rectangular grid over a parametric collinear experiment
//! (see [`ExperimentTemplate`]) and produces one [`ModelReport`] per point:
//! the four phase and four Hadamard functionals, the noise integrals, both
//! models' negativities, and the dominance ratio
//! `|Δ-combination| / |H-combination|` that measures how thoroughly the
//! retarded phases outweigh the vacuum-correlation channel. In the
//! lab-scale regime (micron separations, second-long windows) that ratio
//! reaches ~10¹⁴, which is why the two models' negativities are
//! experimentally indistinguishable there even though their structure
//! differs.
//!
//! Points are embarrassingly parallel and evaluated on the rayon pool; the
//! output order is the row-major grid order regardless of scheduling, and
//! reruns of the same spec are bit-identical. A failing point records its
//! errors in its own report instead of aborting the sweep — partial
//! diagnostics (classical results without the quantum closed forms, say)
//! are still filled in.

use crate::classical::{classical_negativity, compute_phase_table};
use crate::error::{GmeError, GmeResult};
use crate::geom::Vec3;
use crate::kernels::{
    causally_disconnected, vacuum_noise_terms, Functional, NoisePair, NumericsConfig,
};
use crate::quantum::{
    assemble_state, check_branch_symmetry, classical_limit_from_table, compute_hadamard_table,
    quantum_negativity,
};
use crate::worldline::{BranchConfig, BranchPair, Worldline};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the branches are laid out. Everything is collinear on the x axis;
/// the template's `separation` is always the closest approach between the
/// two interferometers and `offset` the full split within each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryFamily {
    /// Branches at rest the whole window: `L₁ = 0`, `R₁ = δ`,
    /// `L₂ = δ + d`, `R₂ = 2δ + d`. The idealized protocol with the split
    /// and recombination outside the window.
    Static,
    /// Each particle splits `±δ/2` about its centre with a smooth ramp of
    /// the given duration at both ends of the window, centres `d + δ`
    /// apart so the closest full-split approach is again `d`.
    SplitReturn { ramp: f64 },
}

/// Parametric experiment the sweep axes act on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentTemplate {
    pub m1: f64,
    pub m2: f64,
    /// Closest approach `d` between the two interferometers.
    pub separation: f64,
    /// Branch split `δ` within each interferometer.
    pub offset: f64,
    /// Interaction window `T`.
    pub window: f64,
    /// Newton's constant in internal units.
    pub coupling: f64,
    pub family: GeometryFamily,
}

impl ExperimentTemplate {
    /// The template with one parameter replaced.
    pub fn with(mut self, parameter: SweepParameter, value: f64) -> Self {
        match parameter {
            SweepParameter::Mass1 => self.m1 = value,
            SweepParameter::Mass2 => self.m2 = value,
            SweepParameter::Separation => self.separation = value,
            SweepParameter::Offset => self.offset = value,
            SweepParameter::Window => self.window = value,
            SweepParameter::Coupling => self.coupling = value,
        }
        self
    }

    /// Materialize the four branch worldlines.
    pub fn build(&self) -> GmeResult<BranchConfig> {
        let x = |v: f64| Vec3::new(v, 0.0, 0.0);
        let (d, del, t) = (self.separation, self.offset, self.window);
        match self.family {
            GeometryFamily::Static => BranchConfig::new(
                Worldline::at_rest(self.m1, x(0.0))?,
                Worldline::at_rest(self.m1, x(del))?,
                Worldline::at_rest(self.m2, x(del + d))?,
                Worldline::at_rest(self.m2, x(2.0 * del + d))?,
                t,
            ),
            GeometryFamily::SplitReturn { ramp } => {
                let centre2 = d + del;
                BranchConfig::new(
                    Worldline::split_return(self.m1, x(0.0), x(-0.5 * del), ramp, t)?,
                    Worldline::split_return(self.m1, x(0.0), x(0.5 * del), ramp, t)?,
                    Worldline::split_return(self.m2, x(centre2), x(-0.5 * del), ramp, t)?,
                    Worldline::split_return(self.m2, x(centre2), x(0.5 * del), ramp, t)?,
                    t,
                )
            }
        }
    }
}

/// Parameter a sweep axis varies. `Separation` is the inter-particle gap
/// `d`, `Offset` the within-particle split `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Mass1,
    Mass2,
    Separation,
    Offset,
    Window,
    Coupling,
}

impl SweepParameter {
    fn requires_strictly_positive(self) -> bool {
        // A zero offset just closes both interferometers; everything else
        // degenerates (massless particles, touching branches, empty
        // windows, no interaction).
        !matches!(self, SweepParameter::Offset)
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::Mass1 => "m1",
            SweepParameter::Mass2 => "m2",
            SweepParameter::Separation => "separation",
            SweepParameter::Offset => "offset",
            SweepParameter::Window => "window",
            SweepParameter::Coupling => "coupling",
        }
    }
}

/// One sweep axis: the parameter and the values it takes, in output order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Column groups a sweep's serialized output includes. Selection affects
/// serialization only; every report always carries all diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Functionals,
    Negativities,
    Dominance,
    Noise,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 4] = [
        Diagnostic::Functionals,
        Diagnostic::Negativities,
        Diagnostic::Dominance,
        Diagnostic::Noise,
    ];
}

/// A rectangular sweep: base point, axes (first axis slowest), and the
/// hard cap on the grid size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentTemplate,
    pub axes: Vec<SweepAxis>,
    /// Refuse grids larger than this; sweeps are quadrature-heavy and a
    /// runaway axis list should fail loudly, not thrash.
    pub max_points: usize,
    /// Column groups to serialize, in order.
    pub outputs: Vec<Diagnostic>,
}

pub const DEFAULT_MAX_POINTS: usize = 10_000;

impl SweepSpec {
    pub fn new(base: ExperimentTemplate, axes: Vec<SweepAxis>) -> Self {
        SweepSpec { base, axes, max_points: DEFAULT_MAX_POINTS, outputs: Diagnostic::ALL.to_vec() }
    }

    /// Number of grid points the spec describes.
    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn validate(&self) -> GmeResult<()> {
        let mut violations = Vec::new();
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.values.is_empty() {
                violations.push(format!("axis {} ({}) has no values", i, axis.parameter.label()));
            }
            for &v in &axis.values {
                let ok = v.is_finite()
                    && if axis.parameter.requires_strictly_positive() { v > 0.0 } else { v >= 0.0 };
                if !ok {
                    violations.push(format!(
                        "axis {} ({}) value {v} must be {}",
                        i,
                        axis.parameter.label(),
                        if axis.parameter.requires_strictly_positive() {
                            "finite and positive"
                        } else {
                            "finite and nonnegative"
                        }
                    ));
                }
            }
            for other in &self.axes[..i] {
                if other.parameter == axis.parameter {
                    violations.push(format!(
                        "parameter {} appears on more than one axis",
                        axis.parameter.label()
                    ));
                }
            }
        }
        if self.max_points == 0 {
            violations.push("max_points must be at least 1".to_string());
        } else if self.grid_size() > self.max_points {
            violations.push(format!(
                "grid has {} points, more than the configured cap of {}",
                self.grid_size(),
                self.max_points
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(GmeError::Validation(violations.join("; ")))
        }
    }
}

/// Causal character of a configuration over its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeFlag {
    /// Light crosses every branch pair within the window.
    TimelikeDominated,
    /// No pair is in causal contact; every phase functional vanishes.
    Spacelike,
    /// Some pairs in contact, some not.
    Mixed,
}

impl RegimeFlag {
    pub fn label(self) -> &'static str {
        match self {
            RegimeFlag::TimelikeDominated => "timelike-dominated",
            RegimeFlag::Spacelike => "spacelike",
            RegimeFlag::Mixed => "mixed",
        }
    }
}

/// Classify a configuration by which branch pairs the window lets light
/// cross. `Spacelike` is exactly the case where all four Δ vanish by
/// causal support.
pub fn regime_flag(config: &BranchConfig) -> RegimeFlag {
    let disconnected = BranchPair::ALL.map(|p| {
        let (w1, w2) = config.pair(p);
        causally_disconnected(w1, w2, config.window)
    });
    if disconnected.iter().all(|&d| d) {
        RegimeFlag::Spacelike
    } else if disconnected.iter().all(|&d| !d) {
        RegimeFlag::TimelikeDominated
    } else {
        RegimeFlag::Mixed
    }
}

/// `|Δ-combination| / |H-combination|` with the degenerate cases explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceRatio {
    Finite(f64),
    /// Nonzero phase combination over a vanishing Hadamard combination.
    Infinite,
    /// Both combinations vanish (closed interferometers, for instance);
    /// neither model predicts any coupling dependence at all.
    Undefined,
}

impl DominanceRatio {
    pub fn value(self) -> Option<f64> {
        match self {
            DominanceRatio::Finite(v) => Some(v),
            DominanceRatio::Infinite => Some(f64::INFINITY),
            DominanceRatio::Undefined => None,
        }
    }
}

/// Ratio of the entanglement-relevant combinations. These are the
/// combinations entering the two negativities — not any single pair
/// functional — because the competition that matters experimentally is
/// between the models' predictions, and both predictions see only the
/// antisymmetric combination.
pub fn dominance_from_combinations(delta_comb: f64, hadamard_comb: f64) -> DominanceRatio {
    if hadamard_comb == 0.0 {
        if delta_comb == 0.0 {
            DominanceRatio::Undefined
        } else {
            DominanceRatio::Infinite
        }
    } else {
        DominanceRatio::Finite((delta_comb / hadamard_comb).abs())
    }
}

/// Evaluate both functional combinations of a configuration and form their
/// ratio.
pub fn dominance_ratio(
    config: &BranchConfig,
    numerics: &NumericsConfig,
) -> GmeResult<DominanceRatio> {
    let (delta, hadamard) = rayon::join(
        || compute_phase_table(config, 1.0, numerics),
        || compute_hadamard_table(config, numerics),
    );
    Ok(dominance_from_combinations(delta?.combination(), spec_combination(&hadamard?)))
}

/// `H_LL + H_RR − H_LR − H_RL`, the Hadamard combination entering the
/// dominance ratio (the negative of the cross-correlation coefficient).
fn spec_combination(h: &[Functional; 4]) -> f64 {
    let v = |p: BranchPair| h[p.index()].value;
    v(BranchPair::LL) + v(BranchPair::RR) - v(BranchPair::LR) - v(BranchPair::RL)
}

/// Worst error estimate and total integrand evaluations across every
/// functional a report evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSummary {
    pub max_abs_error: f64,
    pub total_evaluations: usize,
}

/// Everything the scanner knows about one grid point. Fields are `None`
/// when the corresponding stage did not run — its reason is then in
/// `errors` — so a split-return point still reports its classical
/// diagnostics even though the congruence-based quantum closed forms
/// refuse it.
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    /// Row-major grid index; also the output row order.
    pub index: usize,
    /// The fully resolved parameter values at this point.
    pub params: ExperimentTemplate,
    pub regime: Option<RegimeFlag>,
    /// Phase functionals Δ by pair index.
    pub delta: Option<[Functional; 4]>,
    /// Hadamard functionals H by pair index.
    pub hadamard: Option<[Functional; 4]>,
    pub noise1: Option<NoisePair>,
    pub noise2: Option<NoisePair>,
    pub noise_smear_width: Option<f64>,
    /// Classical-channel negativity `½|sin(πG·D)|`.
    pub n_classical_exact: Option<f64>,
    /// Its leading order `(πG/2)|D|`, the like-for-like comparator.
    pub n_classical_leading: Option<f64>,
    /// Leading-order negativity of the perturbative model.
    pub n_quantum_leading: Option<f64>,
    /// Perturbative pipeline with the quantum kernels zeroed.
    pub classical_limit: Option<f64>,
    /// `n_quantum_leading − n_classical_leading`: what an experiment would
    /// have to resolve to tell the models apart.
    pub negativity_difference: Option<f64>,
    pub dominance: Option<DominanceRatio>,
    pub quadrature: Option<QuadratureSummary>,
    /// Why any of the above are missing. Empty on a clean point.
    pub errors: Vec<String>,
}

fn run_point(index: usize, params: ExperimentTemplate, numerics: &NumericsConfig) -> ModelReport {
    let mut report = ModelReport {
        index,
        params,
        regime: None,
        delta: None,
        hadamard: None,
        noise1: None,
        noise2: None,
        noise_smear_width: None,
        n_classical_exact: None,
        n_classical_leading: None,
        n_quantum_leading: None,
        classical_limit: None,
        negativity_difference: None,
        dominance: None,
        quadrature: None,
        errors: Vec::new(),
    };
    let config = match params.build() {
        Ok(c) => c,
        Err(e) => {
            report.errors.push(format!("configuration: {e}"));
            return report;
        }
    };
    report.regime = Some(regime_flag(&config));

    let table = match compute_phase_table(&config, params.coupling, numerics) {
        Ok(t) => t,
        Err(e) => {
            report.errors.push(format!("phase functionals: {e}"));
            return report;
        }
    };
    report.delta = Some(table.delta);
    report.n_classical_exact = Some(classical_negativity(&table, true));
    report.n_classical_leading = Some(classical_negativity(&table, false));
    report.classical_limit = Some(classical_limit_from_table(&table));

    let hadamard = match compute_hadamard_table(&config, numerics) {
        Ok(h) => Some(h),
        Err(e) => {
            report.errors.push(format!("hadamard functionals: {e}"));
            None
        }
    };
    report.hadamard = hadamard;
    if let Some(h) = &hadamard {
        report.dominance = Some(dominance_from_combinations(table.combination(), spec_combination(h)));
    }

    match check_branch_symmetry(&config) {
        Ok(()) => {
            if let Some(h) = hadamard {
                match vacuum_noise_terms(&config, numerics) {
                    Ok(noise) => {
                        report.noise1 = Some(noise.particle1);
                        report.noise2 = Some(noise.particle2);
                        report.noise_smear_width = Some(noise.smear_width);
                        let state = assemble_state(table, h, noise);
                        report.n_quantum_leading = Some(quantum_negativity(&state));
                    }
                    Err(e) => report.errors.push(format!("noise integrals: {e}")),
                }
            }
        }
        Err(e) => report.errors.push(e.to_string()),
    }
    if let (Some(q), Some(c)) = (report.n_quantum_leading, report.n_classical_leading) {
        report.negativity_difference = Some(q - c);
    }

    let mut summary = QuadratureSummary { max_abs_error: 0.0, total_evaluations: 0 };
    let mut absorb = |f: &Functional| {
        summary.max_abs_error = summary.max_abs_error.max(f.abs_error);
        summary.total_evaluations += f.evaluations;
    };
    for table in [&report.delta, &report.hadamard].into_iter().flatten() {
        table.iter().for_each(&mut absorb);
    }
    for pair in [&report.noise1, &report.noise2].into_iter().flatten() {
        absorb(&pair.l_v);
        absorb(&pair.l_i);
    }
    report.quadrature = Some(summary);
    report
}

/// Evaluate one configuration outside any sweep.
pub fn run_single(params: &ExperimentTemplate, numerics: &NumericsConfig) -> ModelReport {
    run_point(0, *params, numerics)
}

/// Row-major expansion of the grid: first axis slowest, in declared order.
fn grid(spec: &SweepSpec) -> Vec<ExperimentTemplate> {
    let mut points = vec![spec.base];
    for axis in &spec.axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for point in points {
            for &v in &axis.values {
                next.push(point.with(axis.parameter, v));
            }
        }
        points = next;
    }
    points
}

/// Run every grid point and return the reports in grid order.
///
/// Points run on the rayon pool; a failing point records its errors in its
/// report rather than aborting the sweep, so the only hard failure here is
/// an invalid spec.
pub fn run_sweep(spec: &SweepSpec, numerics: &NumericsConfig) -> GmeResult<Vec<ModelReport>> {
    spec.validate()?;
    Ok(grid(spec)
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| run_point(i, p, numerics))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use std::f64::consts::PI;

    fn template() -> ExperimentTemplate {
        ExperimentTemplate {
            m1: 1.0,
            m2: 1.0,
            separation: 1.0,
            offset: 1.0,
            window: 20.0,
            coupling: 0.25,
            family: GeometryFamily::Static,
        }
    }

    #[test]
    fn static_template_places_collinear_branches() {
        let cfg = template().build().unwrap();
        let at = |w: &Worldline| w.position(0.0).unwrap().x;
        assert_eq!(at(&cfg.left1), 0.0);
        assert_eq!(at(&cfg.right1), 1.0);
        assert_eq!(at(&cfg.left2), 2.0);
        assert_eq!(at(&cfg.right2), 3.0);
    }

    #[test]
    fn sweep_grid_is_row_major_with_first_axis_slowest() {
        let spec = SweepSpec::new(
            template(),
            vec![
                SweepAxis { parameter: SweepParameter::Window, values: vec![0.25, 0.5] },
                SweepAxis { parameter: SweepParameter::Separation, values: vec![2.0, 3.0, 4.0] },
            ],
        );
        // Tiny spacelike windows keep every point cheap.
        let reports = run_sweep(&spec, &NumericsConfig::default()).unwrap();
        assert_eq!(reports.len(), 6);
        let got: Vec<(f64, f64)> =
            reports.iter().map(|r| (r.params.window, r.params.separation)).collect();
        let want =
            vec![(0.25, 2.0), (0.25, 3.0), (0.25, 4.0), (0.5, 2.0), (0.5, 3.0), (0.5, 4.0)];
        assert_eq!(got, want);
        for (i, r) in reports.iter().enumerate() {
            assert_eq!(r.index, i);
        }
    }

    #[test]
    fn sweep_validation_rejects_bad_axes() {
        let cases: Vec<SweepSpec> = vec![
            // duplicate parameter
            SweepSpec::new(
                template(),
                vec![
                    SweepAxis { parameter: SweepParameter::Window, values: vec![1.0] },
                    SweepAxis { parameter: SweepParameter::Window, values: vec![2.0] },
                ],
            ),
            // nonpositive mass
            SweepSpec::new(
                template(),
                vec![SweepAxis { parameter: SweepParameter::Mass1, values: vec![1.0, 0.0] }],
            ),
            // empty axis
            SweepSpec::new(
                template(),
                vec![SweepAxis { parameter: SweepParameter::Offset, values: vec![] }],
            ),
        ];
        for spec in cases {
            assert!(matches!(run_sweep(&spec, &NumericsConfig::default()), Err(GmeError::Validation(_))));
        }
        // over the cap
        let mut spec = SweepSpec::new(
            template(),
            vec![SweepAxis { parameter: SweepParameter::Window, values: vec![0.25; 7] }],
        );
        spec.max_points = 6;
        assert!(matches!(spec.validate(), Err(GmeError::Validation(_))));
        // a zero offset is a closed interferometer, not an error
        let spec = SweepSpec::new(
            template(),
            vec![SweepAxis { parameter: SweepParameter::Offset, values: vec![0.0] }],
        );
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn single_point_sweep_matches_run_single() {
        let numerics = NumericsConfig::default();
        let spec = SweepSpec::new(template(), Vec::new());
        let from_sweep = run_sweep(&spec, &numerics).unwrap();
        assert_eq!(from_sweep.len(), 1);
        let direct = run_single(&template(), &numerics);
        assert_eq!(
            serde_json::to_string(&from_sweep[0]).unwrap(),
            serde_json::to_string(&direct).unwrap()
        );
    }

    #[test]
    fn sweeps_are_bit_reproducible() {
        let numerics = NumericsConfig::default();
        let spec = SweepSpec::new(
            template(),
            vec![SweepAxis { parameter: SweepParameter::Window, values: vec![5.0, 10.0] }],
        );
        let a = run_sweep(&spec, &numerics).unwrap();
        let b = run_sweep(&spec, &numerics).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn spacelike_points_are_flagged_with_zero_classical_negativity() {
        let mut t = template();
        t.window = 0.5; // shortest pair separation is 1
        let report = run_single(&t, &NumericsConfig::default());
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert_eq!(report.regime, Some(RegimeFlag::Spacelike));
        for f in &report.delta.unwrap() {
            assert_eq!(f.value, 0.0);
            assert_eq!(f.evaluations, 0);
        }
        assert_eq!(report.n_classical_leading, Some(0.0));
        assert_eq!(report.classical_limit, Some(0.0));
        // The vacuum channel is still alive across the gap.
        assert_eq!(report.dominance, Some(DominanceRatio::Finite(0.0)));
        assert!(report.n_quantum_leading.is_some());
    }

    #[test]
    fn mixed_regime_flag_for_partially_connected_windows() {
        let mut t = template();
        t.window = 1.5; // crosses the d = 1 gap but not the 2δ + d = 3 span
        let report = run_single(&t, &NumericsConfig::default());
        assert_eq!(report.regime, Some(RegimeFlag::Mixed));
    }

    #[test]
    fn dominance_grows_with_window_for_static_geometry() {
        let numerics = NumericsConfig::default();
        let spec = SweepSpec::new(
            template(),
            vec![SweepAxis { parameter: SweepParameter::Window, values: vec![50.0, 100.0, 200.0] }],
        );
        let ratios: Vec<f64> = run_sweep(&spec, &numerics)
            .unwrap()
            .iter()
            .map(|r| r.dominance.unwrap().value().unwrap())
            .collect();
        assert!(ratios[0] > 1.0);
        assert!(ratios[1] > ratios[0]);
        assert!(ratios[2] > ratios[1]);
    }

    #[test]
    fn classical_negativity_slope_matches_static_oracle() {
        // For T ≫ d each Δ is affine in T, so N_c leading is linear with
        // slope (πG/2)·(m₁m₂/2π)·|Σ± 1/d_pq|.
        let numerics = NumericsConfig::default();
        let t = template();
        let spec = SweepSpec::new(
            t,
            vec![SweepAxis { parameter: SweepParameter::Window, values: vec![400.0, 800.0] }],
        );
        let reports = run_sweep(&spec, &numerics).unwrap();
        let n = |i: usize| reports[i].n_classical_leading.unwrap();
        let slope = (n(1) - n(0)) / 400.0;
        // Pair distances: LL = δ+d = 2, RL = d = 1, LR = 2δ+d = 3, RR = 2.
        let inv: f64 = 1.0 / 2.0 + 1.0 / 2.0 - 1.0 / 3.0 - 1.0;
        let want = 0.5 * PI * t.coupling * (t.m1 * t.m2 / (2.0 * PI)) * inv.abs();
        assert!(((slope - want) / want).abs() < 0.01, "{slope} vs {want}");
        // Cross-check one endpoint against the closed form outright.
        let d_comb: f64 = [(2.0, 1.0), (1.0, -1.0), (3.0, -1.0), (2.0, 1.0)]
            .iter()
            .map(|&(d, s): &(f64, f64)| s * reference::delta_static(1.0, 1.0, d, 800.0))
            .sum();
        let want_end = 0.5 * PI * t.coupling * d_comb.abs();
        assert!(((n(1) - want_end) / want_end).abs() < 1e-6);
    }

    #[test]
    fn lab_scale_point_reproduces_the_dominance_exponent() {
        // Micron-scale separations over a one-second window, in internal
        // units: the phase combination outweighs the Hadamard combination
        // by ~14 orders of magnitude.
        let mut t = template();
        t.window = 2.998e14;
        let report = run_single(&t, &NumericsConfig::default());
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        let ratio = report.dominance.unwrap().value().unwrap();
        let exponent = ratio.log10();
        assert!((12.0..=16.0).contains(&exponent), "exponent {exponent}");
        // In the same regime the two models are practically
        // indistinguishable: the negativity difference is a tiny fraction
        // of the negativity itself.
        let nc = report.n_classical_leading.unwrap();
        let diff = report.negativity_difference.unwrap().abs();
        assert!(diff < 1e-10 * nc, "diff {diff} vs N_c {nc}");
    }

    #[test]
    fn split_return_points_keep_classical_diagnostics() {
        let mut t = template();
        t.family = GeometryFamily::SplitReturn { ramp: 2.0 };
        t.window = 20.0;
        t.offset = 0.5;
        let report = run_single(&t, &NumericsConfig::default());
        // The mirror-split branches are not rigid translates, so the
        // congruence-based quantum closed forms must refuse...
        assert!(report.n_quantum_leading.is_none());
        assert!(report.noise1.is_none());
        assert!(report.errors.iter().any(|e| e.contains("not rigid translates")), "{:?}", report.errors);
        // ...while everything classical still fills in.
        assert!(report.n_classical_exact.is_some());
        assert!(report.n_classical_leading.is_some());
        assert!(report.classical_limit.is_some());
        assert!(report.delta.is_some());
        assert!(report.hadamard.is_some());
        assert!(report.dominance.is_some());
        let nc = report.n_classical_leading.unwrap();
        assert!(nc > 0.0);
    }
}
