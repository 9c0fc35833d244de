//! Run configuration: the TOML schema, SI-quantity parsing, and resolution
//! into internal units.
//!
//! A config document has the sections
//!
//! ```toml
//! [units]                      # optional
//! length_scale_m = 1e-6        # meters per internal length unit
//! # g_newton = 1e-3            # optional internal Newton constant override
//!
//! [experiment]                 # required
//! m1 = "1e-14 kg"              # quantities: "value unit" strings (SI) or
//! m2 = "1e-14 kg"              # bare numbers (already internal units)
//! separation = "1e-6 m"
//! offset = "1e-6 m"
//! window = "1 s"
//! family = "static"            # or "split-return" (then ramp is required)
//! # ramp = "0.05 s"
//! # coupling = 1e-3            # internal-G override; default is units G
//!
//! [numerics]                   # optional; all fields defaulted
//! [output]                     # optional; format = "csv" | "json"
//! [sweep]                      # optional; axes as [[sweep.axes]] tables
//! [trials]                     # optional; seed and trial counts
//! ```
//!
//! Unknown keys anywhere are rejected (typos must not silently disable an
//! option), malformed quantities are parse errors naming the field, and
//! physical validation collects *all* violations into one error so a bad
//! config round-trips through a single edit session.

use crate::error::{GmeError, GmeResult};
use crate::kernels::NumericsConfig;
use crate::scanner::{Diagnostic, ExperimentTemplate, GeometryFamily, SweepAxis, SweepParameter, SweepSpec, DEFAULT_MAX_POINTS};
use crate::units::UnitsSystem;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Serialization target for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub format: OutputFormat,
    /// Output file; stdout when absent.
    pub destination: Option<PathBuf>,
}

/// Seeding and sizes for the randomized self-checks run by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialsConfig {
    pub seed: u64,
    /// Local-unitary invariance trials on the negativity.
    pub local_unitary: usize,
}

impl Default for TrialsConfig {
    fn default() -> Self {
        TrialsConfig { seed: 17, local_unitary: 100 }
    }
}

/// A fully resolved run: everything in internal units, every default made
/// explicit. This is what provenance headers echo.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub units: UnitsSystem,
    pub experiment: ExperimentTemplate,
    pub numerics: NumericsConfig,
    pub sweep: Option<SweepSpec>,
    pub output: OutputConfig,
    pub trials: TrialsConfig,
}

/// A config value: either a bare number (internal units) or a string with
/// an SI suffix, `"1.5e-6 m"`, `"1 s"`, `"2e-14 kg"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Internal(f64),
    Si(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dimension {
    Length,
    Time,
    Mass,
    Dimensionless,
}

impl Dimension {
    fn suffix(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Mass => "kg",
            Dimension::Dimensionless => "",
        }
    }
}

impl Quantity {
    fn resolve(&self, field: &str, dim: Dimension, units: &UnitsSystem) -> GmeResult<f64> {
        match self {
            Quantity::Internal(x) => Ok(*x),
            Quantity::Si(text) => {
                if dim == Dimension::Dimensionless {
                    return Err(GmeError::Parse(format!(
                        "{field}: '{text}' — this field is dimensionless, give a bare number"
                    )));
                }
                let mut parts = text.split_whitespace();
                let (value, unit) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(v), Some(u), None) => (v, u),
                    _ => {
                        return Err(GmeError::Parse(format!(
                            "{field}: '{text}' is not of the form \"<value> {}\"",
                            dim.suffix()
                        )))
                    }
                };
                let value: f64 = value.parse().map_err(|_| {
                    GmeError::Parse(format!("{field}: '{value}' is not a number"))
                })?;
                if unit != dim.suffix() {
                    return Err(GmeError::Parse(format!(
                        "{field}: unit '{unit}' where '{}' was expected",
                        dim.suffix()
                    )));
                }
                Ok(match dim {
                    Dimension::Length => units.length_to_internal(value),
                    Dimension::Time => units.time_to_internal(value),
                    Dimension::Mass => units.mass_to_internal(value),
                    Dimension::Dimensionless => unreachable!(),
                })
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    units: Option<RawUnits>,
    experiment: RawExperiment,
    numerics: Option<RawNumerics>,
    output: Option<RawOutput>,
    sweep: Option<RawSweep>,
    trials: Option<RawTrials>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnits {
    length_scale_m: Option<f64>,
    g_newton: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    m1: Quantity,
    m2: Quantity,
    separation: Quantity,
    offset: Quantity,
    window: Quantity,
    family: Option<String>,
    ramp: Option<Quantity>,
    coupling: Option<f64>,
}

// NumericsConfig itself deserializes, but its smearing width is an internal
// length while config authors think in meters; this mirror accepts a
// quantity there and leaves everything else bare.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
    max_splits: Option<usize>,
    smear_initial_factor: Option<f64>,
    smear_ratio: Option<f64>,
    smear_levels: Option<usize>,
    noise_smear_width: Option<Quantity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<OutputFormat>,
    destination: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    max_points: Option<usize>,
    outputs: Option<Vec<Diagnostic>>,
    #[serde(default)]
    axes: Vec<RawAxis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    parameter: SweepParameter,
    values: Vec<Quantity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrials {
    seed: Option<u64>,
    local_unitary: Option<usize>,
}

fn axis_dimension(parameter: SweepParameter) -> Dimension {
    match parameter {
        SweepParameter::Mass1 | SweepParameter::Mass2 => Dimension::Mass,
        SweepParameter::Separation | SweepParameter::Offset => Dimension::Length,
        SweepParameter::Window => Dimension::Time,
        SweepParameter::Coupling => Dimension::Dimensionless,
    }
}

/// Parse and resolve a config document.
///
/// Schema violations (unknown keys, malformed quantities) are parse errors;
/// everything that parses but describes an invalid experiment comes back as
/// one validation error listing every violation found.
pub fn parse_config(text: &str) -> GmeResult<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| GmeError::Parse(format!("config: {e}")))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> GmeResult<RunConfig> {
    let units = {
        let scale = raw.units.as_ref().and_then(|u| u.length_scale_m).unwrap_or(1e-6);
        match raw.units.as_ref().and_then(|u| u.g_newton) {
            Some(g) => UnitsSystem::with_g(scale, g)?,
            None => UnitsSystem::si(scale)?,
        }
    };

    let family = match (raw.experiment.family.as_deref(), &raw.experiment.ramp) {
        (Some("static") | None, None) => GeometryFamily::Static,
        (Some("static") | None, Some(_)) => {
            return Err(GmeError::Validation(
                "experiment.ramp is only meaningful for family = \"split-return\"".to_string(),
            ))
        }
        (Some("split-return"), Some(ramp)) => GeometryFamily::SplitReturn {
            ramp: ramp.resolve("experiment.ramp", Dimension::Time, &units)?,
        },
        (Some("split-return"), None) => {
            return Err(GmeError::Validation(
                "family = \"split-return\" requires experiment.ramp".to_string(),
            ))
        }
        (Some(other), _) => {
            return Err(GmeError::Parse(format!(
                "experiment.family: '{other}' is not one of \"static\", \"split-return\""
            )))
        }
    };

    let e = &raw.experiment;
    let experiment = ExperimentTemplate {
        m1: e.m1.resolve("experiment.m1", Dimension::Mass, &units)?,
        m2: e.m2.resolve("experiment.m2", Dimension::Mass, &units)?,
        separation: e.separation.resolve("experiment.separation", Dimension::Length, &units)?,
        offset: e.offset.resolve("experiment.offset", Dimension::Length, &units)?,
        window: e.window.resolve("experiment.window", Dimension::Time, &units)?,
        coupling: e.coupling.unwrap_or(units.g_newton),
        family,
    };

    let defaults = NumericsConfig::default();
    let numerics = match raw.numerics {
        None => defaults,
        Some(n) => NumericsConfig {
            tol_abs: n.tol_abs.unwrap_or(defaults.tol_abs),
            tol_rel: n.tol_rel.unwrap_or(defaults.tol_rel),
            max_splits: n.max_splits.unwrap_or(defaults.max_splits),
            smear_initial_factor: n.smear_initial_factor.unwrap_or(defaults.smear_initial_factor),
            smear_ratio: n.smear_ratio.unwrap_or(defaults.smear_ratio),
            smear_levels: n.smear_levels.unwrap_or(defaults.smear_levels),
            noise_smear_width: n
                .noise_smear_width
                .map(|q| q.resolve("numerics.noise_smear_width", Dimension::Length, &units))
                .transpose()?,
        },
    };

    let sweep = match raw.sweep {
        None => None,
        Some(s) => {
            let mut axes = Vec::with_capacity(s.axes.len());
            for (i, axis) in s.axes.iter().enumerate() {
                let dim = axis_dimension(axis.parameter);
                let field = format!("sweep.axes[{i}] ({})", axis.parameter.label());
                let mut values = Vec::with_capacity(axis.values.len());
                for q in &axis.values {
                    values.push(q.resolve(&field, dim, &units)?);
                }
                axes.push(SweepAxis { parameter: axis.parameter, values });
            }
            Some(SweepSpec {
                base: experiment,
                axes,
                max_points: s.max_points.unwrap_or(DEFAULT_MAX_POINTS),
                outputs: s.outputs.unwrap_or_else(|| Diagnostic::ALL.to_vec()),
            })
        }
    };

    let output = match raw.output {
        None => OutputConfig { format: OutputFormat::Csv, destination: None },
        Some(o) => OutputConfig {
            format: o.format.unwrap_or(OutputFormat::Csv),
            destination: o.destination,
        },
    };

    let trials = {
        let d = TrialsConfig::default();
        match raw.trials {
            None => d,
            Some(t) => TrialsConfig {
                seed: t.seed.unwrap_or(d.seed),
                local_unitary: t.local_unitary.unwrap_or(d.local_unitary),
            },
        }
    };

    // Physical validation, with every violation collected before failing.
    let mut violations = Vec::new();
    let push = |violations: &mut Vec<String>, e: GmeError| match e {
        // Unwrap nested validation errors so the prefix appears once.
        GmeError::Validation(msg) => violations.push(msg),
        other => violations.push(other.to_string()),
    };
    if let Err(e) = numerics.clone().validated() {
        push(&mut violations, e);
    }
    for (field, value) in [
        ("experiment.m1", experiment.m1),
        ("experiment.m2", experiment.m2),
        ("experiment.separation", experiment.separation),
        ("experiment.window", experiment.window),
    ] {
        if !(value.is_finite() && value > 0.0) {
            violations.push(format!("{field} must be positive and finite, got {value}"));
        }
    }
    if !experiment.offset.is_finite() {
        violations.push(format!("experiment.offset must be finite, got {}", experiment.offset));
    }
    if !(experiment.coupling.is_finite() && experiment.coupling >= 0.0) {
        violations.push(format!(
            "experiment.coupling must be finite and nonnegative, got {}",
            experiment.coupling
        ));
    }
    // Geometry-level checks (ramp duration, subluminal split speed) only
    // make sense once the fields themselves are sound.
    if violations.is_empty() {
        if let Err(e) = experiment.build() {
            push(&mut violations, e);
        }
    }
    if let Some(spec) = &sweep {
        if let Err(e) = spec.validate() {
            push(&mut violations, e);
        }
    }
    if !violations.is_empty() {
        return Err(GmeError::Validation(violations.join("; ")));
    }

    Ok(RunConfig { units, experiment, numerics, sweep, output, trials })
}
