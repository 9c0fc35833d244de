//! Report serialization: CSV and JSON writers sharing one row layout.
//!
//! Both formats carry a provenance block — tool version and the fully
//! resolved run configuration — so any output file can be reproduced from
//! its own header. Deliberately no timestamps or hostnames: two runs of the
//! same build on the same config must produce byte-identical files.
//!
//! Rows are flat. Fixed identification columns come first (`index`, the
//! resolved parameters, `regime`), then the diagnostic groups selected by
//! the sweep's `outputs` list in their given order, then quadrature
//! bookkeeping and row status:
//!
//! | group | columns |
//! |---|---|
//! | functionals | `delta_{ll,rl,lr,rr}`, `delta_combination`, `hadamard_{ll,rl,lr,rr}`, `hadamard_combination` |
//! | negativities | `n_classical_exact`, `n_classical_leading`, `n_quantum_leading`, `classical_limit`, `negativity_difference` |
//! | dominance | `dominance`, `dominance_kind` |
//! | noise | `noise1_lv`, `noise1_li`, `noise2_lv`, `noise2_li`, `noise_smear_width` |
//!
//! The two combination columns are the ones whose ratio is the dominance
//! diagnostic: `Δ_LL + Δ_RR − Δ_LR − Δ_RL` and likewise for `H`.
//!
//! A diagnostic a row could not compute is an empty CSV cell and a JSON
//! `null`; the reason lives in `errors` and the row's `status` is
//! `partial` (some diagnostics present) or `failed` (none). Numbers use
//! shortest round-trip formatting in both formats, so parsing a CSV cell
//! and the matching JSON field yields bit-identical values. Were a complex
//! column ever added it would be split into `_re`/`_im` pairs rather than
//! formatted as one cell.

use crate::config::{OutputFormat, RunConfig};
use crate::scanner::{Diagnostic, DominanceRatio, ModelReport};
use serde_json::{json, Map, Value};
use std::io::Write;

use crate::error::GmeResult;

/// One output cell. `Empty` is a diagnostic the row did not compute.
#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn opt(value: Option<f64>) -> Cell {
        value.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            // `{}` on f64 is the shortest representation that parses back
            // to the same bits; non-finite values print as inf/NaN, which
            // `f64::from_str` also accepts.
            Cell::Num(x) => format!("{x}"),
            Cell::Int(n) => format!("{n}"),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            // JSON has no non-finite numbers; keep the CSV spelling.
            Cell::Num(x) => json!(format!("{x}")),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

fn pair_columns(prefix: &str, values: Option<[f64; 4]>, columns: &mut Vec<(String, Cell)>) {
    // Pair order matches the branch index (particle 1 fastest).
    for (i, suffix) in ["ll", "rl", "lr", "rr"].iter().enumerate() {
        columns.push((format!("{prefix}_{suffix}"), Cell::opt(values.map(|v| v[i]))));
    }
    let comb = values.map(|v| v[0] + v[3] - v[1] - v[2]);
    columns.push((format!("{prefix}_combination"), Cell::opt(comb)));
}

fn row(report: &ModelReport, outputs: &[Diagnostic]) -> Vec<(String, Cell)> {
    let mut c: Vec<(String, Cell)> = Vec::with_capacity(40);
    let col = |name: &str, cell: Cell| (name.to_string(), cell);

    let p = &report.params;
    c.push(col("index", Cell::Int(report.index)));
    c.push(col("m1", Cell::Num(p.m1)));
    c.push(col("m2", Cell::Num(p.m2)));
    c.push(col("separation", Cell::Num(p.separation)));
    c.push(col("offset", Cell::Num(p.offset)));
    c.push(col("window", Cell::Num(p.window)));
    c.push(col("coupling", Cell::Num(p.coupling)));
    let (family, ramp) = match p.family {
        crate::scanner::GeometryFamily::Static => ("static", Cell::Empty),
        crate::scanner::GeometryFamily::SplitReturn { ramp } => ("split-return", Cell::Num(ramp)),
    };
    c.push(col("family", Cell::Text(family.to_string())));
    c.push(col("ramp", ramp));
    c.push(col(
        "regime",
        report.regime.map_or(Cell::Empty, |r| Cell::Text(r.label().to_string())),
    ));

    for group in outputs {
        match group {
            Diagnostic::Functionals => {
                pair_columns("delta", report.delta.map(|d| d.map(|f| f.value)), &mut c);
                pair_columns("hadamard", report.hadamard.map(|h| h.map(|f| f.value)), &mut c);
            }
            Diagnostic::Negativities => {
                c.push(col("n_classical_exact", Cell::opt(report.n_classical_exact)));
                c.push(col("n_classical_leading", Cell::opt(report.n_classical_leading)));
                c.push(col("n_quantum_leading", Cell::opt(report.n_quantum_leading)));
                c.push(col("classical_limit", Cell::opt(report.classical_limit)));
                c.push(col("negativity_difference", Cell::opt(report.negativity_difference)));
            }
            Diagnostic::Dominance => {
                c.push(col("dominance", Cell::opt(report.dominance.and_then(|d| d.value()))));
                let kind = report.dominance.map(|d| match d {
                    DominanceRatio::Finite(_) => "finite",
                    DominanceRatio::Infinite => "infinite",
                    DominanceRatio::Undefined => "undefined",
                });
                c.push(col("dominance_kind", kind.map_or(Cell::Empty, |k| Cell::Text(k.into()))));
            }
            Diagnostic::Noise => {
                c.push(col("noise1_lv", Cell::opt(report.noise1.map(|n| n.l_v.value))));
                c.push(col("noise1_li", Cell::opt(report.noise1.map(|n| n.l_i.value))));
                c.push(col("noise2_lv", Cell::opt(report.noise2.map(|n| n.l_v.value))));
                c.push(col("noise2_li", Cell::opt(report.noise2.map(|n| n.l_i.value))));
                c.push(col("noise_smear_width", Cell::opt(report.noise_smear_width)));
            }
        }
    }

    c.push(col(
        "quad_max_abs_error",
        Cell::opt(report.quadrature.map(|q| q.max_abs_error)),
    ));
    c.push(col(
        "quad_evaluations",
        report.quadrature.map_or(Cell::Empty, |q| Cell::Int(q.total_evaluations)),
    ));

    let computed_any = report.delta.is_some()
        || report.hadamard.is_some()
        || report.n_classical_exact.is_some()
        || report.n_quantum_leading.is_some()
        || report.dominance.is_some();
    let status = if report.errors.is_empty() {
        "ok"
    } else if computed_any {
        "partial"
    } else {
        "failed"
    };
    c.push(col("status", Cell::Text(status.to_string())));
    c.push(col("errors", Cell::Text(report.errors.join(" | "))));
    c
}

fn selected_outputs(config: &RunConfig) -> Vec<Diagnostic> {
    match &config.sweep {
        Some(spec) => spec.outputs.clone(),
        None => Diagnostic::ALL.to_vec(),
    }
}

/// One-line JSON of the resolved configuration, echoed into every output.
fn config_json(config: &RunConfig) -> GmeResult<String> {
    serde_json::to_string(config)
        .map_err(|e| crate::error::GmeError::Io(std::io::Error::other(e)))
}

pub fn write_csv<W: Write>(
    mut w: W,
    config: &RunConfig,
    reports: &[ModelReport],
) -> GmeResult<()> {
    let outputs = selected_outputs(config);
    writeln!(w, "# gmesim {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# config: {}", config_json(config)?)?;
    let mut first = true;
    for report in reports {
        let cells = row(report, &outputs);
        if first {
            let header: Vec<&str> = cells.iter().map(|(name, _)| name.as_str()).collect();
            writeln!(w, "{}", header.join(","))?;
            first = false;
        }
        let line: Vec<String> = cells.iter().map(|(_, cell)| cell.csv()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    if first {
        // No rows: still emit the header so the schema is visible.
        let cells = row(&empty_report(config), &outputs);
        let header: Vec<&str> = cells.iter().map(|(name, _)| name.as_str()).collect();
        writeln!(w, "{}", header.join(","))?;
    }
    Ok(())
}

// A placeholder used only to materialize the column list for empty outputs.
fn empty_report(config: &RunConfig) -> ModelReport {
    ModelReport {
        index: 0,
        params: config.experiment,
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
    }
}

pub fn write_json<W: Write>(
    mut w: W,
    config: &RunConfig,
    reports: &[ModelReport],
) -> GmeResult<()> {
    let outputs = selected_outputs(config);
    let rows: Vec<Value> = reports
        .iter()
        .map(|report| {
            let mut object = Map::new();
            for (name, cell) in row(report, &outputs) {
                object.insert(name, cell.json());
            }
            Value::Object(object)
        })
        .collect();
    let document = json!({
        "provenance": {
            "tool": "gmesim",
            "version": env!("CARGO_PKG_VERSION"),
            "config": serde_json::from_str::<Value>(&config_json(config)?)
                .expect("round-tripping our own serialization"),
        },
        "reports": rows,
    });
    let rendered = serde_json::to_string_pretty(&document)
        .map_err(|e| crate::error::GmeError::Io(std::io::Error::other(e)))?;
    writeln!(w, "{rendered}")?;
    Ok(())
}

/// Serialize reports in the configured format to a string.
pub fn render(config: &RunConfig, reports: &[ModelReport]) -> GmeResult<String> {
    let mut buffer = Vec::new();
    match config.output.format {
        OutputFormat::Csv => write_csv(&mut buffer, config, reports)?,
        OutputFormat::Json => write_json(&mut buffer, config, reports)?,
    }
    Ok(String::from_utf8(buffer).expect("writers emit UTF-8"))
}

/// One closed-form-vs-numeric comparison from the `oracle` subcommand.
#[derive(Debug, Clone)]
pub struct OracleRow {
    /// Which functional: `delta` or `hadamard`.
    pub kind: &'static str,
    /// Branch pair label.
    pub pair: &'static str,
    /// Static distance between the pair's worldlines.
    pub distance: f64,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
    /// Regression threshold for this functional's pipeline.
    pub tolerance: f64,
}

impl OracleRow {
    pub fn within(&self) -> bool {
        self.rel_error <= self.tolerance
    }

    fn cells(&self) -> Vec<(&'static str, Cell)> {
        vec![
            ("kind", Cell::Text(self.kind.to_string())),
            ("pair", Cell::Text(self.pair.to_string())),
            ("distance", Cell::Num(self.distance)),
            ("analytic", Cell::Num(self.analytic)),
            ("numeric", Cell::Num(self.numeric)),
            ("rel_error", Cell::Num(self.rel_error)),
            ("tolerance", Cell::Num(self.tolerance)),
            (
                "status",
                Cell::Text(if self.within() { "ok" } else { "out-of-tolerance" }.to_string()),
            ),
        ]
    }
}

pub fn render_oracle(config: &RunConfig, rows: &[OracleRow]) -> GmeResult<String> {
    let mut out = String::new();
    match config.output.format {
        OutputFormat::Csv => {
            out.push_str(&format!("# gmesim {}\n", env!("CARGO_PKG_VERSION")));
            out.push_str(&format!("# config: {}\n", config_json(config)?));
            let mut first = true;
            for r in rows {
                let cells = r.cells();
                if first {
                    let header: Vec<&str> = cells.iter().map(|(n, _)| *n).collect();
                    out.push_str(&header.join(","));
                    out.push('\n');
                    first = false;
                }
                let line: Vec<String> = cells.iter().map(|(_, c)| c.csv()).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        OutputFormat::Json => {
            let objects: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut object = Map::new();
                    for (name, cell) in r.cells() {
                        object.insert(name.to_string(), cell.json());
                    }
                    Value::Object(object)
                })
                .collect();
            let document = json!({
                "provenance": {
                    "tool": "gmesim",
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": serde_json::from_str::<Value>(&config_json(config)?)
                        .expect("round-tripping our own serialization"),
                },
                "oracle": objects,
            });
            out = serde_json::to_string_pretty(&document)
                .map_err(|e| crate::error::GmeError::Io(std::io::Error::other(e)))?;
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::scanner::run_single;

    fn tiny_run() -> (RunConfig, Vec<ModelReport>) {
        let cfg = parse_config(
            r#"
[units]
length_scale_m = 1e-6
g_newton = 1e-3

[experiment]
m1 = 1.0
m2 = 0.5
separation = 1.0
offset = 2.0
window = 30.0
"#,
        )
        .unwrap();
        let report = run_single(&cfg.experiment, &cfg.numerics);
        (cfg, vec![report])
    }

    fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .unwrap()
            .split(',')
            .map(str::to_string)
            .collect();
        // No quoted cells appear in these tests' numeric fixtures.
        let rows = lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        (header, rows)
    }

    #[test]
    fn csv_and_json_agree_bit_for_bit() {
        let (cfg, reports) = tiny_run();
        let mut csv = Vec::new();
        write_csv(&mut csv, &cfg, &reports).unwrap();
        let mut js = Vec::new();
        write_json(&mut js, &cfg, &reports).unwrap();

        let (header, rows) = csv_rows(std::str::from_utf8(&csv).unwrap());
        let parsed: Value = serde_json::from_slice(&js).unwrap();
        let json_rows = parsed["reports"].as_array().unwrap();
        assert_eq!(rows.len(), json_rows.len());
        let mut numeric_columns = 0;
        for (cells, object) in rows.iter().zip(json_rows) {
            assert_eq!(cells.len(), header.len());
            for (name, cell) in header.iter().zip(cells) {
                let field = &object[name.as_str()];
                match field {
                    Value::Null => assert!(cell.is_empty(), "{name}: {cell}"),
                    Value::Number(n) if n.is_f64() => {
                        let want = n.as_f64().unwrap();
                        let got: f64 = cell.parse().unwrap();
                        assert_eq!(got.to_bits(), want.to_bits(), "{name}: {cell} vs {want}");
                        numeric_columns += 1;
                    }
                    Value::Number(n) => assert_eq!(cell, &n.to_string(), "{name}"),
                    Value::String(s) => assert_eq!(cell, s, "{name}"),
                    other => panic!("{name}: unexpected {other:?}"),
                }
            }
        }
        assert!(numeric_columns > 15, "only {numeric_columns} numeric cells compared");
    }

    #[test]
    fn identical_runs_render_identical_bytes() {
        let (cfg, reports) = tiny_run();
        let a = render(&cfg, &reports).unwrap();
        let (cfg2, reports2) = tiny_run();
        let b = render(&cfg2, &reports2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn provenance_carries_version_and_resolved_config() {
        let (cfg, reports) = tiny_run();
        let text = render(&cfg, &reports).unwrap();
        let mut lines = text.lines();
        let first = lines.next().unwrap();
        assert_eq!(first, concat!("# gmesim ", env!("CARGO_PKG_VERSION")));
        let config_line = lines.next().unwrap().strip_prefix("# config: ").unwrap();
        let echoed: Value = serde_json::from_str(config_line).unwrap();
        assert_eq!(echoed["numerics"]["tol_rel"], json!(cfg.numerics.tol_rel));
        assert_eq!(echoed["units"]["g_newton"], json!(1e-3));
        assert_eq!(echoed["experiment"]["window"], json!(30.0));
        // Determinism: nothing time- or host-dependent anywhere.
        assert!(!text.to_lowercase().contains("date"));
    }

    #[test]
    fn status_distinguishes_partial_from_failed() {
        let (cfg, reports) = tiny_run();
        let clean = &reports[0];
        assert!(clean.errors.is_empty());

        let mut partial = clean.clone();
        partial.n_quantum_leading = None;
        partial.errors.push("quantum stage: declined, for a comma, test".to_string());
        let mut failed = empty_report(&cfg);
        failed.errors.push("configuration: bad".to_string());

        let mut csv = Vec::new();
        write_csv(&mut csv, &cfg, &[clean.clone(), partial, failed]).unwrap();
        let text = std::str::from_utf8(&csv).unwrap();
        let (header, rows) = csv_rows(text);
        let status_at = header.iter().position(|h| h == "status").unwrap();
        assert!(rows[0][status_at] == "ok");
        // The comma inside the error message is quoted, so naive splitting
        // shifts that row; check statuses via the raw lines instead. Layout:
        // lines 0-1 comments, 2 header, 3.. data rows.
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[4].contains("partial"), "{}", lines[4]);
        assert!(lines[4].contains("\"quantum stage: declined, for a comma, test\""));
        assert!(lines[5].contains("failed"), "{}", lines[5]);
    }

    #[test]
    fn output_selection_filters_column_groups() {
        let (mut cfg, reports) = tiny_run();
        let spec = crate::scanner::SweepSpec {
            base: cfg.experiment,
            axes: vec![],
            max_points: 10,
            outputs: vec![Diagnostic::Negativities],
        };
        cfg.sweep = Some(spec);
        let mut csv = Vec::new();
        write_csv(&mut csv, &cfg, &reports).unwrap();
        let (header, _) = csv_rows(std::str::from_utf8(&csv).unwrap());
        assert!(header.iter().any(|h| h == "n_classical_exact"));
        assert!(header.iter().all(|h| h != "delta_ll"));
        assert!(header.iter().all(|h| h != "dominance"));
        assert!(header.iter().any(|h| h == "status"));
    }

    #[test]
    fn empty_report_lists_still_emit_the_schema() {
        let (cfg, _) = tiny_run();
        let mut csv = Vec::new();
        write_csv(&mut csv, &cfg, &[]).unwrap();
        let (header, rows) = csv_rows(std::str::from_utf8(&csv).unwrap());
        assert!(header.iter().any(|h| h == "index"));
        assert!(rows.is_empty());
    }
}
