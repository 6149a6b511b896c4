//! Stable file formats: network JSON, curve CSV with metadata sidecar,
//! and bound-report CSV.
//!
//! All floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly, and all writers emit
//! byte-identical output for identical inputs.

use crate::bounds::{BoundsReport, SlackPolicy};
use crate::curve::{CurveSource, CurveView};
use crate::network::{NetworkError, NetworkSpec};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unexpected column `{0}`")]
    UnexpectedColumn(String),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// 17-significant-digit decimal form; lossless for `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn schema<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Schema { path: path.into(), message: message.into() })
}

// ---------------------------------------------------------------------------
// network JSON

/// Serialises a network to the JSON schema
/// `{"M": int, "p": [float; M] | float, "edges": [[k, j, w], ...], "meta": string}`.
/// A scalar `p` is emitted when all rates are equal. Edges are sorted by
/// `(source, target)`.
pub fn network_to_string(net: &NetworkSpec) -> String {
    let mut out = String::from("{\n");
    let _ = write!(out, "  \"M\": {},\n  \"p\": ", net.node_count());
    let rates = net.external_rates();
    if rates.iter().all(|r| *r == rates[0]) {
        out.push_str(&fmt_f64(rates[0]));
    } else {
        out.push('[');
        for (i, r) in rates.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&fmt_f64(*r));
        }
        out.push(']');
    }
    out.push_str(",\n  \"edges\": [");
    let mut edges: Vec<(usize, usize, f64)> = net.edges().collect();
    edges.sort_unstable_by_key(|&(k, j, _)| (k, j));
    for (i, (k, j, w)) in edges.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\n    [{k}, {j}, {}]", fmt_f64(*w));
    }
    if edges.is_empty() {
        out.push(']');
    } else {
        out.push_str("\n  ]");
    }
    let _ = write!(
        out,
        ",\n  \"meta\": {}\n}}\n",
        serde_json::to_string(net.metadata()).expect("strings always serialise")
    );
    out
}

/// Parses and schema-checks the network JSON format. Self-loops,
/// non-positive weights or rates, and duplicate `(k, j)` pairs are rejected
/// with the offending JSON path.
pub fn network_from_str(text: &str) -> Result<NetworkSpec, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = match value.as_object() {
        Some(o) => o,
        None => return schema("$", "top level must be an object"),
    };
    for key in obj.keys() {
        if !matches!(key.as_str(), "M" | "p" | "edges" | "meta") {
            return schema(key.clone(), "unknown field");
        }
    }
    let m = match obj.get("M").and_then(|v| v.as_u64()) {
        Some(m) if m >= 1 => m as usize,
        _ => return schema("M", "must be a positive integer"),
    };
    let rates = match obj.get("p") {
        Some(serde_json::Value::Number(n)) => {
            let p = n.as_f64().unwrap_or(f64::NAN);
            if !(p.is_finite() && p > 0.0) {
                return schema("p", "must be a positive finite number");
            }
            vec![p; m]
        }
        Some(serde_json::Value::Array(items)) => {
            if items.len() != m {
                return schema("p", format!("expected {m} entries, got {}", items.len()));
            }
            let mut rates = Vec::with_capacity(m);
            for (i, item) in items.iter().enumerate() {
                match item.as_f64() {
                    Some(p) if p.is_finite() && p > 0.0 => rates.push(p),
                    _ => return schema(format!("p[{i}]"), "must be a positive finite number"),
                }
            }
            rates
        }
        _ => return schema("p", "must be a number or an array of numbers"),
    };
    let items = match obj.get("edges").and_then(|v| v.as_array()) {
        Some(items) => items,
        None => return schema("edges", "must be an array"),
    };
    let mut edges = Vec::with_capacity(items.len());
    let mut seen = std::collections::HashSet::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("edges[{i}]");
        let triple = match item.as_array() {
            Some(t) if t.len() == 3 => t,
            _ => return schema(path, "must be a [source, target, weight] triple"),
        };
        let k = match triple[0].as_u64() {
            Some(k) if (k as usize) < m => k as usize,
            _ => return schema(path, format!("source must be an integer below {m}")),
        };
        let j = match triple[1].as_u64() {
            Some(j) if (j as usize) < m => j as usize,
            _ => return schema(path, format!("target must be an integer below {m}")),
        };
        let w = match triple[2].as_f64() {
            Some(w) if w.is_finite() && w > 0.0 => w,
            _ => return schema(path, "weight must be a positive finite number"),
        };
        if k == j {
            return schema(path, format!("self-loop at node {k}"));
        }
        if !seen.insert((k, j)) {
            return schema(path, format!("duplicate edge ({k}, {j})"));
        }
        edges.push((k, j, w));
    }
    let meta = match obj.get("meta").and_then(|v| v.as_str()) {
        Some(meta) => meta,
        None => return schema("meta", "must be a string"),
    };
    Ok(NetworkSpec::new(m, rates, edges, meta)?)
}

pub fn write_network(path: impl AsRef<Path>, net: &NetworkSpec) -> Result<(), IoError> {
    std::fs::write(path, network_to_string(net))?;
    Ok(())
}

pub fn read_network(path: impl AsRef<Path>) -> Result<NetworkSpec, IoError> {
    network_from_str(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// curve CSV + metadata sidecar

/// An adoption curve as stored on disk: the bound columns are always
/// present, per-node columns optional. `se` is `None` for exact curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub se: Option<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `per_node[node][time]`.
    pub per_node: Option<Vec<Vec<f64>>>,
}

/// Sidecar metadata: enough to interpret and reproduce the curve file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub p: f64,
    pub q: f64,
    #[serde(rename = "M")]
    pub m: usize,
    /// `exact` | `mc` | `formula`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    /// Present only for networks inhomogeneous in `{p_j}`/`{q_j}`; `p`/`q`
    /// then hold the maxima.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
}

impl Curve {
    /// Borrowed view for bound checking; `(p, q)` and the source come from
    /// the sidecar when present.
    pub fn view_with(&self, meta: Option<&CurveMeta>) -> CurveView<'_> {
        let source = meta
            .and_then(|m| CurveSource::from_label(&m.source))
            .unwrap_or(if self.se.is_some() { CurveSource::MonteCarlo } else { CurveSource::Exact });
        let params = meta.and_then(|m| {
            let homogeneous = m.p_min.is_none_or(|pm| pm == m.p) && m.q_min.is_none_or(|qm| qm == m.q);
            homogeneous.then(|| crate::analytic::BassParams::new(m.p, m.q))
        });
        CurveView {
            t: &self.t,
            f: &self.f,
            se: self.se.as_deref(),
            per_node: self.per_node.as_deref(),
            params,
            runs: meta.and_then(|m| m.runs),
            source,
        }
    }
}

/// Sidecar path: same basename, `.meta.json` extension.
pub fn meta_path(data_path: impl AsRef<Path>) -> PathBuf {
    data_path.as_ref().with_extension("meta.json")
}

pub fn curve_to_string(curve: &Curve) -> String {
    let n = curve.t.len();
    assert!(
        curve.f.len() == n && curve.lower.len() == n && curve.upper.len() == n,
        "column length mismatch"
    );
    let mut out = String::from("t,f,se,lower,upper");
    if let Some(per_node) = &curve.per_node {
        for j in 0..per_node.len() {
            let _ = write!(out, ",f_{j}");
        }
    }
    out.push('\n');
    for i in 0..n {
        let _ = write!(out, "{},{},", fmt_f64(curve.t[i]), fmt_f64(curve.f[i]));
        if let Some(se) = &curve.se {
            out.push_str(&fmt_f64(se[i]));
        }
        let _ = write!(out, ",{},{}", fmt_f64(curve.lower[i]), fmt_f64(curve.upper[i]));
        if let Some(per_node) = &curve.per_node {
            for row in per_node {
                let _ = write!(out, ",{}", fmt_f64(row[i]));
            }
        }
        out.push('\n');
    }
    out
}

pub fn curve_from_str(text: &str) -> Result<Curve, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::MissingColumn("t".to_string()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let fixed = ["t", "f", "se", "lower", "upper"];
    for (i, name) in fixed.iter().enumerate() {
        if cols.get(i) != Some(name) {
            return Err(IoError::MissingColumn(name.to_string()));
        }
    }
    let node_cols = cols.len() - fixed.len();
    for (j, col) in cols[fixed.len()..].iter().enumerate() {
        if *col != format!("f_{j}") {
            return Err(IoError::UnexpectedColumn(col.to_string()));
        }
    }

    let mut curve = Curve {
        t: Vec::new(),
        f: Vec::new(),
        se: None,
        lower: Vec::new(),
        upper: Vec::new(),
        per_node: (node_cols > 0).then(|| vec![Vec::new(); node_cols]),
    };
    let mut se_cells: Vec<Option<f64>> = Vec::new();
    for (line_idx, line) in lines {
        let line_no = line_idx + 1;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols.len() {
            return Err(IoError::Csv {
                line: line_no,
                message: format!("expected {} cells, got {}", cols.len(), cells.len()),
            });
        }
        let parse = |cell: &str, what: &str| -> Result<f64, IoError> {
            cell.parse::<f64>().map_err(|_| IoError::Csv {
                line: line_no,
                message: format!("cannot parse {what} value `{cell}`"),
            })
        };
        let t = parse(cells[0], "t")?;
        if let Some(&last) = curve.t.last() {
            if t <= last {
                return Err(IoError::Csv {
                    line: line_no,
                    message: format!("t must be strictly increasing ({t} after {last})"),
                });
            }
        }
        let fraction = |cell: &str, what: &str| -> Result<f64, IoError> {
            let v = parse(cell, what)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(IoError::Csv {
                    line: line_no,
                    message: format!("{what} = {v} outside [0, 1]"),
                });
            }
            Ok(v)
        };
        curve.t.push(t);
        curve.f.push(fraction(cells[1], "f")?);
        se_cells.push(if cells[2].is_empty() { None } else { Some(parse(cells[2], "se")?) });
        curve.lower.push(fraction(cells[3], "lower")?);
        curve.upper.push(fraction(cells[4], "upper")?);
        if let Some(per_node) = &mut curve.per_node {
            for (j, row) in per_node.iter_mut().enumerate() {
                row.push(fraction(cells[fixed.len() + j], &format!("f_{j}"))?);
            }
        }
    }
    if curve.t.is_empty() {
        return Err(IoError::Csv { line: 1, message: "no data rows".to_string() });
    }
    if se_cells.iter().all(Option::is_some) {
        curve.se = Some(se_cells.into_iter().map(|c| c.expect("checked")).collect());
    } else if se_cells.iter().any(Option::is_some) {
        return Err(IoError::Csv {
            line: 1,
            message: "se column must be fully populated or fully empty".to_string(),
        });
    }
    Ok(curve)
}

pub fn write_curve(path: impl AsRef<Path>, curve: &Curve) -> Result<(), IoError> {
    std::fs::write(path, curve_to_string(curve))?;
    Ok(())
}

pub fn read_curve(path: impl AsRef<Path>) -> Result<Curve, IoError> {
    curve_from_str(&std::fs::read_to_string(path)?)
}

/// Writes the sidecar next to `data_path`.
pub fn write_meta(data_path: impl AsRef<Path>, meta: &CurveMeta) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(meta_path(data_path), text)?;
    Ok(())
}

pub fn read_meta(data_path: impl AsRef<Path>) -> Result<CurveMeta, IoError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(meta_path(data_path))?)?)
}

// ---------------------------------------------------------------------------
// bounds report CSV

pub fn report_to_string(report: &BoundsReport) -> String {
    let mut out = String::from("t,lower,upper,f,margin_low,margin_high,violation_low,violation_high\n");
    for p in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.lower),
            fmt_f64(p.upper),
            fmt_f64(p.observed),
            fmt_f64(p.margin_low),
            fmt_f64(p.margin_high),
            u8::from(p.violation_low),
            u8::from(p.violation_high),
        );
    }
    out
}

pub fn write_report(path: impl AsRef<Path>, report: &BoundsReport) -> Result<(), IoError> {
    std::fs::write(path, report_to_string(report))?;
    Ok(())
}

/// Human-readable one-line summary of a bound check.
pub fn report_summary(report: &BoundsReport) -> String {
    let slack = match report.slack {
        SlackPolicy::Fixed(s) => format!("{s:e} (exact)"),
        SlackPolicy::SeMultiple(k) => format!("{k}*se (mc)"),
    };
    format!(
        "source={} slack={} points={} violations={} node_checks={} node_violations={} worst_margin_low={:.3e} worst_margin_high={:.3e}",
        report.source.label(),
        slack,
        report.points.len(),
        report.violation_count,
        report.node_checked,
        report.node_violations,
        report.worst_margin_low,
        report.worst_margin_high,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate, Family};
    use proptest::prelude::*;

    #[test]
    fn network_round_trip_identity() {
        let net = generate(&Family::Complete { m: 3 }, 0.01, 0.1, 0).unwrap();
        let text = network_to_string(&net);
        let back = network_from_str(&text).unwrap();
        assert_eq!(net, back);
        assert_eq!(text, network_to_string(&back), "writer must be deterministic");
    }

    #[test]
    fn scalar_p_expands_to_constant_vector() {
        let text = r#"{"M": 2, "p": 0.01, "edges": [[0, 1, 0.1], [1, 0, 0.1]], "meta": "pair"}"#;
        let net = network_from_str(text).unwrap();
        assert_eq!(net.external_rates(), &[0.01, 0.01]);
    }

    #[test]
    fn schema_violations_carry_paths() {
        let self_loop = r#"{"M": 3, "p": 0.1, "edges": [[2, 2, 0.5]], "meta": ""}"#;
        match network_from_str(self_loop) {
            Err(IoError::Schema { path, message }) => {
                assert_eq!(path, "edges[0]");
                assert!(message.contains("self-loop"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
        let duplicate =
            r#"{"M": 2, "p": 0.1, "edges": [[0, 1, 0.5], [0, 1, 0.2]], "meta": ""}"#;
        match network_from_str(duplicate) {
            Err(IoError::Schema { path, message }) => {
                assert_eq!(path, "edges[1]");
                assert!(message.contains("duplicate"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
        let unknown = r#"{"M": 2, "p": 0.1, "edges": [], "meta": "", "extra": 1}"#;
        assert!(matches!(network_from_str(unknown), Err(IoError::Schema { .. })));
    }

    fn sample_curve(with_se: bool, nodes: usize) -> Curve {
        let t: Vec<f64> = (0..5).map(|i| i as f64 * 0.5).collect();
        let f: Vec<f64> = t.iter().map(|t| 1.0 - (-t).exp()).collect();
        Curve {
            lower: f.iter().map(|f| f * 0.5).collect(),
            upper: f.iter().map(|f| (f * 1.5).min(1.0)).collect(),
            se: with_se.then(|| t.iter().map(|t| 0.01 / (1.0 + t)).collect()),
            per_node: (nodes > 0)
                .then(|| (0..nodes).map(|j| f.iter().map(|f| f * (j + 1) as f64 / nodes as f64).collect()).collect()),
            t,
            f,
        }
    }

    #[test]
    fn curve_round_trips_exactly() {
        for (with_se, nodes) in [(false, 0), (true, 0), (false, 3), (true, 2)] {
            let curve = sample_curve(with_se, nodes);
            let text = curve_to_string(&curve);
            let back = curve_from_str(&text).unwrap();
            assert_eq!(curve, back);
        }
    }

    #[test]
    fn curve_header_is_pinned() {
        let curve = sample_curve(true, 2);
        let text = curve_to_string(&curve);
        assert!(text.starts_with("t,f,se,lower,upper,f_0,f_1\n"));
    }

    #[test]
    fn curve_errors_name_the_problem() {
        let missing_upper = "t,f,se,lower\n0.0,0.0,,0.0\n";
        assert!(matches!(
            curve_from_str(missing_upper),
            Err(IoError::MissingColumn(col)) if col == "upper"
        ));
        let non_monotone = "t,f,se,lower,upper\n0e0,0e0,,0e0,0e0\n0e0,0e0,,0e0,0e0\n";
        assert!(matches!(curve_from_str(non_monotone), Err(IoError::Csv { line: 3, .. })));
        let bad_fraction = "t,f,se,lower,upper\n0e0,1.5e0,,0e0,0e0\n";
        assert!(matches!(curve_from_str(bad_fraction), Err(IoError::Csv { .. })));
    }

    #[test]
    fn meta_sidecar_round_trip() {
        let dir = std::env::temp_dir().join(format!("bassnet-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let data = dir.join("curve.csv");
        let meta = CurveMeta {
            p: 0.01,
            q: 0.1,
            m: 100,
            source: "mc".to_string(),
            seed: Some(42),
            runs: Some(1000),
            p_min: None,
            q_min: None,
            command: Some("bassnet mc --runs 1000".to_string()),
        };
        write_meta(&data, &meta).unwrap();
        assert!(dir.join("curve.meta.json").exists());
        let back = read_meta(&data).unwrap();
        assert_eq!(meta, back);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn random_network_round_trip(seed in 0u64..300, m in 4usize..40) {
            let net = generate(&Family::ErdosRenyi { m, mean_degree: 3.0 }, 0.013, 0.17, seed).unwrap();
            let back = network_from_str(&network_to_string(&net)).unwrap();
            prop_assert_eq!(net, back);
        }

        #[test]
        fn random_curve_round_trip(n in 2usize..40, with_se in any::<bool>()) {
            let t: Vec<f64> = (0..n).map(|i| i as f64 * 0.25).collect();
            let f: Vec<f64> = t.iter().map(|t| (t / (n as f64)).min(1.0)).collect();
            let curve = Curve {
                lower: vec![0.0; n],
                upper: vec![1.0; n],
                se: with_se.then(|| vec![0.005; n]),
                per_node: None,
                t,
                f,
            };
            prop_assert_eq!(curve_from_str(&curve_to_string(&curve)).unwrap(), curve);
        }
    }
}
