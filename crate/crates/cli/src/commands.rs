//! Subcommand implementations.

use crate::svg::{Plot, Series};
use crate::{
    BoundsArgs, CliError, ConjectureArgs, ExactArgs, FamilyKind, Figure1Args, GapArgs, GenArgs,
    McArgs, SidedArg,
};
use bassnet_core::analytic::{f_bass, f_two_node, BassParams};
use bassnet_core::bounds::{gap_metrics, verify_bounds, verify_bounds_inhomogeneous};
use bassnet_core::exact::{linspace, solve_master, MasterOptions, MASTER_NODE_CAP};
use bassnet_core::io::{self, fmt_f64, Curve, CurveMeta};
use bassnet_core::montecarlo::{estimate_ensemble, EnsembleOptions};
use bassnet_core::network::{generate, Family, NetworkSpec, Sided};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Sidecar for non-curve outputs: the verbatim command line re-runs the
/// job; the resolved seed is recorded because it may have come from the
/// environment or the default rather than a flag.
#[derive(Serialize)]
struct RunMeta {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<String>,
}

fn command_echo() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn write_run_meta_seeded(
    data_path: &Path,
    seed: Option<u64>,
    summary: Option<String>,
) -> Result<(), CliError> {
    let meta = RunMeta { command: command_echo(), seed, summary };
    let mut text = serde_json::to_string_pretty(&meta)
        .map_err(|e| CliError::runtime(format!("cannot serialise sidecar: {e}")))?;
    text.push('\n');
    std::fs::write(io::meta_path(data_path), text)
        .map_err(|e| CliError::runtime(format!("cannot write sidecar: {e}")))?;
    Ok(())
}

fn write_run_meta(data_path: &Path, summary: Option<String>) -> Result<(), CliError> {
    write_run_meta_seeded(data_path, None, summary)
}

fn derived_output(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    PathBuf::from(format!("{stem}.{suffix}.csv"))
}

fn positive(value: f64, name: &str) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::validation(format!("--{name} must be positive and finite, got {value}")))
    }
}

fn require_flag<T>(value: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::validation(format!("--{flag} is required for --family {family}")))
}

pub fn gen(args: GenArgs) -> Result<(), CliError> {
    positive(args.p, "p")?;
    positive(args.q, "q")?;
    let family = match args.family {
        FamilyKind::Complete => Family::Complete { m: require_flag(args.m, "M", "complete")? },
        FamilyKind::Circle => Family::Circle {
            m: require_flag(args.m, "M", "circle")?,
            sided: match args.sided {
                SidedArg::One => Sided::One,
                SidedArg::Two => Sided::Two,
            },
        },
        FamilyKind::Grid => Family::Grid {
            dim: require_flag(args.dim, "D", "grid")?,
            side: require_flag(args.side, "side", "grid")?,
        },
        FamilyKind::Pairs => Family::Pairs { m: require_flag(args.m, "M", "pairs")? },
        FamilyKind::ErdosRenyi => Family::ErdosRenyi {
            m: require_flag(args.m, "M", "erdos-renyi")?,
            mean_degree: require_flag(args.lambda, "lambda", "erdos-renyi")?,
        },
        FamilyKind::ScaleFree => Family::ScaleFree {
            m: require_flag(args.m, "M", "scale-free")?,
            m_attach: require_flag(args.m_attach, "m-attach", "scale-free")?,
        },
        FamilyKind::SmallWorld => Family::SmallWorld {
            m: require_flag(args.m, "M", "small-world")?,
            k: require_flag(args.k, "k", "small-world")?,
            rewire_prob: require_flag(args.rewire_prob, "rewire-prob", "small-world")?,
        },
    };
    let net = generate(&family, args.p, args.q, args.seed)?;
    io::write_network(&args.output, &net)?;
    write_run_meta_seeded(&args.output, Some(args.seed), None)?;
    let mut q_min = f64::INFINITY;
    let mut q_max = f64::NEG_INFINITY;
    for j in 0..net.node_count() {
        let q_j = net.in_weight(j).expect("node ids in range");
        q_min = q_min.min(q_j);
        q_max = q_max.max(q_j);
    }
    println!(
        "wrote {}: M={} edges={} q_j in [{q_min:.6}, {q_max:.6}]",
        args.output.display(),
        net.node_count(),
        net.edge_count(),
    );
    Ok(())
}

/// Bound parameters for the curve columns: the homogeneous `(p, q)` when the
/// network has one, otherwise the min/max envelope of the corollaries.
fn bound_params(net: &NetworkSpec) -> (BassParams, BassParams, bool) {
    let check = net.check_homogeneity(1e-12);
    let lower = BassParams::new(check.p_min, check.q_min);
    let upper = BassParams::new(check.p_max, check.q_max);
    let homogeneous = check.is_p_homogeneous && check.is_q_homogeneous;
    (lower, upper, homogeneous)
}

fn curve_meta(
    net: &NetworkSpec,
    source: &str,
    seed: Option<u64>,
    runs: Option<usize>,
) -> CurveMeta {
    let check = net.check_homogeneity(1e-12);
    let homogeneous = check.is_p_homogeneous && check.is_q_homogeneous;
    CurveMeta {
        p: check.p_max,
        q: check.q_max,
        m: net.node_count(),
        source: source.to_string(),
        seed,
        runs,
        p_min: (!homogeneous).then_some(check.p_min),
        q_min: (!homogeneous).then_some(check.q_min),
        command: Some(command_echo()),
    }
}

pub fn exact(args: ExactArgs) -> Result<(), CliError> {
    positive(args.t_max, "t-max")?;
    if args.points == 0 {
        return Err(CliError::validation("--points must be at least 1"));
    }
    let net = io::read_network(&args.net)?;
    if net.node_count() > MASTER_NODE_CAP {
        return Err(CliError::validation(format!(
            "M = {} exceeds the exact-solver cap of {MASTER_NODE_CAP}; use `bassnet mc` instead",
            net.node_count()
        )));
    }
    let t_grid = linspace(args.t_max, args.points);
    let options = MasterOptions { rtol: args.rtol, atol: args.rtol, ..Default::default() };
    let curve = solve_master(&net, &t_grid, &options)?;
    let (lower_params, upper_params, _) = bound_params(&net);

    let out = Curve {
        lower: t_grid.iter().map(|&t| f_two_node(t, &lower_params)).collect(),
        upper: t_grid.iter().map(|&t| f_bass(t, &upper_params)).collect(),
        se: None,
        per_node: curve.per_node.clone(),
        t: curve.t.clone(),
        f: curve.f.clone(),
    };
    let output = args.output.unwrap_or_else(|| derived_output(&args.net, "exact"));
    io::write_curve(&output, &out)?;
    io::write_meta(&output, &curve_meta(&net, "exact", None, None))?;
    println!(
        "wrote {}: M={} rows={} f(t_max)={:.6}",
        output.display(),
        net.node_count(),
        out.t.len(),
        out.f.last().expect("non-empty grid"),
    );
    Ok(())
}

pub fn mc(args: McArgs) -> Result<(), CliError> {
    positive(args.t_max, "t-max")?;
    if args.points == 0 {
        return Err(CliError::validation("--points must be at least 1"));
    }
    if args.runs < 2 {
        return Err(CliError::validation("--runs must be at least 2"));
    }
    let net = io::read_network(&args.net)?;
    let t_grid = linspace(args.t_max, args.points);
    let options = EnsembleOptions { per_node: args.per_node };
    let est = estimate_ensemble(&net, &t_grid, args.runs, args.seed, &options)?;
    let (lower_params, upper_params, _) = bound_params(&net);

    let out = Curve {
        lower: t_grid.iter().map(|&t| f_two_node(t, &lower_params)).collect(),
        upper: t_grid.iter().map(|&t| f_bass(t, &upper_params)).collect(),
        se: Some(est.se.clone()),
        per_node: est.per_node.clone(),
        t: est.t.clone(),
        f: est.f.clone(),
    };
    let output = args.output.unwrap_or_else(|| derived_output(&args.net, "mc"));
    io::write_curve(&output, &out)?;
    io::write_meta(&output, &curve_meta(&net, "mc", Some(args.seed), Some(args.runs)))?;
    println!(
        "wrote {}: M={} runs={} rows={} f(t_max)={:.6} se(t_max)={:.2e}",
        output.display(),
        net.node_count(),
        args.runs,
        out.t.len(),
        out.f.last().expect("non-empty grid"),
        out.se.as_ref().expect("mc curve has se").last().expect("non-empty grid"),
    );
    Ok(())
}

pub fn bounds(args: BoundsArgs) -> Result<(), CliError> {
    let curve = io::read_curve(&args.curve)?;
    let meta = io::read_meta(&args.curve).ok();
    let report = if let Some(net_path) = &args.net {
        let net = io::read_network(net_path)?;
        verify_bounds_inhomogeneous(&curve.view_with(meta.as_ref()), &net)?
    } else {
        let meta = meta.as_ref().ok_or_else(|| {
            CliError::runtime(format!(
                "no sidecar {} found; pass --net or restore the sidecar",
                io::meta_path(&args.curve).display()
            ))
        })?;
        let params = BassParams::new(meta.p, meta.q);
        verify_bounds(&curve.view_with(Some(meta)), &params)?
    };
    let summary = io::report_summary(&report);
    let output = args.output.unwrap_or_else(|| derived_output(&args.curve, "report"));
    io::write_report(&output, &report)?;
    write_run_meta(&output, Some(summary.clone()))?;
    println!("wrote {}\n{summary}", output.display());
    if report.has_violations() {
        return Err(CliError::ChecksFailed(format!(
            "{} aggregate and {} per-node bound violations",
            report.violation_count, report.node_violations
        )));
    }
    Ok(())
}

pub fn gap(args: GapArgs) -> Result<(), CliError> {
    positive(args.p, "p")?;
    let mut csv = String::from(
        "lambda,p,q,t_half_lower,t_half_upper,ratio,asymptotic,relative_deviation\n",
    );
    let mut table = String::new();
    for &lambda in &args.lambdas {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(CliError::validation(format!("lambda must be positive, got {lambda}")));
        }
        let params = BassParams::new(args.p, args.p * lambda);
        let metrics = gap_metrics(&params)?;
        let _ = write!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(metrics.lambda),
            fmt_f64(args.p),
            fmt_f64(args.p * lambda),
            fmt_f64(metrics.t_half_lower),
            fmt_f64(metrics.t_half_upper),
            fmt_f64(metrics.ratio),
        );
        match (metrics.asymptotic, metrics.relative_deviation) {
            (Some(a), Some(d)) => {
                let _ = writeln!(csv, ",{},{}", fmt_f64(a), fmt_f64(d));
            }
            _ => csv.push_str(",,\n"),
        }
        let _ = writeln!(
            table,
            "lambda={lambda:<10} ratio={:.6} asymptote={}",
            metrics.ratio,
            metrics.asymptotic.map_or("n/a (lambda <= 1)".to_string(), |a| format!("{a:.6}")),
        );
    }
    let output = args.output.unwrap_or_else(|| PathBuf::from("gap.csv"));
    std::fs::write(&output, csv).map_err(|e| CliError::runtime(e.to_string()))?;
    write_run_meta(&output, None)?;
    print!("{table}");
    println!("wrote {}", output.display());
    Ok(())
}

pub fn conjecture(args: ConjectureArgs) -> Result<(), CliError> {
    positive(args.p, "p")?;
    positive(args.q, "q")?;
    if args.m > MASTER_NODE_CAP {
        return Err(CliError::validation(format!(
            "M = {} exceeds the exact-solver cap of {MASTER_NODE_CAP}",
            args.m
        )));
    }
    let params = BassParams::new(args.p, args.q);
    let table = bassnet_core::bounds::conjecture_experiment(args.m, &params, args.samples, args.seed)
        .map_err(|e| match e {
            bassnet_core::bounds::BoundsError::InvalidParams(msg) => CliError::Validation(msg),
            other => CliError::Runtime(other.to_string()),
        })?;
    let mut csv = String::from("sample,label,edges,max_excess,counterexample\n");
    for row in &table.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.sample,
            row.label,
            row.edge_count,
            fmt_f64(row.max_excess),
            u8::from(row.counterexample),
        );
    }
    let output = args.output.unwrap_or_else(|| PathBuf::from("conjecture.csv"));
    std::fs::write(&output, csv).map_err(|e| CliError::runtime(e.to_string()))?;
    let summary = format!(
        "M={} samples={} max_excess={:.3e} counterexample_candidates={}",
        table.m,
        table.rows.len() - 1,
        table.max_excess(),
        table.counterexample_candidates(),
    );
    write_run_meta_seeded(&output, Some(args.seed), Some(summary.clone()))?;
    println!("wrote {}\n{summary}", output.display());
    if table.counterexample_candidates() > 0 {
        println!(
            "note: excess beyond {:.0e} observed; numerical candidate only, inspect before any claim",
            table.threshold
        );
    }
    Ok(())
}

struct Panel {
    name: &'static str,
    title: String,
    x_label: &'static str,
    lambda: f64,
}

pub fn figure1(args: Figure1Args) -> Result<(), CliError> {
    positive(args.p, "p")?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::runtime(e.to_string()))?;
    let p = args.p;

    // Panels A-C: the two bounds over dimensionless time.
    // A uses the external scale p*t since q/p < 1 there; B and C use q*t.
    let panels = [
        Panel { name: "fig1a", title: "q/p = 0.1".into(), x_label: "p t", lambda: 0.1 },
        Panel { name: "fig1b", title: "q/p = 10".into(), x_label: "q t", lambda: 10.0 },
        Panel { name: "fig1c", title: "q/p = 100".into(), x_label: "q t", lambda: 100.0 },
    ];
    let mut written = Vec::new();
    for panel in &panels {
        let params = BassParams::new(p, p * panel.lambda);
        let time_scale = if panel.lambda < 1.0 { p } else { p * panel.lambda };
        let xs: Vec<f64> = (0..=200).map(|i| 8.0 * i as f64 / 200.0).collect();
        let mut csv = String::from("x,lower,upper\n");
        let mut lower_pts = Vec::with_capacity(xs.len());
        let mut upper_pts = Vec::with_capacity(xs.len());
        for &x in &xs {
            let t = x / time_scale;
            let lo = f_two_node(t, &params);
            let hi = f_bass(t, &params);
            let _ = writeln!(csv, "{},{},{}", fmt_f64(x), fmt_f64(lo), fmt_f64(hi));
            lower_pts.push((x, lo));
            upper_pts.push((x, hi));
        }
        let csv_path = args.out_dir.join(format!("{}.csv", panel.name));
        std::fs::write(&csv_path, csv).map_err(|e| CliError::runtime(e.to_string()))?;
        let plot = Plot {
            title: panel.title.clone(),
            x_label: panel.x_label.to_string(),
            y_label: "f".to_string(),
            x_range: (0.0, 8.0),
            y_range: (0.0, 1.0),
            x_log: false,
            series: vec![
                Series {
                    points: upper_pts,
                    color: "#1f6fb4".into(),
                    width: 2.0,
                    dash: None,
                    label: "upper bound (Bass curve)".into(),
                },
                Series {
                    points: lower_pts,
                    color: "#e66100".into(),
                    width: 2.0,
                    dash: Some("7,4".into()),
                    label: "lower bound (two-node curve)".into(),
                },
            ],
            shade: Some((0, 1, "#9ecae1".into())),
        };
        let svg_path = args.out_dir.join(format!("{}.svg", panel.name));
        std::fs::write(&svg_path, plot.to_svg()).map_err(|e| CliError::runtime(e.to_string()))?;
        written.push(csv_path);
        written.push(svg_path);
    }

    // Panel D: exact half-life ratio vs the asymptote over lambda in [1, 1e3].
    let lambdas: Vec<f64> = (0..=60).map(|i| 10f64.powf(3.0 * i as f64 / 60.0)).collect();
    let mut csv = String::from("lambda,ratio,asymptotic\n");
    let mut exact_pts = Vec::new();
    let mut asym_pts = Vec::new();
    for &lambda in &lambdas {
        let metrics = gap_metrics(&BassParams::new(p, p * lambda))?;
        let _ = write!(csv, "{},{}", fmt_f64(lambda), fmt_f64(metrics.ratio));
        exact_pts.push((lambda, metrics.ratio));
        match metrics.asymptotic {
            Some(a) => {
                let _ = writeln!(csv, ",{}", fmt_f64(a));
                asym_pts.push((lambda, a));
            }
            None => csv.push_str(",\n"),
        }
    }
    let csv_path = args.out_dir.join("fig1d.csv");
    std::fs::write(&csv_path, csv).map_err(|e| CliError::runtime(e.to_string()))?;
    let plot = Plot {
        title: "half-life ratio of the bounds".to_string(),
        x_label: "q/p".to_string(),
        y_label: "T½(upper) / T½(lower)".to_string(),
        x_range: (1.0, 1000.0),
        y_range: (0.0, 1.0),
        x_log: true,
        series: vec![
            Series {
                points: exact_pts,
                color: "#1f6fb4".into(),
                width: 2.0,
                dash: None,
                label: "exact ratio".into(),
            },
            Series {
                points: asym_pts,
                color: "#222222".into(),
                width: 1.6,
                dash: Some("6,4".into()),
                label: "asymptote (2/ln 2)(p/q) ln(q/p)".into(),
            },
        ],
        shade: None,
    };
    let svg_path = args.out_dir.join("fig1d.svg");
    std::fs::write(&svg_path, plot.to_svg()).map_err(|e| CliError::runtime(e.to_string()))?;
    written.push(csv_path);
    written.push(svg_path);

    write_run_meta(&args.out_dir.join("figure1"), None)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
