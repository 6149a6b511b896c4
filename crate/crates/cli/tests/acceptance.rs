//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantities. Run with
//! `cargo test -p bassnet-cli --test acceptance -- --nocapture`.

use bassnet_core::analytic::{f_bass, f_one_d, f_two_node, half_life_ratio_asymptotic, BassParams};
use bassnet_core::bounds::{gap_metrics, strictness_margin, verify_bounds};
use bassnet_core::exact::{linspace, pair_sandwich_check, solve_complete, solve_master, MasterOptions};
use bassnet_core::montecarlo::{estimate_ensemble, EnsembleOptions};
use bassnet_core::network::{generate, Family, NetworkSpec, Sided};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::process::Command;

/// Step-doubling adaptive RK4; the independent oracle for criterion 1.
fn rk4_step<F: Fn(f64, f64) -> f64>(rhs: &F, t: f64, y: f64, h: f64) -> f64 {
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    let k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    let k4 = rhs(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn rk4_advance<F: Fn(f64, f64) -> f64>(rhs: &F, mut y: f64, t0: f64, t1: f64, tol: f64) -> f64 {
    let mut t = t0;
    let mut h = (t1 - t0).max(1e-12) / 16.0;
    while t < t1 {
        h = h.min(t1 - t);
        let full = rk4_step(rhs, t, y, h);
        let half = rk4_step(rhs, t + 0.5 * h, rk4_step(rhs, t, y, 0.5 * h), 0.5 * h);
        let err = (full - half).abs();
        if err <= tol {
            y = half + (half - full) / 15.0;
            t += h;
            if err < 0.1 * tol {
                h *= 2.0;
            }
        } else {
            h *= 0.5;
            assert!(h > 1e-15, "oracle step underflow");
        }
    }
    y
}

#[test]
fn acceptance_01_formula_vs_ode_oracle() {
    let start = std::time::Instant::now();
    let mut worst: f64 = 0.0;
    for (p, q) in [(0.01, 0.1), (1.0, 1.0), (0.1, 10.0)] {
        let params = BassParams::new(p, q);
        let grid = linspace(10.0 / (p + q), 100);
        let mut y = 0.0;
        for pair in grid.windows(2) {
            y = rk4_advance(&|_t, f| (1.0 - f) * (p + q * f), y, pair[0], pair[1], 1e-12);
            let err = (f_bass(pair[1], &params) - y).abs();
            worst = worst.max(err);
        }
    }
    assert!(worst <= 1e-8, "max |formula - ODE| = {worst:e}");
    println!(
        "ACCEPTANCE 1 PASS: f_bass vs adaptive RK4, max abs err {worst:.2e} <= 1e-8 ({:.2?})",
        start.elapsed()
    );
}

#[test]
fn acceptance_02_two_node_exactness() {
    let start = std::time::Instant::now();
    let mut worst: f64 = 0.0;
    for (p, q) in [(0.01, 0.1), (1.0, 2.0), (0.3, 0.3), (2.0, 0.5)] {
        let net = generate(&Family::Pairs { m: 2 }, p, q, 0).unwrap();
        let grid = linspace(8.0 / (p + q), 50);
        let curve = solve_master(&net, &grid, &MasterOptions::default()).unwrap();
        let params = BassParams::new(p, q);
        for (ti, &t) in grid.iter().enumerate() {
            worst = worst.max((curve.f[ti] - f_two_node(t, &params)).abs());
        }
    }
    assert!(worst <= 1e-9, "max |master - formula| = {worst:e}");
    println!(
        "ACCEPTANCE 2 PASS: master equation vs two-node formula (incl. p=q), max abs err {worst:.2e} <= 1e-9 ({:.2?})",
        start.elapsed()
    );
}

#[test]
fn acceptance_03_complete_network_ladder() {
    let start = std::time::Instant::now();
    let params = BassParams::new(0.01, 0.1);
    let t = 1.0 / 0.11;
    let grid = vec![0.0, t];
    let mut prev = 0.0;
    let mut min_step = f64::INFINITY;
    for m in 2..=50 {
        let f = solve_complete(m, &params, &grid).unwrap().f[1];
        assert!(f > prev, "ladder not strictly increasing at M={m}: {f} vs {prev}");
        min_step = min_step.min(f - prev);
        prev = f;
    }
    let f200 = solve_complete(200, &params, &[0.0, 10.0]).unwrap().f[1];
    let fb = f_bass(10.0, &params);
    assert!(f200 < fb, "M=200 must stay below the Bass curve");
    let gap = fb - f200;
    assert!(gap <= 2e-3, "gap {gap:e} exceeds 2e-3");
    println!(
        "ACCEPTANCE 3 PASS: ladder strictly increasing M=2..50 (min step {min_step:.2e}); f_bass - f_complete(200) = {gap:.2e} <= 2e-3 ({:.2?})",
        start.elapsed()
    );
}

#[test]
fn acceptance_04_universal_bounds_exact_families() {
    let start = std::time::Instant::now();
    let (p, q) = (0.01, 0.1);
    let params = BassParams::new(p, q);
    let grid = linspace(10.0 / (p + q), 50);
    let families: Vec<(&str, Family)> = vec![
        ("complete(12)", Family::Complete { m: 12 }),
        ("circle-one(12)", Family::Circle { m: 12, sided: Sided::One }),
        ("circle-two(12)", Family::Circle { m: 12, sided: Sided::Two }),
        ("grid(3x3)", Family::Grid { dim: 2, side: 3 }),
        ("pairs(12)", Family::Pairs { m: 12 }),
        ("erdos-renyi(12)", Family::ErdosRenyi { m: 12, mean_degree: 4.0 }),
    ];
    let mut checked = 0usize;
    for (label, family) in &families {
        let net = generate(family, p, q, 4).unwrap();
        let curve = solve_master(&net, &grid, &MasterOptions::default()).unwrap();
        let report = verify_bounds(&curve.view(), &params).unwrap();
        assert!(
            !report.has_violations(),
            "{label}: {} aggregate / {} node violations, worst margins ({:.3e}, {:.3e})",
            report.violation_count,
            report.node_violations,
            report.worst_margin_low,
            report.worst_margin_high
        );
        checked += report.points.len() + report.node_checked;
        if *label == "pairs(12)" {
            for point in &report.points {
                assert!(
                    point.margin_low.abs() <= 1e-9,
                    "pairs must attain the lower bound, margin {:e} at t={}",
                    point.margin_low,
                    point.t
                );
            }
        }
    }
    println!(
        "ACCEPTANCE 4 PASS: {} families, {checked} bound checks, zero violations at slack 1e-9; pairs attains the lower bound ({:.2?})",
        families.len(),
        start.elapsed()
    );
}

#[test]
fn acceptance_05_universal_bounds_monte_carlo() {
    let start = std::time::Instant::now();
    let (p, q) = (0.01, 0.1);
    let params = BassParams::new(p, q);
    let grid = linspace(50.0, 100);

    let circle = generate(&Family::Circle { m: 10_000, sided: Sided::Two }, p, q, 0).unwrap();
    let est = estimate_ensemble(&circle, &grid, 1_000, 7, &EnsembleOptions::default()).unwrap();
    let report = verify_bounds(&est.view(), &params).unwrap();
    let circle_fraction = report.violation_fraction();
    assert!(circle_fraction <= 0.01, "circle flagged fraction {circle_fraction}");
    let mut worst_sigma: f64 = 0.0;
    for (ti, &t) in grid.iter().enumerate().skip(1) {
        let dev = (est.f[ti] - f_one_d(t, &params)).abs();
        assert!(
            dev <= 3.0 * est.se[ti],
            "circle vs infinite-circle formula at t={t}: dev {dev:e}, se {:e}",
            est.se[ti]
        );
        worst_sigma = worst_sigma.max(dev / est.se[ti]);
    }

    let er = generate(&Family::ErdosRenyi { m: 1_000, mean_degree: 4.0 }, p, q, 17).unwrap();
    let er_est = estimate_ensemble(&er, &grid, 1_000, 7, &EnsembleOptions::default()).unwrap();
    let er_report = verify_bounds(&er_est.view(), &params).unwrap();
    let er_fraction = er_report.violation_fraction();
    assert!(er_fraction <= 0.01, "ER flagged fraction {er_fraction}");

    println!(
        "ACCEPTANCE 5 PASS: circle M=1e4 flagged {:.1}% and matches f_1D within 3 se (worst {worst_sigma:.2} se); ER M=1e3 flagged {:.1}% ({:.2?})",
        100.0 * circle_fraction,
        100.0 * er_fraction,
        start.elapsed()
    );
}

#[test]
fn acceptance_06_strictness_margins() {
    let start = std::time::Instant::now();
    let (p, q) = (0.01, 0.1);
    let params = BassParams::new(p, q);
    let grid = linspace(2.0 / (p + q), 50);
    let probe = grid[25];

    let complete3 = generate(&Family::Complete { m: 3 }, p, q, 0).unwrap();
    // undirected 3-node path homogenised to q_j = q
    let path3 = NetworkSpec::new(
        3,
        vec![p; 3],
        [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)],
        "path(3)",
    )
    .unwrap()
    .homogenize(p, q)
    .unwrap();

    let mut margins = Vec::new();
    for (label, net) in [("complete(3)", complete3), ("path(3)", path3)] {
        let curve = solve_master(&net, &grid, &MasterOptions::default()).unwrap();
        let (low, high) = strictness_margin(&curve.view(), &params, probe).unwrap();
        assert!(low > 1e-6 && high > 1e-6, "{label}: margins ({low:e}, {high:e})");
        margins.push(format!("{label} ({low:.2e}, {high:.2e})"));
    }
    println!(
        "ACCEPTANCE 6 PASS: strict margins > 1e-6 at t = 1/(p+q): {} ({:.2?})",
        margins.join(", "),
        start.elapsed()
    );
}

/// Random instance with homogeneous p and arbitrary positive weights.
fn random_instance(rng: &mut ChaCha8Rng, homogeneous_p: bool) -> NetworkSpec {
    let m = rng.random_range(2..=6);
    let base_p = 0.005 + 0.05 * rng.random::<f64>();
    let rates: Vec<f64> = (0..m)
        .map(|_| if homogeneous_p { base_p } else { 0.005 + 0.05 * rng.random::<f64>() })
        .collect();
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j && rng.random::<f64>() < 0.6 {
                edges.push((i, j, 0.02 + 0.3 * rng.random::<f64>()));
            }
        }
    }
    for j in 0..m {
        if !edges.iter().any(|&(_, t, _)| t == j) {
            edges.push(((j + 1) % m, j, 0.1));
        }
    }
    NetworkSpec::new(m, rates, edges, "random instance").unwrap()
}

#[test]
fn acceptance_07_pair_sandwich() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for instance in 0..12 {
        let net = random_instance(&mut rng, true);
        let p = net.external_rates()[0];
        let grid = linspace(5.0 / p, 30);
        let report = pair_sandwich_check(&net, &grid).unwrap();
        assert!(
            report.all_ok(),
            "instance {instance}: worst margins ({:e}, {:e})",
            report.worst_lower,
            report.worst_upper
        );
        worst_lower = worst_lower.min(report.worst_lower);
        worst_upper = worst_upper.min(report.worst_upper);
    }
    println!(
        "ACCEPTANCE 7 PASS: 12 random instances, [S_i][S_j] <= [S_i,S_j] <= e^(-2pt) at slack 1e-9 (worst margins {worst_lower:.2e}, {worst_upper:.2e}) ({:.2?})",
        start.elapsed()
    );
}

#[test]
fn acceptance_08_gap_asymptotics() {
    let start = std::time::Instant::now();
    let p = 0.01;

    // independent oracle: coarse bisection on both published crossing equations
    let bisect = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let q = 1.0;
    let upper_curve = |t: f64| {
        let e = (-(p + q) * t).exp();
        (1.0 - e) / (1.0 + (q / p) * e)
    };
    let lower_curve =
        |t: f64| 1.0 - (-p * t).exp() * (q * (-p * t).exp() - p * (-q * t).exp()) / (q - p);
    let oracle_ratio = bisect(&upper_curve, 0.0, 1e4) / bisect(&lower_curve, 0.0, 1e4);
    assert!((oracle_ratio - 0.1302).abs() <= 5e-4, "oracle ratio {oracle_ratio}");

    let metrics = gap_metrics(&BassParams::new(p, p * 100.0)).unwrap();
    assert!((metrics.ratio - 0.1302).abs() <= 5e-4, "ratio {}", metrics.ratio);
    assert!((metrics.ratio - oracle_ratio).abs() <= 1e-6);
    let asym = half_life_ratio_asymptotic(100.0);
    let dev100 = (metrics.ratio - asym).abs() / asym;
    assert!(dev100 < 0.05, "deviation at lambda=100: {dev100}");

    let dev = |lambda: f64| {
        gap_metrics(&BassParams::new(p, p * lambda)).unwrap().relative_deviation.unwrap()
    };
    let (d2, d4) = (dev(1e2), dev(1e4));
    assert!(d4 < d2, "deviation must shrink: {d4} !< {d2}");
    println!(
        "ACCEPTANCE 8 PASS: ratio(lambda=100) = {:.5} (oracle {oracle_ratio:.5}, asymptote {asym:.5}, dev {:.2}%); dev(1e4) = {:.3}% < dev(1e2) = {:.3}% ({:.2?})",
        metrics.ratio,
        100.0 * dev100,
        100.0 * d4,
        100.0 * d2,
        start.elapsed()
    );
}

#[test]
fn acceptance_09_rate_monotonicity() {
    use rayon::prelude::*;
    let start = std::time::Instant::now();
    let instances: Vec<NetworkSpec> = {
        let mut rng = ChaCha8Rng::seed_from_u64(515);
        (0..20).map(|_| random_instance(&mut rng, false)).collect()
    };
    let opts = MasterOptions { rtol: 1e-12, atol: 1e-12, ..Default::default() };
    let perturbed_checks: usize = instances
        .par_iter()
        .map(|net| {
            let m = net.node_count();
            let p_max = net.external_rates().iter().cloned().fold(0.0f64, f64::max);
            let grid = linspace(2.0 / p_max, 20);
            let base = solve_master(net, &grid, &opts).unwrap();
            let base_nodes = base.per_node.as_ref().unwrap();
            let mut variants: Vec<NetworkSpec> = Vec::new();
            for j in 0..m {
                let mut rates = net.external_rates().to_vec();
                rates[j] *= 1.1;
                variants.push(
                    NetworkSpec::new(m, rates, net.edges().collect::<Vec<_>>(), "p bump").unwrap(),
                );
            }
            let all_edges: Vec<(usize, usize, f64)> = net.edges().collect();
            for bump in 0..all_edges.len() {
                let edges: Vec<(usize, usize, f64)> = all_edges
                    .iter()
                    .enumerate()
                    .map(|(i, &(k, j, w))| (k, j, if i == bump { w * 1.1 } else { w }))
                    .collect();
                variants.push(
                    NetworkSpec::new(m, net.external_rates().to_vec(), edges, "q bump").unwrap(),
                );
            }
            for variant in &variants {
                let bumped = solve_master(variant, &grid, &opts).unwrap();
                let bumped_nodes = bumped.per_node.as_ref().unwrap();
                for node in 0..m {
                    for ti in 0..grid.len() {
                        assert!(
                            bumped_nodes[node][ti] >= base_nodes[node][ti] - 1e-10,
                            "f_{node} dropped by {:e} at t={} after a rate bump on {}",
                            base_nodes[node][ti] - bumped_nodes[node][ti],
                            grid[ti],
                            variant.metadata()
                        );
                    }
                }
            }
            variants.len()
        })
        .sum();
    println!(
        "ACCEPTANCE 9 PASS: 20 random instances, {perturbed_checks} single-rate +10% bumps, no f_m decreased beyond 1e-10 ({:.2?})",
        start.elapsed()
    );
}

#[test]
fn acceptance_10_mc_reproducibility_across_threads() {
    let start = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_bassnet");
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).current_dir(dir.path()).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["gen", "--family", "erdos-renyi", "--M", "500", "--lambda", "4", "--p", "0.01", "--q", "0.1", "--seed", "3", "-o", "net.json"]);
    run(&["mc", "--net", "net.json", "--runs", "400", "--seed", "42", "--t-max", "40", "--points", "80", "--threads", "1", "-o", "one.csv"]);
    run(&["mc", "--net", "net.json", "--runs", "400", "--seed", "42", "--t-max", "40", "--points", "80", "--threads", "4", "-o", "four.csv"]);
    let one = std::fs::read(dir.path().join("one.csv")).unwrap();
    let four = std::fs::read(dir.path().join("four.csv")).unwrap();
    assert_eq!(one, four, "thread count changed the bytes");
    println!(
        "ACCEPTANCE 10 PASS: mc CSV byte-identical across --threads 1 and --threads 4 ({} bytes) ({:.2?})",
        one.len(),
        start.elapsed()
    );
}

#[test]
fn acceptance_11_figure_reproduction() {
    let start = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_bassnet");
    let out = Command::new(bin)
        .args(["figure1", "--out-dir", "figs", "--p", "0.01"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let read_csv = |name: &str| -> Vec<Vec<String>> {
        let text = std::fs::read_to_string(dir.path().join("figs").join(name)).unwrap();
        text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
    };
    for name in ["fig1a.svg", "fig1b.svg", "fig1c.svg", "fig1d.svg"] {
        let body = std::fs::read_to_string(dir.path().join("figs").join(name)).unwrap();
        assert!(body.starts_with("<svg"), "{name} is not an SVG");
    }

    let gap_of = |row: &[String]| row[2].parse::<f64>().unwrap() - row[1].parse::<f64>().unwrap();
    let a_gap = read_csv("fig1a.csv").iter().map(|r| gap_of(r)).fold(f64::NEG_INFINITY, f64::max);
    assert!(a_gap < 0.01, "panel A max gap {a_gap}");
    let c_gap = read_csv("fig1c.csv").iter().map(|r| gap_of(r)).fold(f64::NEG_INFINITY, f64::max);
    assert!(c_gap > 0.4, "panel C max gap {c_gap}");

    let mut worst_dev: f64 = 0.0;
    for row in read_csv("fig1d.csv") {
        let lambda: f64 = row[0].parse().unwrap();
        if lambda >= 100.0 && !row[2].is_empty() {
            let ratio: f64 = row[1].parse().unwrap();
            let asym: f64 = row[2].parse().unwrap();
            worst_dev = worst_dev.max((ratio - asym).abs() / asym);
        }
    }
    assert!(worst_dev < 0.05, "panel D deviation {worst_dev}");
    println!(
        "ACCEPTANCE 11 PASS: 4 SVGs + CSVs; panel A max gap {a_gap:.4} < 0.01, panel C max gap {c_gap:.3} > 0.4, panel D dev at lambda>=100 {:.2}% < 5% ({:.2?})",
        100.0 * worst_dev,
        start.elapsed()
    );
}
