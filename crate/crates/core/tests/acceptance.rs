//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-7 are hard and fail the test. Criteria 8-12 are trend targets;
//! a miss is printed as FAIL with the measured value and does not abort the
//! run (see the README for the calibration notes).
//!
//! Run with `cargo test --release -p vcpower --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vcpower::architecture::{build_architecture, Architecture, ArchitectureConfig, Tier};
use vcpower::catalog::{efficiency_gain, ids, Catalog};
use vcpower::config::ScenarioConfig;
use vcpower::harness::{self, RowStatus, SavingsRow, SweepRow};
use vcpower::optimizer::SolverOptions;
use vcpower::strategies::{assign, check_assignment, evaluate_power, processing_by_tier, AssignmentMatrix, Strategy};
use vcpower::workload::{sample_tasks, sweep_specs, DemandSpec, SweepKind, Task};

struct Report {
    lines: Vec<(u32, bool, bool, String)>,
}

impl Report {
    fn record(&mut self, id: u32, hard: bool, pass: bool, detail: String) {
        println!(
            "criterion {id:>2} [{}] {}: {detail}",
            if hard { "hard" } else { "soft" },
            if pass { "PASS" } else { "FAIL" }
        );
        self.lines.push((id, hard, pass, detail));
    }
}

fn default_arch() -> Architecture {
    build_architecture(&Catalog::builtin(), &ArchitectureConfig::default()).unwrap()
}

fn total(arch: &Architecture, tasks: &[Task], strategy: Strategy) -> (f64, AssignmentMatrix) {
    let m = assign(arch, tasks, strategy, 0, &SolverOptions::default()).unwrap();
    (evaluate_power(arch, tasks, &m).unwrap().total_watts, m)
}

fn criterion_1(r: &mut Report) {
    let cat = Catalog::builtin();
    let server = cat.intensity(ids::CONVENTIONAL_SERVER).unwrap();
    let obu = 100.0 * efficiency_gain(cat.intensity(ids::OBU).unwrap(), server);
    let fog = 100.0 * efficiency_gain(cat.intensity(ids::FOG_SERVER).unwrap(), server);
    let pass = (obu - 90.7).abs() <= 1.0 && (fog - 52.4).abs() <= 1.0;
    r.record(1, true, pass, format!("OBU vs server {obu:.2}%, fog vs server {fog:.2}%"));
}

/// Random architecture with at most 4 nodes and random capacities.
fn tiny_arch(rng: &mut ChaCha8Rng) -> Architecture {
    let cfg = ArchitectureConfig {
        vehicles: rng.random_range(0..=2),
        fog_servers: rng.random_range(0..=1),
        ..Default::default()
    };
    let mut arch = build_architecture(&Catalog::builtin(), &cfg).unwrap();
    for node in &mut arch.nodes {
        match node.tier {
            Tier::Vc => {
                node.proc_capacity = Some(rng.random_range(0.3..2.5));
                node.link_capacity = Some(rng.random_range(10.0..80.0));
            }
            Tier::Fog => node.proc_capacity = Some(rng.random_range(0.5..4.0)),
            Tier::Cloud => {}
        }
    }
    arch
}

fn criterion_2(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_single = 0.0f64;
    let mut worst_dist = f64::NEG_INFINITY;
    let mut mismatches = 0;
    for _ in 0..200 {
        let arch = tiny_arch(&mut rng);
        let n_tasks = rng.random_range(1..=5);
        let tasks: Vec<Task> = (0..n_tasks)
            .map(|i| Task::new(i, rng.random_range(0.05..2.0), rng.random_range(1.0..90.0)))
            .collect();
        let n = arch.nodes.len();
        let mut best = f64::INFINITY;
        let mut enumerated = Vec::new();
        for code in 0..n.pow(n_tasks as u32) {
            let mut c = code;
            let x: Vec<Vec<f64>> = (0..n_tasks)
                .map(|_| {
                    let mut row = vec![0.0; n];
                    row[c % n] = 1.0;
                    c /= n;
                    row
                })
                .collect();
            if check_assignment(&arch, &tasks, &x).is_err() {
                continue;
            }
            let m = AssignmentMatrix {
                strategy: Strategy::CfvSingle,
                x,
                feasible: true,
                solver: None,
            };
            let t = evaluate_power(&arch, &tasks, &m).unwrap().total_watts;
            best = best.min(t);
            enumerated.push(t);
        }
        let (single, _) = total(&arch, &tasks, Strategy::CfvSingle);
        let (dist, _) = total(&arch, &tasks, Strategy::CfvDistributed);
        let err = (single - best).abs();
        worst_single = worst_single.max(err);
        if err > 1e-6 {
            mismatches += 1;
        }
        for t in enumerated {
            worst_dist = worst_dist.max(dist - t);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = mismatches == 0 && worst_dist <= 1e-6 && secs < 30.0;
    r.record(
        2,
        true,
        pass,
        format!(
            "200 instances: max |B&B - enumeration| {worst_single:.2e} W ({mismatches} over 1e-6), \
             max (distributed - enumerated) {worst_dist:.2e} W, {secs:.1} s"
        ),
    );
}

fn by_instance(rows: &[SweepRow]) -> BTreeMap<(SweepKind, usize, usize), BTreeMap<Strategy, &SweepRow>> {
    let mut m: BTreeMap<_, BTreeMap<_, _>> = BTreeMap::new();
    for row in rows {
        m.entry((row.sweep, row.point, row.replication))
            .or_default()
            .insert(row.strategy, row);
    }
    m
}

fn criterion_3(r: &mut Report, rows: &[SweepRow]) {
    let mut violations = Vec::new();
    let mut checked = 0;
    for (key, group) in by_instance(rows) {
        let t = |s: Strategy| group.get(&s).and_then(|row| row.total_w);
        let (Some(cloud), Some(cf), Some(single), Some(dist)) = (
            t(Strategy::Cloud),
            t(Strategy::CfOptimal),
            t(Strategy::CfvSingle),
            t(Strategy::CfvDistributed),
        ) else {
            violations.push(format!("{key:?} missing rows"));
            continue;
        };
        checked += 1;
        let le = |a: f64, b: f64| a <= b + 1e-6 * b.abs().max(a.abs());
        if !(le(dist, single) && le(dist, cf) && le(cf, cloud)) {
            violations.push(format!("{key:?}: dist {dist} single {single} cf {cf} cloud {cloud}"));
        }
    }
    r.record(
        3,
        true,
        violations.is_empty() && checked == 100,
        format!("{checked} instances checked, {} violations {:?}", violations.len(), violations.first()),
    );
}

fn criterion_4(r: &mut Report) {
    let arch = default_arch();
    let base = DemandSpec {
        proc_sd_ghz: 0.0,
        traffic_sd_mbps: 0.0,
        seed: 1,
        ..Default::default()
    };
    let pts: Vec<(f64, f64)> = sweep_specs(SweepKind::Traffic, &base)
        .iter()
        .map(|spec| {
            let tasks = sample_tasks(spec).unwrap();
            (spec.traffic_mean_mbps, total(&arch, &tasks, Strategy::Cloud).0)
        })
        .collect();
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[pts.len() - 1];
    let slope = (y1 - y0) / (x1 - x0);
    let worst = pts
        .iter()
        .map(|&(x, y)| ((y0 + slope * (x - x0)) - y).abs() / y.abs())
        .fold(0.0f64, f64::max);
    r.record(
        4,
        true,
        worst < 1e-9,
        format!("cloud total = {y0:.4} + {slope:.6} x (traffic mean - 10); worst relative residual {worst:.2e}"),
    );
}

fn criterion_5(r: &mut Report) {
    let arch = default_arch();
    let mut violations = Vec::new();
    let (mut saw_fog, mut saw_cloud) = (false, false);
    for k in 1..=40 {
        let spec = DemandSpec {
            proc_mean_ghz: 0.05 * k as f64,
            proc_sd_ghz: 0.0,
            traffic_mean_mbps: 10.0,
            traffic_sd_mbps: 0.0,
            count: 50,
            seed: 1,
        };
        let tasks = sample_tasks(&spec).unwrap();
        let (_, m) = total(&arch, &tasks, Strategy::CfvDistributed);
        let g = processing_by_tier(&arch, &tasks, &m.x);
        let eps = 1e-6;
        saw_fog |= g.fog > eps;
        saw_cloud |= g.cloud > eps;
        if g.fog > eps && g.vc < 20.0 - eps {
            violations.push(format!("{:.1} GHz: fog {:.4} with vc {:.4}", 50.0 * spec.proc_mean_ghz, g.fog, g.vc));
        }
        if g.cloud > eps && g.fog < 39.9 - eps {
            violations.push(format!("{:.1} GHz: cloud {:.4} with fog {:.4}", 50.0 * spec.proc_mean_ghz, g.cloud, g.fog));
        }
    }
    r.record(
        5,
        true,
        violations.is_empty() && saw_fog && saw_cloud,
        format!(
            "total demand 2.5..100 GHz: fog used {saw_fog}, cloud used {saw_cloud}, {} order violations {:?}",
            violations.len(),
            violations.first()
        ),
    );
}

fn criterion_6(r: &mut Report, cfg: &ScenarioConfig, first: &[u8]) {
    let dir = tempfile::tempdir().unwrap();
    let again = harness::run_all(cfg).unwrap();
    harness::write_outputs(cfg, &again, dir.path()).unwrap();
    let second = std::fs::read(dir.path().join(harness::RESULTS_FILE)).unwrap();
    r.record(
        6,
        true,
        first == second.as_slice(),
        format!("two full runs, results.csv {} and {} bytes, identical: {}", first.len(), second.len(), first == second.as_slice()),
    );
}

fn criterion_7(r: &mut Report, rows: &[SweepRow]) {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for row in rows.iter().filter(|row| row.status == RowStatus::Optimal) {
        let (Some(obj), Some(shared), Some(t)) = (row.milp_objective_w, row.shared_w, row.total_w) else {
            continue;
        };
        checked += 1;
        worst = worst.max(((obj + shared) - t).abs() / t.abs());
    }
    r.record(
        7,
        true,
        worst <= 1e-6 && checked > 0,
        format!("{checked} Optimal rows, worst |objective + shared - total| / total = {worst:.2e}"),
    );
}

fn savings_check(
    r: &mut Report,
    id: u32,
    table: &[SavingsRow],
    sweep: SweepKind,
    targets: &[(Strategy, bool, f64)],
) {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(strategy, vs_cloud, target) in targets {
        let row = table.iter().find(|s| s.sweep == sweep && s.strategy == strategy).unwrap();
        let got = if vs_cloud { row.vs_cloud_pct } else { row.vs_cf_optimal_pct };
        let ok = (got - target).abs() <= 15.0;
        pass &= ok;
        parts.push(format!(
            "{strategy} vs {} {got:.1}% (target {target}%{})",
            if vs_cloud { "cloud" } else { "cf_optimal" },
            if ok { "" } else { ", outside +/-15" }
        ));
    }
    r.record(id, false, pass, parts.join("; "));
}

/// Least-squares coefficients of `total ~ a + b * sum_w + c * sum_d`.
fn affine_fit(rows: &[(f64, f64, f64)]) -> [f64; 3] {
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(w, d, y) in rows {
        let v = [1.0, w, d];
        for i in 0..3 {
            aty[i] += v[i] * y;
            for j in 0..3 {
                ata[i][j] += v[i] * v[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 normal equations
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&ata[i]);
        m[i][3] = aty[i];
    }
    for col in 0..3 {
        let p = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, p);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}

/// Per-row (sum of processing demand, sum of traffic demand, total watts).
fn demand_rows<'a>(rows: impl Iterator<Item = &'a SweepRow>, shared_intensity: f64) -> Vec<(f64, f64, f64)> {
    rows.filter_map(|row| {
        let w = row.ghz_cloud? + row.ghz_fog? + row.ghz_vc?;
        Some((w, row.shared_w? / shared_intensity, row.total_w?))
    })
    .collect()
}

/// Mean residual of the rows at traffic means >= 60 Mb/s against an affine
/// model in (sum w, sum d) fitted on the rows at means <= 50 Mb/s, as a
/// fraction of their mean total. Zero for a curve that stays affine past the
/// vehicle link rate; positive when it bends upward.
fn excess_past_link_rate(rows: &[SweepRow], strategy: Strategy, shared_intensity: f64) -> f64 {
    let of = |keep: fn(f64) -> bool| {
        demand_rows(
            rows.iter()
                .filter(|row| row.sweep == SweepKind::Traffic && row.strategy == strategy && keep(row.demand_mean)),
            shared_intensity,
        )
    };
    let below = of(|m| m <= 50.0);
    let above = of(|m| m >= 60.0);
    let c = affine_fit(&below);
    let resid: f64 = above.iter().map(|&(w, d, y)| y - (c[0] + c[1] * w + c[2] * d)).sum::<f64>() / above.len() as f64;
    let mean: f64 = above.iter().map(|r| r.2).sum::<f64>() / above.len() as f64;
    resid / mean
}

fn criterion_11(r: &mut Report, rows: &[SweepRow], shared_intensity: f64) {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [Strategy::Cloud, Strategy::CfOptimal, Strategy::CfvDistributed] {
        let e = excess_past_link_rate(rows, s, shared_intensity);
        let ok = e.abs() <= 0.02;
        pass &= ok;
        parts.push(format!("{s} excess {:+.2}% ({})", 100.0 * e, if ok { "near-linear" } else { "bends" }));
    }
    for s in [Strategy::CfvSingle, Strategy::CfvRandom] {
        let e = excess_past_link_rate(rows, s, shared_intensity);
        let ok = e > 0.02;
        pass &= ok;
        parts.push(format!("{s} excess {:+.2}% ({})", 100.0 * e, if ok { "super-linear" } else { "no bend" }));
    }

    // cf_optimal processing sweep: marginal W per GHz before and after the fog tier fills
    let fog_capacity = 15.0 * 2.66;
    let cf = |full: bool| {
        demand_rows(
            rows.iter().filter(|row| {
                row.sweep == SweepKind::Processing
                    && row.strategy == Strategy::CfOptimal
                    && row.ghz_fog.is_some_and(|f| (f >= fog_capacity - 1e-6) == full)
            }),
            shared_intensity,
        )
    };
    let (before, after) = (cf(false), cf(true));
    if before.len() >= 3 && after.len() >= 3 {
        let (b0, b1) = (affine_fit(&before)[1], affine_fit(&after)[1]);
        let ok = b1 > 1.5 * b0;
        pass &= ok;
        parts.push(format!(
            "cf_optimal processing slope {b0:.1} W/GHz before fog fills ({} rows), {b1:.1} after ({} rows)",
            before.len(),
            after.len()
        ));
    } else {
        pass = false;
        parts.push(format!("cf_optimal: {} rows before / {} after fog fills", before.len(), after.len()));
    }
    r.record(11, false, pass, parts.join("; "));
}

#[test]
fn acceptance() {
    let mut r = Report { lines: Vec::new() };
    criterion_1(&mut r);
    criterion_2(&mut r);

    let cfg = ScenarioConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let result = harness::run_all(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    harness::write_outputs(&cfg, &result, dir.path()).unwrap();
    let rows = &result.rows;
    let limited = rows.iter().filter(|row| row.status == RowStatus::IterationLimit).count();
    println!(
        "full sweep: {} rows in {secs:.1} s; {limited} cfv_single rows at the node budget, largest gap {:.2} W",
        rows.len(),
        rows.iter().filter_map(|row| row.bound_gap_w).fold(0.0, f64::max)
    );

    criterion_3(&mut r, rows);
    criterion_4(&mut r);
    criterion_5(&mut r);
    let first = std::fs::read(dir.path().join(harness::RESULTS_FILE)).unwrap();
    criterion_6(&mut r, &cfg, &first);
    criterion_7(&mut r, rows);

    let table = harness::savings_table(rows).unwrap();
    use Strategy::*;
    savings_check(
        &mut r,
        8,
        &table,
        SweepKind::Traffic,
        &[(CfvDistributed, true, 54.0), (CfvSingle, true, 45.0), (CfvRandom, true, 30.0)],
    );
    savings_check(
        &mut r,
        9,
        &table,
        SweepKind::Traffic,
        &[(CfvDistributed, false, 30.0), (CfvSingle, false, 18.0), (CfvRandom, false, -7.0)],
    );
    savings_check(
        &mut r,
        10,
        &table,
        SweepKind::Processing,
        &[
            (CfvDistributed, true, 47.0),
            (CfvSingle, true, 46.0),
            (CfvRandom, true, 30.0),
            (CfvDistributed, false, 21.0),
            (CfvSingle, false, 11.0),
            (CfvRandom, false, -11.0),
        ],
    );
    criterion_11(&mut r, rows, default_arch().shared_intensity());
    r.record(
        12,
        false,
        secs < 600.0,
        format!("full dual sweep, 5 strategies, 5 replications: {secs:.1} s (limit 600 s)"),
    );

    let hard_failed: Vec<u32> = r.lines.iter().filter(|l| l.1 && !l.2).map(|l| l.0).collect();
    let soft_failed: Vec<u32> = r.lines.iter().filter(|l| !l.1 && !l.2).map(|l| l.0).collect();
    println!(
        "summary: {}/{} criteria pass; hard failures {hard_failed:?}; soft misses {soft_failed:?}",
        r.lines.iter().filter(|l| l.2).count(),
        r.lines.len()
    );
    assert!(hard_failed.is_empty(), "hard criteria failed: {hard_failed:?}");
}
