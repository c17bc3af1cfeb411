//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::process::Command;
use std::time::{Duration, Instant};

use segproc::density::{coefficient_row, density_table, expectation_quadrature, Coefficient, TableOptions};
use segproc::stats::{Suite, SuiteRunner, TestReport, VerifyConfig};
use segproc::BigRational;

const BIN: &str = env!("CARGO_BIN_EXE_segproc");

// Pinned tolerances.
const GOLDEN_RUNTIME: Duration = Duration::from_secs(1);
const FIGURE_RUNTIME: Duration = Duration::from_secs(60);
const FIGURE_CEILING: f64 = 0.25;
const FIGURE_FLOOR_AT_70: f64 = 0.20;
const FIGURE_QUADRATURE_TOL: f64 = 1e-6;
const RADIUS_KS: f64 = 0.02;
const RADIUS_RUNTIME: Duration = Duration::from_secs(180);
const MOMENT_REL: f64 = 0.05;
const CENTER_KS: f64 = 0.01;
const CENTER_MEAN: f64 = 0.005;
const CENTER_RUNTIME: Duration = Duration::from_secs(30);
const EQUIVALENCE_KS: f64 = 0.02;
const FIXED_POINT_KS: f64 = 0.015;
const GEM_DEFECT: f64 = 1e-12;
const MAXUNIFORM_SUP: f64 = 0.01;
const DOMINATION_SLACK: f64 = 0.02;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn q(num: u64, den: u64) -> BigRational {
    BigRational::from_ratio(num, den)
}

fn golden_values() -> Outcome {
    let start = Instant::now();
    // Order-10 Taylor coefficients of f_2 = 2x/(1-x) - 4 ln(1-x) and of f_3.
    let f2 = [q(0, 1), q(6, 1), q(4, 1), q(10, 3), q(3, 1), q(14, 5), q(8, 3), q(18, 7), q(5, 2), q(22, 9), q(12, 5)];
    let f3 = [
        q(0, 1),
        q(0, 1),
        q(12, 1),
        q(50, 3),
        q(20, 1),
        q(343, 15),
        q(1148, 45),
        q(981, 35),
        q(853, 28),
        q(2299, 70),
        q(18469, 525),
    ];
    let row2 = coefficient_row::<BigRational>(2, 10).expect("row 2");
    let row3 = coefficient_row::<BigRational>(3, 10).expect("row 3");
    let table = density_table::<BigRational>(1, 1e-10, &TableOptions::default()).expect("table");
    let es1 = &table.rows[0].expectation.es;
    let elapsed = start.elapsed();
    let ok2 = row2[..] == f2[..];
    let ok3 = row3[..] == f3[..];
    let ok1 = *es1 == q(1, 4);
    outcome(
        ok1 && ok2 && ok3 && elapsed < GOLDEN_RUNTIME,
        format!("E S_1 = {es1} ({ok1}), f_2 row exact ({ok2}), f_3 row exact ({ok3}), {:.3}s", elapsed.as_secs_f64()),
    )
}

fn figure_table() -> Outcome {
    let start = Instant::now();
    let out = Command::new(BIN)
        .args(["density", "--max-n", "70", "--tol", "1e-10"])
        .output()
        .expect("spawn segproc");
    let elapsed = start.elapsed();
    if !out.status.success() {
        return outcome(false, format!("density exited with {}", out.status));
    }
    let text = String::from_utf8(out.stdout).expect("utf-8");
    let rows: Vec<(usize, f64, f64, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let fv: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let first_drop = fv.windows(2).position(|w| w[1] <= w[0]).map(|i| i + 1);
    let increasing = first_drop.is_none();
    let max_fv = fv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bounded = max_fv <= FIGURE_CEILING;
    let fv70 = fv.last().copied().unwrap_or(f64::NAN);
    let floor_ok = rows.len() == 70 && fv70 >= FIGURE_FLOOR_AT_70;
    let tails_ok = rows.iter().all(|r| r.3 <= 1e-10);
    let quad_err = rows
        .iter()
        .take(10)
        .map(|&(n, es, _, _)| (es - expectation_quadrature(n, 1024).expect("quadrature")).abs())
        .fold(0.0f64, f64::max);
    let quad_ok = quad_err <= FIGURE_QUADRATURE_TOL;
    let runtime_ok = elapsed < FIGURE_RUNTIME;
    let drop = first_drop.map_or("none".to_string(), |n| format!("n={}->{} ({:.6} -> {:.6})", n, n + 1, fv[n - 1], fv[n]));
    outcome(
        runtime_ok && increasing && bounded && floor_ok && tails_ok && quad_ok,
        format!(
            "{:.2}s ({runtime_ok}); strictly increasing ({increasing}, first drop {drop}); max {max_fv:.6} <= {FIGURE_CEILING} ({bounded}); \
             value at n=70 {fv70:.6} >= {FIGURE_FLOOR_AT_70} ({floor_ok}); tails <= 1e-10 ({tails_ok}); \
             quadrature error n<=10 {quad_err:.1e} ({quad_ok})",
            elapsed.as_secs_f64()
        ),
    )
}

fn find<'a>(reports: &'a [TestReport], suite: &str, check: &str) -> &'a TestReport {
    reports
        .iter()
        .find(|r| r.suite == suite && r.check == check)
        .unwrap_or_else(|| panic!("missing report {suite}/{check}"))
}

fn verify_csv(threads: &str) -> Vec<u8> {
    let out = Command::new(BIN)
        .args(["verify", "--suite", "all", "--seed", "1"])
        .env("SEGPROC_THREADS", threads)
        .output()
        .expect("spawn segproc");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn statistics(csv: &[u8]) -> HashMap<String, String> {
    String::from_utf8_lossy(csv)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("suite,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (format!("{}/{}", f[0], f[1]), f[3].to_string())
        })
        .collect()
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "exact golden values", golden_values()));
    results.push((2, "expectation table shape", figure_table()));

    let mut runner = SuiteRunner::new(VerifyConfig {
        seed: 1,
        ..VerifyConfig::default()
    });
    let mut run = |suite: Suite| {
        let start = Instant::now();
        let reports = runner.run(suite).expect("suite runs");
        (reports, start.elapsed())
    };

    let (radius, radius_time) = run(Suite::RadiusExp);
    let r = &radius[0];
    results.push((
        3,
        "scaled radius law",
        outcome(
            r.statistic <= RADIUS_KS && r.sample_size == 20_000 && radius_time < RADIUS_RUNTIME,
            format!("KS {:.5} <= {RADIUS_KS}, N={}, {:.2}s", r.statistic, r.sample_size, radius_time.as_secs_f64()),
        ),
    ));

    let (moments, _) = run(Suite::RadiusMoments);
    let worst = moments.iter().map(|r| r.statistic).fold(0.0f64, f64::max);
    results.push((
        4,
        "scaled radius moments",
        outcome(moments.len() == 3 && worst <= MOMENT_REL, format!("max relative error {worst:.4} <= {MOMENT_REL} over k=1,2,3")),
    ));

    let (center, center_time) = run(Suite::CenterArcsine);
    let ks = find(&center, "center-arcsine", "ks-arcsine").statistic;
    let mean = find(&center, "center-arcsine", "abs-mean").statistic;
    results.push((
        5,
        "limiting centre law",
        outcome(
            ks <= CENTER_KS && mean <= CENTER_MEAN && center_time < CENTER_RUNTIME,
            format!("KS {ks:.5} <= {CENTER_KS}, |mean| {mean:.5} <= {CENTER_MEAN}, {:.2}s", center_time.as_secs_f64()),
        ),
    ));

    let (equiv, _) = run(Suite::MethodEquivalence);
    let d = equiv[0].statistic;
    results.push((6, "series vs direct centre", outcome(d <= EQUIVALENCE_KS, format!("two-sample KS {d:.5} <= {EQUIVALENCE_KS}"))));

    let (fixed, _) = run(Suite::FixedPoint);
    let main_ks = find(&fixed, "fixed-point", "ks-fixed-point").statistic;
    let control = find(&fixed, "fixed-point", "uniform-control").statistic;
    results.push((
        7,
        "distributional fixed point",
        outcome(
            main_ks <= FIXED_POINT_KS && control > FIXED_POINT_KS,
            format!("KS {main_ks:.5} <= {FIXED_POINT_KS}; uniform control {control:.5} > {FIXED_POINT_KS}"),
        ),
    ));

    let (gem, _) = run(Suite::GemIdentity);
    let simplex = gem[0].statistic;
    let product = gem[1].statistic;
    results.push((
        8,
        "GEM identities",
        outcome(
            simplex <= GEM_DEFECT && product <= GEM_DEFECT,
            format!("simplex defect {simplex:.1e}, residual-product defect {product:.1e} <= {GEM_DEFECT:.0e}"),
        ),
    ));

    let (maxu, _) = run(Suite::MaxUniformExact);
    let sups: Vec<f64> = maxu.iter().filter(|r| r.check.starts_with("sup-distance")).map(|r| r.statistic).collect();
    let rises: Vec<f64> = maxu.iter().filter(|r| r.check.starts_with("decreasing")).map(|r| r.statistic).collect();
    let sup_ok = sups.len() == 2 && sups.iter().all(|&s| s <= MAXUNIFORM_SUP);
    let dec_ok = rises.len() == 2 && rises.iter().all(|&r| r < 0.0);
    results.push((
        9,
        "max-of-uniforms convergence",
        outcome(sup_ok && dec_ok, format!(
            "sup distance at n=1000 {} <= {MAXUNIFORM_SUP}; decreasing in n ({dec_ok})",
            sups.iter().map(|s| format!("{s:.2e}")).collect::<Vec<_>>().join(", ")
        )),
    ));

    let (dom, _) = run(Suite::Domination);
    let v100 = find(&dom, "domination", "n=100").statistic;
    let exact = find(&dom, "domination", "n=1/closed-form").statistic;
    let exact_swapped = find(&dom, "domination", "n=1/closed-form/swapped").statistic;
    let swapped = find(&dom, "domination", "n=1/swapped");
    results.push((
        10,
        "stochastic domination",
        outcome(
            v100 <= DOMINATION_SLACK && exact == 0.0 && exact_swapped > 0.0 && swapped.statistic > DOMINATION_SLACK,
            format!(
                "n=100 violation {v100:.5} <= {DOMINATION_SLACK}; n=1 closed form violation {exact}; \
                 swapped closed form {exact_swapped:.3}, swapped sample {:.3} (must fail)",
                swapped.statistic
            ),
        ),
    ));

    let first = verify_csv("0");
    let second = verify_csv("0");
    let single = verify_csv("1");
    let four = verify_csv("4");
    let identical = first == second;
    let stats_same = statistics(&first) == statistics(&single) && statistics(&first) == statistics(&four);
    results.push((
        11,
        "reproducibility",
        outcome(
            identical && stats_same && !first.is_empty(),
            format!("reruns byte-identical ({identical}); statistics unchanged for SEGPROC_THREADS=1,4 ({stats_same})"),
        ),
    ));

    let mut failed = 0;
    for (id, name, o) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
