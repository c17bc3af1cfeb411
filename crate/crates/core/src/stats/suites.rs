//! Verification suites for the two limit theorems and the distributional
//! identities. Every threshold comes from [`Thresholds`]; every sample size
//! from [`SuiteSizes`].

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::ecdf::{dominance_violation, ks_distance, law_dominance_violation, two_sample_ks, EmpiricalSample};
use super::laws::{max_gap_sup_distance, ReferenceLaw};
use super::sampling::{self, CenterMethod, InnerDraw};
use super::StatsError;
use crate::process;
use crate::rng::RngStream;

/// Acceptance thresholds. Sample-based thresholds are never allowed below
/// the KS critical value at the sample size actually used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// Asymptotic KS critical value `c(0.001)`.
    pub ks_critical: f64,
    /// `c(0.01)`; domination slack is `2 c / √N`.
    pub domination_critical: f64,
    pub radius_exp_ks: f64,
    pub moment_rel_err: f64,
    pub center_ks: f64,
    pub center_mean: f64,
    pub method_equivalence_ks: f64,
    pub fixed_point_ks: f64,
    pub gem_defect: f64,
    pub maxuniform_sup: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ks_critical: 1.95,
            domination_critical: 1.63,
            radius_exp_ks: 0.02,
            moment_rel_err: 0.05,
            center_ks: 0.01,
            center_mean: 0.005,
            method_equivalence_ks: 0.02,
            fixed_point_ks: 0.015,
            gem_defect: 1e-12,
            maxuniform_sup: 0.01,
        }
    }
}

impl Thresholds {
    fn one_sample(&self, pinned: f64, n: u64) -> f64 {
        pinned.max(self.ks_critical / (n as f64).sqrt())
    }

    fn two_sample(&self, pinned: f64, n: u64, m: u64) -> f64 {
        let (n, m) = (n as f64, m as f64);
        pinned.max(self.ks_critical * ((n + m) / (n * m)).sqrt())
    }

    pub fn domination_slack(&self, n: u64) -> f64 {
        2.0 * self.domination_critical / (n as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSizes {
    pub radius_n: u64,
    pub radius_count: u64,
    pub center_count: u64,
    pub eps: f64,
    pub direct_n: u64,
    pub direct_count: u64,
    pub fixed_point_count: u64,
    pub gem_count: u64,
    pub gem_m: usize,
    pub domination_n: u64,
    pub domination_count: u64,
    pub maxuniform_grid: usize,
    pub maxuniform_ns: Vec<u64>,
    pub maxuniform_alphas: Vec<f64>,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            radius_n: 10_000,
            radius_count: 20_000,
            center_count: 100_000,
            eps: 1e-12,
            direct_n: 10_000,
            direct_count: 20_000,
            fixed_point_count: 100_000,
            gem_count: 10_000,
            gem_m: 50,
            domination_n: 100,
            domination_count: 100_000,
            maxuniform_grid: 10_000,
            maxuniform_ns: vec![10, 100, 1000],
            maxuniform_alphas: vec![0.0, 0.25],
        }
    }
}

impl SuiteSizes {
    /// Sets every replication count to `count`.
    pub fn with_samples(mut self, count: u64) -> Self {
        self.radius_count = count;
        self.center_count = count;
        self.direct_count = count;
        self.fixed_point_count = count;
        self.gem_count = count;
        self.domination_count = count;
        self
    }

    /// Sets the step count of every direct-process sample to `n`.
    pub fn with_n_steps(mut self, n: u64) -> Self {
        self.radius_n = n;
        self.direct_n = n;
        self.domination_n = n;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub sizes: SuiteSizes,
    pub thresholds: Thresholds,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub suite: String,
    pub check: String,
    pub sample_size: u64,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Negative control: expected to fail its threshold.
    pub control: bool,
    #[serde(skip)]
    pub runtime: Duration,
}

impl TestReport {
    pub fn new(suite: &str, check: impl Into<String>, sample_size: u64, statistic: f64, threshold: f64, runtime: Duration) -> Self {
        TestReport {
            suite: suite.to_string(),
            check: check.into(),
            sample_size,
            statistic,
            threshold,
            pass: statistic <= threshold,
            control: false,
            runtime,
        }
    }

    pub fn as_control(mut self) -> Self {
        self.control = true;
        self
    }

    /// Whether the outcome is the expected one.
    pub fn ok(&self) -> bool {
        self.pass != self.control
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T, StatsError>) -> Result<(T, Duration), StatsError> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed()))
}

/// Part `k` of a base stream: an independent block of `2^32` streams.
fn part(base: &RngStream, k: u64) -> RngStream {
    RngStream::new(base.seed(), base.stream().wrapping_add(k << 32))
}

/// Relative error of the `k`-th moment of an `n(ρ_n - 1/2)` sample against
/// the limit `k!/4^k`.
pub fn moment_check(sample: &EmpiricalSample, k: u32, rel_tol: f64) -> Result<TestReport, StatsError> {
    if !(1..=3).contains(&k) {
        return Err(StatsError::Domain(format!("moment order must be 1, 2 or 3, got {k}")));
    }
    let target = (1..=k).product::<u32>() as f64 / 4f64.powi(k as i32);
    let start = Instant::now();
    let rel = (sample.raw_moment(k as i32) - target).abs() / target;
    Ok(TestReport::new(
        Suite::RadiusMoments.name(),
        format!("k={k}"),
        sample.len() as u64,
        rel,
        rel_tol,
        start.elapsed(),
    ))
}

/// Two-sample KS between series draws of `Z` and draws of
/// `r_1 Z' + Z̃_1`, with `Z'` drawn as `inner` says.
pub fn fixed_point_check(count: u64, eps: f64, base: &RngStream, inner: InnerDraw, thresholds: &Thresholds) -> Result<TestReport, StatsError> {
    let ((lhs, rhs), runtime) = timed(|| {
        let lhs = sampling::center_sample(count, eps, &part(base, 0), CenterMethod::Series)?;
        let rhs_part = if inner == InnerDraw::Series { 1 } else { 2 };
        let rhs = sampling::fixed_point_sample(count, eps, &part(base, rhs_part), inner)?;
        Ok((lhs, rhs))
    })?;
    let threshold = thresholds.two_sample(thresholds.fixed_point_ks, count, count);
    let name = match inner {
        InnerDraw::Series => "ks-fixed-point",
        InnerDraw::UniformControl => "uniform-control",
    };
    let report = TestReport::new(Suite::FixedPoint.name(), name, count, two_sample_ks(&lhs, &rhs), threshold, runtime);
    Ok(match inner {
        InnerDraw::Series => report,
        InnerDraw::UniformControl => report.as_control(),
    })
}

/// Empirical check that `M_n^0` stochastically dominates `S_n`:
/// `sup_x (F_M(x) - F_S(x)) ≤ 2·c/√N`. With `swapped` the roles are
/// exchanged and the report is a negative control.
pub fn domination_check(n: u64, count: u64, base: &RngStream, swapped: bool, thresholds: &Thresholds) -> Result<TestReport, StatsError> {
    let ((s, m), runtime) = timed(|| {
        let s = sampling::shrinkage_sample(n, count, &part(base, 0))?;
        let m = sampling::max_uniform_sample(n, 0.0, count, &part(base, 1))?;
        Ok((s, m))
    })?;
    let (statistic, check) = if swapped {
        (dominance_violation(&s, &m), format!("n={n}/swapped"))
    } else {
        (dominance_violation(&m, &s), format!("n={n}"))
    };
    let report = TestReport::new(Suite::Domination.name(), check, count, statistic, thresholds.domination_slack(count), runtime);
    Ok(if swapped { report.as_control() } else { report })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    RadiusExp,
    RadiusMoments,
    CenterArcsine,
    MethodEquivalence,
    FixedPoint,
    GemIdentity,
    Domination,
    MaxUniformExact,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::RadiusExp,
        Suite::RadiusMoments,
        Suite::CenterArcsine,
        Suite::MethodEquivalence,
        Suite::FixedPoint,
        Suite::GemIdentity,
        Suite::Domination,
        Suite::MaxUniformExact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::RadiusExp => "radius-exp",
            Suite::RadiusMoments => "radius-moments",
            Suite::CenterArcsine => "center-arcsine",
            Suite::MethodEquivalence => "method-equivalence",
            Suite::FixedPoint => "fixed-point",
            Suite::GemIdentity => "gem-identity",
            Suite::Domination => "domination",
            Suite::MaxUniformExact => "maxuniform-exact",
        }
    }

    /// `"all"` expands to every suite.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>, StatsError> {
        if s == "all" {
            Ok(Suite::ALL.to_vec())
        } else {
            Ok(vec![s.parse()?])
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| StatsError::Domain(format!("unknown suite `{s}`")))
    }
}

// Stream-id blocks (`key << 40`) for the samples each suite draws.
const KEY_RADIUS: u64 = 1;
const KEY_CENTER_SERIES: u64 = 2;
const KEY_CENTER_DIRECT: u64 = 3;
const KEY_FIXED_POINT: u64 = 4;
const KEY_GEM: u64 = 5;
const KEY_DOMINATION: u64 = 6;
const KEY_DOMINATION_ONE_STEP: u64 = 7;

/// Runs suites against one configuration, sharing samples between suites
/// that use the same draws.
pub struct SuiteRunner {
    config: VerifyConfig,
    radius: Option<(EmpiricalSample, Duration)>,
    series: Option<(EmpiricalSample, Duration)>,
}

impl SuiteRunner {
    pub fn new(config: VerifyConfig) -> Self {
        SuiteRunner {
            config,
            radius: None,
            series: None,
        }
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.config
    }

    fn base(&self, key: u64) -> RngStream {
        RngStream::new(self.config.seed, key << 40)
    }

    fn radius_sample(&mut self) -> Result<(EmpiricalSample, Duration), StatsError> {
        if self.radius.is_none() {
            let sizes = &self.config.sizes;
            let base = self.base(KEY_RADIUS);
            self.radius = Some(timed(|| sampling::scaled_radius_sample(sizes.radius_n, sizes.radius_count, &base))?);
        }
        Ok(self.radius.clone().unwrap())
    }

    fn series_sample(&mut self) -> Result<(EmpiricalSample, Duration), StatsError> {
        if self.series.is_none() {
            let sizes = &self.config.sizes;
            let base = self.base(KEY_CENTER_SERIES);
            self.series = Some(timed(|| sampling::center_sample(sizes.center_count, sizes.eps, &base, CenterMethod::Series))?);
        }
        Ok(self.series.clone().unwrap())
    }

    pub fn run_all(&mut self, suites: &[Suite]) -> Result<Vec<TestReport>, StatsError> {
        let mut out = Vec::new();
        for &suite in suites {
            out.extend(self.run(suite)?);
        }
        Ok(out)
    }

    pub fn run(&mut self, suite: Suite) -> Result<Vec<TestReport>, StatsError> {
        let th = self.config.thresholds.clone();
        let sizes = self.config.sizes.clone();
        let name = suite.name();
        match suite {
            Suite::RadiusExp => {
                let (sample, runtime) = self.radius_sample()?;
                let start = Instant::now();
                let d = ks_distance(&sample, &ReferenceLaw::Exponential { rate: 4.0 })?;
                let n = sample.len() as u64;
                Ok(vec![TestReport::new(
                    name,
                    format!("ks-exp4/n={}", sizes.radius_n),
                    n,
                    d,
                    th.one_sample(th.radius_exp_ks, n),
                    runtime + start.elapsed(),
                )])
            }
            Suite::RadiusMoments => {
                let (sample, runtime) = self.radius_sample()?;
                (1..=3)
                    .map(|k| {
                        let mut r = moment_check(&sample, k, th.moment_rel_err)?;
                        r.runtime += runtime;
                        Ok(r)
                    })
                    .collect()
            }
            Suite::CenterArcsine => {
                let (sample, runtime) = self.series_sample()?;
                let n = sample.len() as u64;
                let d = ks_distance(&sample, &ReferenceLaw::TranslatedArcsine)?;
                // sd of the arcsine law on [-1/2, 1/2] is 1/(2√2).
                let mean_threshold = th.center_mean.max(3.0 / (2.0 * 2f64.sqrt()) / (n as f64).sqrt());
                Ok(vec![
                    TestReport::new(name, "ks-arcsine", n, d, th.one_sample(th.center_ks, n), runtime),
                    TestReport::new(name, "abs-mean", n, sample.mean().abs(), mean_threshold, runtime),
                ])
            }
            Suite::MethodEquivalence => {
                let (series, series_time) = self.series_sample()?;
                let base = self.base(KEY_CENTER_DIRECT);
                let (direct, runtime) = timed(|| {
                    sampling::center_sample(sizes.direct_count, sizes.eps, &base, CenterMethod::Direct { n_steps: sizes.direct_n })
                })?;
                let d = two_sample_ks(&series, &direct);
                let threshold = th.two_sample(th.method_equivalence_ks, series.len() as u64, direct.len() as u64);
                Ok(vec![TestReport::new(
                    name,
                    format!("ks-series-vs-direct/n={}", sizes.direct_n),
                    direct.len() as u64,
                    d,
                    threshold,
                    series_time + runtime,
                )])
            }
            Suite::FixedPoint => {
                let base = self.base(KEY_FIXED_POINT);
                Ok(vec![
                    fixed_point_check(sizes.fixed_point_count, sizes.eps, &base, InnerDraw::Series, &th)?,
                    fixed_point_check(sizes.fixed_point_count, sizes.eps, &base, InnerDraw::UniformControl, &th)?,
                ])
            }
            Suite::GemIdentity => {
                let base = self.base(KEY_GEM);
                let m = sizes.gem_m;
                let ((simplex, product), runtime) = timed(|| gem_defects(sizes.gem_count, m, &base))?;
                Ok(vec![
                    TestReport::new(name, format!("simplex-defect/m={m}"), sizes.gem_count, simplex, th.gem_defect, runtime),
                    TestReport::new(name, format!("residual-product/m={m}"), sizes.gem_count, product, th.gem_defect, runtime),
                ])
            }
            Suite::Domination => {
                let base = self.base(KEY_DOMINATION);
                let one_step = self.base(KEY_DOMINATION_ONE_STEP);
                let count = sizes.domination_count;
                let start = Instant::now();
                // S_1 is uniform on [0, 1/2], the law of M_1^{1/2}.
                let m1 = ReferenceLaw::MaxUniform { n: 1, alpha: 0.0 };
                let s1 = ReferenceLaw::MaxUniform { n: 1, alpha: 0.5 };
                let grid: Vec<f64> = (0..=10_000).map(|i| -0.1 + 0.7 * i as f64 / 10_000.0).collect();
                let exact = law_dominance_violation(&m1, &s1, &grid)?;
                let exact_swapped = law_dominance_violation(&s1, &m1, &grid)?;
                let closed = start.elapsed();
                Ok(vec![
                    domination_check(sizes.domination_n, count, &base, false, &th)?,
                    TestReport::new(name, "n=1/closed-form", grid.len() as u64, exact, 0.0, closed),
                    TestReport::new(name, "n=1/closed-form/swapped", grid.len() as u64, exact_swapped, 0.0, closed).as_control(),
                    domination_check(1, count, &one_step, true, &th)?,
                ])
            }
            Suite::MaxUniformExact => {
                let mut reports = Vec::new();
                for &alpha in &sizes.maxuniform_alphas {
                    let (dists, runtime) = timed(|| {
                        sizes
                            .maxuniform_ns
                            .iter()
                            .map(|&n| max_gap_sup_distance(n, alpha, sizes.maxuniform_grid))
                            .collect::<Result<Vec<f64>, StatsError>>()
                    })?;
                    let largest_n = *sizes.maxuniform_ns.last().unwrap_or(&0);
                    let last = *dists.last().unwrap_or(&f64::NAN);
                    reports.push(TestReport::new(
                        name,
                        format!("sup-distance/alpha={alpha}/n={largest_n}"),
                        sizes.maxuniform_grid as u64,
                        last,
                        th.maxuniform_sup,
                        runtime,
                    ));
                    // Largest consecutive change; negative means strictly decreasing.
                    let rise = dists.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
                    reports.push(TestReport::new(
                        name,
                        format!("decreasing-in-n/alpha={alpha}"),
                        sizes.maxuniform_grid as u64,
                        rise,
                        0.0,
                        runtime,
                    ));
                }
                Ok(reports)
            }
        }
    }
}

/// Max simplex defect and max `|residual - Π U_i|` over `count` GEM
/// vectors. The product is recomputed from a replay of each substream.
pub fn gem_defects(count: u64, m: usize, base: &RngStream) -> Result<(f64, f64), StatsError> {
    let mut simplex = 0.0f64;
    let mut product = 0.0f64;
    for i in 0..count {
        let mut rng = base.substream(i);
        let mut replay = rng.clone();
        let g = process::sample_gem::<f64>(m, &mut rng)?;
        if g.weights.iter().any(|&w| w < 0.0) || g.residual < 0.0 {
            return Err(StatsError::Domain("negative GEM weight".into()));
        }
        let prod: f64 = (0..m).map(|_| replay.open01::<f64>()).product();
        simplex = simplex.max(g.simplex_defect());
        product = product.max((g.residual - prod).abs());
    }
    Ok((simplex, product))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> VerifyConfig {
        VerifyConfig {
            seed: 3,
            sizes: SuiteSizes::default().with_samples(2000).with_n_steps(300),
            thresholds: Thresholds::default(),
        }
    }

    #[test]
    fn moment_targets() {
        // Exp(4) quantile sample: moments close to k!/4^k.
        let n = 100_000;
        let vals: Vec<f64> = (1..=n).map(|i| -(1.0 - (i as f64 - 0.5) / n as f64).ln() / 4.0).collect();
        let s = EmpiricalSample::from_values(vals).unwrap();
        for k in 1..=3 {
            let r = moment_check(&s, k, 0.01).unwrap();
            assert!(r.pass, "k={k} rel={}", r.statistic);
        }
        assert!(moment_check(&s, 4, 0.01).is_err());
        assert!(moment_check(&s, 0, 0.01).is_err());
    }

    #[test]
    fn report_pass_flag_tracks_threshold() {
        let r = TestReport::new("x", "y", 1, 0.5, 0.5, Duration::ZERO);
        assert!(r.pass && r.ok());
        let r = TestReport::new("x", "y", 1, 0.6, 0.5, Duration::ZERO);
        assert!(!r.pass && !r.ok());
        assert!(r.clone().as_control().ok());
        let r = TestReport::new("x", "y", 1, f64::NAN, 0.5, Duration::ZERO);
        assert!(!r.pass);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(Suite::parse_selection("all").unwrap().len(), 8);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn thresholds_never_undercut_critical_values() {
        let th = Thresholds::default();
        assert_eq!(th.one_sample(0.02, 20_000), 0.02);
        assert!(th.one_sample(0.02, 100) > 0.19);
        assert_eq!(th.two_sample(0.015, 100_000, 100_000), 0.015);
        assert!((th.domination_slack(100_000) - 2.0 * 1.63 / 100_000f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_degenerate_single_draw() {
        let th = Thresholds::default();
        let r = fixed_point_check(1, 1e-12, &RngStream::new(1, 0), InnerDraw::Series, &th).unwrap();
        assert_eq!(r.sample_size, 1);
        assert!(r.statistic == 0.0 || r.statistic == 1.0);
        assert_eq!(r.pass, r.statistic <= r.threshold);
    }

    #[test]
    fn one_step_domination_swapped_fails() {
        let th = Thresholds::default();
        let base = RngStream::new(2, 0);
        let good = domination_check(1, 5000, &base, false, &th).unwrap();
        assert!(good.pass, "{}", good.statistic);
        let bad = domination_check(1, 5000, &base, true, &th).unwrap();
        assert!(!bad.pass && bad.control && bad.ok());
        assert!(bad.statistic > 0.4);
    }

    #[test]
    fn small_runs_are_reproducible_and_ok() {
        let a = SuiteRunner::new(small_config()).run_all(&Suite::ALL).unwrap();
        let b = SuiteRunner::new(small_config()).run_all(&Suite::ALL).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.statistic, &x.check), (y.statistic, &y.check));
        }
        // GEM and the deterministic suites do not depend on sample size.
        for r in a.iter().filter(|r| r.suite == "gem-identity" || r.suite == "maxuniform-exact") {
            assert!(r.ok(), "{r:?}");
        }
    }

    #[test]
    fn gem_defects_are_tiny() {
        let (s, p) = gem_defects(2000, 50, &RngStream::new(5, 0)).unwrap();
        assert!(s <= 1e-12 && p <= 1e-12);
    }
}
