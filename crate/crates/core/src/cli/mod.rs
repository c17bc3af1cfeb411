//! `segproc` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 verification
//! failure. Every output starts with `seed`, `config` and `generator`
//! comment lines.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{density_table, DensityError, TableOptions};
use crate::process;
use crate::rng::{RngStream, GENERATOR_NAME};
use crate::stats::{Suite, SuiteRunner, TestReport, VerifyConfig};
use crate::stats::suites::SuiteSizes;
use crate::BigRational;

pub mod svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Caps worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "SEGPROC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "segproc", version, about = "Diminishing segment process: simulation, exact expectations and limit-law checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the direct process and emit (replication, n, centre, radius) rows.
    Simulate(SimulateArgs),
    /// Tabulate E S_n and n(1/2 - E S_n) from the exact coefficient recursion.
    Density(DensityArgs),
    /// Run verification suites and emit their reports.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_steps: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=u32::MAX as u64))]
    pub replications: u64,
    /// Emit every step instead of the final state only.
    #[arg(long)]
    pub trajectory: bool,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive finite number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 70, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_n: u32,
    #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
    pub tol: f64,
    /// Ceiling on the truncation order of a coefficient row.
    #[arg(long, default_value_t = TableOptions::default().max_order)]
    pub max_order: usize,
}

const SUITE_NAMES: [&str; 9] = [
    "radius-exp",
    "radius-moments",
    "center-arcsine",
    "method-equivalence",
    "fixed-point",
    "gem-identity",
    "domination",
    "maxuniform-exact",
    "all",
];

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(SUITE_NAMES))]
    pub suite: String,
    /// Replication count for every sample (defaults to the acceptance sizes).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=u32::MAX as u64))]
    pub samples: Option<u64>,
    /// Step count for every direct-process sample.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_steps: Option<u64>,
}

/// Everything that determines an output's body; serialized into its header.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

impl RunConfig {
    fn new(subcommand: &'static str, common: &Common) -> Self {
        RunConfig {
            subcommand,
            seed: common.seed,
            format: common.format,
            out: common.out.clone(),
            n_steps: None,
            replications: None,
            trajectory: None,
            max_n: None,
            tol: None,
            max_order: None,
            suite: None,
            samples: None,
            verify: None,
        }
    }

    pub fn header_lines(&self) -> Vec<String> {
        vec![
            format!("seed={}", self.seed),
            format!("config={}", serde_json::to_string(self).expect("config serializes")),
            format!("generator={GENERATOR_NAME}"),
        ]
    }

    fn csv_header(&self) -> String {
        self.header_lines().iter().map(|l| format!("# {l}\n")).collect()
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn csv_only(common: &Common, subcommand: &str) -> Result<(), CliError> {
    if common.format == Format::Svg {
        return Err(CliError::Usage(format!("`{subcommand}` only supports --format csv")));
    }
    Ok(())
}

fn emit(common: &Common, body: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &common.out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display()))),
        None => stdout.write_all(body.as_bytes()).map_err(runtime),
    }
}

/// Worker count from `SEGPROC_THREADS`; `None` means rayon's default.
pub fn threads_from_env(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Usage(format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`"))),
        },
    }
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    csv_only(&args.common, "simulate")?;
    let mut config = RunConfig::new("simulate", &args.common);
    config.n_steps = Some(args.n_steps);
    config.replications = Some(args.replications);
    config.trajectory = Some(args.trajectory);

    let base = RngStream::new(args.common.seed, 0);
    let mut body = config.csv_header();
    body.push_str("replication,n,centre,radius\n");
    let row = |rep: u64, s: &process::ProcessState<f64>| {
        format!("{rep},{},{},{}\n", s.step, s.segment.centre(), s.segment.radius())
    };
    if args.trajectory {
        for rep in 0..args.replications {
            let traj = process::run_direct::<f64>(args.n_steps, &mut base.substream(rep)).map_err(runtime)?;
            for s in &traj {
                body.push_str(&row(rep, s));
            }
        }
    } else {
        let finals: Vec<_> = (0..args.replications)
            .into_par_iter()
            .map(|rep| process::final_direct::<f64>(args.n_steps, &mut base.substream(rep)))
            .collect();
        for (rep, s) in finals.iter().enumerate() {
            body.push_str(&row(rep as u64, s));
        }
    }
    emit(&args.common, &body, stdout)?;
    Ok(EXIT_OK)
}

fn density(args: &DensityArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut config = RunConfig::new("density", &args.common);
    config.max_n = Some(args.max_n);
    config.tol = Some(args.tol);
    config.max_order = Some(args.max_order);

    let opts = TableOptions {
        max_order: args.max_order,
        ..TableOptions::default()
    };
    if opts.max_order < opts.initial_order {
        return Err(CliError::Usage(format!("--max-order must be at least {}", opts.initial_order)));
    }
    let table = density_table::<BigRational>(args.max_n as usize, args.tol, &opts).map_err(|e| match e {
        DensityError::InvalidArgument(m) => CliError::Usage(m),
        other => runtime(other),
    })?;

    let body = match args.common.format {
        Format::Csv => {
            let mut body = config.csv_header();
            body.push_str("n,es_n,figure_value,tail_bound\n");
            for e in table.expectations() {
                body.push_str(&format!("{},{},{},{}\n", e.n, e.es_f64(), e.figure_value_f64(), e.tail_bound_f64()));
            }
            body
        }
        Format::Svg => {
            let points: Vec<(f64, f64)> = table.expectations().map(|e| (e.n as f64, e.figure_value_f64())).collect();
            svg::Scatter {
                title: "n (1/2 - E S_n)",
                x_label: "n",
                y_label: "n (1/2 - E S_n)",
                points: &points,
                reference_y: Some(0.25),
            }
            .render(&config.header_lines())
        }
    };
    emit(&args.common, &body, stdout)?;
    Ok(EXIT_OK)
}

pub const REPORT_CSV_HEADER: &str = "suite,check,sample_size,statistic,threshold,pass,control";

fn report_csv_row(r: &TestReport) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        r.suite, r.check, r.sample_size, r.statistic, r.threshold, r.pass, r.control
    )
}

fn report_table(reports: &[TestReport]) -> String {
    let mut out = format!(
        "{:<20} {:<34} {:>9} {:>12} {:>12} {:>9} {:>6}\n",
        "suite", "check", "N", "statistic", "threshold", "runtime", "result"
    );
    for r in reports {
        let verdict = match (r.ok(), r.control) {
            (true, false) => "PASS",
            (true, true) => "PASS*",
            (false, _) => "FAIL",
        };
        out.push_str(&format!(
            "{:<20} {:<34} {:>9} {:>12.4e} {:>12.4e} {:>8.2}s {:>6}\n",
            r.suite,
            r.check,
            r.sample_size,
            r.statistic,
            r.threshold,
            r.runtime.as_secs_f64(),
            verdict
        ));
    }
    out.push_str("(* negative control: expected to exceed its threshold)\n");
    out
}

fn verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    csv_only(&args.common, "verify")?;
    let suites = Suite::parse_selection(&args.suite).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut sizes = SuiteSizes::default();
    if let Some(n) = args.samples {
        sizes = sizes.with_samples(n);
    }
    if let Some(n) = args.n_steps {
        sizes = sizes.with_n_steps(n);
    }
    let verify_config = VerifyConfig {
        seed: args.common.seed,
        sizes,
        ..VerifyConfig::default()
    };
    let mut config = RunConfig::new("verify", &args.common);
    config.suite = Some(args.suite.clone());
    config.samples = args.samples;
    config.n_steps = args.n_steps;
    config.verify = Some(verify_config.clone());

    let reports = SuiteRunner::new(verify_config).run_all(&suites).map_err(runtime)?;
    let mut body = config.csv_header();
    body.push_str(REPORT_CSV_HEADER);
    body.push('\n');
    for r in &reports {
        body.push_str(&report_csv_row(r));
    }
    emit(&args.common, &body, stdout)?;
    let _ = stderr.write_all(report_table(&reports).as_bytes());
    Ok(if reports.iter().all(TestReport::ok) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, threads: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = threads_from_env(threads).and_then(|threads| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(runtime)?;
        // Buffered so the pool's closure only captures `Send` data.
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = pool.install(|| match &cli.command {
            Command::Simulate(a) => simulate(a, &mut out),
            Command::Density(a) => density(a, &mut out),
            Command::Verify(a) => verify(a, &mut out, &mut err),
        });
        let _ = stderr.write_all(&err);
        stdout.write_all(&out).map_err(runtime)?;
        code
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
