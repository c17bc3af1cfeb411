//! Reference laws, empirical CDFs, Kolmogorov–Smirnov distances and the
//! verification suites.

use thiserror::Error;

use crate::process::ProcessError;

pub mod ecdf;
pub mod laws;
pub mod sampling;
pub mod suites;

pub use ecdf::{dominance_violation, ks_distance, two_sample_ks, EmpiricalSample, SampleMeta};
pub use laws::{cdf, max_gap_sup_distance, ReferenceLaw};
pub use sampling::{center_sample, scaled_radius_sample, CenterMethod, InnerDraw};
pub use suites::{domination_check, fixed_point_check, moment_check, Suite, SuiteRunner, TestReport, Thresholds, VerifyConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Process(#[from] ProcessError),
}
