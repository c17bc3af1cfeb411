//! Replicated samplers. Replication `i` always draws from
//! `base.substream(i)`, so results do not depend on how rayon schedules the
//! work or how many threads it has.

use rayon::prelude::*;

use super::ecdf::{EmpiricalSample, SampleMeta};
use super::StatsError;
use crate::process::{self, ThinnedState};
use crate::rng::{RngStream, GENERATOR_NAME};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CenterMethod {
    /// Stick-breaking series truncated at residual `< eps`.
    Series,
    /// Thinned process iterated until `r < eps`.
    Thinned,
    /// Centre `Z_n` of the direct process after `n_steps` steps.
    Direct { n_steps: u64 },
}

/// What replaces `Z'` on the right of `Z = r_1 Z' + Z̃_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerDraw {
    /// A fresh series draw, the genuine identity.
    Series,
    /// Uniform on `(-1/2, 1/2)`, a negative control.
    UniformControl,
}

fn meta(base: &RngStream) -> SampleMeta {
    SampleMeta {
        seed: base.seed(),
        stream: base.stream(),
        generator: GENERATOR_NAME.to_string(),
    }
}

fn check_count(count: u64) -> Result<(), StatsError> {
    if count == 0 {
        return Err(StatsError::Domain("sample size must be at least 1".into()));
    }
    if count > u32::MAX as u64 {
        return Err(StatsError::Domain(format!("sample size {count} exceeds 2^32 - 1")));
    }
    Ok(())
}

/// Runs `draw` once per replication on its own substream and collects the
/// values into a sorted sample.
pub fn replicate<F>(count: u64, base: &RngStream, draw: F) -> Result<EmpiricalSample, StatsError>
where
    F: Fn(&mut RngStream) -> Result<f64, StatsError> + Sync,
{
    check_count(count)?;
    let values = (0..count)
        .into_par_iter()
        .map(|i| draw(&mut base.substream(i)))
        .collect::<Result<Vec<f64>, StatsError>>()?;
    EmpiricalSample::new(values, meta(base))
}

fn check_steps(n: u64) -> Result<(), StatsError> {
    if n == 0 {
        Err(StatsError::Domain("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `count` draws of `n(ρ_n - 1/2)`.
pub fn scaled_radius_sample(n: u64, count: u64, base: &RngStream) -> Result<EmpiricalSample, StatsError> {
    check_steps(n)?;
    let scale = n as f64;
    replicate(count, base, |rng| {
        let state = process::final_direct::<f64>(n, rng);
        Ok(scale * (state.segment.radius() - 0.5))
    })
}

/// `count` draws of `S_n = 1 - ρ_n`.
pub fn shrinkage_sample(n: u64, count: u64, base: &RngStream) -> Result<EmpiricalSample, StatsError> {
    check_steps(n)?;
    replicate(count, base, |rng| Ok(process::final_direct::<f64>(n, rng).s))
}

/// `count` draws of `M_n^α`.
pub fn max_uniform_sample(n: u64, alpha: f64, count: u64, base: &RngStream) -> Result<EmpiricalSample, StatsError> {
    replicate(count, base, |rng| Ok(process::sample_max_uniform(n, alpha, rng)?))
}

/// `count` draws of the (approximate) limiting centre.
pub fn center_sample(count: u64, eps: f64, base: &RngStream, method: CenterMethod) -> Result<EmpiricalSample, StatsError> {
    match method {
        CenterMethod::Series => replicate(count, base, |rng| Ok(process::sample_center_series(rng, eps)?)),
        CenterMethod::Thinned => replicate(count, base, |rng| Ok(process::run_thinned_until(eps, rng)?.0.z)),
        CenterMethod::Direct { n_steps } => {
            check_steps(n_steps)?;
            replicate(count, base, |rng| Ok(process::final_direct::<f64>(n_steps, rng).segment.centre()))
        }
    }
}

/// `count` draws of `r_1 Z' + Z̃_1`: one thinned step from `(0, 1)`, then
/// `Z'` from the same substream.
pub fn fixed_point_sample(count: u64, eps: f64, base: &RngStream, inner: InnerDraw) -> Result<EmpiricalSample, StatsError> {
    replicate(count, base, |rng| {
        let first = process::step_thinned(&ThinnedState::<f64>::initial(), rng);
        let z_prime = match inner {
            InnerDraw::Series => process::sample_center_series(rng, eps)?,
            InnerDraw::UniformControl => f64::draw_open01(rng) - 0.5,
        };
        Ok(first.r * z_prime + first.z)
    })
}
