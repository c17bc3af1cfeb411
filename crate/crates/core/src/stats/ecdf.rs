use serde::Serialize;

use super::laws::ReferenceLaw;
use super::StatsError;

/// Provenance of a sample.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub stream: u64,
    pub generator: String,
}

/// Sorted, nonempty vector of finite draws.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    pub meta: SampleMeta,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>, meta: SampleMeta) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::Domain("sample contains a non-finite value".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample { values, meta })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self, StatsError> {
        Self::new(values, SampleMeta::default())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of values `≤ x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    /// `(1/N) Σ x_i^k`.
    pub fn raw_moment(&self, k: i32) -> f64 {
        self.values.iter().map(|v| v.powi(k)).sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation (divisor `N - 1`; 0 for a single value).
    pub fn std_dev(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.len() - 1]
    }
}

/// Sup-norm distance between the sample's ECDF and `law`'s CDF. Against a
/// continuous law both one-sided gaps are taken at every jump; against
/// [`ReferenceLaw::Empirical`] this is the two-sample statistic.
pub fn ks_distance(sample: &EmpiricalSample, law: &ReferenceLaw) -> Result<f64, StatsError> {
    law.validate()?;
    if let ReferenceLaw::Empirical(other) = law {
        return Ok(two_sample_ks(sample, other));
    }
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.values().iter().enumerate() {
        let f = law.cdf_unchecked(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Walks the merged jump points of two ECDFs, calling `visit` with
/// `(F_a(x), F_b(x))` after each distinct `x`.
fn walk_jumps(a: &EmpiricalSample, b: &EmpiricalSample, mut visit: impl FnMut(f64, f64)) {
    let (va, vb) = (a.values(), b.values());
    let (na, nb) = (va.len() as f64, vb.len() as f64);
    let (mut i, mut j) = (0, 0);
    while i < va.len() || j < vb.len() {
        let x = match (va.get(i), vb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < va.len() && va[i] <= x {
            i += 1;
        }
        while j < vb.len() && vb[j] <= x {
            j += 1;
        }
        visit(i as f64 / na, j as f64 / nb);
    }
}

pub fn two_sample_ks(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let mut d = 0.0f64;
    walk_jumps(a, b, |fa, fb| d = d.max((fa - fb).abs()));
    d
}

/// `sup_x (F_dominating(x) - F_dominated(x))`, which is 0 exactly when the
/// first sample's ECDF never exceeds the second's, i.e. when the first
/// stochastically dominates the second empirically.
pub fn dominance_violation(dominating: &EmpiricalSample, dominated: &EmpiricalSample) -> f64 {
    let mut d = 0.0f64;
    walk_jumps(dominating, dominated, |fa, fb| d = d.max(fa - fb));
    d
}

/// Same as [`dominance_violation`] for two closed-form laws on a grid.
pub fn law_dominance_violation(dominating: &ReferenceLaw, dominated: &ReferenceLaw, grid: &[f64]) -> Result<f64, StatsError> {
    dominating.validate()?;
    dominated.validate()?;
    Ok(grid
        .iter()
        .map(|&x| dominating.cdf_unchecked(x) - dominated.cdf_unchecked(x))
        .fold(f64::NEG_INFINITY, f64::max))
}
