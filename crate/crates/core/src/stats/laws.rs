use std::f64::consts::FRAC_1_PI;

use super::ecdf::EmpiricalSample;
use super::StatsError;

/// A distribution with an evaluatable CDF.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceLaw {
    /// `Exp(rate)`; the limit of `n(ρ_n - 1/2)` is `Exp(4)`.
    Exponential { rate: f64 },
    /// `(2/π) arcsin √(x + 1/2)` on `[-1/2, 1/2]`, the law of the limiting centre.
    TranslatedArcsine,
    /// Maximum of `n` independent uniforms on `[1/4 - α/2, 1/2]`.
    MaxUniform { n: u64, alpha: f64 },
    Empirical(EmpiricalSample),
}

impl ReferenceLaw {
    pub fn validate(&self) -> Result<(), StatsError> {
        match *self {
            ReferenceLaw::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                Err(StatsError::Domain(format!("exponential rate must be positive, got {rate}")))
            }
            ReferenceLaw::MaxUniform { n: 0, .. } => Err(StatsError::Domain("max-uniform needs n ≥ 1".into())),
            ReferenceLaw::MaxUniform { alpha, .. } if !(0.0..=0.5).contains(&alpha) => {
                Err(StatsError::Domain(format!("alpha must lie in [0, 1/2], got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, ReferenceLaw::Empirical(_))
    }

    /// `P(X ≤ x)`; clamps to 0 or 1 outside the support.
    pub fn cdf(&self, x: f64) -> Result<f64, StatsError> {
        self.validate()?;
        if x.is_nan() {
            return Err(StatsError::Domain("cdf argument is NaN".into()));
        }
        Ok(self.cdf_unchecked(x))
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        match self {
            ReferenceLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            ReferenceLaw::TranslatedArcsine => {
                if x <= -0.5 {
                    0.0
                } else if x >= 0.5 {
                    1.0
                } else {
                    // (2/π) arcsin √(x + 1/2) = 1/2 + arcsin(2x)/π
                    0.5 + (2.0 * x).asin() * FRAC_1_PI
                }
            }
            ReferenceLaw::MaxUniform { n, alpha } => {
                let lo = 0.25 - alpha / 2.0;
                if x <= lo {
                    0.0
                } else if x >= 0.5 {
                    1.0
                } else {
                    ((x - lo) / (0.5 - lo)).powf(*n as f64)
                }
            }
            ReferenceLaw::Empirical(sample) => sample.ecdf(x),
        }
    }
}

pub fn cdf(law: &ReferenceLaw, x: f64) -> Result<f64, StatsError> {
    law.cdf(x)
}

/// `P(n(1/2 - M_n^α) > x)`, exact.
pub fn max_gap_survival(n: u64, alpha: f64, x: f64) -> Result<f64, StatsError> {
    let law = ReferenceLaw::MaxUniform { n, alpha };
    if x <= 0.0 {
        law.validate()?;
        return Ok(1.0);
    }
    // M is continuous, so P(M < t) = P(M ≤ t).
    law.cdf(0.5 - x / n as f64)
}

/// `sup_x |P(n(1/2 - M_n^α) > x) - e^{-λx}|` with `λ = 4/(1+2α)`, over
/// `points` equally spaced abscissae on `[0, 10/λ]`. Past the right end both
/// survival functions are below `e^{-10}`.
pub fn max_gap_sup_distance(n: u64, alpha: f64, points: usize) -> Result<f64, StatsError> {
    if points < 2 {
        return Err(StatsError::Domain("need at least two grid points".into()));
    }
    let rate = 4.0 / (1.0 + 2.0 * alpha);
    let right = 10.0 / rate;
    let mut sup = 0.0f64;
    for i in 0..points {
        let x = right * i as f64 / (points - 1) as f64;
        let exact = max_gap_survival(n, alpha, x)?;
        sup = sup.max((exact - (-rate * x).exp()).abs());
    }
    Ok(sup)
}
