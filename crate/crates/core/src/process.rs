//! Samplers for the diminishing segment process.
//!
//! Three representations of the same dynamics live here:
//!
//! * the direct process, where a point `a` is drawn uniformly on the current
//!   segment and the segment is intersected with `[a - 1, a + 1]`;
//! * the thinned process `(z, r)`, which keeps only the steps that shrink the
//!   segment: `z' = z + ξ (1 - U) r / 2`, `r' = U r`;
//! * the stick-breaking series `Z = ½ Σ v_i ξ_{i+1}` with GEM(1) weights
//!   `v_i = U_1 ⋯ U_i (1 - U_{i+1})`.
//!
//! Every sampler has a forced variant taking its draws as arguments, and a
//! random variant that pulls them from an [`RngStream`] in a fixed order.

use thiserror::Error;

use crate::rng::{RngStream, Sign};
use crate::scalar::Real;

/// Hard cap on the number of series terms. Reaching residual `1e-12` takes
/// about 28 terms on average, so hitting this means the uniforms are broken.
pub const SERIES_TERM_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("series residual did not fall below {eps} within {cap} terms (degenerate random source)")]
    IterationCap { eps: f64, cap: usize },
    #[error("forced draws ran out before the residual fell below {eps}")]
    DrawsExhausted { eps: f64 },
}

/// A closed interval `[centre - radius, centre + radius]` inside `[-1, 1]`.
///
/// Stored by endpoints so that intersections are exact `max`/`min`
/// operations and nesting can be checked without rounding slack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    lower: T,
    upper: T,
}

impl<T: Real> Segment<T> {
    /// `[-1, 1]`, the starting segment.
    pub fn initial() -> Self {
        Segment {
            lower: -T::one(),
            upper: T::one(),
        }
    }

    pub fn from_endpoints(lower: T, upper: T) -> Result<Self, ProcessError> {
        let seg = Segment { lower, upper };
        seg.validate()?;
        Ok(seg)
    }

    pub fn from_centre_radius(centre: T, radius: T) -> Result<Self, ProcessError> {
        Self::from_endpoints(centre - radius, centre + radius)
    }

    fn validate(&self) -> Result<(), ProcessError> {
        let one = T::one();
        let ok = self.lower >= -one
            && self.upper <= one
            && self.lower <= self.upper
            && self.radius() >= T::half()
            && self.radius() <= one;
        if ok {
            Ok(())
        } else {
            Err(ProcessError::InvalidArgument(format!(
                "segment [{}, {}] is not a reachable state",
                self.lower, self.upper
            )))
        }
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn centre(&self) -> T {
        (self.lower + self.upper) * T::half()
    }

    pub fn radius(&self) -> T {
        (self.upper - self.lower) * T::half()
    }

    /// `self ⊆ other`, by exact endpoint comparison.
    pub fn is_within(&self, other: &Segment<T>) -> bool {
        self.lower >= other.lower && self.upper <= other.upper
    }

    /// `self ∩ [a - 1, a + 1]`.
    pub fn intersect_unit_ball(&self, a: T) -> Segment<T> {
        let one = T::one();
        Segment {
            lower: self.lower.max(a - one),
            upper: self.upper.min(a + one),
        }
    }
}

/// State of the direct process after `step` steps; `s = 1 - radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcessState<T> {
    pub segment: Segment<T>,
    pub step: u64,
    pub s: T,
}

impl<T: Real> ProcessState<T> {
    pub fn initial() -> Self {
        Self::at(Segment::initial(), 0)
    }

    pub fn at(segment: Segment<T>, step: u64) -> Self {
        ProcessState {
            segment,
            step,
            s: T::one() - segment.radius(),
        }
    }
}

impl<T: Real> Default for ProcessState<T> {
    fn default() -> Self {
        Self::initial()
    }
}

/// One step of the direct process with the uniform point `a` supplied.
///
/// A draw in the no-change window `[Z + ρ - 1, Z - ρ + 1]` returns the
/// segment unchanged; once the radius reaches 1/2 that window is the whole
/// segment and the state is absorbing.
pub fn step_direct_forced<T: Real>(state: &ProcessState<T>, a: T) -> ProcessState<T> {
    ProcessState::at(state.segment.intersect_unit_ball(a), state.step + 1)
}

pub fn step_direct<T: Real>(state: &ProcessState<T>, rng: &mut RngStream) -> ProcessState<T> {
    let seg = &state.segment;
    let u = T::draw_unit(rng);
    let a = seg.lower() + (seg.upper() - seg.lower()) * u;
    step_direct_forced(state, a)
}

/// Trajectory of length `n_steps + 1` starting from `[-1, 1]`.
pub fn run_direct<T: Real>(n_steps: u64, rng: &mut RngStream) -> Result<Vec<ProcessState<T>>, ProcessError> {
    if n_steps == 0 {
        return Err(ProcessError::InvalidArgument("n_steps must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(n_steps as usize + 1);
    let mut state = ProcessState::initial();
    out.push(state);
    for _ in 0..n_steps {
        state = step_direct(&state, rng);
        out.push(state);
    }
    Ok(out)
}

/// Final state of `run_direct` without keeping the trajectory.
pub fn final_direct<T: Real>(n_steps: u64, rng: &mut RngStream) -> ProcessState<T> {
    let mut state = ProcessState::initial();
    for _ in 0..n_steps {
        state = step_direct(&state, rng);
    }
    state
}

/// Thinned process state: centre `z` and `r = 2ρ̃ - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThinnedState<T> {
    pub z: T,
    pub r: T,
}

impl<T: Real> ThinnedState<T> {
    pub fn initial() -> Self {
        ThinnedState { z: T::zero(), r: T::one() }
    }
}

impl<T: Real> Default for ThinnedState<T> {
    fn default() -> Self {
        Self::initial()
    }
}

pub fn step_thinned_forced<T: Real>(state: &ThinnedState<T>, u: T, sign: Sign) -> ThinnedState<T> {
    ThinnedState {
        z: state.z + T::half() * sign.value::<T>() * (T::one() - u) * state.r,
        r: u * state.r,
    }
}

/// Draws `U` uniform on `(0, 1)`, then the sign.
pub fn step_thinned<T: Real>(state: &ThinnedState<T>, rng: &mut RngStream) -> ThinnedState<T> {
    let u = T::draw_open01(rng);
    let sign = rng.sign();
    step_thinned_forced(state, u, sign)
}

/// Iterates the thinned process from `(0, 1)` until `r < eps`.
/// Returns the final state and the number of steps taken.
pub fn run_thinned_until<T: Real>(eps: T, rng: &mut RngStream) -> Result<(ThinnedState<T>, usize), ProcessError> {
    check_eps(eps)?;
    let mut state = ThinnedState::initial();
    let mut steps = 0;
    while state.r >= eps {
        if steps == SERIES_TERM_CAP {
            return Err(cap_error(eps));
        }
        state = step_thinned(&state, rng);
        steps += 1;
    }
    Ok((state, steps))
}

fn check_eps<T: Real>(eps: T) -> Result<(), ProcessError> {
    if eps > T::zero() && eps < T::one() {
        Ok(())
    } else {
        Err(ProcessError::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")))
    }
}

fn cap_error<T: Real>(eps: T) -> ProcessError {
    ProcessError::IterationCap {
        eps: eps.to_f64().unwrap_or(f64::NAN),
        cap: SERIES_TERM_CAP,
    }
}

/// `½ Σ_{i<m} v_i ξ_{i+1}` from supplied `(U_{i+1}, ξ_{i+1})` pairs, where
/// `m` is the first index whose residual `U_1 ⋯ U_m` is below `eps`.
///
/// The neglected tail is at most `eps / 2` in absolute value.
pub fn center_series_from_draws<T, I>(draws: I, eps: T) -> Result<T, ProcessError>
where
    T: Real,
    I: IntoIterator<Item = (T, Sign)>,
{
    check_eps(eps)?;
    let mut draws = draws.into_iter();
    let mut residual = T::one();
    let mut sum = T::zero();
    let mut terms = 0;
    while residual >= eps {
        if terms == SERIES_TERM_CAP {
            return Err(cap_error(eps));
        }
        let (u, sign) = draws.next().ok_or(ProcessError::DrawsExhausted {
            eps: eps.to_f64().unwrap_or(f64::NAN),
        })?;
        let weight = residual * (T::one() - u);
        sum = sum + sign.value::<T>() * weight;
        residual = residual * u;
        terms += 1;
    }
    Ok(sum * T::half())
}

/// Random form of [`center_series_from_draws`]; each term draws `U` then
/// the sign, the same order as [`step_thinned`].
pub fn sample_center_series<T: Real>(rng: &mut RngStream, eps: T) -> Result<T, ProcessError> {
    let draws = std::iter::from_fn(|| {
        let u = T::draw_open01(rng);
        Some((u, rng.sign()))
    });
    center_series_from_draws(draws, eps)
}

/// First `m` GEM(1) weights plus the residual `1 - Σ weights`.
#[derive(Clone, Debug, PartialEq)]
pub struct GemVector<T> {
    pub weights: Vec<T>,
    pub residual: T,
}

impl<T: Real> GemVector<T> {
    /// Stick-breaking from `U_1, …, U_m`; values may include the endpoints
    /// 0 and 1. Extra uniforms are ignored.
    pub fn from_uniforms<I>(uniforms: I, m: usize) -> Result<Self, ProcessError>
    where
        I: IntoIterator<Item = T>,
    {
        if m == 0 {
            return Err(ProcessError::InvalidArgument("m must be at least 1".into()));
        }
        let mut weights = Vec::with_capacity(m);
        let mut residual = T::one();
        for u in uniforms.into_iter().take(m) {
            if !(u >= T::zero() && u <= T::one()) {
                return Err(ProcessError::InvalidArgument(format!("uniform {u} outside [0, 1]")));
            }
            weights.push(residual * (T::one() - u));
            residual = residual * u;
        }
        if weights.len() < m {
            return Err(ProcessError::InvalidArgument(format!(
                "need {m} uniforms, got {}",
                weights.len()
            )));
        }
        Ok(GemVector { weights, residual })
    }

    /// `|1 - residual - Σ weights|`.
    pub fn simplex_defect(&self) -> T {
        let total = self.weights.iter().fold(T::zero(), |acc, &w| acc + w);
        (T::one() - self.residual - total).abs()
    }

    /// Weights sorted nonincreasing (Poisson–Dirichlet ordering).
    pub fn to_poisson_dirichlet(&self) -> GemVector<T> {
        let mut weights = self.weights.clone();
        weights.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        GemVector {
            weights,
            residual: self.residual,
        }
    }
}

/// Draws `U_1, …, U_m` uniform on `(0, 1)` in order.
pub fn sample_gem<T: Real>(m: usize, rng: &mut RngStream) -> Result<GemVector<T>, ProcessError> {
    let uniforms = std::iter::repeat_with(|| T::draw_open01(rng));
    GemVector::from_uniforms(uniforms, m)
}

pub fn to_poisson_dirichlet<T: Real>(g: &GemVector<T>) -> GemVector<T> {
    g.to_poisson_dirichlet()
}

/// Support `[1/4 - α/2, 1/2]` of the uniforms behind `M_n^α`.
pub fn max_uniform_support<T: Real>(alpha: T) -> Result<(T, T), ProcessError> {
    if !(alpha >= T::zero() && alpha <= T::half()) {
        return Err(ProcessError::InvalidArgument(format!("alpha must lie in [0, 1/2], got {alpha}")));
    }
    Ok((T::lit(0.25) - alpha * T::half(), T::half()))
}

/// `M_n^α` for supplied draws, which must lie in the support.
pub fn max_uniform_forced<T: Real>(draws: &[T], alpha: T) -> Result<T, ProcessError> {
    let (lo, hi) = max_uniform_support(alpha)?;
    if draws.is_empty() {
        return Err(ProcessError::InvalidArgument("need at least one draw".into()));
    }
    let mut best = lo;
    for &d in draws {
        if !(d >= lo && d <= hi) {
            return Err(ProcessError::InvalidArgument(format!("draw {d} outside [{lo}, {hi}]")));
        }
        best = best.max(d);
    }
    Ok(best)
}

/// Maximum of `n` independent uniforms on `[1/4 - α/2, 1/2]`.
pub fn sample_max_uniform<T: Real>(n: u64, alpha: T, rng: &mut RngStream) -> Result<T, ProcessError> {
    let (lo, hi) = max_uniform_support(alpha)?;
    if n == 0 {
        return Err(ProcessError::InvalidArgument("n must be at least 1".into()));
    }
    let width = hi - lo;
    let mut best = lo;
    for _ in 0..n {
        best = best.max(lo + width * T::draw_unit(rng));
    }
    Ok(best)
}
