//! Exact Taylor coefficients of the shrinkage density `f_n` and the
//! expectations `E S_n`.
//!
//! `f_n(x) = Σ_k c_{n,k} x^k` on `[0, 1/2]`, with `f_1 ≡ 2` and
//!
//! ```text
//! c_{n+1,0} = 0,    c_{n+1,k} = (k + 2)/k · Σ_{j<k} c_{n,j}   (k ≥ 1)
//! ```
//!
//! Row `n + 1` up to order `K` only needs row `n` up to order `K - 1`, so a
//! chain of rows computed at a common order is exact in every stored
//! coefficient. The recursion is generic over [`Coefficient`]; the exact
//! path uses `BigRational`, and `f64` is available for quick estimates.
//!
//! Truncation is controlled through normalization: `f_n` is a density on
//! `[0, 1/2]`, so `Σ_k c_{n,k} 2^{-(k+1)}/(k+1) = 1` and the stored terms
//! fall short of 1 by exactly the missing probability mass. Each missing
//! term of `E S_n` is at most half the matching mass term, which bounds the
//! neglected part of `E S_n` by half the missing mass.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("row {n}: tail bound {tail_bound:e} exceeds tolerance {tol:e}")]
    TruncationInsufficient { n: usize, tail_bound: f64, tol: f64 },
    #[error("row {n}: truncation order {order} would exceed the ceiling {ceiling}")]
    OrderCeiling { n: usize, order: usize, ceiling: usize },
}

/// Scalar field the coefficient recursion runs in.
pub trait Coefficient: Clone + Debug + PartialOrd + Zero + One + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self> {
    fn from_ratio(num: u64, den: u64) -> Self;
    /// `2^{-k} / k` for `k ≥ 1`.
    fn dyadic_weight(k: u32) -> Self;
    fn approx_f64(&self) -> f64;
}

impl Coefficient for BigRational {
    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn dyadic_weight(k: u32) -> Self {
        BigRational::new(BigInt::one(), BigInt::from(k) << k)
    }

    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coefficient for f64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn dyadic_weight(k: u32) -> Self {
        0.5f64.powi(k as i32) / k as f64
    }

    fn approx_f64(&self) -> f64 {
        *self
    }
}

/// Row of `f_1` truncated at `order`: `(2, 0, …, 0)`.
pub fn first_row<T: Coefficient>(order: usize) -> Vec<T> {
    let mut row = vec![T::zero(); order + 1];
    row[0] = T::from_ratio(2, 1);
    row
}

/// `(c_{n+1,0}, …, c_{n+1,order})` from row `n`, which must hold at least
/// `order` coefficients. Uses a running prefix sum.
pub fn next_coefficient_row<T: Coefficient>(row: &[T], order: usize) -> Result<Vec<T>, DensityError> {
    if order == 0 {
        return Err(DensityError::InvalidArgument("order must be at least 1".into()));
    }
    if row.len() < order {
        return Err(DensityError::InvalidArgument(format!(
            "row has {} coefficients, order {order} needs {order}",
            row.len()
        )));
    }
    let mut next = Vec::with_capacity(order + 1);
    next.push(T::zero());
    let mut prefix = T::zero();
    for k in 1..=order {
        prefix = prefix + row[k - 1].clone();
        next.push(T::from_ratio(k as u64 + 2, k as u64) * prefix.clone());
    }
    Ok(next)
}

/// Row `n ≥ 1` at the given order, iterated from `f_1`.
pub fn coefficient_row<T: Coefficient>(n: usize, order: usize) -> Result<Vec<T>, DensityError> {
    if n == 0 {
        return Err(DensityError::InvalidArgument("n must be at least 1".into()));
    }
    let mut row = first_row(order);
    for _ in 1..n {
        row = next_coefficient_row(&row, order)?;
    }
    Ok(row)
}

/// `Σ_k c_k 2^{-(k+1)}/(k+1)`, the probability mass captured by the row.
pub fn captured_mass<T: Coefficient>(row: &[T]) -> T {
    row.iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, c)| acc + c.clone() * T::dyadic_weight(k as u32 + 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationRow<T> {
    pub n: usize,
    /// Truncated `E S_n`; a lower bound on the true value.
    pub es: T,
    /// `n · (1/2 - es)`.
    pub figure_value: T,
    /// Upper bound on the neglected part of `E S_n`.
    pub tail_bound: T,
    /// Truncation order the row was computed at.
    pub order: usize,
}

impl<T: Coefficient> ExpectationRow<T> {
    pub fn es_f64(&self) -> f64 {
        self.es.approx_f64()
    }

    pub fn figure_value_f64(&self) -> f64 {
        self.figure_value.approx_f64()
    }

    pub fn tail_bound_f64(&self) -> f64 {
        self.tail_bound.approx_f64()
    }
}

/// `E S_n = Σ_k c_{n,k} 2^{-(k+2)}/(k+2)` over the stored coefficients,
/// failing when the tail bound exceeds `tol`.
pub fn expectation_s<T: Coefficient>(n: usize, row: &[T], tol: f64) -> Result<ExpectationRow<T>, DensityError> {
    let es = row
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, c)| acc + c.clone() * T::dyadic_weight(k as u32 + 2));
    let missing = T::one() - captured_mass(row);
    let missing = if missing < T::zero() { T::zero() } else { missing };
    let tail_bound = missing * T::from_ratio(1, 2);
    let tail = tail_bound.approx_f64();
    if !(tail <= tol) {
        return Err(DensityError::TruncationInsufficient {
            n,
            tail_bound: tail,
            tol,
        });
    }
    let figure_value = T::from_ratio(n as u64, 1) * (T::from_ratio(1, 2) - es.clone());
    Ok(ExpectationRow {
        n,
        es,
        figure_value,
        tail_bound,
        order: row.len().saturating_sub(1),
    })
}

#[derive(Clone, Debug)]
pub struct TableOptions {
    pub initial_order: usize,
    pub max_order: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            initial_order: 32,
            max_order: 1 << 14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableRow<T> {
    pub coefficients: Vec<T>,
    pub expectation: ExpectationRow<T>,
}

impl<T> TableRow<T> {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Rows `1..=max_n`, each truncated at its own order `K_n`.
#[derive(Clone, Debug)]
pub struct CoefficientTable<T> {
    pub rows: Vec<TableRow<T>>,
    pub tol: f64,
}

impl<T: Coefficient> CoefficientTable<T> {
    pub fn expectations(&self) -> impl Iterator<Item = &ExpectationRow<T>> {
        self.rows.iter().map(|r| &r.expectation)
    }
}

/// Builds the expectation table, doubling the truncation order whenever a
/// row's tail bound exceeds `tol`.
pub fn density_table<T: Coefficient>(max_n: usize, tol: f64, opts: &TableOptions) -> Result<CoefficientTable<T>, DensityError> {
    if max_n == 0 {
        return Err(DensityError::InvalidArgument("max_n must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(DensityError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if opts.initial_order == 0 || opts.initial_order > opts.max_order {
        return Err(DensityError::InvalidArgument("initial order must lie in [1, max_order]".into()));
    }
    let mut order = opts.initial_order;
    let mut current = first_row::<T>(order);
    let mut rows = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        loop {
            match expectation_s(n, &current, tol) {
                Ok(expectation) => {
                    rows.push(TableRow {
                        coefficients: current.clone(),
                        expectation,
                    });
                    break;
                }
                Err(DensityError::TruncationInsufficient { .. }) => {
                    let doubled = order * 2;
                    if doubled > opts.max_order {
                        return Err(DensityError::OrderCeiling {
                            n,
                            order: doubled,
                            ceiling: opts.max_order,
                        });
                    }
                    order = doubled;
                    current = coefficient_row(n, order)?;
                }
                Err(e) => return Err(e),
            }
        }
        if n < max_n {
            current = next_coefficient_row(&current, order)?;
        }
    }
    Ok(CoefficientTable { rows, tol })
}

/// Horner evaluation of the truncated series in `f64`.
pub fn eval_series<T: Coefficient>(row: &[T], x: f64) -> f64 {
    row.iter().rev().fold(0.0, |acc, c| acc * x + c.approx_f64())
}

/// Bound on `Σ_{k>K} c_k x^k` for `0 ≤ x < 1/2` given the missing mass
/// `1 - Σ_{k≤K} c_k 2^{-(k+1)}/(k+1)`. Each neglected coefficient term is
/// `2(k+1)(2x)^k` times its mass term.
pub fn series_tail_bound(order: usize, missing_mass: f64, x: f64) -> f64 {
    if !(0.0..0.5).contains(&x) {
        return f64::INFINITY;
    }
    let q = 2.0 * x;
    if q == 0.0 {
        return 0.0;
    }
    // (k+1) q^k peaks near k = -1/ln q - 1.
    let peak = (-1.0 / q.ln() - 1.0).ceil().max(0.0) as usize;
    let factor = (order + 1..=peak.max(order + 1))
        .map(|k| (k as f64 + 1.0) * q.powi(k as i32))
        .fold(0.0, f64::max);
    2.0 * missing_mass.max(0.0) * factor
}

fn check_quadrature(n: usize, x: f64, grid: usize) -> Result<(), DensityError> {
    if n == 0 {
        return Err(DensityError::InvalidArgument("n must be at least 1".into()));
    }
    if !(0.0..=0.5).contains(&x) {
        return Err(DensityError::InvalidArgument(format!("x must lie in [0, 1/2], got {x}")));
    }
    if grid < 64 {
        return Err(DensityError::InvalidArgument(format!("grid must be at least 64, got {grid}")));
    }
    Ok(())
}

/// `f_n` at the nodes `j·x/grid`, iterating
/// `f_{n+1}(y) = f_n(y) y/(1-y) + 2 ∫_0^y f_n(t)/(1-t) dt`
/// with the cumulative trapezoid rule.
fn iterate_on_grid(n: usize, x: f64, grid: usize) -> Vec<f64> {
    let h = x / grid as f64;
    let nodes: Vec<f64> = (0..=grid).map(|j| j as f64 * h).collect();
    let mut f = vec![2.0; grid + 1];
    for _ in 1..n {
        let g: Vec<f64> = f.iter().zip(&nodes).map(|(fv, y)| fv / (1.0 - y)).collect();
        let mut integral = 0.0;
        let mut next = Vec::with_capacity(grid + 1);
        for j in 0..=grid {
            if j > 0 {
                integral += 0.5 * h * (g[j - 1] + g[j]);
            }
            next.push(f[j] * nodes[j] / (1.0 - nodes[j]) + 2.0 * integral);
        }
        f = next;
    }
    f
}

/// `f_n(x)` by iterating the integral recursion numerically from `f_1 ≡ 2`
/// on a uniform grid over `[0, x]`, Richardson-extrapolated from grids of
/// `grid` and `2·grid` intervals. An oracle for the coefficient engine.
pub fn density_eval_quadrature(n: usize, x: f64, grid: usize) -> Result<f64, DensityError> {
    check_quadrature(n, x, grid)?;
    let coarse = *iterate_on_grid(n, x, grid).last().unwrap();
    let fine = *iterate_on_grid(n, x, 2 * grid).last().unwrap();
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `E S_n = ∫_0^{1/2} y f_n(y) dy` from the quadrature densities.
pub fn expectation_quadrature(n: usize, grid: usize) -> Result<f64, DensityError> {
    check_quadrature(n, 0.5, grid)?;
    let trap = |grid: usize| {
        let h = 0.5 / grid as f64;
        let f = iterate_on_grid(n, 0.5, grid);
        let inner: f64 = (1..grid).map(|j| j as f64 * h * f[j]).sum();
        h * (inner + 0.5 * 0.5 * f[grid])
    };
    Ok((4.0 * trap(2 * grid) - trap(grid)) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn f2(x: f64) -> f64 {
        2.0 * x / (1.0 - x) - 4.0 * (1.0 - x).ln()
    }

    fn f3(x: f64) -> f64 {
        let l = (1.0 - x).ln();
        2.0 * x * (2.0 - x) / (1.0 - x).powi(2) + 4.0 * (1.0 - 2.0 * x) / (1.0 - x) * l + 4.0 * l * l
    }

    #[test]
    fn second_row_from_first() {
        let row = next_coefficient_row(&first_row::<BigRational>(3), 3).unwrap();
        assert_eq!(row, vec![q(0, 1), q(6, 1), q(4, 1), q(10, 3)]);
    }

    #[test]
    fn third_row_leading_terms() {
        let row = coefficient_row::<BigRational>(3, 3).unwrap();
        assert_eq!(row, vec![q(0, 1), q(0, 1), q(12, 1), q(50, 3)]);
    }

    #[test]
    fn zero_row_maps_to_zero_row() {
        let zero = vec![BigRational::zero(); 5];
        assert_eq!(next_coefficient_row(&zero, 4).unwrap(), zero);
    }

    #[test]
    fn recursion_argument_errors() {
        let row = first_row::<BigRational>(3);
        assert!(next_coefficient_row(&row, 0).is_err());
        assert!(next_coefficient_row(&row, 5).is_err());
        assert!(coefficient_row::<BigRational>(0, 3).is_err());
    }

    #[test]
    fn first_expectation_is_one_quarter() {
        let e = expectation_s(1, &first_row::<BigRational>(4), 1e-30).unwrap();
        assert_eq!(e.es, q(1, 4));
        assert_eq!(e.figure_value, q(1, 4));
        assert_eq!(e.tail_bound, BigRational::zero());
    }

    #[test]
    fn second_and_third_expectations_match_closed_forms() {
        // Integrals of the closed forms: E S_2 = ln2/2, E S_3 = 1/2 - ln2/2 + ln²2/2.
        let es2 = LN_2 / 2.0;
        let es3 = 0.5 - LN_2 / 2.0 + LN_2 * LN_2 / 2.0;
        for (n, want) in [(2, es2), (3, es3)] {
            let e = expectation_s(n, &coefficient_row::<BigRational>(n, 200).unwrap(), 1e-12).unwrap();
            let diff = want - e.es_f64();
            assert!(diff >= -1e-15 && diff <= e.tail_bound_f64() + 1e-15, "n={n} diff={diff}");
        }
    }

    #[test]
    fn zero_row_fails_truncation_check() {
        let zero = vec![BigRational::zero(); 8];
        assert!(matches!(
            expectation_s(2, &zero, 0.1),
            Err(DensityError::TruncationInsufficient { .. })
        ));
        assert!(expectation_s(2, &zero, 0.5).is_ok());
    }

    #[test]
    fn single_row_table() {
        let t = density_table::<BigRational>(1, 1e-10, &TableOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        let e = &t.rows[0].expectation;
        assert_eq!((e.n, e.es.clone(), e.figure_value.clone()), (1, q(1, 4), q(1, 4)));
    }

    #[test]
    fn table_argument_errors() {
        let o = TableOptions::default();
        assert!(density_table::<BigRational>(0, 1e-10, &o).is_err());
        assert!(density_table::<BigRational>(3, 0.0, &o).is_err());
        let tight = TableOptions {
            initial_order: 8,
            max_order: 16,
        };
        assert!(matches!(
            density_table::<BigRational>(20, 1e-10, &tight),
            Err(DensityError::OrderCeiling { .. })
        ));
    }

    #[test]
    fn table_rows_are_sound() {
        let t = density_table::<BigRational>(25, 1e-10, &TableOptions::default()).unwrap();
        let half = q(1, 2);
        let mut prev_es = BigRational::zero();
        for (i, row) in t.rows.iter().enumerate() {
            let n = i + 1;
            let e = &row.expectation;
            assert_eq!(e.n, n);
            assert!(e.tail_bound_f64() <= 1e-10);
            assert!(row.coefficients.iter().all(|c| *c >= BigRational::zero()));
            if n >= 2 {
                assert!(row.coefficients[0].is_zero());
            }
            let mass = captured_mass(&row.coefficients);
            assert!(mass <= BigRational::one());
            assert!(BigRational::one() - mass <= e.tail_bound.clone() * q(2, 1));
            assert!(e.es > prev_es && e.es <= half);
            prev_es = e.es.clone();
            // Domination sandwich: n/(4(n+1)) ≤ n(1/2 - E S_n) ≤ n/(2(n+1)).
            let fv = e.figure_value_f64();
            let nf = n as f64;
            assert!(fv >= nf / (4.0 * (nf + 1.0)) - 1e-9 && fv <= nf / (2.0 * (nf + 1.0)) + 1e-9, "n={n} fv={fv}");
        }
    }

    #[test]
    fn float_engine_tracks_exact_engine() {
        let exact = coefficient_row::<BigRational>(8, 120).unwrap();
        let approx = coefficient_row::<f64>(8, 120).unwrap();
        for (e, a) in exact.iter().zip(&approx) {
            let e = e.approx_f64();
            assert!((e - a).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn exact_rows_up_to_ten_at_order_two_hundred() {
        let row = coefficient_row::<BigRational>(10, 200).unwrap();
        assert_eq!(row.len(), 201);
        assert!(row.iter().all(|c| *c >= BigRational::zero()));
        assert!(row[..9].iter().all(|c| c.is_zero()));
        assert!(row[9] > BigRational::zero());
    }

    #[test]
    fn series_agrees_with_closed_forms() {
        let order = 60;
        for (n, closed) in [(1usize, (|_| 2.0) as fn(f64) -> f64), (2, f2), (3, f3)] {
            let row = coefficient_row::<BigRational>(n, order).unwrap();
            let missing = (BigRational::one() - captured_mass(&row)).approx_f64();
            for x in [0.1, 0.25, 0.4] {
                let bound = series_tail_bound(order, missing, x);
                let diff = closed(x) - eval_series(&row, x);
                assert!(diff >= -1e-13 && diff <= bound + 1e-13, "n={n} x={x} diff={diff} bound={bound}");
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        for x in [0.0, 0.13, 0.5] {
            assert_eq!(density_eval_quadrature(1, x, 64).unwrap(), 2.0);
        }
        let v = density_eval_quadrature(2, 0.25, 256).unwrap();
        assert!((v - 1.8173949564737904).abs() < 1e-8, "{v}");
        assert_eq!(density_eval_quadrature(3, 0.0, 64).unwrap(), 0.0);
        assert!(density_eval_quadrature(2, 0.6, 64).is_err());
        assert!(density_eval_quadrature(2, 0.3, 32).is_err());
        assert!(density_eval_quadrature(0, 0.3, 64).is_err());
    }

    #[test]
    fn quadrature_agrees_with_series() {
        let t = density_table::<BigRational>(10, 1e-12, &TableOptions::default()).unwrap();
        for row in &t.rows {
            let n = row.expectation.n;
            for x in [0.1, 0.25, 0.4] {
                let quad = density_eval_quadrature(n, x, 1024).unwrap();
                let series = eval_series(&row.coefficients, x);
                assert!((quad - series).abs() < 1e-7, "n={n} x={x}");
            }
            let es = expectation_quadrature(n, 1024).unwrap();
            assert!((es - row.expectation.es_f64()).abs() < 1e-8, "n={n}");
        }
    }
}
