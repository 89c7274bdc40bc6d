//! Zero-free polydisc certificates.
//!
//! For radii `ρⱼ > 0` put `λⱼ = ρⱼ exp{Σᵢ γᵢ βᵢ αᵢⱼ}`. If every `λⱼ < 1` and every row satisfies
//! `√γᵢ Σⱼ λⱼ |αᵢⱼ| / (1 − λⱼ) ≤ 1 / (2√c)`, where `c` bounds the nonzeros per column, the
//! partition polynomial has no zeros in the open polydisc `|zⱼ| < ρⱼ`. This module checks
//! that condition and searches the parameter families used by the evaluators.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::SparseSystem;
use crate::scalar::Scalar;

/// Absolute tolerance shared by every bisection in this module.
pub const BISECTION_TOL: f64 = 1e-9;
/// Iteration cap shared by every bisection in this module.
pub const BISECTION_MAX_ITER: usize = 200;

/// A validated zero-free polydisc.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    pub rho: Vec<T>,
    pub lambda: Vec<T>,
    /// Shrink parameter of the evaluation point, `|xⱼ| ≤ (1 − δ)ρⱼ`; `None` when the
    /// certificate was checked for bare radii.
    pub delta: Option<T>,
    /// Smallest slack over all constraints (`1 − λⱼ` and row bound minus row value).
    pub margin: T,
    pub c: usize,
    /// Row values `√γᵢ Σⱼ λⱼ|αᵢⱼ|/(1 − λⱼ)`.
    pub row_values: Vec<T>,
    /// `1 / (2√c)`.
    pub row_bound: T,
}

/// One violated (or binding) constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    /// `λⱼ < 1` fails.
    Lambda { column: usize, lambda: f64 },
    /// The row inequality fails.
    Row { row: usize, value: f64, bound: f64 },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Lambda { column, lambda } => write!(f, "lambda[{column}] = {lambda:.6} >= 1"),
            Constraint::Row { row, value, bound } => {
                write!(f, "row {row}: value {value:.6} > bound {bound:.6}")
            }
        }
    }
}

/// Why a polydisc could not be certified.
#[derive(Clone, Debug, PartialEq)]
pub struct FailureReport {
    /// Every violated constraint, columns first then rows.
    pub violations: Vec<Constraint>,
    /// The constraint with the worst slack.
    pub binding: Option<Constraint>,
    /// Most negative slack.
    pub margin: f64,
}

impl fmt::Display for FailureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated constraint(s)", self.violations.len())?;
        if let Some(b) = &self.binding {
            write!(f, "; binding: {b}")?;
        }
        Ok(())
    }
}

impl std::error::Error for FailureReport {}

fn effective_c(c: usize) -> usize {
    c.max(1)
}

/// `λⱼ = ρⱼ exp{Σᵢ γᵢ βᵢ αᵢⱼ}`.
pub fn lambdas<T: Scalar>(system: &SparseSystem<T>, rho: &[T]) -> Vec<T> {
    let (beta, gamma) = (system.beta(), system.gamma());
    system
        .columns()
        .iter()
        .zip(rho)
        .map(|(col, &r)| {
            let shift: T = col.iter().map(|&(i, a)| gamma[i] * beta[i] * a).sum();
            r * shift.exp()
        })
        .collect()
}

/// Checks the zero-free condition for the polydisc `|zⱼ| < ρⱼ`.
///
/// Boundary equality in the row inequalities passes with margin 0.
pub fn check_polydisc<T: Scalar>(
    system: &SparseSystem<T>,
    rho: &[T],
) -> std::result::Result<Certificate<T>, FailureReport> {
    assert_eq!(rho.len(), system.n_cols(), "one radius per column");
    let lambda = lambdas(system, rho);
    let c = system.column_max_nonzeros();
    let row_bound = T::one() / (T::lit(2.0) * T::from_count(effective_c(c)).sqrt());

    let mut violations = Vec::new();
    let mut margin = T::infinity();
    let mut binding = None;
    for (j, &l) in lambda.iter().enumerate() {
        let slack = T::one() - l;
        let con = Constraint::Lambda { column: j, lambda: l.to_f64_lossy() };
        if !(slack > T::zero()) {
            violations.push(con.clone());
        }
        if slack < margin || binding.is_none() {
            margin = slack;
            binding = Some(con);
        }
    }

    let mut row_values = vec![T::zero(); system.n_rows()];
    if violations.is_empty() {
        for (col, &l) in system.columns().iter().zip(&lambda) {
            let ratio = l / (T::one() - l);
            for &(i, a) in col {
                row_values[i] = row_values[i] + ratio * a.abs();
            }
        }
        for (i, v) in row_values.iter_mut().enumerate() {
            *v = system.gamma()[i].sqrt() * *v;
            let slack = row_bound - *v;
            let con = Constraint::Row { row: i, value: v.to_f64_lossy(), bound: row_bound.to_f64_lossy() };
            if slack < T::zero() {
                violations.push(con.clone());
            }
            if slack < margin || binding.is_none() {
                margin = slack;
                binding = Some(con);
            }
        }
    }

    if violations.is_empty() {
        Ok(Certificate {
            rho: rho.to_vec(),
            lambda,
            delta: None,
            margin: if margin.is_finite() { margin } else { T::one() },
            c,
            row_values,
            row_bound,
        })
    } else {
        Err(FailureReport { violations, binding, margin: margin.to_f64_lossy() })
    }
}

/// Radii `ρⱼ = xⱼ / (1 − δ)`.
pub fn radii_for<T: Scalar>(x: &[T], delta: T) -> Vec<T> {
    x.iter().map(|&v| v / (T::one() - delta)).collect()
}

/// Checks the polydisc `ρ = x/(1 − δ)` and records `δ` in the certificate.
pub fn certify_point<T: Scalar>(
    system: &SparseSystem<T>,
    x: &[T],
    delta: T,
) -> std::result::Result<Certificate<T>, FailureReport> {
    check_polydisc(system, &radii_for(x, delta)).map(|mut c| {
        c.delta = Some(delta);
        c
    })
}

/// Largest `δ ∈ (0, 1)` for which the polydisc `ρⱼ = xⱼ/(1 − δ)` is certified, or `None`
/// when already `δ = 0` fails (or is only certified with nothing to spare).
pub fn max_delta<T: Scalar>(system: &SparseSystem<T>, x: &[T]) -> Option<T> {
    assert_eq!(x.len(), system.n_cols(), "one evaluation coordinate per column");
    let passes = |d: T| certify_point(system, x, d).is_ok();
    if !passes(T::zero()) {
        return None;
    }
    let tol = T::lit(BISECTION_TOL);
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo > T::zero()).then_some(lo)
}

/// Vertex degree `Δ` of a regular hypergraph, or its `Δ → ∞` limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(d) => write!(f, "{d}"),
            Degree::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Degree {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Degree::Infinite),
            other => other.parse().map(Degree::Finite).map_err(|e| format!("invalid degree {s:?}: {e}")),
        }
    }
}

/// `γ = t/k` for the largest admissible `t = γk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformGamma<T> {
    pub t: T,
    pub gamma: T,
}

/// Bisects a monotone feasibility predicate on `[0, ∞)`: returns the largest feasible point
/// to absolute tolerance, `0` when only `0` is feasible, or `None` when `0` is infeasible.
fn bisect_feasible<T: Scalar>(mut feasible: impl FnMut(T) -> bool, start: T) -> Option<T> {
    if !feasible(T::zero()) {
        return None;
    }
    let mut hi = start;
    let mut grow = 0;
    while feasible(hi) {
        hi = hi * T::lit(2.0);
        grow += 1;
        if grow > 1000 || !hi.is_finite() {
            return Some(T::infinity());
        }
    }
    let mut lo = T::zero();
    let tol = T::lit(BISECTION_TOL);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Largest `γ = t/k` with `eᵗ ≤ (1 − δ)(Δ − 1)/(1 + 2Δ√t)` (or the `Δ → ∞` limit
/// `eᵗ ≤ (1 − δ)/(2√t)`): the weight certified for perfect matchings of a `k`-uniform
/// `Δ`-regular hypergraph at `pₛ = 1/Δ`.
pub fn max_gamma_uniform<T: Scalar>(k: usize, delta: T, degree: Degree) -> Result<UniformGamma<T>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::InvalidInput(format!("delta = {delta} is not in (0, 1)")));
    }
    let two = T::lit(2.0);
    let feasible: Box<dyn Fn(T) -> bool> = match degree {
        Degree::Finite(d) if d < 3 => {
            return Err(Error::InvalidInput(format!("Delta = {d} must be at least 3")));
        }
        Degree::Finite(d) => {
            let d = T::from_count(d);
            Box::new(move |t: T| t.exp() * (T::one() + two * d * t.sqrt()) <= (T::one() - delta) * (d - T::one()))
        }
        Degree::Infinite => Box::new(move |t: T| t.exp() * two * t.sqrt() <= T::one() - delta),
    };
    let t = bisect_feasible(feasible, T::lit(0.01)).unwrap_or_else(T::zero);
    Ok(UniformGamma { t, gamma: t / T::from_count(k) })
}

/// Result of the matching-regime weight search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchingGamma<T> {
    /// Largest certified `γ` (0 if even `γ → 0` fails).
    pub gamma: T,
    /// The heuristic target `(1/k) ln(1/ω)`.
    pub target: T,
    pub target_admissible: bool,
}

/// The matching-regime conditions at weight `γ`:
/// `λ = ω e^{γk} / ((1 − δ)(Δ − 1)) < 1` and `λ/(1 − λ) ≤ 1/(2Δ√(γk))`.
pub fn matching_admissible<T: Scalar>(k: usize, degree: usize, omega: T, delta: T, gamma: T) -> bool {
    let kk = T::from_count(k);
    let d = T::from_count(degree);
    let lambda = omega * (gamma * kk).exp() / ((T::one() - delta) * (d - T::one()));
    if !(lambda < T::one()) {
        return false;
    }
    // λ/(1−λ) · 2Δ√(γk) ≤ 1, which also covers γ = 0
    lambda / (T::one() - lambda) * T::lit(2.0) * d * (gamma * kk).sqrt() <= T::one()
}

/// Largest `γ` satisfying [`matching_admissible`], together with the admissibility of the
/// target `(1/k) ln(1/ω)`.
pub fn max_gamma_matching<T: Scalar>(k: usize, degree: usize, omega: T, delta: T) -> Result<MatchingGamma<T>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if degree < 3 {
        return Err(Error::InvalidInput(format!("Delta = {degree} must be at least 3")));
    }
    if !(omega > T::zero() && omega <= T::one()) {
        return Err(Error::InvalidInput(format!("omega = {omega} is not in (0, 1]")));
    }
    if !(delta >= T::zero() && delta < T::one()) {
        return Err(Error::InvalidInput(format!("delta = {delta} is not in [0, 1)")));
    }
    let gamma = bisect_feasible(|g| matching_admissible(k, degree, omega, delta, g), T::lit(0.01))
        .unwrap_or_else(T::zero);
    let target = omega.recip().ln() / T::from_count(k);
    Ok(MatchingGamma { gamma, target, target_admissible: matching_admissible(k, degree, omega, delta, target) })
}

/// Weights `γᵢ = 1/(c·rᵢ)` for a sparse system with `|αᵢⱼ| ≤ 1`, and the induced coupling
/// column sums `Σ_{k≠j} |g_{jk}|`, which are then at most `1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGamma<T> {
    pub gamma: Vec<T>,
    pub column_sums: Vec<T>,
    pub holds: bool,
}

pub fn suggest_gamma_sparse<T: Scalar>(system: &SparseSystem<T>) -> Result<SparseGamma<T>> {
    if let Some((i, j, a)) = system.entries().find(|&(_, _, a)| a.abs() > T::one()) {
        return Err(Error::InvalidInput(format!("|alpha[{i}][{j}]| = {} exceeds 1", a.abs())));
    }
    let c = T::from_count(effective_c(system.column_max_nonzeros()));
    // empty rows carry no coupling; they get the weight of a single-entry row
    let gamma: Vec<T> = system.row_nonzeros().iter().map(|&r| T::one() / (c * T::from_count(r.max(1)))).collect();
    let weighted = system.with_gamma(gamma.clone())?;
    let column_sums = crate::ising::coupling_column_sums(&weighted);
    let holds = column_sums.iter().all(|&s| s <= T::lit(0.5) * (T::one() + T::epsilon() * T::lit(16.0)));
    Ok(SparseGamma { gamma, column_sums, holds })
}
