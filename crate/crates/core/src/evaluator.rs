//! The smoothed expectation `E exp{−Σᵢ γᵢ(ℓᵢ(ξ) − βᵢ)²}` for independent Bernoulli (or
//! geometric) variables, via `E = Π(1 − pⱼ) · P(x)`.

use crate::error::{Error, Result};
use crate::interpolation::{
    evaluate_g1, log_taylor, required_degree_uncapped, taylor_coefficients_geometric, WorkOptions,
};
use crate::lse::LogSumExp;
use crate::model::{PartialAssignment, ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;
use crate::zerofree::{certify_point, check_polydisc, max_delta};

/// Amount subtracted from the largest certified `δ` before evaluating.
pub const DELTA_SAFETY: f64 = 1e-6;
/// `δ` used for degree selection when forcing an evaluation without any certificate.
pub const FORCED_DELTA: f64 = 0.5;

/// How the value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Truncated Taylor series of `ln g` inside a certified zero-free disc.
    Interpolation,
    /// The full polynomial was summed (the tail criterion asked for degree `n`).
    Exact,
    /// Direct summation of the geometric power series with an explicit remainder bound.
    DirectSeries,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Interpolation => "interpolation",
            Method::Exact => "exact",
            Method::DirectSeries => "direct_series",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationResult<T> {
    /// Natural log of the expectation.
    pub log_value: T,
    pub epsilon: T,
    /// Certificate parameter used, if any.
    pub delta: Option<T>,
    pub degree: usize,
    /// A-priori bound on the log-space error.
    pub tail_bound: T,
    pub certified: bool,
    pub method: Method,
    /// The geometric evaluator reused the 0-1 zero-free radii for the power series.
    pub assumes_geometric_zero_free: bool,
}

impl<T: Scalar> EvaluationResult<T> {
    /// `exp(log_value)`; may underflow to 0 where `log_value` does not.
    pub fn value(&self) -> T {
        self.log_value.exp()
    }

    fn exact(log_value: T, epsilon: T) -> Self {
        Self {
            log_value,
            epsilon,
            delta: None,
            degree: 0,
            tail_bound: T::zero(),
            certified: true,
            method: Method::Exact,
            assumes_geometric_zero_free: false,
        }
    }
}

/// Evaluation controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions<T> {
    pub work: WorkOptions,
    /// Fixed `δ` instead of the automatic choice.
    pub delta: Option<T>,
    /// Evaluate even without a certificate (`certified = false`, no guarantee).
    pub force: bool,
}

impl<T> Default for EvalOptions<T> {
    fn default() -> Self {
        Self { work: WorkOptions::default(), delta: None, force: false }
    }
}

fn check_epsilon<T: Scalar>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("epsilon = {epsilon} is not in (0, 1)")))
    }
}

/// The `δ` to evaluate with: the override, else the largest certified one minus a safety
/// margin. `Ok(None)` means no certificate exists and `force` is set.
fn choose_delta<T: Scalar>(system: &SparseSystem<T>, x: &[T], opts: &EvalOptions<T>) -> Result<Option<T>> {
    if let Some(d) = opts.delta {
        return Ok(Some(d));
    }
    match max_delta(system, x) {
        Some(best) => {
            let safe = (best - T::lit(DELTA_SAFETY)).max(best / T::lit(2.0));
            Ok(Some(safe))
        }
        None if opts.force => Ok(None),
        None => Err(Error::NotCertified(check_polydisc(system, x).err().unwrap_or_else(|| {
            // δ = 0 passes with zero slack only
            crate::zerofree::FailureReport { violations: Vec::new(), binding: None, margin: 0.0 }
        }))),
    }
}

/// `E exp{−penalty(ξ)}` for independent `ξⱼ ~ Bernoulli(pⱼ)` to relative error `ε`.
pub fn smoothed_expectation<T: Scalar>(
    system: &SparseSystem<T>,
    p: &ProbabilityVector<T>,
    epsilon: T,
    opts: &EvalOptions<T>,
) -> Result<EvaluationResult<T>> {
    check_epsilon(epsilon)?;
    if p.len() != system.n_cols() {
        return Err(Error::DimensionMismatch { expected: system.n_cols(), got: p.len() });
    }
    if system.n_cols() == 0 {
        return Ok(EvaluationResult::exact(-system.penalty_at_zero(), epsilon));
    }
    let x = p.odds();
    let chosen = choose_delta(system, &x, opts)?;
    let delta = chosen.unwrap_or_else(|| T::lit(FORCED_DELTA));
    let g1 = evaluate_g1(system, &x, delta, epsilon, opts.force, &opts.work)?;
    Ok(EvaluationResult {
        log_value: p.log_complement_product() + g1.log_value,
        epsilon,
        delta: chosen,
        degree: g1.degree,
        tail_bound: g1.tail_bound,
        certified: g1.certified,
        method: if g1.exact { Method::Exact } else { Method::Interpolation },
        assumes_geometric_zero_free: false,
    })
}

/// `E[exp{−penalty(ξ)} | ξⱼ fixed by the assignment]`, not weighted by the probability of
/// the fixing.
pub fn conditional_expectation<T: Scalar>(
    system: &SparseSystem<T>,
    p: &ProbabilityVector<T>,
    assignment: &PartialAssignment,
    epsilon: T,
    opts: &EvalOptions<T>,
) -> Result<EvaluationResult<T>> {
    let restricted = system.restrict(assignment)?;
    smoothed_expectation(&restricted, &p.restrict(assignment)?, epsilon, opts)
}

/// `ln Σ_{k>N} C(k+n−1, n−1) qᵏ`, an upper bound on the tail of `Σ_k h_k(x)` for `max xⱼ = q`.
fn log_composition_tail(n: usize, q: f64, degree: usize) -> f64 {
    let log_q = q.ln();
    let log_term = |k: usize| -> f64 {
        // ln C(k+n−1, n−1)
        let mut l = 0.0;
        for t in 1..n {
            l += ((k + t) as f64).ln() - (t as f64).ln();
        }
        l + k as f64 * log_q
    };
    let mut acc = LogSumExp::new();
    let mut k = degree + 1;
    loop {
        let lt = log_term(k);
        acc.push(lt);
        // consecutive-term ratio q(k+n)/(k+1) decreases in k
        let ratio = q * (k + n) as f64 / (k + 1) as f64;
        if ratio < 1.0 {
            let rest = lt + ratio.ln() - (1.0 - ratio).ln();
            if rest < acc.value() - 40.0 {
                acc.push(rest);
                return acc.value();
            }
        }
        k += 1;
        if k > degree + 1_000_000 {
            return f64::INFINITY;
        }
    }
}

/// `E exp{−penalty(ξ)}` for independent geometric `P(ξⱼ = k) = (1 − pⱼ)pⱼᵏ`.
///
/// The power series `P̃(z·p)` is interpolated through its log-Taylor expansion when the 0-1
/// polydisc certificate holds at `x = p` (flagged through `assumes_geometric_zero_free`).
/// Otherwise the series is summed directly up to the degree at which the remainder bound
/// `e^{pen(0)} Σ_{k>N} C(k+n−1, n−1) (max pⱼ)ᵏ` falls below `ε/2`.
pub fn smoothed_expectation_geometric<T: Scalar>(
    system: &SparseSystem<T>,
    p: &[T],
    epsilon: T,
    opts: &EvalOptions<T>,
) -> Result<EvaluationResult<T>> {
    check_epsilon(epsilon)?;
    let n = system.n_cols();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let probs = ProbabilityVector::new(p.to_vec())?;
    if n == 0 {
        return Ok(EvaluationResult::exact(-system.penalty_at_zero(), epsilon));
    }
    let log_norm = probs.log_complement_product();
    let delta = opts.delta.or_else(|| {
        max_delta(system, p).map(|best| (best - T::lit(DELTA_SAFETY)).max(best / T::lit(2.0)))
    });
    if let Some(delta) = delta.filter(|&d| certify_point(system, p, d).is_ok()) {
        let degree = required_degree_uncapped(n, delta, epsilon)?;
        let series = taylor_coefficients_geometric(system, p, degree, &opts.work)?;
        let b = log_taylor(&series);
        return Ok(EvaluationResult {
            log_value: log_norm + series.log_a0 + b.iter().copied().sum::<T>(),
            epsilon,
            delta: Some(delta),
            degree,
            tail_bound: crate::interpolation::tail_bound(n, delta, degree),
            certified: true,
            method: Method::Interpolation,
            assumes_geometric_zero_free: true,
        });
    }

    let q = p.iter().fold(T::zero(), |a, &b| a.max(b)).to_f64_lossy();
    let pen0 = system.penalty_at_zero().to_f64_lossy();
    let budget = (epsilon.to_f64_lossy() / 2.0).ln();
    let mut degree = 0;
    let mut log_tail = pen0 + log_composition_tail(n, q, degree);
    while log_tail > budget {
        degree += 1;
        log_tail = pen0 + log_composition_tail(n, q, degree);
        if degree > 100_000 {
            return Err(Error::InvalidInput("geometric series does not reach the requested accuracy".into()));
        }
    }
    let series = taylor_coefficients_geometric(system, p, degree, &opts.work)?;
    let mut acc = LogSumExp::new();
    acc.push(T::zero());
    series.log_normalized.iter().for_each(|&l| acc.push(l));
    Ok(EvaluationResult {
        log_value: log_norm + series.log_a0 + acc.value(),
        epsilon,
        delta: None,
        degree,
        // the partial sum is at least 1, so the relative remainder is below e^{log_tail}
        tail_bound: T::lit(log_tail.exp().ln_1p()),
        certified: true,
        method: Method::DirectSeries,
        assumes_geometric_zero_free: false,
    })
}
