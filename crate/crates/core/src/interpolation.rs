//! Taylor coefficients of `g(z) = P(z·x)` at the origin and the truncated log-series
//! estimate of `ln g(1)`.
//!
//! Coefficients are sums of positive terms over the k-subsets of the variables (or the
//! weak compositions of k, for the geometric series). Every term is formed in log space and
//! folded with [`LogSumExp`]. Enumeration is split into fixed-size chunks of colex ranks;
//! chunk results are combined in chunk order, so the parallel and sequential paths produce
//! bit-identical coefficients regardless of the worker count.

use rayon::prelude::*;

use crate::combinatorics::{binomial, colex_next, colex_unrank, for_each_weak_composition, weak_compositions};
use crate::error::{Error, Result};
use crate::lse::LogSumExp;
use crate::model::SparseSystem;
use crate::scalar::Scalar;
use crate::zerofree::certify_point;

/// Default cap on enumerated terms.
pub const DEFAULT_WORK_LIMIT: u128 = 1_000_000_000;
/// Terms per reduction chunk.
pub const CHUNK_SIZE: u128 = 1 << 12;

/// Enumeration controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkOptions {
    pub work_limit: u128,
    /// Run chunks on the current rayon pool.
    pub parallel: bool,
}

impl Default for WorkOptions {
    fn default() -> Self {
        Self { work_limit: DEFAULT_WORK_LIMIT, parallel: true }
    }
}

/// `aₖ / a₀` for `k = 1..=N` together with `ln a₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSeries<T> {
    /// `ln a₀ = −Σᵢ γᵢ βᵢ²`.
    pub log_a0: T,
    /// `aₖ/a₀` for `k = 1..=N`.
    pub normalized: Vec<T>,
    /// `ln(aₖ/a₀)` for `k = 1..=N`.
    pub log_normalized: Vec<T>,
    pub degree: usize,
    /// Number of terms actually enumerated for `k = 0..=N`.
    pub term_counts: Vec<u128>,
}

impl<T: Scalar> CoefficientSeries<T> {
    /// `(c₀, …, c_N)` with `c₀ = 1`.
    pub fn with_constant(&self) -> Vec<T> {
        std::iter::once(T::one()).chain(self.normalized.iter().copied()).collect()
    }
}

/// `n(1 − δ)^{N+1} / ((N + 1)δ)`: the bound on the log-series remainder after degree `N`
/// for a degree-`n` polynomial without zeros in `|z| < 1/(1 − δ)`.
pub fn tail_bound<T: Scalar>(n: usize, delta: T, degree: usize) -> T {
    let next = T::from_count(degree + 1);
    T::from_count(n) * (T::one() - delta).powi(degree as i32 + 1) / (next * delta)
}

fn check_delta_epsilon<T: Scalar>(delta: T, epsilon: T) -> Result<()> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::InvalidInput(format!("delta = {delta} is not in (0, 1)")));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} is not in (0, 1)")));
    }
    Ok(())
}

/// Smallest `N` whose tail bound is at most `ε/2`, without the cap at `n`.
pub fn required_degree_uncapped<T: Scalar>(n: usize, delta: T, epsilon: T) -> Result<usize> {
    check_delta_epsilon(delta, epsilon)?;
    let half = epsilon / T::lit(2.0);
    let mut degree = 0usize;
    while tail_bound(n, delta, degree) > half {
        degree += 1;
        if degree > 1_000_000 {
            return Err(Error::InvalidInput("degree search did not terminate".into()));
        }
    }
    Ok(degree)
}

/// Smallest `N ≤ n` with `n(1 − δ)^{N+1}/((N + 1)δ) ≤ ε/2`, capped at `n`.
pub fn required_degree<T: Scalar>(n: usize, delta: T, epsilon: T) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    Ok(required_degree_uncapped(n, delta, epsilon)?.min(n))
}

fn log_points<T: Scalar>(system: &SparseSystem<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != system.n_cols() {
        return Err(Error::DimensionMismatch { expected: system.n_cols(), got: x.len() });
    }
    if let Some(j) = x.iter().position(|&v| !(v > T::zero() && v.is_finite())) {
        return Err(Error::InvalidInput(format!("x[{j}] = {} must be positive", x[j])));
    }
    Ok(x.iter().map(|v| v.ln()).collect())
}

fn check_work(required: u128, limit: u128) -> Result<()> {
    if required > limit {
        Err(Error::WorkLimit { required, limit })
    } else {
        Ok(())
    }
}

/// `ln` of the term `Π xⱼ^{ξⱼ} · exp{pen(0) − pen(ξ)}` for a multiset of columns
/// (`mult[t]` copies of `cols[t]`).
struct TermKernel<'a, T> {
    system: &'a SparseSystem<T>,
    log_x: &'a [T],
    pen0: T,
    residual: Vec<T>,
}

impl<'a, T: Scalar> TermKernel<'a, T> {
    fn new(system: &'a SparseSystem<T>, log_x: &'a [T]) -> Self {
        Self { system, log_x, pen0: system.penalty_at_zero(), residual: vec![T::zero(); system.n_rows()] }
    }

    fn log_term(&mut self, items: impl Iterator<Item = (usize, usize)> + Clone) -> T {
        for (r, &b) in self.residual.iter_mut().zip(self.system.beta()) {
            *r = -b;
        }
        let mut log_weight = self.pen0;
        for (j, mult) in items {
            let m = T::from_count(mult);
            log_weight = log_weight + m * self.log_x[j];
            for &(i, a) in self.system.column(j) {
                self.residual[i] = self.residual[i] + m * a;
            }
        }
        log_weight - self.system.weighted_square(&self.residual)
    }
}

/// Log-sum of the terms with colex rank in `[start, end)` and the number of terms visited.
fn subset_chunk<T: Scalar>(
    system: &SparseSystem<T>,
    log_x: &[T],
    k: usize,
    start: u128,
    end: u128,
) -> (LogSumExp<T>, u128) {
    let n = system.n_cols();
    let mut kernel = TermKernel::new(system, log_x);
    let mut acc = LogSumExp::new();
    let mut subset = colex_unrank(start, k);
    let mut rank = start;
    while rank < end {
        acc.push(kernel.log_term(subset.iter().map(|&j| (j, 1))));
        rank += 1;
        if rank < end && !colex_next(&mut subset, n) {
            break;
        }
    }
    (acc, rank - start)
}

fn reduce_in_order<T: Scalar>(parts: Vec<(LogSumExp<T>, u128)>) -> (LogSumExp<T>, u128) {
    let mut total = LogSumExp::new();
    let mut count = 0;
    for (p, c) in &parts {
        total.merge(p);
        count += c;
    }
    (total, count)
}

fn assemble<T: Scalar>(system: &SparseSystem<T>, sums: Vec<LogSumExp<T>>, counts: Vec<u128>) -> CoefficientSeries<T> {
    let log_normalized: Vec<T> = sums.iter().map(LogSumExp::value).collect();
    CoefficientSeries {
        log_a0: -system.penalty_at_zero(),
        normalized: log_normalized.iter().map(|l| l.exp()).collect(),
        log_normalized,
        degree: sums.len(),
        term_counts: counts,
    }
}

/// Taylor coefficients of `g(z) = P(z·x)` up to degree `N` by direct enumeration of the
/// 0-1 vectors with `k` ones.
pub fn taylor_coefficients<T: Scalar>(
    system: &SparseSystem<T>,
    x: &[T],
    degree: usize,
    opts: &WorkOptions,
) -> Result<CoefficientSeries<T>> {
    let n = system.n_cols();
    if degree > n {
        return Err(Error::InvalidInput(format!("degree {degree} exceeds n = {n}")));
    }
    let log_x = log_points(system, x)?;
    let budget: Vec<u128> = (0..=degree).map(|k| binomial(n, k)).collect();
    check_work(budget.iter().fold(0u128, |a, &c| a.saturating_add(c)), opts.work_limit)?;

    let mut sums = Vec::with_capacity(degree);
    let mut counts = vec![1];
    for k in 1..=degree {
        let total = budget[k];
        let n_chunks = total.div_ceil(CHUNK_SIZE);
        let chunk = |c: u128| {
            let start = c * CHUNK_SIZE;
            subset_chunk(system, &log_x, k, start, (start + CHUNK_SIZE).min(total))
        };
        let parts: Vec<(LogSumExp<T>, u128)> = if opts.parallel && n_chunks > 1 {
            (0..n_chunks as u64).into_par_iter().map(|c| chunk(c as u128)).collect()
        } else {
            (0..n_chunks).map(chunk).collect()
        };
        let (sum, count) = reduce_in_order(parts);
        sums.push(sum);
        counts.push(count);
    }
    Ok(assemble(system, sums, counts))
}

/// Taylor coefficients of `g̃(z) = P̃(z·x)` where `P̃` sums over all nonnegative integer
/// vectors; the degree-`k` coefficient runs over the weak compositions of `k`.
pub fn taylor_coefficients_geometric<T: Scalar>(
    system: &SparseSystem<T>,
    x: &[T],
    degree: usize,
    opts: &WorkOptions,
) -> Result<CoefficientSeries<T>> {
    let n = system.n_cols();
    let log_x = log_points(system, x)?;
    if let Some(j) = x.iter().position(|&v| v >= T::one()) {
        return Err(Error::InvalidInput(format!("x[{j}] = {} must be below 1", x[j])));
    }
    let budget: Vec<u128> = (0..=degree).map(|k| weak_compositions(k, n)).collect();
    check_work(budget.iter().fold(0u128, |a, &c| a.saturating_add(c)), opts.work_limit)?;

    let mut sums = Vec::with_capacity(degree);
    let mut counts = vec![1];
    for k in 1..=degree {
        if n == 0 {
            sums.push(LogSumExp::new());
            counts.push(0);
            continue;
        }
        // chunk c fixes ξ₀ = c and enumerates the rest
        let chunk = |first: usize| {
            let mut kernel = TermKernel::new(system, &log_x);
            let mut acc = LogSumExp::new();
            let mut visited = 0u128;
            let mut rest = vec![0usize; n - 1];
            for_each_weak_composition(k - first, &mut rest, &mut |parts| {
                let items = std::iter::once((0, first))
                    .chain(parts.iter().enumerate().map(|(t, &m)| (t + 1, m)))
                    .filter(|&(_, m)| m > 0);
                acc.push(kernel.log_term(items));
                visited += 1;
            });
            (acc, visited)
        };
        let parts: Vec<(LogSumExp<T>, u128)> = if opts.parallel && k > 0 {
            (0..=k).into_par_iter().map(chunk).collect()
        } else {
            (0..=k).map(chunk).collect()
        };
        let (sum, count) = reduce_in_order(parts);
        sums.push(sum);
        counts.push(count);
    }
    Ok(assemble(system, sums, counts))
}

/// Coefficients `b₁..b_N` of `ln g(z) − ln g(0)` from `cₖ = aₖ/a₀` via
/// `k·cₖ = Σ_{j=1..k} j·bⱼ·c_{k−j}`.
pub fn log_taylor<T: Scalar>(series: &CoefficientSeries<T>) -> Vec<T> {
    log_series(&series.with_constant())
}

/// [`log_taylor`] on a raw coefficient vector with `c₀ = 1`.
pub fn log_series<T: Scalar>(c: &[T]) -> Vec<T> {
    let degree = c.len().saturating_sub(1);
    let mut b = vec![T::zero(); degree + 1];
    for k in 1..=degree {
        let mut acc = T::from_count(k) * c[k];
        for j in 1..k {
            acc = acc - T::from_count(j) * b[j] * c[k - j];
        }
        b[k] = acc / T::from_count(k);
    }
    b.remove(0);
    b
}

/// Inverse of [`log_series`]: `(c₀ = 1, c₁, …)` of `exp(Σ bₖ zᵏ)`.
pub fn exp_series<T: Scalar>(b: &[T]) -> Vec<T> {
    let degree = b.len();
    let mut c = vec![T::zero(); degree + 1];
    c[0] = T::one();
    for k in 1..=degree {
        let mut acc = T::zero();
        for j in 1..=k {
            acc = acc + T::from_count(j) * b[j - 1] * c[k - j];
        }
        c[k] = acc / T::from_count(k);
    }
    c
}

/// Approximation of `ln g(1) = ln P(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct G1Value<T> {
    pub log_value: T,
    pub degree: usize,
    /// A-priori bound on `|log_value − ln P(x)|` (0 when evaluated exactly).
    pub tail_bound: T,
    pub certified: bool,
    /// The full polynomial was summed because the required degree reached `n`.
    pub exact: bool,
    pub term_counts: Vec<u128>,
}

/// `ln P(x)` to within `ε/2` in log space, using the zero-free polydisc at `δ`.
///
/// When the tail criterion asks for degree `n` or more the polynomial is summed in full,
/// which is exact. Without a certificate at `δ` this fails with
/// [`Error::NotCertified`] unless `force` is set, in which case the truncated series is
/// returned with `certified = false`.
pub fn evaluate_g1<T: Scalar>(
    system: &SparseSystem<T>,
    x: &[T],
    delta: T,
    epsilon: T,
    force: bool,
    opts: &WorkOptions,
) -> Result<G1Value<T>> {
    check_delta_epsilon(delta, epsilon)?;
    let n = system.n_cols();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if n == 0 {
        return Ok(G1Value {
            log_value: -system.penalty_at_zero(),
            degree: 0,
            tail_bound: T::zero(),
            certified: true,
            exact: true,
            term_counts: vec![1],
        });
    }
    let certified = match certify_point(system, x, delta) {
        Ok(_) => true,
        Err(report) if !force => return Err(Error::NotCertified(report)),
        Err(_) => false,
    };
    let degree = required_degree(n, delta, epsilon)?;
    if degree >= n {
        let series = taylor_coefficients(system, x, n, opts)?;
        let mut acc = LogSumExp::new();
        acc.push(T::zero());
        series.log_normalized.iter().for_each(|&l| acc.push(l));
        return Ok(G1Value {
            log_value: series.log_a0 + acc.value(),
            degree: n,
            tail_bound: T::zero(),
            certified,
            exact: true,
            term_counts: series.term_counts,
        });
    }
    let series = taylor_coefficients(system, x, degree, opts)?;
    let b = log_taylor(&series);
    Ok(G1Value {
        log_value: series.log_a0 + b.iter().copied().sum::<T>(),
        degree,
        tail_bound: tail_bound(n, delta, degree),
        certified,
        exact: false,
        term_counts: series.term_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq() -> WorkOptions {
        WorkOptions { parallel: false, ..Default::default() }
    }

    #[test]
    fn required_degree_examples() {
        assert_eq!(required_degree(10, 0.5, 0.1).unwrap(), 6);
        // tails on either side of the answer
        assert!(tail_bound(10, 0.5, 5) > 0.05);
        assert!(tail_bound(10, 0.5, 6) <= 0.05);
        assert!(required_degree(1, 0.9, 0.5).unwrap() <= 1);
        assert_eq!(required_degree(3, 0.01, 0.01).unwrap(), 3);
        assert!(required_degree(3, 0.0, 0.1).is_err());
        assert!(required_degree(3, 0.5, 1.0).is_err());
        assert!(required_degree(0, 0.5, 0.5).is_err());
    }

    #[test]
    fn halving_epsilon_adds_few_terms() {
        for &delta in &[0.1f64, 0.3, 0.5, 0.8] {
            let step = (2f64.ln() / (1.0 / (1.0 - delta)).ln()).ceil() as usize;
            for &eps in &[0.5, 0.1, 1e-2, 1e-4] {
                let a = required_degree_uncapped(50, delta, eps).unwrap();
                let b = required_degree_uncapped(50, delta, eps / 2.0).unwrap();
                assert!(b >= a && b - a <= step, "delta {delta} eps {eps}: {a} -> {b}");
            }
        }
    }

    #[test]
    fn two_term_polynomial() {
        let s = SparseSystem::new(1, 1, [(0, 0, 1.0)], vec![1.0], vec![1.0]).unwrap();
        let t = 0.3;
        let series = taylor_coefficients(&s, &[t], 1, &seq()).unwrap();
        assert_eq!(series.log_a0, -1.0);
        assert!((series.normalized[0] - t * std::f64::consts::E).abs() < 1e-14);
        assert_eq!(series.term_counts, vec![1, 1]);
    }

    #[test]
    fn zero_matrix_gives_binomials() {
        let s = SparseSystem::<f64>::new(1, 7, [], vec![0.0], vec![1.0]).unwrap();
        let series = taylor_coefficients(&s, &[1.0; 7], 7, &seq()).unwrap();
        for (k, c) in series.normalized.iter().enumerate() {
            assert!((c - binomial(7, k + 1) as f64).abs() < 1e-9);
        }
        assert!(taylor_coefficients(&s, &[1.0; 7], 8, &seq()).is_err());
    }

    #[test]
    fn geometric_single_variable_closed_form() {
        let s = SparseSystem::new(1, 1, [(0, 0, 1.0)], vec![1.0], vec![1.0]).unwrap();
        let series = taylor_coefficients_geometric(&s, &[0.5], 8, &seq()).unwrap();
        assert_eq!(series.log_a0, -1.0);
        for (idx, c) in series.normalized.iter().enumerate() {
            let k = (idx + 1) as f64;
            let expected = 0.5f64.powf(k) * (1.0 - (k - 1.0).powi(2)).exp();
            assert!((c - expected).abs() < 1e-14 * expected.max(1.0), "k={k}");
        }
        assert!((series.normalized[0] - std::f64::consts::E / 2.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_zero_matrix_is_product_of_geometric_series() {
        let x = [0.3, 0.5, 0.2];
        let s = SparseSystem::<f64>::new(1, 3, [], vec![0.0], vec![1.0]).unwrap();
        let series = taylor_coefficients_geometric(&s, &x, 6, &seq()).unwrap();
        // coefficients of Π (1 − xⱼ z)⁻¹ by repeated convolution
        let mut poly = vec![1.0; 1];
        poly.resize(7, 0.0);
        for &xj in &x {
            let mut next = vec![0.0; 7];
            for (k, slot) in next.iter_mut().enumerate() {
                *slot = (0..=k).map(|t| poly[k - t] * xj.powi(t as i32)).sum();
            }
            poly = next;
        }
        for k in 1..=6 {
            assert!((series.normalized[k - 1] - poly[k]).abs() < 1e-13);
            assert_eq!(series.term_counts[k], weak_compositions(k, 3));
        }
        assert!(taylor_coefficients_geometric(&s, &[0.5, 1.0, 0.1], 2, &seq()).is_err());
    }

    #[test]
    fn log_series_examples() {
        let b = log_series(&[1.0f64, 1.0, 0.5]);
        assert!((b[0] - 1.0).abs() < 1e-15 && b[1].abs() < 1e-15);
        let x: f64 = 0.4;
        let b = log_series(&[1.0, x, 0.0, 0.0, 0.0]);
        for (idx, bk) in b.iter().enumerate() {
            let k = idx as i32 + 1;
            let expected = (-1f64).powi(k + 1) * x.powi(k) / k as f64;
            assert!((bk - expected).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn log_exp_round_trip(c in proptest::collection::vec(-1.0f64..1.0, 1..12)) {
            let mut full = vec![1.0];
            full.extend(c);
            let back = exp_series(&log_series(&full));
            for (a, b) in back.iter().zip(&full) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn two_term_evaluation_is_exact() {
        let s = SparseSystem::new(1, 1, [(0, 0, 1.0)], vec![1.0], vec![1.0]).unwrap();
        let x = 0.05;
        let r = evaluate_g1(&s, &[x], 0.3, 0.1, false, &seq()).unwrap();
        assert!(r.exact && r.certified);
        assert!((r.log_value - ((-1f64).exp() + x).ln()).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_evaluation() {
        let s = SparseSystem::<f64>::new(1, 8, [], vec![0.0], vec![1.0]).unwrap();
        let x = [0.1; 8];
        let r = evaluate_g1(&s, &x, 0.85, 1e-3, false, &seq()).unwrap();
        assert!(!r.exact);
        assert!(r.tail_bound <= 5e-4);
        assert!((r.log_value - 8.0 * 1.1f64.ln()).abs() <= r.tail_bound);
    }

    #[test]
    fn uncertified_requires_force() {
        let s = SparseSystem::new(1, 1, [(0, 0, 1.0)], vec![0.0], vec![0.25]).unwrap();
        let err = evaluate_g1(&s, &[0.9], 0.1, 0.1, false, &seq()).unwrap_err();
        assert!(matches!(err, Error::NotCertified(_)));
        let forced = evaluate_g1(&s, &[0.9], 0.1, 0.1, true, &seq()).unwrap();
        assert!(!forced.certified);
    }

    #[test]
    fn work_limit_is_enforced() {
        let s = SparseSystem::<f64>::new(1, 30, [], vec![0.0], vec![1.0]).unwrap();
        let opts = WorkOptions { work_limit: 1000, parallel: false };
        let err = taylor_coefficients(&s, &[0.1; 30], 5, &opts).unwrap_err();
        assert!(matches!(err, Error::WorkLimit { .. }));
    }

    #[test]
    fn f32_instantiation() {
        let s = SparseSystem::<f32>::new(1, 1, [(0, 0, 1.0)], vec![1.0], vec![1.0]).unwrap();
        let r = evaluate_g1(&s, &[0.05f32], 0.3, 0.1, false, &seq()).unwrap();
        assert!((r.log_value - ((-1f32).exp() + 0.05).ln()).abs() < 1e-5);
    }
}
