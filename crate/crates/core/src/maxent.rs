//! Maximum-entropy product distribution with prescribed marginals `Ap = b`, found through
//! the convex dual `Φ(y) = Σⱼ ln(1 + e^{(Aᵀy)ⱼ}) − ⟨b, y⟩`.

use crate::error::{Error, Result};
use crate::evaluator::{smoothed_expectation, EvalOptions, EvaluationResult};
use crate::linalg::{cholesky_solve, Dense};
use crate::model::{ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 500;
const RIDGE: f64 = 1e-12;
const ARMIJO_SLOPE: f64 = 1e-4;
/// Marginals this many tolerances from 0 or 1 at termination are taken as a sign that the
/// polytope has no interior point.
const BOUNDARY_FACTOR: f64 = 1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntSolution<T> {
    pub p: ProbabilityVector<T>,
    pub dual: Vec<T>,
    pub entropy: T,
    /// `‖Ap − b‖∞`.
    pub residual: T,
    pub iterations: usize,
    /// Dual objective after each accepted step, starting at `y = 0`.
    pub objective_trace: Vec<T>,
}

/// `Σ xⱼ ln(1/xⱼ) + (1 − xⱼ) ln(1/(1 − xⱼ))` with `0 · ln(1/0) = 0`.
pub fn entropy<T: Scalar>(x: &[T]) -> Result<T> {
    let h = |t: T| if t > T::zero() { -t * t.ln() } else { T::zero() };
    x.iter().try_fold(T::zero(), |acc, &t| {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::InvalidInput(format!("entropy argument {t} is not in [0, 1]")));
        }
        Ok(acc + h(t) + h(T::one() - t))
    })
}

fn softplus<T: Scalar>(s: T) -> T {
    if s > T::zero() {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn logistic<T: Scalar>(s: T) -> T {
    if s >= T::zero() {
        T::one() / (T::one() + (-s).exp())
    } else {
        let e = s.exp();
        e / (T::one() + e)
    }
}

struct Dual<'a, T> {
    system: &'a SparseSystem<T>,
}

impl<T: Scalar> Dual<'_, T> {
    fn scores(&self, y: &[T]) -> Vec<T> {
        self.system.columns().iter().map(|col| col.iter().map(|&(i, a)| a * y[i]).sum()).collect()
    }

    fn objective(&self, y: &[T]) -> T {
        let s: T = self.scores(y).into_iter().map(softplus).sum();
        s - self.system.beta().iter().zip(y).map(|(&b, &v)| b * v).sum::<T>()
    }

    /// `Ap − b` at the primal point induced by `y`, with that point.
    fn gradient(&self, y: &[T]) -> (Vec<T>, Vec<T>) {
        let p: Vec<T> = self.scores(y).into_iter().map(logistic).collect();
        let mut g: Vec<T> = self.system.beta().iter().map(|&b| -b).collect();
        for (i, j, a) in self.system.entries() {
            g[i] = g[i] + a * p[j];
        }
        (g, p)
    }
}

/// Damped Newton with Armijo backtracking from `y = 0`. Stops once `‖Ap − b‖∞ ≤ tolerance`.
///
/// Fails with [`Error::NoInterior`] when the iteration cap is hit, the line search stalls,
/// or the converged marginals sit against 0 or 1; all three happen when the polytope has
/// no relative interior.
pub fn solve_maxent<T: Scalar>(system: &SparseSystem<T>, tolerance: T) -> Result<MaxEntSolution<T>> {
    if !(tolerance > T::zero()) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let m = system.n_rows();
    let dual = Dual { system };
    let mut y = vec![T::zero(); m];
    let mut phi = dual.objective(&y);
    let mut trace = vec![phi];
    let norm = |g: &[T]| g.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let fail = |residual: T, iterations| Error::NoInterior { residual: residual.to_f64_lossy(), iterations };

    for iteration in 0..=MAX_ITERATIONS {
        let (grad, p) = dual.gradient(&y);
        let residual = norm(&grad);
        if residual <= tolerance {
            let edge = p.iter().fold(T::one(), |a, &v| a.min(v).min(T::one() - v));
            if edge <= T::lit(BOUNDARY_FACTOR) * tolerance {
                return Err(fail(residual, iteration));
            }
            return Ok(MaxEntSolution {
                entropy: entropy(&p)?,
                p: ProbabilityVector::new(p)?,
                dual: y,
                residual,
                iterations: iteration,
                objective_trace: trace,
            });
        }
        if iteration == MAX_ITERATIONS {
            return Err(fail(residual, iteration));
        }

        let mut h = Dense::zeros(m);
        for (j, col) in system.columns().iter().enumerate() {
            let w = p[j] * (T::one() - p[j]);
            for &(i, ai) in col {
                for &(k, ak) in col {
                    h[(i, k)] = h[(i, k)] + w * ai * ak;
                }
            }
        }
        for i in 0..m {
            h[(i, i)] = h[(i, i)] + T::lit(RIDGE);
        }
        let neg: Vec<T> = grad.iter().map(|&g| -g).collect();
        let step = cholesky_solve(&h, &neg).ok_or_else(|| fail(residual, iteration))?;
        let slope: T = grad.iter().zip(&step).map(|(&g, &d)| g * d).sum();

        let mut t = T::one();
        loop {
            let trial: Vec<T> = y.iter().zip(&step).map(|(&a, &d)| a + t * d).collect();
            let value = dual.objective(&trial);
            // near the optimum the decrease drops below the rounding level of Φ; fall back
            // to requiring a smaller gradient
            let flat = (value - phi).abs() <= T::lit(64.0) * T::epsilon() * phi.abs().max(T::one());
            if value <= phi + T::lit(ARMIJO_SLOPE) * t * slope || (flat && norm(&dual.gradient(&trial).0) < residual) {
                y = trial;
                phi = value;
                trace.push(phi);
                break;
            }
            t = t / T::lit(2.0);
            if t < T::lit(1e-20) {
                return Err(fail(residual, iteration));
            }
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// A bound reported both as a value and as its natural log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountBound<T> {
    pub log_value: T,
    pub value: T,
}

impl<T: Scalar> CountBound<T> {
    fn from_log(log_value: T) -> Self {
        Self { log_value, value: log_value.exp() }
    }
}

/// `e^{H(p)}`, an upper bound on the number of 0-1 points of the polytope.
pub fn count_bound<T: Scalar>(solution: &MaxEntSolution<T>) -> CountBound<T> {
    CountBound::from_log(solution.entropy)
}

/// `e^{H(p)} · E · (1 + ε)` with the smoothed expectation `E` at the maximum-entropy point,
/// together with that evaluation.
pub fn smoothed_count_bound<T: Scalar>(
    system: &SparseSystem<T>,
    solution: &MaxEntSolution<T>,
    epsilon: T,
    opts: &EvalOptions<T>,
) -> Result<(CountBound<T>, EvaluationResult<T>)> {
    let e = smoothed_expectation(system, &solution.p, epsilon, opts)?;
    let log = solution.entropy + e.log_value + epsilon.ln_1p();
    Ok((CountBound::from_log(log), e))
}
