//! Derandomized rounding by the method of conditional expectations.

use crate::error::{Error, Result};
use crate::evaluator::{conditional_expectation, smoothed_expectation, EvalOptions, EvaluationResult};
use crate::model::{PartialAssignment, ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundingOptions<T> {
    pub eval: EvalOptions<T>,
    /// Order in which variables are fixed; ascending index when `None`.
    pub order: Option<Vec<usize>>,
}

/// Both branch values at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundingStep<T> {
    pub variable: usize,
    pub log_if_zero: T,
    pub log_if_one: T,
    pub chosen: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingResult<T> {
    pub x0: Vec<bool>,
    /// `exp{−penalty(x0)}`.
    pub achieved: T,
    pub penalty: T,
    /// The smoothed expectation before any fixing.
    pub reference: EvaluationResult<T>,
    pub steps: Vec<RoundingStep<T>>,
}

/// Fixes the variables one at a time to the branch with the larger conditional expectation,
/// each computed to relative error `ε/n²`. When the two estimates are within their
/// combined error bounds the variable is fixed to 0.
///
/// The result satisfies `exp{−penalty(x0)} ≥ (1 − ε) · E exp{−penalty(ξ)}`. Every
/// conditional evaluation is re-certified; a failure aborts with the assignment reached.
pub fn derandomize<T: Scalar>(
    system: &SparseSystem<T>,
    p: &ProbabilityVector<T>,
    epsilon: T,
    opts: &RoundingOptions<T>,
) -> Result<RoundingResult<T>> {
    let n = system.n_cols();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let order: Vec<usize> = match &opts.order {
        Some(o) => {
            let mut seen = vec![false; n];
            if o.len() != n || o.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
                return Err(Error::InvalidInput("order must be a permutation of the variables".into()));
            }
            o.clone()
        }
        None => (0..n).collect(),
    };
    let reference = smoothed_expectation(system, p, epsilon, &opts.eval)?;
    let step_eps = epsilon / T::from_count(n.max(1) * n.max(1));

    let mut current = system.clone();
    let mut probs = p.clone();
    // original index of each column of `current`
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut x0 = vec![false; n];
    let mut fixed = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);

    for (step, &var) in order.iter().enumerate() {
        let pos = remaining.iter().position(|&j| j == var).expect("variable still free");
        let branch = |bit: bool| {
            let a = PartialAssignment::from_pairs([(pos, bit)])?;
            conditional_expectation(&current, &probs, &a, step_eps, &opts.eval)
        };
        let stalled = |e: Error, fixed: &Vec<(usize, bool)>| Error::RoundingStalled {
            step,
            fixed: fixed.clone(),
            source: Box::new(e),
        };
        let (zero, one) = rayon::join(|| branch(false), || branch(true));
        let zero = zero.map_err(|e| stalled(e, &fixed))?;
        let one = one.map_err(|e| stalled(e, &fixed))?;
        let slack = zero.tail_bound + one.tail_bound;
        let chosen = one.log_value > zero.log_value + slack;

        steps.push(RoundingStep { variable: var, log_if_zero: zero.log_value, log_if_one: one.log_value, chosen });
        x0[var] = chosen;
        fixed.push((var, chosen));
        let a = PartialAssignment::from_pairs([(pos, chosen)])?;
        current = current.restrict(&a)?;
        probs = probs.restrict(&a)?;
        remaining.remove(pos);
    }

    let penalty = system.penalty(&x0)?;
    Ok(RoundingResult { x0, achieved: (-penalty).exp(), penalty, reference, steps })
}

/// `e^{−γρ}/(1 − ε)`: bound on the probability that a random draw beats the rounded
/// vector's penalty by at least `ρ`.
pub fn tail_bound<T: Scalar>(gamma_min: T, epsilon: T, rho: T) -> Result<T> {
    if !(gamma_min > T::zero()) || !(rho > T::zero()) {
        return Err(Error::InvalidInput("gamma and rho must be positive".into()));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} is not in (0, 1)")));
    }
    Ok((-gamma_min * rho).exp() / (T::one() - epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolation::WorkOptions;

    fn opts() -> RoundingOptions<f64> {
        RoundingOptions {
            eval: EvalOptions { work: WorkOptions { parallel: false, ..Default::default() }, ..Default::default() },
            order: None,
        }
    }

    #[test]
    fn single_equation_is_solved() {
        let s = SparseSystem::new(1, 1, [(0, 0, 1.0)], vec![1.0], vec![5.0]).unwrap();
        let p = ProbabilityVector::new(vec![0.5]).unwrap();
        // uncertified at p = 1/2, so evaluate with force
        let mut o = opts();
        o.eval.force = true;
        let r = derandomize(&s, &p, 0.1, &o).unwrap();
        assert_eq!(r.x0, vec![true]);
        assert_eq!(r.achieved, 1.0);
    }

    #[test]
    fn zero_matrix_is_constant() {
        let s = SparseSystem::<f64>::new(1, 4, [], vec![0.0], vec![1.0]).unwrap();
        let p = ProbabilityVector::uniform(4, 0.3).unwrap();
        let r = derandomize(&s, &p, 0.1, &opts()).unwrap();
        assert_eq!(r.achieved, 1.0);
        assert!(r.reference.log_value.abs() < 0.05);
        // ties go to zero
        assert_eq!(r.x0, vec![false; 4]);
    }

    #[test]
    fn custom_order_must_be_a_permutation() {
        let s = SparseSystem::<f64>::new(1, 2, [], vec![0.0], vec![1.0]).unwrap();
        let p = ProbabilityVector::uniform(2, 0.3).unwrap();
        let mut o = opts();
        o.order = Some(vec![0, 0]);
        assert!(derandomize(&s, &p, 0.1, &o).is_err());
        o.order = Some(vec![1, 0]);
        assert!(derandomize(&s, &p, 0.1, &o).is_ok());
    }

    #[test]
    fn tail_bound_examples() {
        assert!((tail_bound(0.1f64, 0.5, 100.0).unwrap() - 2.0 * (-10f64).exp()).abs() < 1e-15);
        assert!((tail_bound(0.1f64, 0.5, 100.0).unwrap() - 9.08e-5).abs() < 1e-7);
        assert!((tail_bound(1.0f64, 0.2, 1e-12).unwrap() - 1.25).abs() < 1e-9);
        let once = tail_bound(0.3f64, 0.1, 2.0).unwrap() * 0.9;
        let twice = tail_bound(0.3f64, 0.1, 4.0).unwrap() * 0.9;
        assert!((twice - once * once).abs() < 1e-15);
        assert!(tail_bound(0.1f64, 1.0, 1.0).is_err());
        assert!(tail_bound(0.1f64, 0.5, 0.0).is_err());
    }
}
