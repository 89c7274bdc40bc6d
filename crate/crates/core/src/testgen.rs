//! Seeded random instance generators shared by the test suites and `smoothcount random`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Dense;
use crate::model::{ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;
use crate::zerofree::max_delta;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of generated systems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemShape {
    pub n: usize,
    pub m: usize,
    /// Nonzeros per column, at most.
    pub max_column_nonzeros: usize,
    /// Coefficients drawn from `[−bound, bound]` (or `[0, bound]`).
    pub coefficient_bound: f64,
    pub nonnegative: bool,
    /// Weights drawn from `[gamma.0, gamma.1]`.
    pub gamma: (f64, f64),
}

impl SystemShape {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m, max_column_nonzeros: 3, coefficient_bound: 1.0, nonnegative: false, gamma: (0.05, 1.0) }
    }
}

/// A random sparse system. Right-hand sides are `ℓᵢ(ξ*)` for a random `ξ*` perturbed by a
/// uniform amount in `[−½, ½]`, so most rows are near some 0-1 point.
pub fn random_system<R: Rng>(rng: &mut R, shape: &SystemShape) -> SparseSystem<f64> {
    let rows: Vec<usize> = (0..shape.m).collect();
    let mut entries = Vec::new();
    for j in 0..shape.n {
        let k = rng.gen_range(0..=shape.max_column_nonzeros.min(shape.m));
        for &i in rows.choose_multiple(rng, k) {
            let a = if shape.nonnegative {
                rng.gen_range(0.0..=shape.coefficient_bound)
            } else {
                rng.gen_range(-shape.coefficient_bound..=shape.coefficient_bound)
            };
            entries.push((i, j, a));
        }
    }
    let star: Vec<bool> = (0..shape.n).map(|_| rng.gen_bool(0.5)).collect();
    let mut beta = vec![0.0; shape.m];
    for &(i, j, a) in &entries {
        if star[j] {
            beta[i] += a;
        }
    }
    for b in &mut beta {
        *b += rng.gen_range(-0.5..=0.5);
    }
    let gamma = (0..shape.m)
        .map(|_| if shape.gamma.0 < shape.gamma.1 { rng.gen_range(shape.gamma.0..=shape.gamma.1) } else { shape.gamma.0 })
        .collect();
    SparseSystem::new(shape.m, shape.n, entries, beta, gamma).expect("generated system is valid")
}

pub fn random_probabilities<R: Rng>(rng: &mut R, n: usize, range: (f64, f64)) -> ProbabilityVector<f64> {
    ProbabilityVector::new((0..n).map(|_| rng.gen_range(range.0..=range.1)).collect()).expect("range inside (0, 1)")
}

/// Rescales the odds `pⱼ/(1 − pⱼ)` by powers of ½ until the point has a zero-free
/// certificate with `δ ≥ min_delta`.
pub fn certify_by_shrinking<T: Scalar>(
    system: &SparseSystem<T>,
    p: &ProbabilityVector<T>,
    min_delta: T,
) -> Option<ProbabilityVector<T>> {
    let mut x = p.odds();
    for _ in 0..60 {
        if max_delta(system, &x).is_some_and(|d| d >= min_delta) {
            return ProbabilityVector::new(x.iter().map(|&v| v / (T::one() + v)).collect()).ok();
        }
        x.iter_mut().for_each(|v| *v = *v / T::lit(2.0));
    }
    None
}

/// A random instance whose probability vector is certified with `δ ≥ min_delta`.
pub fn random_certified<R: Rng>(
    rng: &mut R,
    shape: &SystemShape,
    min_delta: f64,
) -> (SparseSystem<f64>, ProbabilityVector<f64>) {
    loop {
        let s = random_system(rng, shape);
        let p = random_probabilities(rng, shape.n, (0.05, 0.6));
        if let Some(q) = certify_by_shrinking(&s, &p, min_delta) {
            return (s, q);
        }
    }
}

/// Random symmetric matrix with zero diagonal and entries in `[−bound, bound]`.
pub fn random_couplings<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Dense<f64> {
    let mut g = Dense::zeros(n);
    for k in 0..n {
        for j in k + 1..n {
            let v = rng.gen_range(-bound..=bound);
            g[(k, j)] = v;
            g[(j, k)] = v;
        }
    }
    g
}
