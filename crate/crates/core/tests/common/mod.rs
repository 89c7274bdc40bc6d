#![allow(dead_code)]

use rand::Rng;
use smoothcount::model::{ProbabilityVector, SparseSystem};
use smoothcount::oracle::{penalties, DEFAULT_CAP};
use smoothcount::testgen::{certify_by_shrinking, SystemShape, TestRng};

/// `|a − b| / |b|`.
pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Exact `P(ξ solves the system)` for integer-valued systems.
pub fn solution_probability(system: &SparseSystem<f64>, p: &ProbabilityVector<f64>) -> f64 {
    let table = penalties(system, DEFAULT_CAP).unwrap();
    let n = system.n_cols();
    table
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() < 1e-9)
        .map(|(s, _)| {
            (0..n).map(|j| if s >> j & 1 == 1 { p.as_slice()[j] } else { 1.0 - p.as_slice()[j] }).product::<f64>()
        })
        .sum()
}

/// Random system with 0/1 coefficients and `β = Aξ*` for a random 0-1 point `ξ*`.
pub fn random_integer_system(rng: &mut TestRng, n: usize, m: usize, per_column: usize, gamma: f64) -> SparseSystem<f64> {
    let mut entries = Vec::new();
    for j in 0..n {
        let mut rows: Vec<usize> = (0..m).collect();
        for t in 0..per_column.min(m) {
            let pick = rng.gen_range(t..m);
            rows.swap(t, pick);
            entries.push((rows[t], j, 1.0));
        }
    }
    let star: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
    let mut beta = vec![0.0; m];
    for &(i, j, a) in &entries {
        if star[j] {
            beta[i] += a;
        }
    }
    SparseSystem::new(m, n, entries, beta, vec![gamma; m]).unwrap()
}

/// A random instance within the acceptance-suite limits (`|αᵢⱼ| ≤ 1`, at most 3 nonzeros
/// per column) certified with a random `δ ∈ [0.05, 0.9]`.
pub fn certified_instance(rng: &mut TestRng, n: usize, m: usize) -> (SparseSystem<f64>, ProbabilityVector<f64>, f64) {
    loop {
        let shape = SystemShape::new(n, m);
        let s = smoothcount::testgen::random_system(rng, &shape);
        let p = smoothcount::testgen::random_probabilities(rng, n, (0.05, 0.6));
        let min_delta = rng.gen_range(0.05..0.9);
        if let Some(q) = certify_by_shrinking(&s, &p, min_delta) {
            return (s, q, min_delta);
        }
    }
}
