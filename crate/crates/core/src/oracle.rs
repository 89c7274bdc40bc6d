//! Exhaustive reference computations over all of `{0,1}ⁿ` (or `{−1,1}^m`). Deliberately
//! naive; used as ground truth by the test suites and the `oracle` CLI commands.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;

pub const DEFAULT_CAP: usize = 24;
pub const PROPOSITION_CAP: usize = 20;
pub const DEFAULT_COUNT_TOLERANCE: f64 = 1e-9;
const CHUNK_BITS: usize = 12;

/// Sum of `term(s)` over `s ∈ [0, 2^bits)`: sequential within fixed chunks of `2¹²`,
/// chunk totals combined pairwise in chunk order.
fn chunked_sum<V, F>(bits: usize, zero: V, term: F) -> V
where
    V: Copy + Send + Sync + std::ops::Add<Output = V>,
    F: Fn(u64) -> V + Sync,
{
    let total: u64 = 1 << bits;
    let chunk: u64 = 1 << CHUNK_BITS.min(bits);
    let parts: Vec<V> = (0..total / chunk)
        .into_par_iter()
        .map(|c| (c * chunk..(c + 1) * chunk).fold(zero, |acc, s| acc + term(s)))
        .collect();
    pairwise(&parts, zero)
}

fn pairwise<V: Copy + std::ops::Add<Output = V>>(xs: &[V], zero: V) -> V {
    match xs.len() {
        0 => zero,
        1 => xs[0],
        n => pairwise(&xs[..n / 2], zero) + pairwise(&xs[n / 2..], zero),
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= 63 {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// `Σᵢ γᵢ(ℓᵢ(ξ) − βᵢ)²` for `ξ` encoded as the bits of `s`.
fn penalty_bits<T: Scalar>(system: &SparseSystem<T>, s: u64) -> T {
    let mut r: Vec<T> = system.beta().iter().map(|&b| -b).collect();
    for (j, col) in system.columns().iter().enumerate() {
        if s >> j & 1 == 1 {
            for &(i, a) in col {
                r[i] = r[i] + a;
            }
        }
    }
    r.iter().zip(system.gamma()).map(|(&v, &g)| g * v * v).sum()
}

/// `P(z) = Σ_ξ z^ξ exp{−penalty(ξ)}` by summing all `2ⁿ` terms.
pub fn brute_force_p<T: Scalar>(system: &SparseSystem<T>, z: &[Complex<T>], cap: usize) -> Result<Complex<T>> {
    let n = system.n_cols();
    check_cap(n, cap)?;
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    let zero = Complex::new(T::zero(), T::zero());
    Ok(chunked_sum(n, zero, |s| {
        let mono = (0..n).filter(|&j| s >> j & 1 == 1).fold(Complex::new(T::one(), T::zero()), |acc, j| acc * z[j]);
        mono * (-penalty_bits(system, s)).exp()
    }))
}

/// `E exp{−penalty(ξ)}` for independent `ξⱼ ~ Bernoulli(pⱼ)`, by summing all `2ⁿ` terms.
pub fn brute_force_expectation<T: Scalar>(system: &SparseSystem<T>, p: &ProbabilityVector<T>, cap: usize) -> Result<T> {
    let n = system.n_cols();
    check_cap(n, cap)?;
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let (on, off): (Vec<T>, Vec<T>) = p.as_slice().iter().map(|&q| (q.ln(), (T::one() - q).ln())).unzip();
    Ok(chunked_sum(n, T::zero(), |s| {
        let log_prob: T = (0..n).map(|j| if s >> j & 1 == 1 { on[j] } else { off[j] }).sum();
        (log_prob - penalty_bits(system, s)).exp()
    }))
}

/// Number of `ξ ∈ {0,1}ⁿ` with `|ℓᵢ(ξ) − βᵢ| ≤ tolerance` for every row.
pub fn count_solutions<T: Scalar>(system: &SparseSystem<T>, tolerance: T, cap: usize) -> Result<u64> {
    let n = system.n_cols();
    check_cap(n, cap)?;
    Ok(chunked_sum(n, 0u64, |s| {
        let mut r: Vec<T> = system.beta().iter().map(|&b| -b).collect();
        for (j, col) in system.columns().iter().enumerate() {
            if s >> j & 1 == 1 {
                for &(i, a) in col {
                    r[i] = r[i] + a;
                }
            }
        }
        u64::from(r.iter().all(|v| v.abs() <= tolerance))
    }))
}

/// Exact penalties of all `2ⁿ` points, indexed by the bit encoding of `ξ`.
pub fn penalties<T: Scalar>(system: &SparseSystem<T>, cap: usize) -> Result<Vec<T>> {
    let n = system.n_cols();
    check_cap(n, cap)?;
    Ok((0..1u64 << n).into_par_iter().map(|s| penalty_bits(system, s)).collect())
}

/// `Σ_{σ ∈ {−1,1}^m} Πⱼ (1 + zⱼ exp{√−1 Σᵢ αᵢⱼ σᵢ})` for a dense `m × n` matrix.
pub fn proposition31_sum<T: Scalar>(rows: &[Vec<T>], z: &[Complex<T>]) -> Result<Complex<T>> {
    let m = rows.len();
    check_cap(m, PROPOSITION_CAP)?;
    let n = z.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: r.len() });
    }
    let one = Complex::new(T::one(), T::zero());
    Ok(chunked_sum(m, Complex::new(T::zero(), T::zero()), |s| {
        (0..n).fold(one, |acc, j| {
            let phase: T = (0..m).map(|i| if s >> i & 1 == 1 { rows[i][j] } else { -rows[i][j] }).sum();
            acc * (one + z[j] * Complex::from_polar(T::one(), phase))
        })
    }))
}
