//! Translation between smoothed counting and the Ising partition function
//! `Σ_η exp{Σ_{k<j} g_{kj} η_k η_j + Σⱼ fⱼ ηⱼ}` over spins `η ∈ {−1, 1}ⁿ`.
//!
//! Substituting `ξⱼ = (ηⱼ + 1)/2` gives `g_{kj} = −½ Σᵢ γᵢ αᵢₖ αᵢⱼ` and
//! `fⱼ = ½ ln(pⱼ/(1 − pⱼ)) − Σᵢ γᵢ αᵢⱼ cᵢ` with `cᵢ = −βᵢ + ½ Σⱼ αᵢⱼ`; the expectation equals
//! the partition function times `exp{log_constant}`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Dense};
use crate::lse::LogSumExp;
use crate::model::{ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;

/// Default size cap for the brute-force spin sum.
pub const DEFAULT_SPIN_CAP: usize = 24;
/// Largest allowed off-diagonal residual of the reverse factorization.
pub const FACTORIZATION_TOL: f64 = 1e-8;
/// Eigenvalue gaps within this of zero are clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Interaction matrix `G` (symmetric, zero diagonal) and external field `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel<T> {
    g: Dense<T>,
    f: Vec<T>,
}

impl<T: Scalar> IsingModel<T> {
    pub fn new(g: Dense<T>, f: Vec<T>) -> Result<Self> {
        let n = g.n();
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.len() });
        }
        for k in 0..n {
            if g[(k, k)] != T::zero() {
                return Err(Error::InvalidInput(format!("diagonal entry g[{k}][{k}] is not zero")));
            }
            for j in k + 1..n {
                if g[(k, j)] != g[(j, k)] {
                    return Err(Error::InvalidInput(format!("g is not symmetric at ({k}, {j})")));
                }
            }
        }
        Ok(Self { g, f })
    }

    /// Builds from `(k, j, value)` triples; each sets both `g_{kj}` and `g_{jk}`.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, T)>, f: Vec<T>) -> Result<Self> {
        let mut g = Dense::zeros(n);
        let mut set = vec![false; n * n];
        for (k, j, v) in entries {
            if k >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: k.max(j), size: n });
            }
            if k == j {
                if v != T::zero() {
                    return Err(Error::InvalidInput(format!("diagonal entry ({k}, {k}) must be zero")));
                }
                continue;
            }
            let (a, b) = (k.min(j), k.max(j));
            if set[a * n + b] && g[(a, b)] != v {
                return Err(Error::InvalidInput(format!("conflicting values for ({a}, {b})")));
            }
            set[a * n + b] = true;
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
        Self::new(g, f)
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn g(&self) -> &Dense<T> {
        &self.g
    }

    pub fn f(&self) -> &[T] {
        &self.f
    }

    /// Upper-triangle nonzero couplings `(k, j, g_{kj})`, `k < j`.
    pub fn couplings(&self) -> Vec<(usize, usize, T)> {
        let n = self.n();
        (0..n)
            .flat_map(|k| (k + 1..n).map(move |j| (k, j)))
            .map(|(k, j)| (k, j, self.g[(k, j)]))
            .filter(|&(_, _, v)| v != T::zero())
            .collect()
    }

    /// `Σ_{k<j} g_{kj} η_k η_j + Σⱼ fⱼ ηⱼ` for spins encoded as bits (1 ↦ +1).
    pub fn energy(&self, spins: u64) -> T {
        let n = self.n();
        let sign = |j: usize| if spins >> j & 1 == 1 { T::one() } else { -T::one() };
        let mut e = T::zero();
        for k in 0..n {
            let sk = sign(k);
            e = e + self.f[k] * sk;
            let row = self.g.row(k);
            for (j, &gkj) in row.iter().enumerate().skip(k + 1) {
                if gkj != T::zero() {
                    e = e + gkj * sk * sign(j);
                }
            }
        }
        e
    }
}

fn row_lists<T: Scalar>(system: &SparseSystem<T>) -> Vec<Vec<(usize, T)>> {
    let mut rows = vec![Vec::new(); system.n_rows()];
    for (i, j, a) in system.entries() {
        rows[i].push((j, a));
    }
    rows
}

/// Dense `g_{kj} = −½ Σᵢ γᵢ αᵢₖ αᵢⱼ` for `k ≠ j`, zero diagonal.
pub fn couplings<T: Scalar>(system: &SparseSystem<T>) -> Dense<T> {
    let n = system.n_cols();
    let mut g = Dense::zeros(n);
    let half = T::lit(0.5);
    for (row, &gamma) in row_lists(system).iter().zip(system.gamma()) {
        for (t, &(k, ak)) in row.iter().enumerate() {
            for &(j, aj) in &row[t + 1..] {
                let v = -half * gamma * ak * aj;
                g[(k, j)] = g[(k, j)] + v;
                g[(j, k)] = g[(j, k)] + v;
            }
        }
    }
    g
}

/// `Σ_{k≠j} |g_{jk}|` for every column `j` of the induced couplings.
pub fn coupling_column_sums<T: Scalar>(system: &SparseSystem<T>) -> Vec<T> {
    let g = couplings(system);
    (0..g.n()).map(|j| g.row(j).iter().map(|v| v.abs()).sum()).collect()
}

/// `cᵢ = −βᵢ + ½ Σⱼ αᵢⱼ`.
fn half_centers<T: Scalar>(system: &SparseSystem<T>) -> Vec<T> {
    let mut c: Vec<T> = system.beta().iter().map(|&b| -b).collect();
    for (i, _, a) in system.entries() {
        c[i] = c[i] + a / T::lit(2.0);
    }
    c
}

/// The Ising model equivalent to the smoothed expectation and the log of the constant
/// factor relating the two.
pub fn to_ising<T: Scalar>(system: &SparseSystem<T>, p: &ProbabilityVector<T>) -> Result<(IsingModel<T>, T)> {
    let n = system.n_cols();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let c = half_centers(system);
    let gamma = system.gamma();
    let half = T::lit(0.5);
    let f: Vec<T> = p
        .as_slice()
        .iter()
        .zip(system.columns())
        .map(|(&pj, col)| {
            let shift: T = col.iter().map(|&(i, a)| gamma[i] * a * c[i]).sum();
            half * (pj / (T::one() - pj)).ln() - shift
        })
        .collect();
    let log_prob: T = p.as_slice().iter().map(|&pj| (pj * (T::one() - pj)).ln()).sum();
    let center: T = c.iter().zip(gamma).map(|(&ci, &g)| g * ci * ci).sum();
    let diag: T = system.entries().map(|(i, _, a)| gamma[i] * a * a).sum();
    let log_constant = half * log_prob - center - diag / T::lit(4.0);
    Ok((IsingModel::new(couplings(system), f)?, log_constant))
}

/// An exact partition-function value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionValue<T> {
    pub log_value: T,
    pub value: T,
}

/// Exact sum over all `2ⁿ` spin configurations, accumulated in log space over fixed chunks
/// combined in order.
pub fn partition_bruteforce<T: Scalar>(model: &IsingModel<T>, cap: usize) -> Result<PartitionValue<T>> {
    let n = model.n();
    if n > cap || n >= 63 {
        return Err(Error::CapExceeded { n, cap });
    }
    let total: u64 = 1 << n;
    let chunk: u64 = 1 << 12;
    let parts: Vec<LogSumExp<T>> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = LogSumExp::new();
            for s in c * chunk..((c + 1) * chunk).min(total) {
                acc.push(model.energy(s));
            }
            acc
        })
        .collect();
    let mut acc = LogSumExp::new();
    parts.iter().for_each(|p| acc.merge(p));
    let log_value = acc.value();
    Ok(PartitionValue { log_value, value: log_value.exp() })
}

/// Per-column sums `Σ_{j≠k} |g_{jk}|` against the bound `1 − δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport<T> {
    pub sums: Vec<T>,
    pub bound: T,
    pub holds: bool,
}

pub fn lipschitz_condition<T: Scalar>(model: &IsingModel<T>, delta: T) -> LipschitzReport<T> {
    let bound = T::one() - delta;
    let sums: Vec<T> = (0..model.n()).map(|k| model.g.row(k).iter().map(|v| v.abs()).sum()).collect();
    let holds = sums.iter().all(|&s| s <= bound);
    LipschitzReport { sums, bound, holds }
}

/// Output of the reverse construction.
#[derive(Clone, Debug)]
pub struct ReverseIsing<T> {
    /// `n × n` system with `γᵢ = 1`, `βᵢ = 0` and `−½(AᵀA)_{kj} = g_{kj}` for `k ≠ j`.
    pub system: SparseSystem<T>,
    /// Largest eigenvalue of `G`.
    pub lambda: T,
    /// Largest off-diagonal reconstruction error.
    pub residual: T,
}

/// Writes an interaction matrix in the smoothed-counting form: with `λ` the top eigenvalue
/// of `G`, `2(λI − G)` is positive semidefinite and factors as `AᵀA`.
///
/// Rows of `A` are `√(2(λ − wₖ)) vₖᵀ` over the eigenpairs `(wₖ, vₖ)` of `G`, ordered by
/// decreasing `λ − wₖ`, each with its first significant entry positive.
pub fn from_ising<T: Scalar>(g: &Dense<T>) -> Result<ReverseIsing<T>> {
    let n = g.n();
    for k in 0..n {
        if g[(k, k)] != T::zero() {
            return Err(Error::InvalidInput(format!("diagonal entry g[{k}][{k}] is not zero")));
        }
        for j in k + 1..n {
            if g[(k, j)] != g[(j, k)] {
                return Err(Error::InvalidInput(format!("g is not symmetric at ({k}, {j})")));
            }
        }
    }
    let eig = jacobi_eigen(g);
    let lambda = eig.values.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let lambda = if n == 0 { T::zero() } else { lambda };
    let clamp = T::lit(EIGEN_CLAMP);
    let mut order: Vec<usize> = (0..n).collect();
    let gap = |k: usize| {
        let d = lambda - eig.values[k];
        if d <= clamp { T::zero() } else { d }
    };
    order.sort_by(|&a, &b| gap(b).partial_cmp(&gap(a)).unwrap_or(std::cmp::Ordering::Equal));

    let mut rows = Vec::with_capacity(n);
    for &k in &order {
        let scale = (T::lit(2.0) * gap(k)).sqrt();
        let mut r: Vec<T> = (0..n).map(|i| scale * eig.vectors[(i, k)]).collect();
        if let Some(first) = r.iter().find(|v| v.abs() > clamp) {
            if *first < T::zero() {
                r.iter_mut().for_each(|v| *v = -*v);
            }
        }
        rows.push(r);
    }

    let mut residual = T::zero();
    for k in 0..n {
        for j in 0..n {
            if k != j {
                let dot: T = rows.iter().map(|r| r[k] * r[j]).sum();
                residual = residual.max((-dot / T::lit(2.0) - g[(k, j)]).abs());
            }
        }
    }
    if residual > T::lit(FACTORIZATION_TOL) {
        return Err(Error::Factorization { residual: residual.to_f64_lossy() });
    }
    let system = SparseSystem::from_dense(&rows, n, vec![T::zero(); n], vec![T::one(); n])?;
    Ok(ReverseIsing { system, lambda, residual })
}

/// Radii with a common `λⱼ = L` chosen so that every row of the zero-free condition holds
/// with equality at the heaviest row: `L/(1 − L) = 1/(2√c · maxᵢ √γᵢ Σⱼ|αᵢⱼ|)`.
pub fn uniform_lambda_radii<T: Scalar>(system: &SparseSystem<T>) -> Vec<T> {
    let c = T::from_count(system.column_max_nonzeros().max(1));
    let mut row_mass = vec![T::zero(); system.n_rows()];
    for (i, _, a) in system.entries() {
        row_mass[i] = row_mass[i] + a.abs();
    }
    let heaviest = row_mass
        .iter()
        .zip(system.gamma())
        .map(|(&m, &g)| g.sqrt() * m)
        .fold(T::zero(), |a, b| a.max(b));
    let l = if heaviest > T::zero() {
        let ratio = T::one() / (T::lit(2.0) * c.sqrt() * heaviest);
        ratio / (T::one() + ratio)
    } else {
        T::lit(0.5)
    };
    let (beta, gamma) = (system.beta(), system.gamma());
    system
        .columns()
        .iter()
        .map(|col| {
            let shift: T = col.iter().map(|&(i, a)| gamma[i] * beta[i] * a).sum();
            l * (-shift).exp()
        })
        .collect()
}

/// Field thresholds: the spin sum has no zeros when `Re fⱼ` is below
/// `½ ln ρⱼ − Σᵢ γᵢ αᵢⱼ cᵢ` for every `j`, where `ρ` is a certified zero-free polydisc of
/// the system.
pub fn field_thresholds<T: Scalar>(system: &SparseSystem<T>, rho: &[T]) -> Vec<T> {
    let c = half_centers(system);
    let gamma = system.gamma();
    system
        .columns()
        .iter()
        .zip(rho)
        .map(|(col, &r)| {
            let shift: T = col.iter().map(|&(i, a)| gamma[i] * a * c[i]).sum();
            T::lit(0.5) * r.ln() - shift
        })
        .collect()
}
