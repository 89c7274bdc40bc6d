//! Hypergraph front-end: the exact-cover system `Σ_{s ∋ v} ξₛ = 1` for perfect matchings and
//! its low-density variant for matchings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;
use crate::zerofree::{max_gamma_matching, max_gamma_uniform, Degree};

/// Default `δ` for automatic weight selection.
pub const DEFAULT_DELTA: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    #[serde(rename = "vertices")]
    n_vertices: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n_vertices: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let h = Self { n_vertices, edges };
        h.validate()?;
        Ok(h)
    }

    /// Checks the invariants of a deserialized value.
    pub fn validate(&self) -> Result<()> {
        for (s, edge) in self.edges.iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::InvalidInput(format!("edge {s} is empty")));
            }
            if let Some(&v) = edge.iter().find(|&&v| v >= self.n_vertices) {
                return Err(Error::InvalidInput(format!("edge {s} has vertex {v} out of range")));
            }
            let mut sorted = edge.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("edge {s} repeats a vertex")));
            }
        }
        Ok(())
    }

    /// The complete graph `Kₙ` as a 2-uniform hypergraph, edges in lexicographic order.
    pub fn complete_graph(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| vec![u, v])).collect();
        Self { n_vertices: n, edges }
    }

    /// The Fano plane: 7 points, 7 lines of 3 points, every point on 3 lines.
    pub fn fano() -> Self {
        let lines = [[0, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]];
        Self { n_vertices: 7, edges: lines.iter().map(|l| l.to_vec()).collect() }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_vertices];
        for edge in &self.edges {
            for &v in edge {
                d[v] += 1;
            }
        }
        d
    }

    /// Vertex-edge incidence system: one row per vertex, one column per edge (input order),
    /// `αᵥₛ = 1` iff `v ∈ s`, `βᵥ = 1`, `γᵥ = γ`.
    pub fn exact_cover_system<T: Scalar>(&self, gamma: T) -> Result<SparseSystem<T>> {
        let columns = self
            .edges
            .iter()
            .map(|e| {
                let mut col: Vec<(usize, T)> = e.iter().map(|&v| (v, T::one())).collect();
                col.sort_by_key(|&(v, _)| v);
                col
            })
            .collect();
        SparseSystem::from_columns(self.n_vertices, columns, vec![T::one(); self.n_vertices], vec![gamma; self.n_vertices])
    }
}

/// Why a hypergraph is not uniform and regular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegularityViolation {
    NoEdges,
    NonUniform { edge: usize, size: usize, expected: usize },
    /// `vertices` lists every vertex whose degree differs from `expected`.
    NonRegular { vertex: usize, degree: usize, expected: usize, vertices: Vec<usize> },
}

impl fmt::Display for RegularityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoEdges => f.write_str("hypergraph has no edges"),
            Self::NonUniform { edge, size, expected } => {
                write!(f, "edge {edge} has size {size}, expected {expected}")
            }
            Self::NonRegular { vertex, degree, expected, vertices } => {
                write!(f, "vertex {vertex} has degree {degree}, expected {expected} (irregular vertices: {vertices:?})")
            }
        }
    }
}

/// `(k, Δ)` when every edge has `k` vertices and every vertex lies in `Δ` edges.
pub fn validate_uniform_regular(h: &Hypergraph) -> std::result::Result<(usize, usize), RegularityViolation> {
    let k = h.edges.first().ok_or(RegularityViolation::NoEdges)?.len();
    if let Some((edge, e)) = h.edges.iter().enumerate().find(|(_, e)| e.len() != k) {
        return Err(RegularityViolation::NonUniform { edge, size: e.len(), expected: k });
    }
    let degrees = h.degrees();
    let expected = degrees.first().copied().unwrap_or(0);
    let irregular: Vec<usize> = (0..degrees.len()).filter(|&v| degrees[v] != expected).collect();
    match irregular.first() {
        Some(&vertex) => Err(RegularityViolation::NonRegular { vertex, degree: degrees[vertex], expected, vertices: irregular }),
        None => Ok((k, expected)),
    }
}

/// Weight selection for the builders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaChoice<T> {
    Fixed(T),
    /// Largest weight certified by the regular-hypergraph conditions at `δ`.
    Auto { delta: T },
}

impl<T: Scalar> GammaChoice<T> {
    pub fn auto() -> Self {
        GammaChoice::Auto { delta: T::lit(DEFAULT_DELTA) }
    }
}

/// A hypergraph turned into a smoothed-counting instance.
#[derive(Clone, Debug)]
pub struct HypergraphInstance<T> {
    pub system: SparseSystem<T>,
    pub p: ProbabilityVector<T>,
    pub gamma: T,
    pub k: usize,
    pub degree: usize,
    /// `δ` used for the automatic weight, if any.
    pub delta: Option<T>,
    /// Common evaluation point `pₛ/(1 − pₛ)`.
    pub evaluation_point: T,
    /// For matchings: the target `(1/k) ln(1/ω)` and whether it is certified.
    pub target_gamma: Option<(T, bool)>,
}

fn regular(h: &Hypergraph) -> Result<(usize, usize)> {
    let (k, d) = validate_uniform_regular(h).map_err(|v| Error::InvalidInput(v.to_string()))?;
    if d < 3 {
        return Err(Error::InvalidInput(format!("hypergraph is {d}-regular; at least 3 required")));
    }
    Ok((k, d))
}

/// The exact-cover system with `pₛ = 1/Δ` (expected selection `|V|/k` edges).
pub fn perfect_matching_instance<T: Scalar>(h: &Hypergraph, gamma: GammaChoice<T>) -> Result<HypergraphInstance<T>> {
    let (k, d) = regular(h)?;
    let (gamma, delta) = match gamma {
        GammaChoice::Fixed(g) => (g, None),
        GammaChoice::Auto { delta } => (max_gamma_uniform(k, delta, Degree::Finite(d))?.gamma, Some(delta)),
    };
    let p = T::one() / T::from_count(d);
    Ok(HypergraphInstance {
        system: h.exact_cover_system(gamma)?,
        p: ProbabilityVector::uniform(h.edges.len(), p)?,
        gamma,
        k,
        degree: d,
        delta,
        evaluation_point: T::one() / T::from_count(d - 1),
        target_gamma: None,
    })
}

/// The exact-cover system with `pₛ = ω/Δ`. The automatic weight is the smaller of the
/// target `(1/k) ln(1/ω)` and the largest certified weight.
pub fn matching_instance<T: Scalar>(h: &Hypergraph, omega: T, gamma: GammaChoice<T>) -> Result<HypergraphInstance<T>> {
    if !(omega > T::zero() && omega <= T::one()) {
        return Err(Error::InvalidInput(format!("omega = {omega} is not in (0, 1]")));
    }
    let (k, d) = regular(h)?;
    let search_delta = match gamma {
        GammaChoice::Auto { delta } => delta,
        GammaChoice::Fixed(_) => T::lit(DEFAULT_DELTA),
    };
    let best = max_gamma_matching(k, d, omega, search_delta)?;
    let (gamma, delta) = match gamma {
        GammaChoice::Fixed(g) => (g, None),
        GammaChoice::Auto { delta } => (best.target.min(best.gamma), Some(delta)),
    };
    if !(gamma > T::zero()) {
        return Err(Error::InvalidInput("no positive weight is admissible for these parameters".into()));
    }
    let dd = T::from_count(d);
    Ok(HypergraphInstance {
        system: h.exact_cover_system(gamma)?,
        p: ProbabilityVector::uniform(h.edges.len(), omega / dd)?,
        gamma,
        k,
        degree: d,
        delta,
        evaluation_point: omega / (dd - omega),
        target_gamma: Some((best.target, best.target_admissible)),
    })
}

/// `Σᵥ (#(C, v) − 1)²` for the edge subset `C`; zero exactly on perfect matchings.
pub fn coverage_penalty(h: &Hypergraph, subset: &[usize]) -> Result<u64> {
    let mut cover = vec![0i64; h.n_vertices];
    let mut seen = vec![false; h.edges.len()];
    for &s in subset {
        if s >= h.edges.len() {
            return Err(Error::IndexOutOfRange { index: s, size: h.edges.len() });
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidInput(format!("edge {s} listed twice")));
        }
        for &v in &h.edges[s] {
            cover[v] += 1;
        }
    }
    Ok(cover.iter().map(|&c| ((c - 1) * (c - 1)) as u64).sum())
}
