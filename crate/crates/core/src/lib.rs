//! Smoothed counting of 0-1 points of linear systems.
//!
//! The smoothed expectation `E exp{−Σᵢ γᵢ(⟨aᵢ, ξ⟩ − βᵢ)²}` over independent Bernoulli
//! variables is a multiaffine polynomial in the odds `pⱼ/(1 − pⱼ)`. Inside a certified
//! zero-free polydisc its logarithm is approximated by a truncated Taylor series whose
//! coefficients come from exhaustive enumeration of small subsets, giving a deterministic
//! `(1 ± ε)` estimate in quasi-polynomial time.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*F64` / `*F32` aliases
//! below fix the precision.

pub mod combinatorics;
pub mod error;
pub mod evaluator;
pub mod hypergraph;
pub mod interpolation;
pub mod io;
pub mod ising;
pub mod linalg;
pub mod lse;
pub mod maxent;
pub mod model;
pub mod oracle;
pub mod rounding;
pub mod scalar;
pub mod testgen;
pub mod zerofree;

pub use error::{Error, Result};
pub use evaluator::{
    conditional_expectation, smoothed_expectation, smoothed_expectation_geometric, EvalOptions, EvaluationResult,
    Method,
};
pub use hypergraph::{GammaChoice, Hypergraph, HypergraphInstance};
pub use interpolation::WorkOptions;
pub use ising::IsingModel;
pub use maxent::MaxEntSolution;
pub use model::{PartialAssignment, ProbabilityVector, SparseSystem};
pub use rounding::{derandomize, RoundingOptions, RoundingResult};
pub use scalar::Scalar;
pub use zerofree::{Certificate, Degree, FailureReport};

pub type SparseSystemF64 = SparseSystem<f64>;
pub type SparseSystemF32 = SparseSystem<f32>;
pub type ProbabilityVectorF64 = ProbabilityVector<f64>;
pub type ProbabilityVectorF32 = ProbabilityVector<f32>;
pub type EvaluationResultF64 = EvaluationResult<f64>;
pub type EvaluationResultF32 = EvaluationResult<f32>;
pub type CertificateF64 = Certificate<f64>;
pub type CertificateF32 = Certificate<f32>;
pub type IsingModelF64 = IsingModel<f64>;
pub type IsingModelF32 = IsingModel<f32>;
pub type MaxEntSolutionF64 = MaxEntSolution<f64>;
pub type MaxEntSolutionF32 = MaxEntSolution<f32>;
