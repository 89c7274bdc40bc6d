//! Serializable file formats. Numbers are read as `f64` and converted to the working scalar.
//!
//! Instance: `{"m": 1, "n": 2, "entries": [[0, 0, 1.0], [0, 1, 1.0]], "beta": [1.0],
//! "gamma": [1.0], "p": [0.5, 0.5]}` (`p` optional).
//!
//! Ising model: `{"n": 2, "g": [[0, 1, -0.5]], "f": [0.0, 0.0]}`, or with `"exp_f"` giving
//! `e^{fⱼ}` instead of `f`. Hypergraphs use `{"vertices": 4, "edges": [[0, 1], ...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::model::{ProbabilityVector, SparseSystem};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

fn cast<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

impl InstanceFile {
    pub fn system<T: Scalar>(&self) -> Result<SparseSystem<T>> {
        SparseSystem::new(
            self.m,
            self.n,
            self.entries.iter().map(|&(i, j, a)| (i, j, T::lit(a))),
            cast(&self.beta),
            cast(&self.gamma),
        )
    }

    /// The stored probability vector, or `default` in every coordinate.
    pub fn probabilities<T: Scalar>(&self, default: Option<T>) -> Result<ProbabilityVector<T>> {
        match (&self.p, default) {
            (Some(p), _) => {
                if p.len() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, got: p.len() });
                }
                ProbabilityVector::new(cast(p))
            }
            (None, Some(d)) => ProbabilityVector::uniform(self.n, d),
            (None, None) => Err(Error::InvalidInput("instance has no \"p\" field".into())),
        }
    }

    pub fn from_system<T: Scalar>(system: &SparseSystem<T>, p: Option<&ProbabilityVector<T>>) -> Self {
        let f = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>();
        Self {
            m: system.n_rows(),
            n: system.n_cols(),
            entries: system.entries().map(|(i, j, a)| (i, j, a.to_f64_lossy())).collect(),
            beta: f(system.beta()),
            gamma: f(system.gamma()),
            p: p.map(|p| f(p.as_slice())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingFile {
    pub n: usize,
    pub g: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_f: Option<Vec<f64>>,
    /// `ln C` with `E = C·Z`, as written by the forward translation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_constant: Option<f64>,
}

impl IsingFile {
    /// Builds the model; without either field vector the field is zero.
    pub fn model<T: Scalar>(&self) -> Result<IsingModel<T>> {
        let f = match (&self.f, &self.exp_f) {
            (Some(_), Some(_)) => return Err(Error::InvalidInput("give either \"f\" or \"exp_f\", not both".into())),
            (Some(f), None) => cast(f),
            (None, Some(e)) => {
                if let Some(v) = e.iter().find(|v| !(**v > 0.0)) {
                    return Err(Error::InvalidInput(format!("exp_f entry {v} is not positive")));
                }
                e.iter().map(|&v| T::lit(v).ln()).collect()
            }
            (None, None) => vec![T::zero(); self.n],
        };
        IsingModel::from_entries(self.n, self.g.iter().map(|&(k, j, v)| (k, j, T::lit(v))), f)
    }

    pub fn from_model<T: Scalar>(model: &IsingModel<T>) -> Self {
        Self {
            n: model.n(),
            g: model.couplings().into_iter().map(|(k, j, v)| (k, j, v.to_f64_lossy())).collect(),
            f: Some(model.f().iter().map(|v| v.to_f64_lossy()).collect()),
            exp_f: None,
            log_constant: None,
        }
    }

    /// Couplings only, for the reverse construction.
    pub fn couplings<T: Scalar>(&self) -> Result<crate::linalg::Dense<T>> {
        Ok(IsingModel::from_entries(self.n, self.g.iter().map(|&(k, j, v)| (k, j, T::lit(v))), vec![T::zero(); self.n])?
            .g()
            .clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip() {
        let s = SparseSystem::new(2, 3, [(0, 0, 1.0), (1, 2, -0.5)], vec![1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let p = ProbabilityVector::new(vec![0.1, 0.2, 0.3]).unwrap();
        let file = InstanceFile::from_system(&s, Some(&p));
        let back: SparseSystem<f64> = file.system().unwrap();
        assert_eq!(back, s);
        assert_eq!(file.probabilities::<f64>(None).unwrap(), p);
    }

    #[test]
    fn missing_probabilities() {
        let s = SparseSystem::<f64>::new(1, 2, [], vec![0.0], vec![1.0]).unwrap();
        let file = InstanceFile::from_system(&s, None);
        assert!(file.probabilities::<f64>(None).is_err());
        assert_eq!(file.probabilities(Some(0.25)).unwrap().as_slice(), &[0.25, 0.25]);
    }

    #[test]
    fn ising_fields() {
        let file = IsingFile { n: 2, g: vec![(0, 1, -0.5)], f: None, exp_f: Some(vec![1.0, std::f64::consts::E]), log_constant: None };
        let m: IsingModel<f64> = file.model().unwrap();
        assert_eq!(m.f()[0], 0.0);
        assert!((m.f()[1] - 1.0).abs() < 1e-15);
        assert_eq!(m.g()[(1, 0)], -0.5);
        let both = IsingFile { f: Some(vec![0.0; 2]), ..file };
        assert!(both.model::<f64>().is_err());
    }
}
