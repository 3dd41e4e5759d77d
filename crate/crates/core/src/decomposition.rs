//! Rank-one terms and sums of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::tensor::{outer, DenseTensor};

/// Entries with modulus at or below this are skipped when locating the
/// first nonzero entry of a factor during canonicalization.
pub const CANONICAL_EPS: f64 = 1e-12;

/// `sigma · v_1 ⊗ … ⊗ v_d` with unit factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: Deserialize<'de>"
))]
pub struct RankOneTerm<S: Scalar> {
    pub sigma: S,
    pub factors: Vec<Vec<S>>,
}

impl<S: Scalar> RankOneTerm<S> {
    pub fn new(sigma: S, factors: Vec<Vec<S>>) -> Self {
        Self { sigma, factors }
    }

    /// Normalizes every factor and moves the norms into `sigma`. Zero factors
    /// give a zero coefficient and are left as they are.
    pub fn from_vectors(sigma: S, factors: Vec<Vec<S>>) -> Self {
        let mut sigma = sigma;
        let factors = factors
            .into_iter()
            .map(|v| match scalar::normalized(&v) {
                Some(u) => {
                    sigma = sigma.scale(scalar::norm(&v));
                    u
                }
                None => {
                    sigma = S::zero();
                    v
                }
            })
            .collect();
        Self { sigma, factors }
    }

    /// `sigma · v^{⊗d}`.
    pub fn symmetric(sigma: S, v: Vec<S>, d: usize) -> Self {
        Self {
            sigma,
            factors: vec![v; d],
        }
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|v| v.len()).collect()
    }

    /// Unit rank-one tensor `v_1 ⊗ … ⊗ v_d` (without `sigma`).
    pub fn unit_tensor(&self) -> Result<DenseTensor<S>> {
        let refs: Vec<&[S]> = self.factors.iter().map(|v| v.as_slice()).collect();
        outer(&refs)
    }

    pub fn tensor(&self) -> Result<DenseTensor<S>> {
        Ok(self.unit_tensor()?.scaled(self.sigma))
    }

    /// Canonical form: the first nonzero entry of every factor is real and
    /// positive, with the removed phases absorbed into `sigma`.
    pub fn canonical(&self) -> Self {
        let mut sigma = self.sigma;
        let factors = self
            .factors
            .iter()
            .map(|v| match v.iter().find(|x| x.modulus() > CANONICAL_EPS) {
                Some(&lead) => {
                    let phase = lead.phase();
                    sigma *= phase;
                    let undo = phase.conj();
                    v.iter().map(|&x| x * undo).collect()
                }
                None => v.clone(),
            })
            .collect();
        Self { sigma, factors }
    }

    /// Largest deviation `| ‖v_j‖ − 1 |` over the factors.
    pub fn unit_defect(&self) -> f64 {
        self.factors
            .iter()
            .map(|v| (scalar::norm(v) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Ordered list of rank-one terms sharing the same dims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: Deserialize<'de>"
))]
pub struct Decomposition<S: Scalar> {
    dims: Vec<usize>,
    terms: Vec<RankOneTerm<S>>,
}

impl<S: Scalar> Decomposition<S> {
    pub fn new(dims: Vec<usize>, terms: Vec<RankOneTerm<S>>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid dims {dims:?}")));
        }
        for (k, term) in terms.iter().enumerate() {
            if term.dims() != dims {
                return Err(Error::Shape(format!(
                    "term {k} has dims {:?}, expected {dims:?}",
                    term.dims()
                )));
            }
        }
        Ok(Self { dims, terms })
    }

    /// Builds a decomposition, taking the dims from the first term.
    pub fn from_terms(terms: Vec<RankOneTerm<S>>) -> Result<Self> {
        let dims = terms
            .first()
            .map(|t| t.dims())
            .ok_or_else(|| Error::Shape("no terms to infer dims from".into()))?;
        Self::new(dims, terms)
    }

    pub fn empty(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[RankOneTerm<S>] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<RankOneTerm<S>> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ_k σ_k v_{k1} ⊗ … ⊗ v_{kd}`.
    pub fn assemble(&self) -> Result<DenseTensor<S>> {
        let mut acc = DenseTensor::zeros(self.dims.clone())?;
        for term in &self.terms {
            acc = (&acc + &term.tensor()?)?;
        }
        Ok(acc)
    }

    pub fn canonical(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            terms: self.terms.iter().map(RankOneTerm::canonical).collect(),
        }
    }

    pub fn sigma_sq_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.sigma.modulus_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::basis;
    use num_complex::Complex64;

    #[test]
    fn empty_assembles_to_zero() {
        let d = Decomposition::<f64>::empty(vec![2, 3]).unwrap();
        assert!(d.assemble().unwrap().is_zero());
    }

    #[test]
    fn three_shifted_terms_give_the_no_son_cyclic_form() {
        let (a, b) = (basis::<f64>(2, 0), basis::<f64>(2, 1));
        let d = Decomposition::from_terms(vec![
            RankOneTerm::new(1.0, vec![b.clone(), a.clone(), a.clone()]),
            RankOneTerm::new(1.0, vec![a.clone(), b.clone(), a.clone()]),
            RankOneTerm::new(1.0, vec![a.clone(), a.clone(), b.clone()]),
        ])
        .unwrap();
        let t = d.assemble().unwrap();
        for idx in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert_eq!(t.get(&idx), 1.0);
        }
        assert_eq!(t.inner(&t).unwrap(), 3.0);
    }

    #[test]
    fn inconsistent_dims_are_rejected() {
        let terms = vec![
            RankOneTerm::new(1.0, vec![vec![1.0, 0.0], vec![1.0, 0.0]]),
            RankOneTerm::new(1.0, vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0]]),
        ];
        assert!(matches!(Decomposition::from_terms(terms), Err(Error::Shape(_))));
    }

    #[test]
    fn canonical_form_keeps_the_tensor() {
        let s = 0.5f64.sqrt();
        let term = RankOneTerm::new(2.0, vec![vec![-s, s], vec![0.0, -1.0], vec![s, -s]]);
        let c = term.canonical();
        // Two sign flips cancel.
        assert_eq!(c.sigma, 2.0);
        assert!(c.factors.iter().all(|v| v.iter().find(|x| x.abs() > 0.0).unwrap() > &0.0));
        let diff = (&term.tensor().unwrap() - &c.tensor().unwrap()).unwrap();
        assert!(diff.frobenius_norm() < 1e-15);
    }

    #[test]
    fn canonical_form_over_complex_moves_phase_into_sigma() {
        let i = Complex64::new(0.0, 1.0);
        let v = vec![i * 0.6, Complex64::new(0.8, 0.0)];
        let term = RankOneTerm::new(Complex64::new(1.0, 0.0), vec![v.clone(), v]);
        let c = term.canonical();
        for f in &c.factors {
            assert!(f[0].im.abs() < 1e-15 && f[0].re > 0.0);
        }
        let diff = (&term.tensor().unwrap() - &c.tensor().unwrap()).unwrap();
        assert!(diff.frobenius_norm() < 1e-15);
        assert!((c.sigma - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn from_vectors_pushes_norms_into_sigma() {
        let t = RankOneTerm::from_vectors(1.5, vec![vec![3.0, 4.0], vec![0.0, 2.0]]);
        assert!((t.sigma - 15.0).abs() < 1e-14);
        assert!(t.unit_defect() < 1e-15);
    }
}
