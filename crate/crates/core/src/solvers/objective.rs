//! The sum-of-squared-overlaps objective and the coefficient rule that
//! turns a family of unit factors into an approximation.

use crate::decomposition::{Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// `T(v_1, …, v_d)` together with `∂/∂v_j` for every mode.
pub(crate) fn multilinear_with_grads(t: &DenseTensor<f64>, factors: &[&[f64]], grads: &mut [Vec<f64>]) -> f64 {
    let dims = t.dims();
    let d = dims.len();
    for (g, &n) in grads.iter_mut().zip(dims) {
        g.clear();
        g.resize(n, 0.0);
    }
    let mut idx = vec![0usize; d];
    let mut prefix = vec![1.0; d + 1];
    let mut suffix = vec![1.0; d + 1];
    let mut value = 0.0;
    for &x in t.data() {
        if x != 0.0 {
            for j in 0..d {
                prefix[j + 1] = prefix[j] * factors[j][idx[j]];
            }
            for j in (0..d).rev() {
                suffix[j] = suffix[j + 1] * factors[j][idx[j]];
            }
            value += x * prefix[d];
            for j in 0..d {
                grads[j][idx[j]] += x * prefix[j] * suffix[j + 1];
            }
        }
        crate::tensor::increment(&mut idx, dims);
    }
    value
}

/// `T(v_1, …, v_d)` without gradients, by successive contraction of the
/// last mode.
pub(crate) fn multilinear(t: &DenseTensor<f64>, factors: &[&[f64]]) -> f64 {
    let dims = t.dims();
    let mut current: Vec<f64> = t.data().to_vec();
    for j in (0..dims.len()).rev() {
        let n = dims[j];
        let v = factors[j];
        current = current
            .chunks_exact(n)
            .map(|chunk| chunk.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
    }
    current[0]
}

fn check_factors(t: &DenseTensor<f64>, factors: &[Vec<Vec<f64>>]) -> Result<()> {
    for term in factors {
        if term.len() != t.order() {
            return Err(Error::Length {
                expected: t.order(),
                actual: term.len(),
            });
        }
        for (v, &n) in term.iter().zip(t.dims()) {
            if v.len() != n {
                return Err(Error::Length {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
    }
    Ok(())
}

/// `Σ_k ⟨T, v_{k1} ⊗ … ⊗ v_{kd}⟩²` for families of unit factors.
pub fn objective(t: &DenseTensor<f64>, factors: &[Vec<Vec<f64>>]) -> Result<f64> {
    check_factors(t, factors)?;
    Ok(factors
        .iter()
        .map(|term| {
            let refs: Vec<&[f64]> = term.iter().map(|v| v.as_slice()).collect();
            multilinear(t, &refs).powi(2)
        })
        .sum())
}

/// Sets `σ_k = ⟨T, ⊗_j v_{kj}⟩` and canonicalizes each term. For mutually
/// orthogonal terms these are the best coefficients, and the objective
/// equals `Σ σ_k²`.
pub fn sigma_from_factors(t: &DenseTensor<f64>, factors: Vec<Vec<Vec<f64>>>) -> Result<Decomposition<f64>> {
    check_factors(t, &factors)?;
    let terms = factors
        .into_iter()
        .map(|term| {
            let refs: Vec<&[f64]> = term.iter().map(|v| v.as_slice()).collect();
            let sigma = multilinear(t, &refs);
            RankOneTerm::new(sigma, term).canonical()
        })
        .collect();
    Decomposition::new(t.dims().to_vec(), terms)
}
