//! Dense row-major tensors over ℝ or ℂ and the elementary operations on them.

use std::ops::{Add, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// Default absolute tolerance of [`DenseTensor::is_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// An order-`d` array with explicit dims. Entries are stored row-major with
/// the last index running fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseTensor<S: Scalar> {
    dims: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> DenseTensor<S> {
    pub fn new(dims: Vec<usize>, data: Vec<S>) -> Result<Self> {
        check_dims(&dims)?;
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::Length {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let len = dims.iter().product();
        Ok(Self {
            dims,
            data: vec![S::zero(); len],
        })
    }

    /// Builds a tensor entry by entry from its multi-index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> S) -> Result<Self> {
        check_dims(&dims)?;
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, &dims);
        }
        Ok(Self { dims, data })
    }

    pub fn field(&self) -> Field {
        S::FIELD
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn is_cubical(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(self.strides())
            .map(|(&i, s)| i * s)
            .sum()
    }

    pub fn get(&self, idx: &[usize]) -> S {
        self.data[self.offset(idx)]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.modulus() == 0.0)
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, alpha: S) -> Self {
        self.map(|v| v * alpha)
    }

    /// Frobenius inner product `Σ T(i…) · conj(S(i…))`.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |acc, (&a, &b)| acc + a * b.conj()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.modulus_sqr()).sum::<f64>().sqrt()
    }

    /// Mode-`mode` contraction with a vector; the contracted dimension is
    /// dropped, so the result has order `d − 1`.
    pub fn contract_mode(&self, mode: usize, v: &[S]) -> Result<Self> {
        let d = self.order();
        if mode >= d {
            return Err(Error::Mode { mode, order: d });
        }
        if d == 1 {
            return Err(Error::Shape(
                "contracting an order-1 tensor leaves no modes".into(),
            ));
        }
        if v.len() != self.dims[mode] {
            return Err(Error::Length {
                expected: self.dims[mode],
                actual: v.len(),
            });
        }
        let mut out_dims = self.dims.clone();
        out_dims.remove(mode);
        let outer: usize = self.dims[..mode].iter().product();
        let inner: usize = self.dims[mode + 1..].iter().product();
        let n = self.dims[mode];
        let mut data = vec![S::zero(); outer * inner];
        for a in 0..outer {
            for (i, &vi) in v.iter().enumerate() {
                let base = (a * n + i) * inner;
                let row = &self.data[base..base + inner];
                let dst = &mut data[a * inner..(a + 1) * inner];
                for (o, &t) in dst.iter_mut().zip(row) {
                    *o += t * vi;
                }
            }
        }
        Self::new(out_dims, data)
    }

    /// Mode-`mode` product with a matrix `A` (`rows × n_mode`, given row by
    /// row): `(T ×_mode A)(…, i, …) = Σ_j T(…, j, …) A(i, j)`.
    pub fn contract_matrix(&self, mode: usize, a: &[Vec<S>]) -> Result<Self> {
        let d = self.order();
        if mode >= d {
            return Err(Error::Mode { mode, order: d });
        }
        let n = self.dims[mode];
        if let Some(bad) = a.iter().find(|row| row.len() != n) {
            return Err(Error::Length {
                expected: n,
                actual: bad.len(),
            });
        }
        let m = a.len();
        let mut out_dims = self.dims.clone();
        out_dims[mode] = m;
        let outer: usize = self.dims[..mode].iter().product();
        let inner: usize = self.dims[mode + 1..].iter().product();
        let mut data = vec![S::zero(); outer * m * inner];
        for o in 0..outer {
            for (i, row) in a.iter().enumerate() {
                let dst = (o * m + i) * inner;
                for (j, &aij) in row.iter().enumerate() {
                    let src = (o * n + j) * inner;
                    for t in 0..inner {
                        data[dst + t] += self.data[src + t] * aij;
                    }
                }
            }
        }
        Self::new(out_dims, data)
    }

    /// Tensor with modes reordered so that `out(i_0, …, i_{d−1}) =
    /// self(i_{perm⁻¹…})`, i.e. output mode `k` is input mode `perm[k]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let d = self.order();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&p| p >= d || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Shape(format!("{perm:?} is not a permutation of {d} modes")));
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let src_strides = self.strides();
        Self::from_fn(dims, |idx| {
            let off: usize = idx
                .iter()
                .zip(perm)
                .map(|(&i, &p)| i * src_strides[p])
                .sum();
            self.data[off]
        })
    }

    /// Checks invariance under index permutations within `tol`. All `d!`
    /// permutations are compared for `d ≤ 4`; adjacent transpositions
    /// (which generate the symmetric group) otherwise.
    pub fn is_symmetric(&self, tol: f64) -> Result<bool> {
        if !self.is_cubical() {
            return Err(Error::Shape(format!(
                "symmetry needs equal dims, got {:?}",
                self.dims
            )));
        }
        let d = self.order();
        let perms = if d <= 4 {
            permutations(d)
        } else {
            (0..d - 1)
                .map(|k| {
                    let mut p: Vec<usize> = (0..d).collect();
                    p.swap(k, k + 1);
                    p
                })
                .collect()
        };
        let strides = self.strides();
        let mut idx = vec![0; d];
        for p in 0..self.data.len() {
            let here = self.data[p];
            for perm in &perms {
                let off: usize = perm.iter().enumerate().map(|(k, &q)| idx[q] * strides[k]).sum();
                if (self.data[off] - here).modulus() > tol {
                    return Ok(false);
                }
            }
            increment(&mut idx, &self.dims);
        }
        Ok(true)
    }

    /// Average over all index permutations.
    pub fn symmetrize(&self) -> Result<Self> {
        if !self.is_cubical() {
            return Err(Error::Shape(format!(
                "symmetrization needs equal dims, got {:?}",
                self.dims
            )));
        }
        let perms = permutations(self.order());
        let weight = 1.0 / perms.len() as f64;
        let strides = self.strides();
        Self::from_fn(self.dims.clone(), |idx| {
            perms
                .iter()
                .map(|perm| {
                    let off: usize =
                        perm.iter().enumerate().map(|(k, &q)| idx[q] * strides[k]).sum();
                    self.data[off]
                })
                .fold(S::zero(), |acc, v| acc + v)
                .scale(weight)
        })
    }

    /// `⟨T, v_1 ⊗ … ⊗ v_d⟩ = Σ T(i…) conj(v_1(i_1)) ⋯ conj(v_d(i_d))`.
    pub fn overlap(&self, factors: &[&[S]]) -> Result<S> {
        self.check_factor_lengths(factors)?;
        let mut current = self.data.clone();
        let mut len = current.len();
        // Contract trailing modes first so each step reads a contiguous block.
        for (mode, v) in factors.iter().enumerate().rev() {
            let n = self.dims[mode];
            len /= n;
            let mut next = vec![S::zero(); len];
            for (o, dst) in next.iter_mut().enumerate() {
                let block = &current[o * n..(o + 1) * n];
                *dst = block
                    .iter()
                    .zip(v.iter())
                    .fold(S::zero(), |acc, (&t, &x)| acc + t * x.conj());
            }
            current = next;
        }
        Ok(current[0])
    }

    /// Contracts (with conjugation) every mode except `keep`, returning a
    /// vector of length `n_keep`.
    pub fn contract_all_but(&self, keep: usize, factors: &[&[S]]) -> Result<Vec<S>> {
        self.check_factor_lengths(factors)?;
        let d = self.order();
        if keep >= d {
            return Err(Error::Mode { mode: keep, order: d });
        }
        let n = self.dims[keep];
        let mut out = vec![S::zero(); n];
        let mut idx = vec![0; d];
        for &t in &self.data {
            let mut w = t;
            for (j, v) in factors.iter().enumerate() {
                if j != keep {
                    w *= v[idx[j]].conj();
                }
            }
            out[idx[keep]] += w;
            increment(&mut idx, &self.dims);
        }
        Ok(out)
    }

    /// Rank of the mode-`mode` unfolding `M(i_mode, rest)`.
    pub fn unfolding_rank(&self, mode: usize, tol: f64) -> Result<usize> {
        let d = self.order();
        if mode >= d {
            return Err(Error::Mode { mode, order: d });
        }
        let t = if mode == 0 {
            self.clone()
        } else {
            let mut perm: Vec<usize> = (0..d).collect();
            perm.swap(0, mode);
            self.permute_modes(&perm)?
        };
        let rows = t.dims[0];
        let cols = t.data.len() / rows;
        Ok(S::matrix_rank(rows, cols, &t.data, tol))
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!(
                "dims {:?} and {:?} differ",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    fn check_factor_lengths(&self, factors: &[&[S]]) -> Result<()> {
        if factors.len() != self.order() {
            return Err(Error::Shape(format!(
                "{} factors for a tensor of order {}",
                factors.len(),
                self.order()
            )));
        }
        for (v, &n) in factors.iter().zip(&self.dims) {
            if v.len() != n {
                return Err(Error::Length {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Add for &DenseTensor<S> {
    type Output = Result<DenseTensor<S>>;

    fn add(self, rhs: Self) -> Self::Output {
        self.check_same_dims(rhs)?;
        DenseTensor::new(
            self.dims.clone(),
            self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        )
    }
}

impl<S: Scalar> Sub for &DenseTensor<S> {
    type Output = Result<DenseTensor<S>>;

    fn sub(self, rhs: Self) -> Self::Output {
        self.check_same_dims(rhs)?;
        DenseTensor::new(
            self.dims.clone(),
            self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        )
    }
}

/// Outer product `v_1 ⊗ … ⊗ v_d`.
pub fn outer<S: Scalar>(factors: &[&[S]]) -> Result<DenseTensor<S>> {
    if factors.is_empty() {
        return Err(Error::Shape("outer product of an empty list".into()));
    }
    let dims: Vec<usize> = factors.iter().map(|v| v.len()).collect();
    DenseTensor::from_fn(dims, |idx| {
        idx.iter()
            .zip(factors)
            .fold(S::one(), |acc, (&i, v)| acc * v[i])
    })
}

/// Standard basis vector `e_i` of length `n` (0-based `i`).
pub fn basis<S: Scalar>(n: usize, i: usize) -> Vec<S> {
    let mut v = vec![S::zero(); n];
    v[i] = S::one();
    v
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Advances a row-major multi-index in place (wraps to zero at the end).
pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// All permutations of `0..d` in lexicographic order.
pub fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(d), &mut vec![false; d], &mut out);
    out
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Shape("a tensor needs at least one mode".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Shape(format!("zero-length mode in {dims:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn e(n: usize, i: usize) -> Vec<f64> {
        basis(n, i)
    }

    fn no_son() -> DenseTensor<f64> {
        DenseTensor::from_fn(vec![2, 2, 2], |i| match i {
            [0, 0, 1] | [0, 1, 0] | [1, 0, 0] => 1.0,
            [1, 1, 1] => 2.0,
            _ => 0.0,
        })
        .unwrap()
    }

    #[test]
    fn inner_examples() {
        let t = outer(&[&e(2, 0), &e(2, 1)]).unwrap();
        assert_eq!(t.inner(&t).unwrap(), 1.0);
        let a = outer(&[&e(2, 0), &e(2, 0)]).unwrap();
        let b = outer(&[&e(2, 1), &e(2, 1)]).unwrap();
        assert_eq!(a.inner(&b).unwrap(), 0.0);
        let t = no_son();
        assert_eq!(t.inner(&t).unwrap(), 7.0);
        assert!((t.frobenius_norm() - 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn inner_rejects_shape_mismatch() {
        let a = DenseTensor::<f64>::zeros(vec![2, 2]).unwrap();
        let b = DenseTensor::<f64>::zeros(vec![2, 3]).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn complex_inner_is_conjugate_symmetric() {
        let a = DenseTensor::new(
            vec![2],
            vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)],
        )
        .unwrap();
        let b = DenseTensor::new(
            vec![2],
            vec![Complex64::new(0.3, -1.0), Complex64::new(2.0, 1.0)],
        )
        .unwrap();
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
        assert!((a.inner(&a).unwrap().re - a.frobenius_norm().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn zero_tensor_norm() {
        let z = DenseTensor::<f64>::zeros(vec![3, 3, 3]).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        assert!(z.is_zero());
    }

    #[test]
    fn contraction_examples() {
        let t = outer(&[&e(2, 0), &e(2, 1)]).unwrap();
        let c = t.contract_mode(0, &e(2, 0)).unwrap();
        assert_eq!(c.dims(), &[2]);
        assert_eq!(c.data(), e(2, 1).as_slice());

        let v = [0.5f64.sqrt(), 0.5f64.sqrt()];
        let r = no_son().contract_mode(2, &v).unwrap().contract_mode(1, &v).unwrap();
        assert!((r.data()[0] - 1.0).abs() < 1e-15);
        assert!((r.data()[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn contraction_errors() {
        let t = no_son();
        assert!(matches!(t.contract_mode(3, &[1.0, 0.0]), Err(Error::Mode { .. })));
        assert!(matches!(t.contract_mode(0, &[1.0]), Err(Error::Length { .. })));
        let v = DenseTensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        assert!(v.contract_mode(0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn matrix_contraction_matches_vector_rows() {
        let t = no_son();
        let a = vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, 3.0]];
        let m = t.contract_matrix(1, &a).unwrap();
        assert_eq!(m.dims(), &[2, 3, 2]);
        for (i, row) in a.iter().enumerate() {
            let c = t.contract_mode(1, row).unwrap();
            for p in 0..2 {
                for q in 0..2 {
                    assert!((m.get(&[p, i, q]) - c.get(&[p, q])).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn outer_examples() {
        let m = outer(&[&e(2, 0), &e(2, 1)]).unwrap();
        assert_eq!(m.data(), &[0.0, 1.0, 0.0, 0.0]);
        let v = [0.5f64.sqrt(); 2];
        let t = outer(&[&v, &v, &v]).unwrap();
        assert!(t.data().iter().all(|&x| (x - 2f64.powf(-1.5)).abs() < 1e-15));
        let a = [3.0, 4.0];
        let b = [1.0, 0.0, 0.0];
        assert!((outer(&[&a[..], &b[..]]).unwrap().frobenius_norm() - 5.0).abs() < 1e-14);
        assert!(outer::<f64>(&[]).is_err());
    }

    #[test]
    fn symmetry_examples() {
        let raw = outer(&[&e(3, 0), &e(3, 1), &e(3, 2)]).unwrap();
        let sym = raw.symmetrize().unwrap();
        assert!(sym.is_symmetric(SYMMETRY_TOL).unwrap());
        assert!(!raw.is_symmetric(SYMMETRY_TOL).unwrap());
        for p in permutations(3) {
            assert!((sym.get(&p) - 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(sym.data().iter().filter(|&&x| x != 0.0).count(), 6);

        let m = outer(&[&e(2, 0), &e(2, 1)]).unwrap();
        assert!(!m.is_symmetric(SYMMETRY_TOL).unwrap());
        assert_eq!(m.symmetrize().unwrap().data(), &[0.0, 0.5, 0.5, 0.0]);

        assert!((&sym.symmetrize().unwrap() - &sym).unwrap().frobenius_norm() < 1e-15);
        assert!(matches!(
            DenseTensor::<f64>::zeros(vec![2, 3]).unwrap().is_symmetric(1e-12),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn symmetry_check_uses_transpositions_for_high_order() {
        let v = [0.6, 0.8];
        let t = outer(&[&v[..], &v, &v, &v, &v]).unwrap();
        assert!(t.is_symmetric(1e-12).unwrap());
        let w = [0.8, -0.6];
        let t = outer(&[&v[..], &v, &v, &v, &w]).unwrap();
        assert!(!t.is_symmetric(1e-12).unwrap());
    }

    #[test]
    fn permute_modes_moves_indices() {
        let t = outer(&[&e(2, 0), &e(3, 2), &e(4, 1)]).unwrap();
        let p = t.permute_modes(&[2, 0, 1]).unwrap();
        assert_eq!(p.dims(), &[4, 2, 3]);
        assert_eq!(p.get(&[1, 0, 2]), 1.0);
        assert!(t.permute_modes(&[0, 0, 1]).is_err());
    }

    #[test]
    fn overlap_matches_inner_with_outer() {
        let t = no_son();
        let a = [0.6, 0.8];
        let b = [-0.8, 0.6];
        let c = [1.0, 0.0];
        let direct = t.inner(&outer(&[&a[..], &b, &c]).unwrap()).unwrap();
        assert!((t.overlap(&[&a, &b, &c]).unwrap() - direct).abs() < 1e-15);
        let g = t.contract_all_but(1, &[&a, &b, &c]).unwrap();
        assert!((g[0] * b[0] + g[1] * b[1] - direct).abs() < 1e-15);
    }

    #[test]
    fn unfolding_rank_of_rank_two() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let t = (&outer(&[&a[..], &a, &a]).unwrap() + &outer(&[&b[..], &b, &b]).unwrap()).unwrap();
        assert_eq!(t.unfolding_rank(0, 1e-10).unwrap(), 2);
        assert_eq!(t.unfolding_rank(2, 1e-10).unwrap(), 2);
    }
}
