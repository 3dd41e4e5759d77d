//! Higher-order power iterations for the best rank-one term.

use rand::Rng;

use crate::linalg::random_unit;
use crate::tensor::DenseTensor;

use super::objective::{multilinear, multilinear_with_grads};

pub(crate) struct PowerRun {
    pub factors: Vec<Vec<f64>>,
    pub iterations: usize,
    /// The monotone quantity of the run: `T(v)²` for the general
    /// iteration, the signed value `s·⟨T, v^{⊗d}⟩` for the symmetric one.
    pub history: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-300 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

fn step_change(a: &[f64], b: &[f64]) -> f64 {
    // Sign-insensitive distance between unit vectors.
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (2.0 - 2.0 * d.abs()).max(0.0).sqrt()
}

/// Alternating updates `v_j ← normalize(T contracted with every v_i, i ≠ j)`.
/// Each update maximizes `|T(v_1, …, v_d)|` in one factor, so `T(v)²` never
/// decreases.
pub(crate) fn general<R: Rng + ?Sized>(t: &DenseTensor<f64>, rng: &mut R, max_iters: usize, tol: f64) -> PowerRun {
    let d = t.order();
    let mut v: Vec<Vec<f64>> = t.dims().iter().map(|&n| random_unit(rng, n)).collect();
    let mut grads = vec![Vec::new(); d];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut change: f64 = 0.0;
        for j in 0..d {
            let refs: Vec<&[f64]> = v.iter().map(|x| x.as_slice()).collect();
            multilinear_with_grads(t, &refs, &mut grads);
            let mut next = std::mem::take(&mut grads[j]);
            if !normalize(&mut next) {
                // The contraction vanished: keep the current factor.
                continue;
            }
            change = change.max(step_change(&next, &v[j]));
            v[j] = next;
        }
        let refs: Vec<&[f64]> = v.iter().map(|x| x.as_slice()).collect();
        history.push(multilinear(t, &refs).powi(2));
        if change < tol {
            break;
        }
    }
    PowerRun {
        factors: v,
        iterations,
        history,
    }
}

/// Shifted symmetric iteration `v ← normalize(s·T v^{d−1} + τ v)` with
/// `s = ±1` selecting which sign of `⟨T, v^{⊗d}⟩` is pushed up. With
/// `τ = (d − 1)‖T‖` the map is the gradient step of a convex function on
/// the sphere, so `s·⟨T, v^{⊗d}⟩` increases monotonically for every order.
pub(crate) fn symmetric<R: Rng + ?Sized>(
    t: &DenseTensor<f64>,
    sign: f64,
    rng: &mut R,
    max_iters: usize,
    tol: f64,
) -> PowerRun {
    let d = t.order();
    let n = t.dims()[0];
    let tau = (d as f64 - 1.0) * t.frobenius_norm();
    let mut v = random_unit(rng, n);
    let mut grads = vec![Vec::new(); d];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let refs: Vec<&[f64]> = vec![v.as_slice(); d];
        let value = multilinear_with_grads(t, &refs, &mut grads);
        history.push(sign * value);
        // For symmetric T every mode gradient equals T v^{d−1}.
        let mut next: Vec<f64> = grads[0].iter().zip(&v).map(|(g, x)| sign * g + tau * x).collect();
        if !normalize(&mut next) {
            break;
        }
        let change = step_change(&next, &v);
        v = next;
        if change < tol {
            break;
        }
    }
    PowerRun {
        factors: vec![v; d],
        iterations,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{basis, outer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn both_variants_find_a_dominant_basis_term() {
        let e1: Vec<f64> = basis(3, 0);
        let t = outer(&[&e1[..], &e1[..], &e1[..]]).unwrap().scaled(3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = general(&t, &mut rng, 500, 1e-12);
        let refs: Vec<&[f64]> = g.factors.iter().map(|v| v.as_slice()).collect();
        assert!((multilinear(&t, &refs).abs() - 3.0).abs() < 1e-10);
        // A start with v₁ < 0 drifts to the stationary set v ⊥ e₁, so take
        // the best of a few.
        let best = (0..8)
            .map(|_| *symmetric(&t, 1.0, &mut rng, 5000, 1e-13).history.last().unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - 3.0).abs() < 1e-8);
    }

    #[test]
    fn iterations_are_monotone() {
        let t = DenseTensor::from_fn(vec![3, 3, 3, 3], |i| {
            let s: usize = i.iter().sum();
            ((s * 7 % 5) as f64 - 2.0) / 3.0
        })
        .unwrap()
        .symmetrize()
        .unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = general(&t, &mut rng, 300, 1e-14);
            assert!(g.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            for sign in [1.0, -1.0] {
                let s = symmetric(&t, sign, &mut rng, 300, 1e-14);
                assert!(s.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            }
        }
    }
}
