//! Small dense linear algebra on orthonormal frames (matrices with
//! orthonormal columns).

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Nearest matrix with orthonormal columns, `U Vᵀ` from the thin SVD.
/// Returns `None` when `a` is rank deficient.
pub fn polar(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let svd = a.clone().svd(true, true);
    let smallest = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    // Written so that NaN also counts as degenerate.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(smallest > 1e-14) {
        return None;
    }
    Some(svd.u? * svd.v_t?)
}

/// Haar-distributed `n × c` frame: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, n: usize, c: usize) -> DMatrix<f64> {
    assert!(c <= n, "a {n}-dimensional space has no {c} orthonormal vectors");
    loop {
        let g = DMatrix::from_fn(n, c, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..c).any(|i| r[(i, i)].abs() < 1e-10) {
            continue;
        }
        let mut q = qr.q();
        for i in 0..c {
            if r[(i, i)] < 0.0 {
                q.column_mut(i).neg_mut();
            }
        }
        return q;
    }
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    random_frame(rng, n, 1).column(0).iter().cloned().collect()
}

/// Orthonormal basis of the orthogonal complement of the columns of
/// `basis` (assumed orthonormal) in ℝⁿ, as an `n × (n − k)` frame.
pub fn orthogonal_complement(n: usize, basis: &[Vec<f64>]) -> DMatrix<f64> {
    let k = basis.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n - k.min(n));
    let mut spanned: Vec<Vec<f64>> = basis.to_vec();
    // Gram-Schmidt over the standard basis, twice for stability.
    for i in 0..n {
        if out.len() + k >= n {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &spanned {
                let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            spanned.push(v.clone());
            out.push(v);
        }
    }
    DMatrix::from_fn(n, out.len(), |i, j| out[j][i])
}

/// Columns of a frame as owned vectors.
pub fn columns(frame: &DMatrix<f64>) -> Vec<Vec<f64>> {
    frame.column_iter().map(|c| c.iter().cloned().collect()).collect()
}

pub fn from_columns(n: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Largest entry of `|XᵀX − I|`.
pub fn orthonormality_defect(frame: &DMatrix<f64>) -> f64 {
    let g = frame.transpose() * frame;
    let c = g.ncols();
    (g - DMatrix::identity(c, c)).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, c) in [(1, 1), (2, 2), (4, 2), (7, 5)] {
            assert!(orthonormality_defect(&random_frame(&mut rng, n, c)) < 1e-14);
        }
    }

    #[test]
    fn polar_fixes_frames_and_projects_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_frame(&mut rng, 5, 3);
        assert!((polar(&q).unwrap() - &q).amax() < 1e-14);
        let p = polar(&(&q + DMatrix::from_element(5, 3, 0.01))).unwrap();
        assert!(orthonormality_defect(&p) < 1e-14);
        assert!(polar(&DMatrix::zeros(3, 2)).is_none());
    }

    #[test]
    fn complement_spans_the_rest() {
        let s = 0.5f64.sqrt();
        let c = orthogonal_complement(3, &[vec![s, s, 0.0]]);
        assert_eq!(c.ncols(), 2);
        let b = DMatrix::from_column_slice(3, 1, &[s, s, 0.0]);
        assert!((b.transpose() * &c).amax() < 1e-15);
        assert!(orthonormality_defect(&c) < 1e-15);
        assert_eq!(orthogonal_complement(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).ncols(), 0);
    }
}
