//! Named tensors on which symmetric and unconstrained optima part ways,
//! their candidate approximations, the block embedding, and a verifier per
//! case.
//!
//! Modes and entries are 0-based here; the docs quote entries 1-based as
//! they are usually written (`T(1,1,2)` is `get(&[0, 0, 1])`).

#![allow(clippy::approx_constant)]

mod structure;
mod verify;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::tensor::{basis, outer, DenseTensor};

pub use self::structure::{check_symmetric_structure, Family, StructureKind, StructureVerdict};
pub use self::verify::{
    block_check, restricted_vs_general, verify_case, BlockCheck, CaseReport, Check, Relation, RestrictionComparison,
};

fn e(n: usize, i: usize) -> Vec<f64> {
    basis(n, i)
}

fn sum_of_outers(terms: &[(f64, Vec<Vec<f64>>)]) -> DenseTensor<f64> {
    let dims: Vec<usize> = terms[0].1.iter().map(|v| v.len()).collect();
    let mut t = DenseTensor::zeros(dims).expect("positive dims");
    for (s, f) in terms {
        let refs: Vec<&[f64]> = f.iter().map(|v| v.as_slice()).collect();
        t = (&t + &outer(&refs).expect("nonempty").scaled(*s)).expect("equal dims");
    }
    t
}

/// `(1/6) Σ_{π ∈ S₃} e_{π(1)} ⊗ e_{π(2)} ⊗ e_{π(3)}` in ℝ³.
pub fn t_main() -> DenseTensor<f64> {
    outer(&[&e(3, 0)[..], &e(3, 1)[..], &e(3, 2)[..]])
        .and_then(|t| t.symmetrize())
        .expect("cubical")
}

/// The 2×2×2 tensor with `T(1,1,2) = T(1,2,1) = T(2,1,1) = 1` and
/// `T(2,2,2) = 2`.
pub fn t_no_son() -> DenseTensor<f64> {
    DenseTensor::from_fn(vec![2, 2, 2], |i| match i.iter().sum::<usize>() {
        1 => 1.0,
        3 => 2.0,
        _ => 0.0,
    })
    .expect("positive dims")
}

/// The deflation and singular-vector examples use the same tensor.
pub fn t_tex() -> DenseTensor<f64> {
    t_no_son()
}

/// `e₁⊗e₁⊗e₁⊗e₂` summed over the four positions of `e₂`, in ℝ².
pub fn t_no_on() -> DenseTensor<f64> {
    DenseTensor::from_fn(vec![2, 2, 2, 2], |i| if i.iter().sum::<usize>() == 1 { 1.0 } else { 0.0 })
        .expect("positive dims")
}

/// `e₁⊗e₁⊗e₂ + e₁⊗e₂⊗e₁ + e₂⊗e₁⊗e₁` in ℝ³.
pub fn t_coincide() -> DenseTensor<f64> {
    DenseTensor::from_fn(vec![3, 3, 3], |i| {
        let ones = i.iter().filter(|&&x| x == 0).count();
        let twos = i.iter().filter(|&&x| x == 1).count();
        if ones == 2 && twos == 1 {
            1.0
        } else {
            0.0
        }
    })
    .expect("positive dims")
}

/// The three vectors `(−2,−2,1)/3`, `(−2,1,−2)/3`, `(1,−2,−2)/3` of the
/// symmetric optimum for [`t_main`].
pub fn main_vectors() -> [Vec<f64>; 3] {
    [
        vec![-2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0],
        vec![-2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0],
        vec![1.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0],
    ]
}

/// `(4/27) Σ y_k^{⊗3}` with [`main_vectors`].
pub fn main_symmetric_candidate() -> Decomposition<f64> {
    let terms = main_vectors()
        .into_iter()
        .map(|y| RankOneTerm::symmetric(4.0 / 27.0, y, 3))
        .collect();
    Decomposition::from_terms(terms).expect("consistent dims")
}

/// `(1/6)(e₁⊗e₂⊗e₃ + e₂⊗e₃⊗e₁ + e₃⊗e₁⊗e₂)`.
pub fn main_cyclic_candidate() -> Decomposition<f64> {
    let terms = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
        .into_iter()
        .map(|(a, b, c)| RankOneTerm::new(1.0 / 6.0, vec![e(3, a), e(3, b), e(3, c)]))
        .collect();
    Decomposition::from_terms(terms).expect("consistent dims")
}

fn perp(v: &[f64]) -> Vec<f64> {
    vec![-v[1], v[0]]
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Symmetric candidates for [`t_no_son`]: the cyclic form
/// `e₂⊗e₁⊗e₁ + e₁⊗e₂⊗e₁ + e₁⊗e₁⊗e₂`, the two-term optimum with entries
/// `5/4`, and the rank-one `2e₂^{⊗3}`. Built from their entries.
pub fn no_son_symmetric_candidates() -> [(&'static str, DenseTensor<f64>); 3] {
    let cyclic = DenseTensor::from_fn(vec![2, 2, 2], |i| if i.iter().sum::<usize>() == 1 { 1.0 } else { 0.0 });
    let two = DenseTensor::from_fn(vec![2, 2, 2], |i| match i.iter().sum::<usize>() {
        1 | 3 => 1.25,
        _ => 0.0,
    });
    let one = DenseTensor::from_fn(vec![2, 2, 2], |i| if i.iter().sum::<usize>() == 3 { 2.0 } else { 0.0 });
    [
        ("cyclic", cyclic.expect("dims")),
        ("two-term", two.expect("dims")),
        ("rank-one", one.expect("dims")),
    ]
}

/// The strongly orthogonal three-term candidate `a⊗b⊗c`, `a⊥⊗b⊥⊗c⊥`,
/// `a⊗b⊥⊗c` for [`t_no_son`], with `a = c = (1,1)/√2` and `b` the
/// normalized `(0.8321, 0.5547)`; coefficients are the overlaps with `T`.
pub fn no_son_strong_candidate() -> Decomposition<f64> {
    let a = unit(&[1.0, 1.0]);
    let b = unit(&[0.8321, 0.5547]);
    let c = a.clone();
    let factors = vec![
        vec![a.clone(), b.clone(), c.clone()],
        vec![perp(&a), perp(&b), perp(&c)],
        vec![a, perp(&b), c],
    ];
    crate::solvers::sigma_from_factors(&t_no_son(), factors).expect("matching dims")
}

/// `−y₁^{⊗4} + y₂^{⊗4}` with `y₁ = (1,−1)/√2`, `y₂ = (−1,−1)/√2`.
pub fn no_on_symmetric_candidate() -> Decomposition<f64> {
    let y1 = unit(&[1.0, -1.0]);
    let y2 = unit(&[-1.0, -1.0]);
    Decomposition::from_terms(vec![RankOneTerm::symmetric(-1.0, y1, 4), RankOneTerm::symmetric(1.0, y2, 4)])
        .expect("consistent dims")
}

/// `(3/√8)(e₁⊗u^{⊗3} + e₁⊗v^{⊗3})` with `u = (−1,1)/√2`, `v = (1,1)/√2`.
pub fn no_on_strong_candidate() -> Decomposition<f64> {
    let s = 3.0 / 8f64.sqrt();
    let u = unit(&[-1.0, 1.0]);
    let v = unit(&[1.0, 1.0]);
    Decomposition::from_terms(vec![
        RankOneTerm::new(s, vec![e(2, 0), u.clone(), u.clone(), u]),
        RankOneTerm::new(s, vec![e(2, 0), v.clone(), v.clone(), v]),
    ])
    .expect("consistent dims")
}

/// `B₁(T) + … + B_r(T)`: `r` copies of `T` on the block diagonal, copy `ℓ`
/// occupying indices `ℓ n_j … (ℓ+1) n_j − 1` in every mode.
pub fn block_embed(t: &DenseTensor<f64>, r: usize) -> Result<DenseTensor<f64>> {
    if r == 0 {
        return Err(Error::Shape("block embedding needs at least one block".into()));
    }
    let dims: Vec<usize> = t.dims().iter().map(|n| n * r).collect();
    let inner = t.dims().to_vec();
    DenseTensor::from_fn(dims, |idx| {
        let block = idx[0] / inner[0];
        let same = idx.iter().zip(&inner).all(|(i, n)| i / n == block);
        if same {
            let local: Vec<usize> = idx.iter().zip(&inner).map(|(i, n)| i % n).collect();
            t.get(&local)
        } else {
            0.0
        }
    })
}

/// `B_ℓ(v)`: `v` placed in block `ℓ` of a vector of length `r·len(v)`.
pub fn block_vector(v: &[f64], block: usize, r: usize) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n * r];
    out[block * n..(block + 1) * n].copy_from_slice(v);
    out
}

/// Tensor with independent standard normal entries.
pub fn random_tensor(dims: Vec<usize>, seed: u64) -> DenseTensor<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseTensor::from_fn(dims, |_| StandardNormal.sample(&mut rng)).expect("positive dims")
}

/// Symmetrization of a Gaussian tensor in `S^d(ℝⁿ)`.
pub fn random_symmetric(n: usize, d: usize, seed: u64) -> DenseTensor<f64> {
    random_tensor(vec![n; d], seed).symmetrize().expect("cubical")
}

/// The case library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseId {
    ThmMain,
    ThmNoSon,
    ThmNoOn,
    ExDeflation,
    ExSingular,
    ExCoincide,
    PropBlock,
    ThmMainn2,
    ThmMainn2partial,
    ThmMainentirely,
    StructSymrank2,
    StructSymrank3,
    StructSymdecomp,
}

impl CaseId {
    pub const ALL: [CaseId; 13] = [
        CaseId::ThmMain,
        CaseId::ThmNoSon,
        CaseId::ThmNoOn,
        CaseId::ExDeflation,
        CaseId::ExSingular,
        CaseId::ExCoincide,
        CaseId::PropBlock,
        CaseId::ThmMainn2,
        CaseId::ThmMainn2partial,
        CaseId::ThmMainentirely,
        CaseId::StructSymrank2,
        CaseId::StructSymrank3,
        CaseId::StructSymdecomp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::ThmMain => "thm-main",
            CaseId::ThmNoSon => "thm-no-son",
            CaseId::ThmNoOn => "thm-no-on",
            CaseId::ExDeflation => "ex-deflation",
            CaseId::ExSingular => "ex-singular",
            CaseId::ExCoincide => "ex-coincide",
            CaseId::PropBlock => "prop-block",
            CaseId::ThmMainn2 => "thm-mainn2",
            CaseId::ThmMainn2partial => "thm-mainn2partial",
            CaseId::ThmMainentirely => "thm-mainentirely",
            CaseId::StructSymrank2 => "struct-symrank2",
            CaseId::StructSymrank3 => "struct-symrank3",
            CaseId::StructSymdecomp => "struct-symdecomp",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Quoted from the published statement of the result.
    Reported,
    /// Immediate from the construction.
    Elementary,
    /// Worked out independently of the solvers (closed form or exhaustive
    /// oracle).
    Worked,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub quantity: String,
    pub value: f64,
    pub tol: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedCase {
    pub id: CaseId,
    pub title: String,
    /// The case's tensors; the first one is the case's main tensor.
    pub tensors: Vec<(String, DenseTensor<f64>)>,
    pub expected: Vec<Expected>,
}

impl NamedCase {
    pub fn tensor(&self) -> &DenseTensor<f64> {
        &self.tensors[0].1
    }
}

fn expect(quantity: &str, value: f64, tol: f64, origin: Origin) -> Expected {
    Expected {
        quantity: quantity.into(),
        value,
        tol,
        origin,
    }
}

/// Tensors and headline expected values of a case. Property cases carry a
/// representative member of their random family.
pub fn build_case(id: CaseId) -> NamedCase {
    use Origin::*;
    let r3 = 3f64.sqrt();
    let (title, tensors, expected): (&str, Vec<(&str, DenseTensor<f64>)>, Vec<Expected>) = match id {
        CaseId::ThmMain => (
            "symmetric CON_3 optimum of sym(e1⊗e2⊗e3) is beaten by a non-symmetric one",
            vec![("T", t_main())],
            vec![
                expect("symmetric CON_3 relative residual", 0.7778, 5e-4, Reported),
                expect("CON_3 relative residual", 0.7071, 5e-4, Reported),
                expect("gap", 0.05, 0.0, Reported),
            ],
        ),
        CaseId::ThmNoSon => (
            "SON_3 optimum of a 2×2×2 symmetric tensor is not symmetric",
            vec![("T", t_no_son())],
            vec![
                expect("cyclic candidate residual", 2.0, 1e-6, Reported),
                expect("two-term candidate residual", r3 / 2.0, 1e-6, Reported),
                expect("rank-one candidate residual", r3, 1e-6, Reported),
                expect("SON_3 residual", 0.7071, 5e-4, Reported),
            ],
        ),
        CaseId::ThmNoOn => (
            "ON/SON/PCON rank-2 optima of a 2^4 symmetric tensor are not symmetric",
            vec![("T", t_no_on())],
            vec![
                expect("CON_2 residual", 2f64.sqrt(), 1e-4, Reported),
                expect("SON_2 residual", 1.75f64.sqrt(), 1e-4, Reported),
            ],
        ),
        CaseId::ExDeflation => (
            "orthogonal deflation stalls after one term",
            vec![("T", t_tex())],
            vec![
                expect("deflation residual", r3, 1e-6, Reported),
                expect("CON_2 residual", r3 / 2.0, 1e-6, Reported),
            ],
        ),
        CaseId::ExSingular => (
            "optimal CON_2 factors are not singular vectors",
            vec![("T", t_tex())],
            vec![
                expect("(T×₂v×₃v)₁", 1.0, 1e-12, Reported),
                expect("(T×₂v×₃v)₂", 1.5, 1e-12, Reported),
            ],
        ),
        CaseId::ExCoincide => (
            "CON_2 and CON_3 optima coincide without being exact",
            vec![("T", t_coincide())],
            vec![
                expect("CON_2 residual", r3 / 2.0, 1e-4, Reported),
                expect("CON_3 residual", r3 / 2.0, 1e-4, Reported),
            ],
        ),
        CaseId::PropBlock => {
            let t = random_tensor(vec![2, 2, 2], 0);
            let b = block_embed(&t, 2).expect("r ≥ 1");
            (
                "CON_r norm of a block-diagonal embedding is √r times the spectral norm",
                vec![("B(T)", b), ("T", t)],
                vec![expect("CON_r / (√r·spectral)", 1.0, 1e-6, Worked)],
            )
        }
        CaseId::ThmMainn2 => (
            "n = 2: symmetric and general CON_2 optima agree",
            vec![("T", random_symmetric(2, 3, 0))],
            vec![expect("symmetric − general objective", 0.0, 1e-6, Worked)],
        ),
        CaseId::ThmMainn2partial => (
            "n = 2: structured and general PCON_2 optima agree",
            vec![("T", random_symmetric(2, 3, 0))],
            vec![expect("structured − general objective", 0.0, 1e-6, Worked)],
        ),
        CaseId::ThmMainentirely => (
            "cross-orthogonal optima can be taken symmetric",
            vec![("T", random_symmetric(4, 3, 0))],
            vec![expect("symmetric − general objective", 0.0, 1e-6, Worked)],
        ),
        CaseId::StructSymrank2 => (
            "symmetric ON_2 tensors are sums of two orthogonal symmetric terms",
            vec![("T", symrank2_example())],
            vec![expect("verdict", 1.0, 0.0, Elementary)],
        ),
        CaseId::StructSymrank3 => (
            "symmetric SON_3 tensors of order 3 form two families",
            vec![("T", cyclic_family().assemble().expect("dims"))],
            vec![expect("verdict", 1.0, 0.0, Reported)],
        ),
        CaseId::StructSymdecomp => (
            "orthogonality in one mode forces symmetric terms",
            vec![("T", odeco_example().assemble().expect("dims"))],
            vec![expect("verdict", 1.0, 0.0, Elementary)],
        ),
    };
    NamedCase {
        id,
        title: title.into(),
        tensors: tensors.into_iter().map(|(n, t)| (n.to_string(), t)).collect(),
        expected,
    }
}

fn symrank2_example() -> DenseTensor<f64> {
    let v1 = unit(&[1.0, 2.0, 2.0]);
    let v2 = unit(&[2.0, 1.0, -2.0]);
    sum_of_outers(&[(1.5, vec![v1.clone(); 3]), (-0.5, vec![v2.clone(); 3])])
}

/// `σ(v⊗w⊗w + w⊗v⊗w + w⊗w⊗v)` with `v ⊥ w` in ℝ³.
pub fn cyclic_family() -> Decomposition<f64> {
    let v = unit(&[1.0, 2.0, 2.0]);
    let w = unit(&[2.0, 1.0, -2.0]);
    let terms = (0..3)
        .map(|odd| {
            let f = (0..3).map(|j| if j == odd { v.clone() } else { w.clone() }).collect();
            RankOneTerm::new(0.7, f)
        })
        .collect();
    Decomposition::from_terms(terms).expect("dims")
}

/// `Σ λ_k v_k^{⊗3}` with an orthonormal triple.
pub fn odeco_example() -> Decomposition<f64> {
    let vs = [unit(&[1.0, 2.0, 2.0]), unit(&[2.0, 1.0, -2.0]), unit(&[2.0, -2.0, 1.0])];
    let terms = vs
        .iter()
        .zip([2.0, -1.0, 0.5])
        .map(|(v, l)| RankOneTerm::symmetric(l, v.clone(), 3))
        .collect();
    Decomposition::from_terms(terms).expect("dims")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::SYMMETRY_TOL;

    #[test]
    fn entries_match_their_definitions() {
        let t = t_no_son();
        assert_eq!(t.get(&[0, 0, 1]), 1.0);
        assert_eq!(t.get(&[1, 1, 1]), 2.0);
        assert_eq!(t.get(&[0, 0, 0]), 0.0);
        assert_eq!(t.inner(&t).unwrap(), 7.0);
        let m = t_main();
        assert!((m.get(&[2, 0, 1]) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.data().iter().filter(|&&x| x != 0.0).count(), 6);
        assert_eq!(t_no_on().frobenius_norm(), 2.0);
        assert_eq!(t_coincide().data().iter().sum::<f64>(), 3.0);
        for t in [t_main(), t_no_son(), t_no_on(), t_coincide()] {
            assert!(t.is_symmetric(SYMMETRY_TOL).unwrap());
        }
    }

    #[test]
    fn block_embedding_of_a_basis_cube() {
        let t = outer(&[&e(2, 0)[..], &e(2, 0)[..], &e(2, 0)[..]]).unwrap();
        let b = block_embed(&t, 2).unwrap();
        assert_eq!(b.dims(), &[4, 4, 4]);
        assert_eq!(b.get(&[0, 0, 0]), 1.0);
        assert_eq!(b.get(&[2, 2, 2]), 1.0);
        assert_eq!(b.data().iter().sum::<f64>(), 2.0);
        assert_eq!(block_embed(&t, 1).unwrap(), t);
        let g = random_tensor(vec![2, 3, 2], 5);
        assert!((block_embed(&g, 3).unwrap().frobenius_norm() - 3f64.sqrt() * g.frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn case_ids_round_trip() {
        for id in CaseId::ALL {
            assert_eq!(id.as_str().parse::<CaseId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
            assert!(!build_case(id).expected.is_empty());
        }
        assert!(matches!("thm-none".parse::<CaseId>(), Err(Error::UnknownCase(_))));
    }
}
