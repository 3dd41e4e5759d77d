//! Orthogonality notions between rank-one terms and certificates for whole
//! decompositions.
//!
//! For unit factors `x = x_1 ⊗ … ⊗ x_d` and `y = y_1 ⊗ … ⊗ y_d` with
//! per-mode inner products `a_j = ⟨x_j, y_j⟩`:
//!
//! * orthogonal (ON): `∏_j a_j = 0`;
//! * strongly orthogonal (SON): ON, and every mode is either orthogonal or
//!   parallel up to a phase (`|a_j| = 1` for unit vectors);
//! * completely orthogonal (CON): `a_j = 0` in every mode;
//! * `P`-partially orthogonal (PCON): `a_j = 0` for every mode in `P`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Default predicate tolerance. Looser than the construction tolerance
/// because retracted solver iterates carry small constraint drift.
pub const ORTHO_TOL: f64 = 1e-10;

/// Largest unit-norm defect accepted on factors handed to the checks.
pub const UNIT_TOL: f64 = 1e-8;

/// Orthogonality notion. `Pcon` carries its mode set (0-based, sorted,
/// nonempty).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", content = "modes", rename_all = "lowercase")]
pub enum Notion {
    On,
    Son,
    Con,
    Pcon(Vec<usize>),
}

impl Notion {
    /// Partial orthogonality over `modes`, deduplicated and sorted.
    pub fn pcon(modes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut modes: Vec<usize> = modes.into_iter().collect();
        modes.sort_unstable();
        modes.dedup();
        if modes.is_empty() {
            return Err(Error::Notion("PCON needs a nonempty mode set".into()));
        }
        Ok(Notion::Pcon(modes))
    }

    /// Checks the mode set against the tensor order.
    pub fn validate(&self, order: usize) -> Result<()> {
        if let Notion::Pcon(modes) = self {
            if modes.is_empty() {
                return Err(Error::Notion("PCON needs a nonempty mode set".into()));
            }
            if let Some(&bad) = modes.iter().find(|&&m| m >= order) {
                return Err(Error::Mode { mode: bad, order });
            }
            if modes.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Notion(format!("mode set {modes:?} is not sorted and unique")));
            }
        }
        Ok(())
    }

    /// Modes that must be orthogonal between every pair of terms (`None`
    /// for ON and SON, which have no fixed set).
    pub fn orthogonal_modes(&self, order: usize) -> Option<Vec<usize>> {
        match self {
            Notion::Con => Some((0..order).collect()),
            Notion::Pcon(p) => Some(p.clone()),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Notion::On => "on",
            Notion::Son => "son",
            Notion::Con => "con",
            Notion::Pcon(_) => "pcon",
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notion::Pcon(modes) => {
                let list: Vec<String> = modes.iter().map(|m| (m + 1).to_string()).collect();
                write!(f, "PCON{{{}}}", list.join(","))
            }
            other => f.write_str(&other.tag().to_uppercase()),
        }
    }
}

/// Per-pair audit record: the mode inner products and the verdict for each
/// notion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: Deserialize<'de>"
))]
pub struct PairCertificate<S: Scalar> {
    pub terms: (usize, usize),
    pub mode_inner: Vec<S>,
    pub orthogonal: bool,
    pub strongly_orthogonal: bool,
    pub completely_orthogonal: bool,
    /// Verdict for the PCON mode set, when one was requested.
    pub partially_orthogonal: Option<bool>,
    pub tolerance: f64,
}

impl<S: Scalar> PairCertificate<S> {
    pub fn holds(&self, notion: &Notion) -> bool {
        match notion {
            Notion::On => self.orthogonal,
            Notion::Son => self.strongly_orthogonal,
            Notion::Con => self.completely_orthogonal,
            Notion::Pcon(modes) => modes
                .iter()
                .all(|&j| self.mode_inner[j].modulus() <= self.tolerance),
        }
    }
}

/// Certificate over all `r(r−1)/2` pairs of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: Deserialize<'de>"
))]
pub struct DecompositionCertificate<S: Scalar> {
    pub notion: Notion,
    pub tolerance: f64,
    pub pairs: Vec<PairCertificate<S>>,
    pub valid: bool,
}

/// Compares two unit rank-one terms under every notion.
pub fn pair_check<S: Scalar>(
    x: &RankOneTerm<S>,
    y: &RankOneTerm<S>,
    notion: &Notion,
    tol: f64,
) -> Result<PairCertificate<S>> {
    if x.dims() != y.dims() {
        return Err(Error::Shape(format!(
            "terms with dims {:?} and {:?}",
            x.dims(),
            y.dims()
        )));
    }
    notion.validate(x.order())?;
    for t in [x, y] {
        if t.unit_defect() > UNIT_TOL {
            return Err(Error::Shape(format!(
                "factor norm off by {:.3e}; orthogonality checks need unit factors",
                t.unit_defect()
            )));
        }
    }
    Ok(certify_pair((0, 1), x, y, notion, tol))
}

fn certify_pair<S: Scalar>(
    terms: (usize, usize),
    x: &RankOneTerm<S>,
    y: &RankOneTerm<S>,
    notion: &Notion,
    tol: f64,
) -> PairCertificate<S> {
    let mode_inner: Vec<S> = x
        .factors
        .iter()
        .zip(&y.factors)
        .map(|(a, b)| dot(a, b))
        .collect();
    let product: f64 = mode_inner.iter().map(|a| a.modulus()).product();
    let orthogonal = product <= tol;
    let each_orth_or_parallel = mode_inner.iter().all(|a| {
        let m = a.modulus();
        m <= tol || (1.0 - m).abs() <= tol
    });
    let completely_orthogonal = mode_inner.iter().all(|a| a.modulus() <= tol);
    let partially_orthogonal = match notion {
        Notion::Pcon(modes) => Some(modes.iter().all(|&j| mode_inner[j].modulus() <= tol)),
        _ => None,
    };
    PairCertificate {
        terms,
        mode_inner,
        orthogonal,
        strongly_orthogonal: orthogonal && each_orth_or_parallel,
        completely_orthogonal,
        partially_orthogonal,
        tolerance: tol,
    }
}

/// Checks every pair of terms; the decomposition is valid iff every pair
/// satisfies `notion`.
pub fn decomposition_check<S: Scalar>(
    decomposition: &Decomposition<S>,
    notion: &Notion,
    tol: f64,
) -> Result<DecompositionCertificate<S>> {
    notion.validate(decomposition.dims().len())?;
    let terms = decomposition.terms();
    if let Some((k, t)) = terms
        .iter()
        .enumerate()
        .find(|(_, t)| t.unit_defect() > UNIT_TOL)
    {
        return Err(Error::Shape(format!(
            "term {k} has a factor norm off by {:.3e}",
            t.unit_defect()
        )));
    }
    let mut pairs = Vec::with_capacity(terms.len() * terms.len().saturating_sub(1) / 2);
    for k in 0..terms.len() {
        for l in k + 1..terms.len() {
            pairs.push(certify_pair((k, l), &terms[k], &terms[l], notion, tol));
        }
    }
    let valid = pairs.iter().all(|p| p.holds(notion));
    Ok(DecompositionCertificate {
        notion: notion.clone(),
        tolerance: tol,
        pairs,
        valid,
    })
}

/// `⟨v_{kj}, v_{k'j'}⟩ = 0` for all `k ≠ k'` and all mode pairs `(j, j')`.
pub fn cross_orthogonality_check<S: Scalar>(decomposition: &Decomposition<S>, tol: f64) -> Result<bool> {
    let dims = decomposition.dims();
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Shape(format!(
            "cross-mode inner products need equal dims, got {dims:?}"
        )));
    }
    let terms = decomposition.terms();
    for k in 0..terms.len() {
        for l in k + 1..terms.len() {
            for x in &terms[k].factors {
                for y in &terms[l].factors {
                    if dot(x, y).modulus() > tol {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::basis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> Vec<f64> {
        basis(n, i)
    }

    fn term(factors: Vec<Vec<f64>>) -> RankOneTerm<f64> {
        RankOneTerm::new(1.0, factors)
    }

    #[test]
    fn disjoint_basis_terms_are_completely_orthogonal() {
        let c = pair_check(
            &term(vec![e(2, 0), e(2, 0)]),
            &term(vec![e(2, 1), e(2, 1)]),
            &Notion::Con,
            ORTHO_TOL,
        )
        .unwrap();
        assert!(c.completely_orthogonal && c.strongly_orthogonal && c.orthogonal);
    }

    #[test]
    fn shared_first_mode_is_strong_but_not_complete() {
        let c = pair_check(
            &term(vec![e(2, 0), e(2, 0)]),
            &term(vec![e(2, 0), e(2, 1)]),
            &Notion::Son,
            ORTHO_TOL,
        )
        .unwrap();
        assert!(c.orthogonal && c.strongly_orthogonal && !c.completely_orthogonal);
    }

    #[test]
    fn perpendicular_triples_are_strongly_orthogonal() {
        let s = 0.5f64.sqrt();
        let b = [0.8321f64, 0.5547];
        let bn = (b[0] * b[0] + b[1] * b[1]).sqrt();
        let b = vec![b[0] / bn, b[1] / bn];
        let perp = |v: &[f64]| vec![-v[1], v[0]];
        let a = vec![s, s];
        let x = term(vec![a.clone(), b.clone(), a.clone()]);
        let y = term(vec![perp(&a), perp(&b), perp(&a)]);
        assert!(pair_check(&x, &y, &Notion::Son, ORTHO_TOL).unwrap().strongly_orthogonal);
    }

    #[test]
    fn pcon_requires_mode_set() {
        assert!(Notion::pcon(Vec::new()).is_err());
        let n = Notion::pcon([2, 0, 2]).unwrap();
        assert_eq!(n, Notion::Pcon(vec![0, 2]));
        assert!(n.validate(2).is_err());
        assert_eq!(n.to_string(), "PCON{1,3}");
    }

    #[test]
    fn pair_check_rejects_dim_mismatch() {
        let x = term(vec![e(2, 0), e(2, 0)]);
        let y = term(vec![e(3, 0), e(2, 0)]);
        assert!(pair_check(&x, &y, &Notion::On, ORTHO_TOL).is_err());
    }

    #[test]
    fn singleton_and_shared_frame_decompositions() {
        let single = Decomposition::from_terms(vec![term(vec![e(2, 0), e(2, 1)])]).unwrap();
        for notion in [Notion::On, Notion::Son, Notion::Con, Notion::Pcon(vec![1])] {
            assert!(decomposition_check(&single, &notion, ORTHO_TOL).unwrap().valid);
        }

        let s = 0.5f64.sqrt();
        let y1 = vec![s, -s];
        let y2 = vec![-s, -s];
        let ys = Decomposition::from_terms(vec![
            RankOneTerm::symmetric(-1.0, y1, 4),
            RankOneTerm::symmetric(1.0, y2, 4),
        ])
        .unwrap();
        assert!(decomposition_check(&ys, &Notion::Con, ORTHO_TOL).unwrap().valid);
        // y1 ⊥ y2, so all four cross products vanish.
        assert!(cross_orthogonality_check(&ys, 1e-12).unwrap());

        let odeco = Decomposition::from_terms(
            (0..3).map(|k| RankOneTerm::symmetric(1.0, e(3, k), 3)).collect(),
        )
        .unwrap();
        let cert = decomposition_check(&odeco, &Notion::Con, ORTHO_TOL).unwrap();
        assert!(cert.valid);
        assert_eq!(cert.pairs.len(), 3);
    }

    #[test]
    fn cross_orthogonality_examples() {
        let blocks = Decomposition::from_terms(vec![
            term(vec![e(4, 0), e(4, 1)]),
            term(vec![e(4, 2), e(4, 3)]),
        ])
        .unwrap();
        assert!(cross_orthogonality_check(&blocks, 1e-12).unwrap());
        let shared = Decomposition::from_terms(vec![
            term(vec![e(4, 0), e(4, 1)]),
            term(vec![e(4, 1), e(4, 2)]),
        ])
        .unwrap();
        assert!(!cross_orthogonality_check(&shared, 1e-12).unwrap());
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            if let Some(u) = crate::scalar::normalized(&v) {
                return u;
            }
        }
    }

    #[test]
    fn implication_chain_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..=4);
            let d = rng.random_range(1..=4);
            // Mix random vectors with shared and perpendicular ones so every
            // verdict occurs.
            let x: Vec<Vec<f64>> = (0..d).map(|_| random_unit(&mut rng, n)).collect();
            let y: Vec<Vec<f64>> = x
                .iter()
                .map(|v| match rng.random_range(0..3) {
                    0 => v.clone(),
                    1 if n >= 2 => {
                        let mut w = random_unit(&mut rng, n);
                        let c = dot(&w, v);
                        w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
                        crate::scalar::normalized(&w).unwrap_or_else(|| v.clone())
                    }
                    _ => random_unit(&mut rng, n),
                })
                .collect();
            let p: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.5)).collect();
            let notion = if p.is_empty() { Notion::Con } else { Notion::Pcon(p) };
            let c = pair_check(&term(x.clone()), &term(y.clone()), &notion, ORTHO_TOL).unwrap();
            if c.completely_orthogonal {
                assert!(c.strongly_orthogonal && c.holds(&notion));
            }
            if c.strongly_orthogonal {
                assert!(c.orthogonal);
            }
            let swapped = pair_check(&term(y), &term(x), &notion, ORTHO_TOL).unwrap();
            assert_eq!(
                (c.orthogonal, c.strongly_orthogonal, c.completely_orthogonal, c.partially_orthogonal),
                (
                    swapped.orthogonal,
                    swapped.strongly_orthogonal,
                    swapped.completely_orthogonal,
                    swapped.partially_orthogonal
                )
            );
        }
    }
}
