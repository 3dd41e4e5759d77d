//! Structure of symmetric tensors with short orthogonal decompositions.

use serde::Serialize;

use crate::decomposition::{Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::orthogonality::{decomposition_check, Notion, ORTHO_TOL};
use crate::scalar::{dot, Scalar};

/// Factor equality after canonicalization.
const EQUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    /// Two orthogonal terms of a symmetric tensor are `σ_k v_k^{⊗d}`.
    Symrank2,
    /// Three strongly orthogonal terms are symmetric and orthonormal, or
    /// (order three) the cyclic `σ(v⊗w⊗w + w⊗v⊗w + w⊗w⊗v)`.
    Symrank3,
    /// A minimal decomposition with one mutually orthogonal mode has
    /// symmetric terms.
    Symdecomp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SymmetricTerms,
    Cyclic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureVerdict {
    pub kind: StructureKind,
    pub holds: bool,
    pub family: Option<Family>,
    pub reason: String,
}

fn close<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.iter().zip(b).all(|(x, y)| (*x - *y).modulus() <= EQUAL_TOL)
}

fn term_is_symmetric<S: Scalar>(t: &RankOneTerm<S>) -> bool {
    t.factors.windows(2).all(|w| close(&w[0], &w[1]))
}

fn symmetric_orthogonal<S: Scalar>(terms: &[RankOneTerm<S>]) -> bool {
    terms.iter().all(term_is_symmetric)
        && (0..terms.len()).all(|k| {
            (k + 1..terms.len()).all(|l| dot(&terms[k].factors[0], &terms[l].factors[0]).modulus() <= ORTHO_TOL)
        })
}

/// Three terms of order three that are a cyclic `v, w, w` arrangement.
fn cyclic<S: Scalar>(terms: &[RankOneTerm<S>]) -> bool {
    if terms.len() != 3 || terms[0].order() != 3 {
        return false;
    }
    let mut odd_modes = Vec::new();
    let mut odd = Vec::new();
    let mut pair = Vec::new();
    for t in terms {
        let f = &t.factors;
        let m = (0..3).find(|&m| {
            let (a, b) = ((m + 1) % 3, (m + 2) % 3);
            close(&f[a], &f[b]) && !close(&f[m], &f[a])
        });
        let Some(m) = m else {
            return false;
        };
        odd_modes.push(m);
        odd.push(&f[m]);
        pair.push(&f[(m + 1) % 3]);
    }
    odd_modes.sort_unstable();
    let sig = terms[0].sigma;
    let scale = terms.iter().map(|t| t.sigma.modulus()).fold(0.0, f64::max);
    odd_modes == [0, 1, 2]
        && odd.windows(2).all(|w| close(w[0], w[1]))
        && pair.windows(2).all(|w| close(w[0], w[1]))
        && dot(odd[0], pair[0]).modulus() <= ORTHO_TOL
        && terms.iter().all(|t| (t.sigma - sig).modulus() <= EQUAL_TOL * scale.max(1.0))
}

fn verdict(kind: StructureKind, family: Option<Family>, reason: impl Into<String>) -> StructureVerdict {
    StructureVerdict {
        kind,
        holds: family.is_some(),
        family,
        reason: reason.into(),
    }
}

/// Classifies `decomposition` (whose sum should be symmetric) against the
/// structure `kind` predicts. Factors are compared after canonicalization,
/// i.e. up to phase.
///
/// A non-symmetric sum gives a failing verdict. Inputs outside the
/// statement's hypotheses are errors: wrong number of terms, a decomposition
/// that is not orthogonal in the required sense, a zero coefficient, or
/// (two terms, or `Symdecomp`) one that is not minimal as measured by the
/// rank of the unfolding along an orthogonal mode.
pub fn check_symmetric_structure<S: Scalar>(
    decomposition: &Decomposition<S>,
    kind: StructureKind,
) -> Result<StructureVerdict> {
    let terms: Vec<RankOneTerm<S>> = decomposition.terms().iter().map(|t| t.canonical()).collect();
    let r = terms.len();
    let d = decomposition.dims().len();
    if r == 0 {
        return Err(Error::Structure("empty decomposition".into()));
    }
    if terms.iter().any(|t| t.sigma.modulus() == 0.0) {
        return Err(Error::Structure("a zero coefficient makes the decomposition non-minimal".into()));
    }
    let t = decomposition.assemble()?;
    if !t.is_cubical() {
        return Err(Error::Shape(format!("symmetric structure needs equal dims, got {:?}", t.dims())));
    }
    let scale = t.data().iter().fold(1.0f64, |m, x| m.max(x.modulus()));
    if !t.is_symmetric(EQUAL_TOL * scale)? {
        return Ok(verdict(kind, None, "the assembled tensor is not symmetric"));
    }
    let orthogonal_mode = (0..d).find(|&j| {
        (0..r).all(|k| (k + 1..r).all(|l| dot(&terms[k].factors[j], &terms[l].factors[j]).modulus() <= ORTHO_TOL))
    });
    let minimal = |j: usize| -> Result<()> {
        let rank = t.unfolding_rank(j, 1e-10)?;
        if rank < r {
            return Err(Error::Structure(format!(
                "unfolding along mode {j} has rank {rank} < {r} terms: not minimal"
            )));
        }
        Ok(())
    };
    match kind {
        StructureKind::Symrank2 => {
            if r != 2 {
                return Err(Error::Structure(format!("expected two terms, got {r}")));
            }
            if !decomposition_check(decomposition, &Notion::On, ORTHO_TOL)?.valid {
                return Err(Error::Structure("the terms are not orthogonal".into()));
            }
            minimal(orthogonal_mode.unwrap_or(0))?;
            Ok(if symmetric_orthogonal(&terms) {
                verdict(kind, Some(Family::SymmetricTerms), "two symmetric terms with orthogonal vectors")
            } else {
                verdict(kind, None, "a term is not symmetric up to phase")
            })
        }
        StructureKind::Symrank3 => {
            if r != 3 {
                return Err(Error::Structure(format!("expected three terms, got {r}")));
            }
            if !decomposition_check(decomposition, &Notion::Son, ORTHO_TOL)?.valid {
                return Err(Error::Structure("the terms are not strongly orthogonal".into()));
            }
            Ok(if symmetric_orthogonal(&terms) {
                verdict(kind, Some(Family::SymmetricTerms), "three symmetric terms with orthonormal vectors")
            } else if d == 3 && cyclic(&terms) {
                verdict(kind, Some(Family::Cyclic), "cyclic v⊗w⊗w + w⊗v⊗w + w⊗w⊗v with v ⊥ w")
            } else {
                verdict(kind, None, "neither symmetric orthonormal terms nor the cyclic family")
            })
        }
        StructureKind::Symdecomp => {
            if d < 3 {
                return Err(Error::Structure(format!("order {d} < 3")));
            }
            let j = orthogonal_mode
                .ok_or_else(|| Error::Structure("no mode with mutually orthogonal factors".into()))?;
            minimal(j)?;
            Ok(if terms.iter().all(term_is_symmetric) {
                verdict(kind, Some(Family::SymmetricTerms), "every term is symmetric up to phase")
            } else {
                verdict(kind, None, "a term has factors that differ beyond phase")
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{cyclic_family, odeco_example};
    use num_complex::Complex64;

    #[test]
    fn families_are_recognised() {
        let v = check_symmetric_structure(&odeco_example(), StructureKind::Symrank3).unwrap();
        assert_eq!(v.family, Some(Family::SymmetricTerms));
        let v = check_symmetric_structure(&cyclic_family(), StructureKind::Symrank3).unwrap();
        assert_eq!(v.family, Some(Family::Cyclic));
        let v = check_symmetric_structure(&odeco_example(), StructureKind::Symdecomp).unwrap();
        assert!(v.holds);
        let two = Decomposition::from_terms(odeco_example().terms()[..2].to_vec()).unwrap();
        assert!(check_symmetric_structure(&two, StructureKind::Symrank2).unwrap().holds);
    }

    #[test]
    fn hypotheses_are_enforced() {
        // The cyclic family has no orthogonal mode.
        assert!(matches!(
            check_symmetric_structure(&cyclic_family(), StructureKind::Symdecomp),
            Err(Error::Structure(_))
        ));
        assert!(matches!(
            check_symmetric_structure(&odeco_example(), StructureKind::Symrank2),
            Err(Error::Structure(_))
        ));
        let mut terms = odeco_example().into_terms();
        terms[1].sigma = 0.0;
        assert!(check_symmetric_structure(&Decomposition::from_terms(terms).unwrap(), StructureKind::Symdecomp).is_err());
    }

    #[test]
    fn phases_are_absorbed() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let a = vec![one, z];
        let b = vec![z, one];
        // i·a ⊗ (−i)·a ⊗ a is a ⊗ a ⊗ a.
        let d = Decomposition::from_terms(vec![
            RankOneTerm::new(one * 2.0, vec![a.iter().map(|x| x * i).collect(), a.iter().map(|x| -x * i).collect(), a.clone()]),
            RankOneTerm::new(one, vec![b.clone(), b.clone(), b.clone()]),
        ])
        .unwrap();
        assert!(check_symmetric_structure(&d, StructureKind::Symdecomp).unwrap().holds);
    }
}
