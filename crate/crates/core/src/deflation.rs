//! Greedy rank-one deflation, plain or with every new factor orthogonal to
//! the earlier factors of the same mode.

use serde::Serialize;

use crate::decomposition::{Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::linalg::{columns, orthogonal_complement};
use crate::orthogonality::Notion;
use crate::solvers::{self, rank_one_hopm, ApproxProblem, SolverConfig};
use crate::tensor::{basis, DenseTensor, SYMMETRY_TOL};

/// Coefficients at or below `ZERO_STEP · ‖T‖` count as a zero step. A
/// maximizer of order-four flatness is only located to about `ε^{1/3}`, so
/// the next coefficient carries noise of that size; anything smaller changes
/// the squared residual by under `1e-9 ‖T‖²`.
pub const ZERO_STEP: f64 = 2e-5;

#[derive(Debug, Clone, Serialize)]
pub struct DeflationStep {
    pub term: RankOneTerm<f64>,
    /// `⟨R, Y⟩` for the residual `R` before the step.
    pub sigma: f64,
    /// `‖R − σY‖` after the step.
    pub residual: f64,
    /// The best rank-one term of the residual was zero.
    pub zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeflationTrace {
    pub constrained: bool,
    pub symmetric: bool,
    pub steps: Vec<DeflationStep>,
    /// A zero step or an exhausted complement ended the run early; the
    /// remaining terms are zero.
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Deflation {
    pub trace: DeflationTrace,
    pub decomposition: Decomposition<f64>,
    pub residual: f64,
    /// `Σ σ_i²`.
    pub objective: f64,
}

fn is_symmetric(t: &DenseTensor<f64>) -> Result<bool> {
    if !t.is_cubical() {
        return Ok(false);
    }
    let scale = t.data().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    t.is_symmetric(SYMMETRY_TOL * scale)
}

/// Zero term with unit factors that respect the constraint when possible.
fn zero_term(dims: &[usize], complements: Option<&[Vec<Vec<f64>>]>) -> RankOneTerm<f64> {
    let factors = dims
        .iter()
        .enumerate()
        .map(|(j, &n)| match complements.and_then(|c| c[j].first()) {
            Some(v) => v.clone(),
            None => basis(n, 0),
        })
        .collect();
    RankOneTerm::new(0.0, factors)
}

/// `r` greedy steps. Each maximizes `|⟨R, y_1 ⊗ … ⊗ y_d⟩|` for the current
/// residual `R` by power iterations (symmetric iterations when `T` is
/// symmetric) and subtracts `σ y_1 ⊗ … ⊗ y_d` with `σ = ⟨R, ⊗ y_j⟩`. In the
/// constrained mode the search runs on `R` restricted to the orthogonal
/// complement of the earlier factors in every mode, so the terms are
/// completely orthogonal by construction.
pub fn deflate(t: &DenseTensor<f64>, r: usize, constrained: bool, config: &SolverConfig) -> Result<Deflation> {
    if r == 0 {
        return Err(Error::Infeasible("at least one deflation step is needed".into()));
    }
    let dims = t.dims().to_vec();
    let symmetric = is_symmetric(t)?;
    let zero_tol = ZERO_STEP * t.frobenius_norm();
    let mut residual = t.clone();
    let mut steps: Vec<DeflationStep> = Vec::with_capacity(r);
    let mut truncated = false;
    for i in 0..r {
        let cfg = config.clone().with_seed(config.seed.wrapping_add(i as u64));
        let prior: Vec<Vec<Vec<f64>>> = (0..dims.len())
            .map(|j| steps.iter().map(|s| s.term.factors[j].clone()).collect())
            .collect();
        let complements: Option<Vec<Vec<Vec<f64>>>> = constrained.then(|| {
            dims.iter()
                .zip(&prior)
                .map(|(&n, p)| columns(&orthogonal_complement(n, p)))
                .collect()
        });
        if truncated {
            steps.push(DeflationStep {
                term: zero_term(&dims, None),
                sigma: 0.0,
                residual: residual.frobenius_norm(),
                zero: true,
            });
            continue;
        }
        if let Some(c) = &complements {
            if c.iter().any(|q| q.is_empty()) {
                truncated = true;
                steps.push(DeflationStep {
                    term: zero_term(&dims, None),
                    sigma: 0.0,
                    residual: residual.frobenius_norm(),
                    zero: true,
                });
                continue;
            }
        }
        let reduced = match &complements {
            Some(c) => {
                let mut red = residual.clone();
                for (j, q) in c.iter().enumerate() {
                    red = red.contract_matrix(j, q)?;
                }
                red
            }
            None => residual.clone(),
        };
        let best = rank_one_hopm(&reduced, symmetric, &cfg)?;
        let lifted: Option<Vec<Vec<f64>>> = best.decomposition.terms().first().map(|term| match &complements {
            Some(c) => term
                .factors
                .iter()
                .zip(c)
                .map(|(u, q)| {
                    let mut y = vec![0.0; q[0].len()];
                    for (ui, col) in u.iter().zip(q) {
                        y.iter_mut().zip(col).for_each(|(a, b)| *a += ui * b);
                    }
                    y
                })
                .collect(),
            None => term.factors.clone(),
        });
        let refs_sigma = |f: &[Vec<f64>]| -> Result<f64> {
            let refs: Vec<&[f64]> = f.iter().map(|v| v.as_slice()).collect();
            residual.overlap(&refs)
        };
        let step = match lifted {
            Some(f) => {
                let sigma = refs_sigma(&f)?;
                if sigma.abs() <= zero_tol {
                    None
                } else {
                    let term = RankOneTerm::new(sigma, f).canonical();
                    residual = (&residual - &term.tensor()?)?;
                    Some(DeflationStep {
                        sigma: term.sigma,
                        term,
                        residual: residual.frobenius_norm(),
                        zero: false,
                    })
                }
            }
            None => None,
        };
        match step {
            Some(s) => steps.push(s),
            None => {
                truncated = true;
                steps.push(DeflationStep {
                    term: zero_term(&dims, complements.as_deref()),
                    sigma: 0.0,
                    residual: residual.frobenius_norm(),
                    zero: true,
                });
            }
        }
    }
    let decomposition = Decomposition::new(dims, steps.iter().map(|s| s.term.clone()).collect())?;
    Ok(Deflation {
        objective: steps.iter().map(|s| s.sigma * s.sigma).sum(),
        residual: residual.frobenius_norm(),
        trace: DeflationTrace {
            constrained,
            symmetric,
            steps,
            truncated,
        },
        decomposition,
    })
}

/// Greedy against direct: constrained deflation (whose terms are completely
/// orthogonal, hence feasible for every notion) against a direct solve.
#[derive(Debug, Clone, Serialize)]
pub struct DeflationGap {
    pub notion: Notion,
    pub rank: usize,
    pub deflation_objective: f64,
    pub direct_objective: f64,
    /// `|⟨T, S/‖S‖⟩|` for the deflation sum `S`.
    pub deflation_norm: f64,
    /// `‖T‖_{A_r}` from the direct solve.
    pub direct_norm: f64,
    pub deflation_residual: f64,
    pub direct_residual: f64,
    /// `direct_objective − deflation_objective`; nonnegative up to solver
    /// tolerance.
    pub gap: f64,
}

pub fn deflation_gap(t: &DenseTensor<f64>, r: usize, notion: Notion, config: &SolverConfig) -> Result<DeflationGap> {
    let greedy = deflate(t, r, true, config)?;
    let direct = solvers::solve(&ApproxProblem::new(t.clone(), notion.clone(), r).with_config(config.clone()))?;
    let s = greedy.decomposition.assemble()?;
    let sn = s.frobenius_norm();
    let deflation_norm = if sn > 0.0 { t.inner(&s)?.abs() / sn } else { 0.0 };
    Ok(DeflationGap {
        notion,
        rank: r,
        deflation_objective: greedy.objective,
        direct_objective: direct.objective,
        deflation_norm,
        direct_norm: direct.norm_value(),
        deflation_residual: greedy.residual,
        direct_residual: direct.residual,
        gap: direct.objective - greedy.objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthogonality::{decomposition_check, ORTHO_TOL};
    use crate::tensor::outer;

    fn cfg() -> SolverConfig {
        SolverConfig::default().with_starts(8)
    }

    fn odeco() -> DenseTensor<f64> {
        let s = 0.5f64.sqrt();
        let vs = [vec![s, s, 0.0], vec![-s, s, 0.0], vec![0.0, 0.0, 1.0]];
        let lambdas = [1.0, -3.0, 2.0];
        let mut t = DenseTensor::zeros(vec![3, 3, 3]).unwrap();
        for (l, v) in lambdas.iter().zip(&vs) {
            t = (&t + &outer(&[&v[..], &v[..], &v[..]]).unwrap().scaled(*l)).unwrap();
        }
        t
    }

    #[test]
    fn odeco_terms_come_out_by_magnitude() {
        for constrained in [false, true] {
            let d = deflate(&odeco(), 3, constrained, &cfg()).unwrap();
            let sig: Vec<f64> = d.trace.steps.iter().map(|s| s.sigma.abs()).collect();
            for (a, b) in sig.iter().zip([3.0, 2.0, 1.0]) {
                assert!((a - b).abs() < 1e-8, "{sig:?}");
            }
            assert!(d.residual < 1e-7);
            assert!(!d.trace.truncated);
            assert!(d.trace.steps.windows(2).all(|w| w[1].residual < w[0].residual));
        }
    }

    #[test]
    fn constrained_terms_are_completely_orthogonal() {
        let t = DenseTensor::from_fn(vec![3, 3, 3], |i| ((i[0] * 7 + i[1] * 3 + i[2] * 5) % 11) as f64 - 5.0).unwrap();
        let d = deflate(&t, 3, true, &cfg()).unwrap();
        assert!(decomposition_check(&d.decomposition, &Notion::Con, ORTHO_TOL).unwrap().valid);
        let gap = deflation_gap(&odeco(), 3, Notion::Con, &cfg()).unwrap();
        assert!(gap.gap.abs() < 1e-8);
    }

    #[test]
    fn exhausted_complement_truncates() {
        let t = odeco();
        let d = deflate(&t, 4, true, &cfg()).unwrap();
        assert!(d.trace.truncated && d.trace.steps[3].zero);
        assert_eq!(d.decomposition.len(), 4);
    }
}
