//! Monotone Riemannian gradient ascent over products of Stiefel manifolds.

use nalgebra::DMatrix;

use super::layout::{Forward, Layout};
use super::objective::multilinear_with_grads;
use crate::linalg::polar;
use crate::tensor::DenseTensor;

/// Smooth constraint violation subtracted from the fit in the penalty
/// phase. Summed over term pairs, with `a_j = ⟨v_{kj}, v_{lj}⟩`:
/// `On` is `(∏ a_j)²`, `Son` adds `Σ_j a_j² (1 − a_j²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PenaltyKind {
    On,
    Son,
}

pub(crate) struct Objective<'a> {
    pub tensor: &'a DenseTensor<f64>,
    pub layout: &'a Layout,
    pub penalty: Option<(PenaltyKind, f64)>,
}

pub(crate) struct Eval {
    /// Fit minus weighted penalty.
    pub value: f64,
    pub fwd: Forward,
    pub grads: Vec<DMatrix<f64>>,
}

impl Objective<'_> {
    pub fn eval(&self, frames: &[DMatrix<f64>]) -> Option<Eval> {
        let layout = self.layout;
        let fwd = layout.forward(frames)?;
        let d = self.tensor.order();
        let mut node_grads: Vec<Vec<f64>> = vec![Vec::new(); layout.nodes.len()];
        let mut scratch = vec![Vec::new(); d];
        let mut value = 0.0;
        for term in &layout.terms {
            let refs: Vec<&[f64]> = term.iter().map(|&n| fwd.vectors[n].as_slice()).collect();
            let s = multilinear_with_grads(self.tensor, &refs, &mut scratch);
            value += s * s;
            for (&n, g) in term.iter().zip(&scratch) {
                accumulate(&mut node_grads[n], g, 2.0 * s);
            }
        }
        if let Some((kind, rho)) = self.penalty {
            value -= rho * self.add_penalty(kind, rho, &fwd, &mut node_grads);
        }
        let grads = layout.backward(frames, &fwd, node_grads);
        Some(Eval { value, fwd, grads })
    }

    fn add_penalty(&self, kind: PenaltyKind, rho: f64, fwd: &Forward, node_grads: &mut [Vec<f64>]) -> f64 {
        let terms = &self.layout.terms;
        let d = self.tensor.order();
        let mut total = 0.0;
        let mut a = vec![0.0; d];
        for k in 0..terms.len() {
            for l in k + 1..terms.len() {
                for j in 0..d {
                    a[j] = dot(&fwd.vectors[terms[k][j]], &fwd.vectors[terms[l][j]]);
                }
                let prod: f64 = a.iter().product();
                total += prod * prod;
                for j in 0..d {
                    let others: f64 = (0..d).filter(|&i| i != j).map(|i| a[i]).product();
                    let mut da = 2.0 * prod * others;
                    if kind == PenaltyKind::Son {
                        total += a[j] * a[j] * (1.0 - a[j] * a[j]);
                        da += 2.0 * a[j] - 4.0 * a[j].powi(3);
                    }
                    let (nk, nl) = (terms[k][j], terms[l][j]);
                    let vl = fwd.vectors[nl].clone();
                    let vk = fwd.vectors[nk].clone();
                    accumulate(&mut node_grads[nk], &vl, -rho * da);
                    accumulate(&mut node_grads[nl], &vk, -rho * da);
                }
            }
        }
        total
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn accumulate(dst: &mut Vec<f64>, src: &[f64], w: f64) {
    if dst.is_empty() {
        dst.resize(src.len(), 0.0);
    }
    dst.iter_mut().zip(src).for_each(|(a, b)| *a += w * b);
}

/// Tangent projection `G − X sym(XᵀG)` of a Euclidean gradient.
fn riemannian(x: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let xtg = x.transpose() * g;
    let sym = (&xtg + xtg.transpose()) * 0.5;
    g - x * sym
}

fn retract(x: &DMatrix<f64>, xi: &DMatrix<f64>, t: f64) -> Option<DMatrix<f64>> {
    let y = x + xi * t;
    if y.ncols() == 1 {
        let n = y.norm();
        return (n > 1e-14).then(|| y / n);
    }
    polar(&y)
}

#[derive(Debug, Clone)]
pub(crate) struct Settings {
    pub max_iters: usize,
    /// Absolute tolerance on the Riemannian gradient norm.
    pub grad_tol: f64,
    /// Typical size of the objective, used for step-size bounds.
    pub scale: f64,
    pub keep_history: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub frames: Vec<DMatrix<f64>>,
    pub value: f64,
    pub initial: f64,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
    pub history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const POLISH_STEPS: usize = 50;

/// Backtracking ascent with Barzilai-Borwein trial steps. Every accepted
/// step increases the objective, so the value sequence is nondecreasing.
pub(crate) fn ascend(obj: &Objective<'_>, frames: Vec<DMatrix<f64>>, s: &Settings) -> Option<Outcome> {
    let mut frames = frames;
    let mut e = obj.eval(&frames)?;
    let initial = e.value;
    let mut history = if s.keep_history { vec![e.value] } else { Vec::new() };
    let scale = s.scale.max(f64::MIN_POSITIVE);
    let (t_min, t_max) = (1e-12 / scale, 1e4 / scale);
    let mut t = 0.2 / scale;
    let mut xi: Vec<DMatrix<f64>> = frames.iter().zip(&e.grads).map(|(x, g)| riemannian(x, g)).collect();
    let mut monotone = true;
    let mut converged = false;
    let mut stalls = 0;
    let mut iterations = 0;
    while iterations < s.max_iters {
        let gnorm2: f64 = xi.iter().map(|m| m.norm_squared()).sum();
        if gnorm2.sqrt() <= s.grad_tol {
            converged = true;
            break;
        }
        let mut accepted = None;
        let mut trial = t.clamp(t_min, t_max);
        for _ in 0..60 {
            let cand: Option<Vec<DMatrix<f64>>> = frames
                .iter()
                .zip(&xi)
                .map(|(x, d)| retract(x, d, trial))
                .collect();
            if let Some(cand) = cand {
                if let Some(ec) = obj.eval(&cand) {
                    if ec.value >= e.value + ARMIJO * trial * gnorm2 {
                        accepted = Some((cand, ec));
                        break;
                    }
                }
            }
            trial *= 0.5;
            if trial < t_min * 1e-4 {
                break;
            }
        }
        let Some((mut cand, ec)) = accepted else {
            // No ascent is possible at working precision.
            converged = true;
            break;
        };
        iterations += 1;
        if ec.value < e.value {
            monotone = false;
        }
        let gain = ec.value - e.value;
        obj.layout.reseat(&mut cand, &ec.fwd);
        let xi_new: Vec<DMatrix<f64>> = cand.iter().zip(&ec.grads).map(|(x, g)| riemannian(x, g)).collect();
        // Barzilai-Borwein step from ambient differences.
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..frames.len() {
            let sd = &cand[i] - &frames[i];
            let yd = &xi_new[i] - &xi[i];
            ss += sd.norm_squared();
            sy += sd.dot(&yd);
        }
        t = if sy < 0.0 { ss / -sy } else { trial * 2.0 };
        frames = cand;
        e = ec;
        xi = xi_new;
        if s.keep_history {
            history.push(e.value);
        }
        if gain <= 1e-15 * scale {
            stalls += 1;
            if stalls >= 3 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    // Objective differences drown in rounding once the iterate is within
    // about √ε of a maximizer; finish by shrinking the gradient instead.
    let mut gnorm: f64 = xi.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
    // Flat maxima need growing steps, so each trial starts above the last
    // accepted one.
    let mut reach = t.clamp(t_min, t_max);
    for _ in 0..POLISH_STEPS {
        if gnorm == 0.0 {
            break;
        }
        let mut trial = (4.0 * reach).min(1e8 * t_max);
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Option<Vec<DMatrix<f64>>> = frames.iter().zip(&xi).map(|(x, d)| retract(x, d, trial)).collect();
            if let Some(ec) = cand.as_ref().and_then(|c| obj.eval(c)) {
                let mut cand = cand.expect("evaluated");
                obj.layout.reseat(&mut cand, &ec.fwd);
                let xi_c: Vec<DMatrix<f64>> = cand.iter().zip(&ec.grads).map(|(x, g)| riemannian(x, g)).collect();
                let g_c = xi_c.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
                if g_c < gnorm && ec.value >= e.value - 1e-14 * scale {
                    reach = trial;
                    accepted = Some((cand, ec, xi_c, g_c));
                    break;
                }
            }
            trial *= 0.5;
        }
        let Some((cand, ec, xi_c, g_c)) = accepted else {
            break;
        };
        e = ec;
        frames = cand;
        xi = xi_c;
        gnorm = g_c;
    }
    Some(Outcome {
        frames,
        value: e.value,
        initial,
        iterations,
        converged,
        monotone,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::layout;
    use crate::tensor::outer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn settings() -> Settings {
        Settings {
            max_iters: 2000,
            grad_tol: 1e-10,
            scale: 1.0,
            keep_history: true,
        }
    }

    #[test]
    fn ascent_recovers_an_odeco_tensor() {
        // 3 e1^3 + 2 f^3 with f ⊥ e1.
        let s = 0.5f64.sqrt();
        let e1 = [1.0, 0.0, 0.0];
        let f = [0.0, s, s];
        let t = (&outer(&[&e1[..], &e1[..], &e1[..]]).unwrap().scaled(3.0)
            + &outer(&[&f[..], &f[..], &f[..]]).unwrap().scaled(2.0))
            .unwrap();
        let layout = layout::con(&[3, 3, 3], 2, false);
        let obj = Objective {
            tensor: &t,
            layout: &layout,
            penalty: None,
        };
        let mut best: f64 = 0.0;
        for seed in 0..8 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = ascend(&obj, layout.random_frames(&mut rng), &Settings { scale: 13.0, ..settings() }).unwrap();
            assert!(out.monotone);
            assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
            best = best.max(out.value);
        }
        assert!((best - 13.0).abs() < 1e-9, "{best}");
    }

    #[test]
    fn gradient_matches_finite_differences_with_penalty() {
        let t = DenseTensor::from_fn(vec![2, 2, 2], |i| (i[0] as f64 + 1.0) * (i[1] as f64 - 0.3) + i[2] as f64).unwrap();
        let layout = layout::free(&[2, 2, 2], 2);
        let obj = Objective {
            tensor: &t,
            layout: &layout,
            penalty: Some((PenaltyKind::Son, 3.0)),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let frames = layout.random_frames(&mut rng);
        let e = obj.eval(&frames).unwrap();
        let h = 1e-6;
        for fi in 0..frames.len() {
            for idx in 0..frames[fi].len() {
                let mut p = frames.clone();
                p[fi][idx] += h;
                let mut m = frames.clone();
                m[fi][idx] -= h;
                let fd = (obj.eval(&p).unwrap().value - obj.eval(&m).unwrap().value) / (2.0 * h);
                assert!((fd - e.grads[fi][idx]).abs() < 1e-5);
            }
        }
    }
}
