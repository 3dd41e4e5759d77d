//! Exhaustive angle-grid oracle with a certified bracket on the optimum.
//!
//! Every supported layout is rewritten as a function of at most four
//! angles: in ℝ² a unit vector (or a 2-frame) is one rotation angle and an
//! orthogonal complement is the quarter turn of its partner; in ℝ³ a
//! symmetric frame is a ZYZ Euler rotation. The objective is a
//! trigonometric polynomial in the angles.
//!
//! The angle box is covered by a coarse grid and refined by branch and
//! bound. For a cell with center `c`, half-widths `h` and radius `ρ = ‖h‖`,
//! exact value, gradient and Hessian at `c` give the upper bound
//!
//! `f(c) + max_{‖δ‖≤ρ} (gᵀδ + ½δᵀHδ) + Ω³/12`, `Ω = Σ_a D_a h_a`,
//!
//! where the quadratic maximum is bounded through its Lagrangian dual and
//! `D_a` is the trigonometric degree of the objective in angle `a`. Along any
//! segment in the cell the objective is a trigonometric sum of frequency at
//! most `Ω` with values in `[0, ‖T‖²]`, and Bernstein's inequality turns that
//! into the cubic remainder. Cells whose bound falls
//! below the best value found are discarded; the search stops when the
//! largest remaining bound is within the tolerance of the best value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layout::{self, Layout, Node};
use super::patterns;
use super::{sigma_from_factors, tensor_is_symmetric, ApproxProblem};
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::orthogonality::Notion;
use crate::tensor::DenseTensor;

/// Most angles a model may use.
pub const MAX_ANGLES: usize = 4;
const M: usize = MAX_ANGLES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Required width of the bracket, on the objective's own scale.
    pub tol: f64,
    /// Finest initial grid step in radians (coarsened to respect
    /// `initial_cells`).
    pub step: f64,
    pub initial_cells: usize,
    /// Cell evaluations after which the oracle gives up.
    pub max_cells: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            step: PI / 180.0,
            initial_cells: 20_000,
            max_cells: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub notion: Notion,
    pub rank: usize,
    pub symmetric: bool,
    pub structured: bool,
    pub angles: usize,
    pub models: usize,
    /// Initial grid step in radians.
    pub resolution: f64,
    /// Deepest bisection level reached.
    pub depth: usize,
    pub cells: usize,
    pub best_model: String,
    pub best_params: Vec<f64>,
    /// Certified bracket `[lo, hi]` on the optimal objective; `lo` is
    /// attained by `decomposition`.
    pub lo: f64,
    pub hi: f64,
    pub decomposition: Decomposition<f64>,
}

impl OracleReport {
    pub fn value(&self) -> f64 {
        self.lo
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lo - slack && value <= self.hi + slack
    }
}

#[derive(Debug, Clone, Copy)]
struct Jet {
    v: f64,
    g: [f64; M],
    h: [[f64; M]; M],
}

impl Jet {
    const ZERO: Jet = Jet {
        v: 0.0,
        g: [0.0; M],
        h: [[0.0; M]; M],
    };

    fn constant(v: f64) -> Jet {
        Jet { v, ..Jet::ZERO }
    }

    /// `cos` and `sin` of `x_a + offset`.
    fn cos_sin(x: &[f64], a: usize, offset: f64) -> (Jet, Jet) {
        let th = x[a] + offset;
        let (s, c) = th.sin_cos();
        let mut jc = Jet::constant(c);
        let mut js = Jet::constant(s);
        jc.g[a] = -s;
        jc.h[a][a] = -c;
        js.g[a] = c;
        js.h[a][a] = -s;
        (jc, js)
    }

    fn mul(&self, o: &Jet) -> Jet {
        let mut r = Jet::constant(self.v * o.v);
        for i in 0..M {
            r.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..M {
                r.h[i][j] = self.v * o.h[i][j] + o.v * self.h[i][j] + self.g[i] * o.g[j] + o.g[i] * self.g[j];
            }
        }
        r
    }

    fn add_scaled(&mut self, o: &Jet, w: f64) {
        self.v += w * o.v;
        for i in 0..M {
            self.g[i] += w * o.g[i];
            for j in 0..M {
                self.h[i][j] += w * o.h[i][j];
            }
        }
    }

    fn add(&self, o: &Jet) -> Jet {
        let mut r = *self;
        r.add_scaled(o, 1.0);
        r
    }

    fn neg(&self) -> Jet {
        let mut r = Jet::ZERO;
        r.add_scaled(self, -1.0);
        r
    }
}

/// How one factor depends on the angles.
#[derive(Debug, Clone)]
enum VecModel {
    /// `(cos, sin)(x_a + offset)` in ℝ².
    Planar { angle: usize, offset: f64 },
    /// `Rz(α) Ry(β) e₃` in ℝ³.
    Sphere { alpha: usize, beta: usize },
    /// Column `col` of `Rz(α) Ry(β) Rz(γ)`.
    Euler { alpha: usize, beta: usize, gamma: usize, col: usize },
}

impl VecModel {
    /// Angles the entries depend on; each entry is of degree one in each.
    fn angles(&self) -> Vec<usize> {
        match *self {
            VecModel::Planar { angle, .. } => vec![angle],
            VecModel::Sphere { alpha, beta } => vec![alpha, beta],
            VecModel::Euler { alpha, beta, gamma, .. } => vec![alpha, beta, gamma],
        }
    }

    fn jets(&self, x: &[f64]) -> Vec<Jet> {
        match *self {
            VecModel::Planar { angle, offset } => {
                let (c, s) = Jet::cos_sin(x, angle, offset);
                vec![c, s]
            }
            VecModel::Sphere { alpha, beta } => {
                let (ca, sa) = Jet::cos_sin(x, alpha, 0.0);
                let (cb, sb) = Jet::cos_sin(x, beta, 0.0);
                vec![ca.mul(&sb), sa.mul(&sb), cb]
            }
            VecModel::Euler { alpha, beta, gamma, col } => {
                let (ca, sa) = Jet::cos_sin(x, alpha, 0.0);
                let (cb, sb) = Jet::cos_sin(x, beta, 0.0);
                let (cg, sg) = Jet::cos_sin(x, gamma, 0.0);
                match col {
                    0 => vec![
                        ca.mul(&cb).mul(&cg).add(&sa.mul(&sg).neg()),
                        sa.mul(&cb).mul(&cg).add(&ca.mul(&sg)),
                        sb.mul(&cg).neg(),
                    ],
                    1 => vec![
                        ca.mul(&cb).mul(&sg).neg().add(&sa.mul(&cg).neg()),
                        sa.mul(&cb).mul(&sg).neg().add(&ca.mul(&cg)),
                        sb.mul(&sg),
                    ],
                    _ => vec![ca.mul(&sb), sa.mul(&sb), cb],
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Model {
    label: String,
    domains: Vec<f64>,
    vecs: Vec<VecModel>,
    terms: Vec<Vec<usize>>,
    /// Trigonometric degree of the objective in each angle.
    degrees: Vec<f64>,
}

impl Model {
    fn angles(&self) -> usize {
        self.domains.len()
    }

    fn from_layout(layout: &Layout, dims: &[usize]) -> Result<Model> {
        let n = dims[0];
        if dims.iter().any(|&x| x != n) || !(n == 2 || n == 3) {
            return Err(Error::Unsupported(format!("dims {dims:?}: only ℝ² or ℝ³ in every mode")));
        }
        let mut domains = Vec::new();
        let mut frame_angles: Vec<Option<Vec<usize>>> = vec![None; layout.frames.len()];
        let mut vecs: Vec<VecModel> = Vec::with_capacity(layout.nodes.len());
        let mut angles_of = |frame: usize, want: &[f64], domains: &mut Vec<f64>| -> Vec<usize> {
            frame_angles[frame]
                .get_or_insert_with(|| {
                    want.iter()
                        .map(|&len| {
                            domains.push(len);
                            domains.len() - 1
                        })
                        .collect()
                })
                .clone()
        };
        for node in &layout.nodes {
            let v = match (n, node) {
                (2, Node::Column { frame, col }) => {
                    let a = angles_of(*frame, &[PI], &mut domains)[0];
                    VecModel::Planar {
                        angle: a,
                        offset: *col as f64 * PI / 2.0,
                    }
                }
                (2, Node::Complement { frame, against }) => match against.as_slice() {
                    [] => VecModel::Planar {
                        angle: angles_of(*frame, &[PI], &mut domains)[0],
                        offset: 0.0,
                    },
                    [b] => match &vecs[*b] {
                        VecModel::Planar { angle, offset } => VecModel::Planar {
                            angle: *angle,
                            offset: offset + PI / 2.0,
                        },
                        _ => unreachable!("planar layouts only hold planar vectors"),
                    },
                    _ => return Err(Error::Unsupported("complement of two vectors in ℝ²".into())),
                },
                (3, Node::Column { frame, col }) => {
                    let cols = layout.frames[*frame].1;
                    if layout.frames.len() != 1 {
                        return Err(Error::Unsupported(
                            "in ℝ³ only a single shared frame (symmetric terms) is parametrized".into(),
                        ));
                    }
                    if cols == 1 {
                        let a = angles_of(*frame, &[2.0 * PI, PI], &mut domains);
                        VecModel::Sphere { alpha: a[0], beta: a[1] }
                    } else {
                        let a = angles_of(*frame, &[2.0 * PI, PI, PI], &mut domains);
                        VecModel::Euler {
                            alpha: a[0],
                            beta: a[1],
                            gamma: a[2],
                            col: *col,
                        }
                    }
                }
                _ => return Err(Error::Unsupported(format!("layout `{}` has no angle model", layout.label))),
            };
            vecs.push(v);
        }
        if domains.len() > MAX_ANGLES {
            return Err(Error::Unsupported(format!(
                "layout `{}` needs {} angles, at most {MAX_ANGLES} are supported",
                layout.label,
                domains.len()
            )));
        }
        // σ_k is multilinear in its factors, so its degree in an angle counts
        // the factors that move with it; squaring doubles that.
        let mut degrees = vec![0.0; domains.len()];
        for term in &layout.terms {
            let mut per = vec![0.0; domains.len()];
            for &node in term {
                for a in vecs[node].angles() {
                    per[a] += 1.0;
                }
            }
            for (d, p) in degrees.iter_mut().zip(per) {
                *d = f64::max(*d, 2.0 * p);
            }
        }
        Ok(Model {
            label: layout.label.clone(),
            domains,
            vecs,
            terms: layout.terms.clone(),
            degrees,
        })
    }

    /// Objective jet at `x` for a tensor with unit norm.
    fn jet(&self, t: &DenseTensor<f64>, x: &[f64]) -> Jet {
        let vjets: Vec<Vec<Jet>> = self.vecs.iter().map(|v| v.jets(x)).collect();
        let dims = t.dims();
        let mut total = Jet::ZERO;
        for term in &self.terms {
            // Contract the last mode against constants first, then the rest.
            let d = dims.len();
            let n_last = dims[d - 1];
            let last = &vjets[term[d - 1]];
            let mut cur: Vec<Jet> = t
                .data()
                .chunks_exact(n_last)
                .map(|chunk| {
                    let mut acc = Jet::ZERO;
                    for (c, vj) in chunk.iter().zip(last) {
                        if *c != 0.0 {
                            acc.add_scaled(vj, *c);
                        }
                    }
                    acc
                })
                .collect();
            for j in (0..d - 1).rev() {
                let v = &vjets[term[j]];
                cur = cur
                    .chunks_exact(dims[j])
                    .map(|chunk| {
                        let mut acc = Jet::ZERO;
                        for (c, vj) in chunk.iter().zip(v) {
                            let p = c.mul(vj);
                            acc.add_scaled(&p, 1.0);
                        }
                        acc
                    })
                    .collect();
            }
            let s = cur[0];
            total.add_scaled(&s.mul(&s), 1.0);
        }
        total
    }

    fn factors(&self, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let vals: Vec<Vec<f64>> = self.vecs.iter().map(|v| v.jets(x).iter().map(|j| j.v).collect()).collect();
        self.terms
            .iter()
            .map(|term| term.iter().map(|&n| vals[n].clone()).collect())
            .collect()
    }
}

/// `max_{‖δ‖≤ρ} gᵀδ + ½δᵀHδ`, bounded above through the Lagrangian dual
/// `min_{μ ≥ max(λ_max, 0)} ½ gᵀ(μI − H)⁻¹g + ½μρ²`.
fn quadratic_ball_bound(g: &[f64], h: &DMatrix<f64>, rho: f64) -> f64 {
    let m = g.len();
    let eig = h.clone().symmetric_eigen();
    let gt = eig.eigenvectors.transpose() * DVector::from_column_slice(g);
    let lam: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let lmax = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gnorm = gt.norm();
    let phi = |mu: f64| -> f64 {
        let mut s = 0.5 * mu * rho * rho;
        for i in 0..m {
            let gi = gt[i];
            if gi != 0.0 {
                let den = mu - lam[i];
                if den <= 0.0 {
                    return f64::INFINITY;
                }
                s += 0.5 * gi * gi / den;
            }
        }
        s
    };
    let dphi = |mu: f64| -> f64 {
        let mut s = 0.5 * rho * rho;
        for i in 0..m {
            let den = mu - lam[i];
            if gt[i] != 0.0 {
                s -= 0.5 * gt[i] * gt[i] / (den * den);
            }
        }
        s
    };
    let lower = lmax.max(0.0);
    if lmax < 0.0 && dphi(0.0) >= 0.0 {
        return phi(0.0);
    }
    if gnorm == 0.0 {
        return 0.5 * lower * rho * rho;
    }
    let mut lo = lower;
    let mut hi = lmax + gnorm / rho + 1e-300;
    if hi <= lo {
        hi = lo + gnorm / rho;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dphi(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    phi(hi)
}

#[derive(Debug, Clone)]
struct Cell {
    ub: f64,
    value: f64,
    model: usize,
    center: Vec<f64>,
    half: Vec<f64>,
    depth: usize,
    id: u64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.total_cmp(&other.ub).then_with(|| other.id.cmp(&self.id))
    }
}

fn hessian(j: &Jet, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |a, b| 0.5 * (j.h[a][b] + j.h[b][a]))
}

fn evaluate(model: &Model, t: &DenseTensor<f64>, center: Vec<f64>, half: Vec<f64>, depth: usize) -> Cell {
    let m = model.angles();
    let j = model.jet(t, &center);
    let rho = half.iter().map(|h| h * h).sum::<f64>().sqrt();
    let quad = quadratic_ball_bound(&j.g[..m], &hessian(&j, m), rho);
    // On the segment to any point of the cell the objective is a
    // trigonometric sum with frequencies at most Ω and, for a unit-norm
    // tensor, values in [0, 1]. Bernstein's inequality bounds its third
    // derivative by Ω³/2, so the Taylor remainder is at most Ω³/12.
    let omega: f64 = model.degrees.iter().zip(&half).map(|(d, h)| d * h).sum();
    Cell {
        ub: j.v + quad + omega.powi(3) / 12.0,
        value: j.v,
        model: 0,
        center,
        half,
        depth,
        id: 0,
    }
}

/// Newton ascent in angle space (gradient steps where the Hessian is not
/// negative definite). Returns the best point visited and its value.
fn polish(model: &Model, t: &DenseTensor<f64>, x0: &[f64]) -> (Vec<f64>, f64) {
    let m = model.angles();
    let mut x = x0.to_vec();
    let mut j = model.jet(t, &x);
    for _ in 0..100 {
        let g = DVector::from_column_slice(&j.g[..m]);
        if g.norm() < 1e-15 {
            break;
        }
        let h = hessian(&j, m);
        let newton = (-&h).cholesky().map(|c| c.solve(&g));
        let dir = newton.unwrap_or_else(|| g.clone());
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, b)| a + step * b).collect();
            let jc = model.jet(t, &cand);
            if jc.v > j.v {
                x = cand;
                j = jc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, j.v)
}

/// Layouts that exactly cover the feasible set of `problem`.
fn problem_layouts(problem: &ApproxProblem) -> Result<Vec<Layout>> {
    let t = &problem.tensor;
    let dims = t.dims();
    let r = problem.rank;
    if problem.symmetric {
        let r = match problem.notion {
            Notion::On | Notion::Son => r.min(dims[0]),
            _ => r,
        };
        return Ok(vec![layout::con(dims, r, true)]);
    }
    Ok(match &problem.notion {
        Notion::Con => vec![layout::con(dims, r, false)],
        Notion::Pcon(p) => vec![layout::pcon(dims, r, p, problem.structured)],
        Notion::Son | Notion::On if r > patterns::MAX_PATTERN_RANK => {
            return Err(Error::Unsupported(format!(
                "patterns are enumerated up to rank {}",
                patterns::MAX_PATTERN_RANK
            )))
        }
        Notion::Son => patterns::son_layouts(dims, r, tensor_is_symmetric(t)?),
        Notion::On => patterns::on_layouts(dims, r, tensor_is_symmetric(t)?).0,
    })
}

/// Certified global optimum of `problem`'s objective over the angle
/// parametrization. Fails with `Unsupported` outside ℝ² (any notion) and
/// symmetric terms in ℝ³, and with `NotCertified` when the cell budget runs
/// out before the bracket closes.
pub fn grid_oracle(problem: &ApproxProblem, config: &OracleConfig) -> Result<OracleReport> {
    problem.validate()?;
    let t0 = &problem.tensor;
    let layouts = problem_layouts(problem)?;
    let models: Vec<Model> = layouts
        .iter()
        .map(|l| Model::from_layout(l, t0.dims()))
        .collect::<Result<_>>()?;
    let norm = t0.frobenius_norm();
    let angles = models.iter().map(|m| m.angles()).max().unwrap_or(0);
    let report = |lo: f64, hi: f64, depth, cells, best: Option<(usize, Vec<f64>)>, resolution| -> Result<OracleReport> {
        let (label, params, decomposition) = match best {
            Some((mi, x)) => (
                models[mi].label.clone(),
                x.clone(),
                sigma_from_factors(t0, models[mi].factors(&x))?,
            ),
            None => (String::new(), Vec::new(), Decomposition::empty(t0.dims().to_vec())?),
        };
        Ok(OracleReport {
            notion: problem.notion.clone(),
            rank: problem.rank,
            symmetric: problem.symmetric,
            structured: problem.structured,
            angles,
            models: models.len(),
            resolution,
            depth,
            cells,
            best_model: label,
            best_params: params,
            lo,
            hi,
            decomposition,
        })
    };
    if norm == 0.0 {
        return report(0.0, 0.0, 0, 0, None, config.step);
    }
    let t = t0.scaled(1.0 / norm);
    let scale = norm * norm;
    let tol = config.tol / scale;

    // Uniform step, coarsened so the initial grid respects the budget.
    let volume: f64 = models.iter().map(|m| m.domains.iter().product::<f64>()).sum();
    let cells_per_volume = |step: f64| -> f64 {
        models
            .iter()
            .map(|m| m.domains.iter().map(|l| (l / step).ceil()).product::<f64>())
            .sum()
    };
    let mut step = config.step;
    if cells_per_volume(step) > config.initial_cells as f64 {
        step = (volume / config.initial_cells as f64).powf(1.0 / angles.max(1) as f64);
        while cells_per_volume(step) > config.initial_cells as f64 {
            step *= 1.05;
        }
    }

    let mut jobs: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for (mi, model) in models.iter().enumerate() {
        let counts: Vec<usize> = model.domains.iter().map(|l| (l / step).ceil() as usize).collect();
        let widths: Vec<f64> = model.domains.iter().zip(&counts).map(|(l, &c)| l / c as f64).collect();
        let total: usize = counts.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut center = vec![0.0; counts.len()];
            for a in (0..counts.len()).rev() {
                let i = rem % counts[a];
                rem /= counts[a];
                center[a] = (i as f64 + 0.5) * widths[a];
            }
            jobs.push((mi, center, widths.iter().map(|w| w / 2.0).collect()));
        }
    }
    let mut cells_evaluated = jobs.len();
    let mut next_id = 0u64;
    let mut cells: Vec<Cell> = jobs
        .into_par_iter()
        .map(|(mi, c, h)| Cell {
            model: mi,
            ..evaluate(&models[mi], &t, c, h, 0)
        })
        .collect();
    for c in cells.iter_mut() {
        c.id = next_id;
        next_id += 1;
    }

    let mut best: (f64, usize, Vec<f64>) = (f64::NEG_INFINITY, 0, Vec::new());
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| cells[b].value.total_cmp(&cells[a].value).then(a.cmp(&b)));
    for &i in order.iter().take(16) {
        let c = &cells[i];
        let (x, v) = polish(&models[c.model], &t, &c.center);
        if v > best.0 {
            best = (v, c.model, x);
        }
    }
    let mut heap: BinaryHeap<Cell> = cells.into_iter().filter(|c| c.ub > best.0).collect();
    let mut depth = 0;
    let batch = 64;
    loop {
        let hi = heap.peek().map_or(best.0, |c| c.ub.max(best.0));
        if hi - best.0 <= tol {
            return report(best.0 * scale, hi * scale, depth, cells_evaluated, Some((best.1, best.2)), step);
        }
        if cells_evaluated >= config.max_cells {
            return Err(Error::NotCertified {
                lo: best.0 * scale,
                hi: hi * scale,
            });
        }
        let mut parents = Vec::with_capacity(batch);
        while parents.len() < batch {
            match heap.pop() {
                Some(c) if c.ub > best.0 + tol => parents.push(c),
                Some(c) => {
                    // Within tolerance of the incumbent: nothing more to gain.
                    let _ = c;
                }
                None => break,
            }
        }
        if parents.is_empty() {
            continue;
        }
        let children: Vec<(usize, Vec<f64>, Vec<f64>, usize)> = parents
            .iter()
            .flat_map(|p| {
                let m = p.center.len();
                (0..1usize << m).map(move |mask| {
                    let half: Vec<f64> = p.half.iter().map(|h| h / 2.0).collect();
                    let center: Vec<f64> = (0..m)
                        .map(|a| p.center[a] + if mask >> a & 1 == 1 { half[a] } else { -half[a] })
                        .collect();
                    (p.model, center, half, p.depth + 1)
                })
            })
            .collect();
        cells_evaluated += children.len();
        let evaluated: Vec<Cell> = children
            .into_par_iter()
            .map(|(mi, c, h, dep)| Cell {
                model: mi,
                ..evaluate(&models[mi], &t, c, h, dep)
            })
            .collect();
        let mut top: Option<&Cell> = None;
        for c in &evaluated {
            if c.value > best.0 && top.is_none_or(|b| c.value > b.value) {
                top = Some(c);
            }
        }
        if let Some(c) = top {
            let (x, v) = polish(&models[c.model], &t, &c.center);
            if v > best.0 {
                best = (v, c.model, x);
            } else if c.value > best.0 {
                best = (c.value, c.model, c.center.clone());
            }
        }
        for mut c in evaluated {
            depth = depth.max(c.depth);
            if c.ub > best.0 {
                c.id = next_id;
                next_id += 1;
                heap.push(c);
            }
        }
    }
}
