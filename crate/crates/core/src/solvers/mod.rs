//! Best constrained rank-`r` approximations.
//!
//! Every problem is posed as maximizing `Σ_k ⟨T, v_{k1} ⊗ … ⊗ v_{kd}⟩²` over
//! unit factors obeying the notion's constraints; the maximizer becomes an
//! approximation by setting `σ_k = ⟨T, ⊗_j v_{kj}⟩`, and the squared residual
//! is `‖T‖²` minus the objective. Solvers work over ℝ.

mod ascent;
mod hopm;
mod layout;
pub mod objective;
pub mod oracle;
mod patterns;
mod penalty;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::orthogonality::{cross_orthogonality_check, decomposition_check, DecompositionCertificate, Notion, ORTHO_TOL};
use crate::tensor::{DenseTensor, SYMMETRY_TOL};

use self::ascent::{ascend, Objective, Outcome, PenaltyKind, Settings};
use self::layout::Layout;

pub use self::objective::{objective, sigma_from_factors};
pub use self::oracle::{grid_oracle, OracleConfig, OracleReport};

/// Weights for the penalty phase of the orthogonal and strongly orthogonal
/// solvers. The weight starts at `initial · ‖T‖²` and is multiplied by
/// `growth` after each of `rounds` ascents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySchedule {
    pub initial: f64,
    pub growth: f64,
    pub rounds: usize,
    pub starts: usize,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        Self {
            initial: 1.0,
            growth: 10.0,
            rounds: 6,
            starts: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Random starts per parametrization.
    pub starts: usize,
    pub max_iters: usize,
    /// Stop once the Riemannian gradient norm falls below
    /// `grad_tol · ‖T‖²`.
    pub grad_tol: f64,
    pub seed: u64,
    pub penalty: PenaltySchedule,
    /// Keep the per-iteration objective of every start in the trace.
    #[serde(default)]
    pub keep_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            max_iters: 2000,
            grad_tol: 1e-9,
            seed: 0,
            penalty: PenaltySchedule::default(),
            keep_history: false,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_starts(self, starts: usize) -> Self {
        Self { starts, ..self }
    }
}

/// A tensor, a notion and a rank. `symmetric` forces every term to be
/// `σ_k v_k^{⊗d}`; `structured` (partial orthogonality only) ties the
/// factors inside the orthogonal mode set and inside its complement.
#[derive(Debug, Clone)]
pub struct ApproxProblem {
    pub tensor: DenseTensor<f64>,
    pub notion: Notion,
    pub rank: usize,
    pub symmetric: bool,
    pub structured: bool,
    pub config: SolverConfig,
}

impl ApproxProblem {
    pub fn new(tensor: DenseTensor<f64>, notion: Notion, rank: usize) -> Self {
        Self {
            tensor,
            notion,
            rank,
            symmetric: false,
            structured: false,
            config: SolverConfig::default(),
        }
    }

    pub fn symmetric(mut self, on: bool) -> Self {
        self.symmetric = on;
        self
    }

    pub fn structured(mut self, on: bool) -> Self {
        self.structured = on;
        self
    }

    pub fn with_config(mut self, config: SolverConfig) -> Self {
        self.config = config;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tensor;
        let dims = t.dims();
        let d = t.order();
        if self.rank == 0 {
            return Err(Error::Infeasible("rank must be at least 1".into()));
        }
        if self.config.starts == 0 {
            return Err(Error::Infeasible("at least one start is needed".into()));
        }
        self.notion.validate(d)?;
        if self.symmetric && !tensor_is_symmetric(t)? {
            return Err(Error::Shape("symmetric terms require a symmetric tensor".into()));
        }
        let min_over = |modes: &mut dyn Iterator<Item = usize>| modes.map(|j| dims[j]).min().unwrap_or(usize::MAX);
        match &self.notion {
            Notion::Con => {
                let n = min_over(&mut (0..d));
                if self.rank > n {
                    return Err(Error::Infeasible(format!(
                        "{} completely orthogonal terms do not fit in a mode of dimension {n}",
                        self.rank
                    )));
                }
            }
            Notion::Pcon(p) => {
                let n = min_over(&mut p.iter().cloned());
                if self.rank > n || (self.symmetric && self.rank > dims[0]) {
                    return Err(Error::Infeasible(format!(
                        "{} partially orthogonal terms do not fit in a mode of dimension {n}",
                        self.rank
                    )));
                }
                if self.structured {
                    let q: Vec<usize> = (0..d).filter(|j| !p.contains(j)).collect();
                    let uniform = |set: &[usize]| set.windows(2).all(|w| dims[w[0]] == dims[w[1]]);
                    if !uniform(p) || !uniform(&q) {
                        return Err(Error::Shape(format!(
                            "tied factors need equal dims inside {p:?} and inside its complement"
                        )));
                    }
                }
            }
            _ => {}
        }
        if self.structured && !matches!(self.notion, Notion::Pcon(_)) {
            return Err(Error::Notion("the structured mode applies to PCON only".into()));
        }
        Ok(())
    }
}

fn tensor_is_symmetric(t: &DenseTensor<f64>) -> Result<bool> {
    if !t.is_cubical() {
        return Ok(false);
    }
    let scale = t.data().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    t.is_symmetric(SYMMETRY_TOL * scale)
}

/// Which search produced the reported optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Direct ascent over orthonormal frames.
    Frames,
    /// Exhaustive enumeration of orthogonality patterns.
    Patterns,
    /// Penalty continuation followed by a polish inside the snapped pattern.
    Penalty,
    /// Power iterations (rank one).
    Power,
}

/// One start of one parametrization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartTrace {
    pub pattern: String,
    pub start: usize,
    pub initial: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
    /// The start failed to produce a feasible point.
    pub failed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub starts: usize,
    pub converged: usize,
    pub failed: usize,
    pub patterns: usize,
    pub infeasible_patterns: usize,
    pub iterations: usize,
    pub monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxResult {
    pub notion: Notion,
    pub rank: usize,
    pub symmetric: bool,
    pub structured: bool,
    pub cross: bool,
    pub objective: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub decomposition: Decomposition<f64>,
    pub certificate: DecompositionCertificate<f64>,
    pub phase: Phase,
    pub pattern: String,
    pub best_start: usize,
    /// Found by penalty continuation without exhaustive pattern coverage.
    pub heuristic: bool,
    /// The input tensor was zero.
    pub degenerate: bool,
    pub summary: TraceSummary,
    #[serde(skip)]
    pub trace: Vec<StartTrace>,
    pub seed: u64,
    pub config: SolverConfig,
}

impl ApproxResult {
    /// `‖T‖_{A_r}`, the square root of the objective.
    pub fn norm_value(&self) -> f64 {
        self.objective.max(0.0).sqrt()
    }
}

/// Cross-orthogonal solution with its symmetric counterpart.
#[derive(Debug, Clone, Serialize)]
pub struct CrossResult {
    pub general: ApproxResult,
    pub symmetric: Option<ApproxResult>,
    /// Whether both objectives agree within `1e−6 · max(1, ‖T‖²)`.
    pub values_agree: Option<bool>,
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    factors: Vec<Vec<Vec<f64>>>,
    pattern: String,
    start: usize,
    phase: Phase,
}

fn rng_for(seed: u64, stream: u64, pattern: usize, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 48) ^ ((pattern as u64) << 24) ^ start as u64);
    rng
}

fn settings(t: &DenseTensor<f64>, cfg: &SolverConfig) -> Settings {
    let scale = t.frobenius_norm().powi(2);
    Settings {
        max_iters: cfg.max_iters,
        grad_tol: cfg.grad_tol * scale,
        scale,
        keep_history: cfg.keep_history,
    }
}

fn trace_of(pattern: &str, start: usize, out: Option<&Outcome>) -> StartTrace {
    match out {
        Some(o) => StartTrace {
            pattern: pattern.to_string(),
            start,
            initial: o.initial,
            value: o.value,
            iterations: o.iterations,
            converged: o.converged,
            monotone: o.monotone,
            failed: false,
            history: o.history.clone(),
        },
        None => StartTrace {
            pattern: pattern.to_string(),
            start,
            initial: 0.0,
            value: 0.0,
            iterations: 0,
            converged: false,
            monotone: true,
            failed: true,
            history: Vec::new(),
        },
    }
}

fn starts_per_pattern(starts: usize, patterns: usize) -> usize {
    if patterns <= 16 {
        starts
    } else {
        (16 * starts).div_ceil(patterns).max(starts.min(4))
    }
}

/// Multi-start ascent over every layout; results come back in job order
/// whatever the thread schedule.
fn run_layouts(
    t: &DenseTensor<f64>,
    layouts: &[Layout],
    starts: usize,
    cfg: &SolverConfig,
    stream: u64,
) -> (Vec<StartTrace>, Vec<Candidate>) {
    let s = settings(t, cfg);
    let jobs: Vec<(usize, usize)> = (0..layouts.len()).flat_map(|p| (0..starts).map(move |k| (p, k))).collect();
    let results: Vec<(StartTrace, Option<Candidate>)> = jobs
        .par_iter()
        .map(|&(p, k)| {
            let layout = &layouts[p];
            let mut rng = rng_for(cfg.seed, stream, p, k);
            let frames = layout.random_frames(&mut rng);
            let obj = Objective {
                tensor: t,
                layout,
                penalty: None,
            };
            let out = ascend(&obj, frames, &s);
            let cand = out.as_ref().and_then(|o| {
                let fwd = layout.forward(&o.frames)?;
                Some(Candidate {
                    value: o.value,
                    factors: layout.factors(&fwd),
                    pattern: layout.label.clone(),
                    start: k,
                    phase: Phase::Frames,
                })
            });
            (trace_of(&layout.label, k, out.as_ref()), cand)
        })
        .collect();
    let mut traces = Vec::with_capacity(results.len());
    let mut cands = Vec::new();
    for (tr, c) in results {
        traces.push(tr);
        cands.extend(c);
    }
    (traces, cands)
}

fn canonical_key(t: &DenseTensor<f64>, c: &Candidate) -> Vec<f64> {
    match sigma_from_factors(t, c.factors.clone()) {
        Ok(d) => d
            .terms()
            .iter()
            .flat_map(|term| std::iter::once(term.sigma).chain(term.factors.iter().flatten().cloned()))
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Highest objective; near-ties go to the lexicographically smaller
/// canonical decomposition, then to the earlier job.
fn pick_best(t: &DenseTensor<f64>, cands: Vec<Candidate>) -> Option<Candidate> {
    let tie = 1e-12 * t.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
    let mut best: Option<Candidate> = None;
    for c in cands {
        let replace = match &best {
            None => true,
            Some(b) => {
                if c.value > b.value + tie {
                    true
                } else if c.value < b.value - tie {
                    false
                } else {
                    let (kc, kb) = (canonical_key(t, &c), canonical_key(t, b));
                    kc.iter()
                        .zip(&kb)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .is_some_and(|o| o.is_lt())
                }
            }
        };
        if replace {
            best = Some(c);
        }
    }
    best
}

fn summarize(trace: &[StartTrace], patterns: usize, infeasible_patterns: usize) -> TraceSummary {
    TraceSummary {
        starts: trace.len(),
        converged: trace.iter().filter(|t| t.converged).count(),
        failed: trace.iter().filter(|t| t.failed).count(),
        patterns,
        infeasible_patterns,
        iterations: trace.iter().map(|t| t.iterations).sum(),
        monotone: trace.iter().all(|t| t.monotone),
    }
}

struct Search {
    trace: Vec<StartTrace>,
    best: Option<Candidate>,
    patterns: usize,
    infeasible_patterns: usize,
    heuristic: bool,
}

fn finish(problem: &ApproxProblem, search: Search, cross: bool) -> Result<ApproxResult> {
    let t = &problem.tensor;
    let summary = summarize(&search.trace, search.patterns, search.infeasible_patterns);
    let best = search
        .best
        .ok_or_else(|| Error::Infeasible("no start produced a feasible point".into()))?;
    let decomposition = sigma_from_factors(t, best.factors)?;
    let objective = decomposition.sigma_sq_sum();
    let residual = (t - &decomposition.assemble()?)?.frobenius_norm();
    let norm = t.frobenius_norm();
    let certificate = decomposition_check(&decomposition, &problem.notion, ORTHO_TOL)?;
    Ok(ApproxResult {
        notion: problem.notion.clone(),
        rank: problem.rank,
        symmetric: problem.symmetric,
        structured: problem.structured,
        cross,
        objective,
        residual,
        relative_residual: if norm > 0.0 { residual / norm } else { 0.0 },
        decomposition,
        certificate,
        phase: best.phase,
        pattern: best.pattern,
        best_start: best.start,
        heuristic: search.heuristic,
        degenerate: false,
        summary,
        trace: search.trace,
        seed: problem.config.seed,
        config: problem.config.clone(),
    })
}

fn zero_result(problem: &ApproxProblem, cross: bool) -> Result<ApproxResult> {
    let decomposition = Decomposition::empty(problem.tensor.dims().to_vec())?;
    let certificate = decomposition_check(&decomposition, &problem.notion, ORTHO_TOL)?;
    Ok(ApproxResult {
        notion: problem.notion.clone(),
        rank: problem.rank,
        symmetric: problem.symmetric,
        structured: problem.structured,
        cross,
        objective: 0.0,
        residual: 0.0,
        relative_residual: 0.0,
        decomposition,
        certificate,
        phase: Phase::Frames,
        pattern: "zero".into(),
        best_start: 0,
        heuristic: false,
        degenerate: true,
        summary: summarize(&[], 0, 0),
        trace: Vec::new(),
        seed: problem.config.seed,
        config: problem.config.clone(),
    })
}

fn frames_search(problem: &ApproxProblem, layouts: Vec<Layout>, phase: Phase) -> Search {
    let t = &problem.tensor;
    let starts = starts_per_pattern(problem.config.starts, layouts.len());
    let (trace, cands) = run_layouts(t, &layouts, starts, &problem.config, 0);
    let best = pick_best(t, cands).map(|c| Candidate { phase, ..c });
    Search {
        trace,
        best,
        patterns: layouts.len(),
        infeasible_patterns: 0,
        heuristic: false,
    }
}

/// Dispatches on the problem's notion.
pub fn solve(problem: &ApproxProblem) -> Result<ApproxResult> {
    match problem.notion {
        Notion::Con => solve_con(problem),
        Notion::Pcon(_) => solve_pcon(problem),
        Notion::Son => solve_son(problem),
        Notion::On => solve_on(problem),
    }
}

fn expect_notion(problem: &ApproxProblem, ok: bool, name: &str) -> Result<()> {
    if !ok {
        return Err(Error::Notion(format!("{name} called with notion {}", problem.notion)));
    }
    problem.validate()
}

/// Completely orthogonal terms: the mode-`j` factors are the columns of an
/// `n_j × r` frame (one shared frame for symmetric terms).
pub fn solve_con(problem: &ApproxProblem) -> Result<ApproxResult> {
    expect_notion(problem, problem.notion == Notion::Con, "solve_con")?;
    if problem.tensor.is_zero() {
        return zero_result(problem, false);
    }
    let layouts = vec![layout::con(problem.tensor.dims(), problem.rank, problem.symmetric)];
    finish(problem, frames_search(problem, layouts, Phase::Frames), false)
}

/// Partially orthogonal terms: frames on the modes in `P`, free unit
/// vectors elsewhere, optionally tied per the structured mode.
pub fn solve_pcon(problem: &ApproxProblem) -> Result<ApproxResult> {
    let Notion::Pcon(p) = &problem.notion else {
        return Err(Error::Notion(format!("solve_pcon called with notion {}", problem.notion)));
    };
    problem.validate()?;
    if problem.tensor.is_zero() {
        return zero_result(problem, false);
    }
    let dims = problem.tensor.dims();
    let layout = if problem.symmetric {
        layout::con(dims, problem.rank, true)
    } else {
        layout::pcon(dims, problem.rank, p, problem.structured)
    };
    finish(problem, frames_search(problem, vec![layout], Phase::Frames), false)
}

/// Strongly orthogonal terms. Ranks up to three enumerate every pattern
/// of shared and orthogonal factors; the penalty phase runs for every rank
/// and is the only search above rank three (flagged heuristic).
pub fn solve_son(problem: &ApproxProblem) -> Result<ApproxResult> {
    expect_notion(problem, problem.notion == Notion::Son, "solve_son")?;
    solve_patterned(problem, PenaltyKind::Son)
}

/// Orthogonal terms: one orthogonal mode per pair, enumerated for ranks up
/// to three, plus the penalty phase.
pub fn solve_on(problem: &ApproxProblem) -> Result<ApproxResult> {
    expect_notion(problem, problem.notion == Notion::On, "solve_on")?;
    solve_patterned(problem, PenaltyKind::On)
}

fn solve_patterned(problem: &ApproxProblem, kind: PenaltyKind) -> Result<ApproxResult> {
    let t = &problem.tensor;
    if t.is_zero() {
        return zero_result(problem, false);
    }
    let dims = t.dims();
    let r = problem.rank;
    if problem.symmetric {
        // Two symmetric terms are (strongly) orthogonal exactly when their
        // vectors are orthogonal, so at most n of them are useful.
        let layouts = vec![layout::con(dims, r.min(dims[0]), true)];
        return finish(problem, frames_search(problem, layouts, Phase::Frames), false);
    }
    let mut trace = Vec::new();
    let mut cands = Vec::new();
    let mut patterns = 0;
    let mut infeasible_patterns = 0;
    if r <= patterns::MAX_PATTERN_RANK {
        let merge_modes = tensor_is_symmetric(t)?;
        let (layouts, bad) = match kind {
            PenaltyKind::Son => (patterns::son_layouts(dims, r, merge_modes), 0),
            PenaltyKind::On => patterns::on_layouts(dims, r, merge_modes),
        };
        patterns = layouts.len();
        infeasible_patterns = bad;
        let starts = starts_per_pattern(problem.config.starts, layouts.len());
        let (tr, cs) = run_layouts(t, &layouts, starts, &problem.config, 0);
        trace.extend(tr);
        cands.extend(cs.into_iter().map(|c| Candidate {
            phase: Phase::Patterns,
            ..c
        }));
    }
    let (tr, cs) = penalty_phase(problem, kind);
    trace.extend(tr);
    cands.extend(cs);
    let best = pick_best(t, cands);
    let search = Search {
        trace,
        best,
        patterns,
        infeasible_patterns,
        heuristic: r > patterns::MAX_PATTERN_RANK,
    };
    finish(problem, search, false)
}

fn penalty_phase(problem: &ApproxProblem, kind: PenaltyKind) -> (Vec<StartTrace>, Vec<Candidate>) {
    let t = &problem.tensor;
    let cfg = &problem.config;
    let s = settings(t, cfg);
    let schedule = penalty::Schedule {
        initial: cfg.penalty.initial * s.scale,
        growth: cfg.penalty.growth,
        rounds: cfg.penalty.rounds,
    };
    let results: Vec<(StartTrace, Option<Candidate>)> = (0..cfg.penalty.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(cfg.seed, 1, 0, k);
            match penalty::run(t, kind, problem.rank, &mut rng, &schedule, &s) {
                Some(sn) => {
                    let mut tr = trace_of(&sn.layout.label, k, Some(&sn.outcome));
                    tr.initial = sn.penalized_initial;
                    let cand = sn.layout.forward(&sn.outcome.frames).map(|fwd| Candidate {
                        value: sn.outcome.value,
                        factors: sn.layout.factors(&fwd),
                        pattern: sn.layout.label.clone(),
                        start: k,
                        phase: Phase::Penalty,
                    });
                    (tr, cand)
                }
                None => (trace_of("penalty", k, None), None),
            }
        })
        .collect();
    let mut trace = Vec::new();
    let mut cands = Vec::new();
    for (tr, c) in results {
        trace.push(tr);
        cands.extend(c);
    }
    (trace, cands)
}

/// Best rank-one term by power iterations (alternating for general terms,
/// shifted symmetric for symmetric ones), each start polished by ascent.
pub fn rank_one_hopm(tensor: &DenseTensor<f64>, symmetric: bool, config: &SolverConfig) -> Result<ApproxResult> {
    let problem = ApproxProblem::new(tensor.clone(), Notion::Con, 1)
        .symmetric(symmetric)
        .with_config(config.clone());
    problem.validate()?;
    if tensor.is_zero() {
        return zero_result(&problem, false);
    }
    let s = settings(tensor, config);
    let d = tensor.order();
    let layout = layout::con(tensor.dims(), 1, symmetric);
    let results: Vec<(StartTrace, Option<Candidate>)> = (0..config.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(config.seed, 2, 0, k);
            let run = if symmetric {
                let sign = if d.is_multiple_of(2) && k % 2 == 1 { -1.0 } else { 1.0 };
                hopm::symmetric(tensor, sign, &mut rng, config.max_iters, 1e-12)
            } else {
                hopm::general(tensor, &mut rng, config.max_iters, 1e-12)
            };
            let power_monotone = run.history.windows(2).all(|w| w[1] >= w[0] - 1e-12 * s.scale.max(1.0));
            let frames: Vec<nalgebra::DMatrix<f64>> = if symmetric {
                vec![nalgebra::DMatrix::from_column_slice(run.factors[0].len(), 1, &run.factors[0])]
            } else {
                run.factors
                    .iter()
                    .map(|v| nalgebra::DMatrix::from_column_slice(v.len(), 1, v))
                    .collect()
            };
            let obj = Objective {
                tensor,
                layout: &layout,
                penalty: None,
            };
            let out = ascend(&obj, frames, &s);
            let mut tr = trace_of("power", k, out.as_ref());
            tr.iterations += run.iterations;
            tr.monotone &= power_monotone;
            let cand = out.and_then(|o| {
                let fwd = layout.forward(&o.frames)?;
                Some(Candidate {
                    value: o.value,
                    factors: layout.factors(&fwd),
                    pattern: "power".into(),
                    start: k,
                    phase: Phase::Power,
                })
            });
            (tr, cand)
        })
        .collect();
    let mut trace = Vec::new();
    let mut cands = Vec::new();
    for (tr, c) in results {
        trace.push(tr);
        cands.extend(c);
    }
    let best = pick_best(tensor, cands);
    let search = Search {
        trace,
        best,
        patterns: 1,
        infeasible_patterns: 0,
        heuristic: false,
    };
    finish(&problem, search, false)
}

/// Compositions of `total` into `r` nonincreasing parts, each in `1..=max`.
fn allocations(total: usize, r: usize, max: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for s in (1..=cap.min(left)).rev() {
            if left - s < parts - 1 {
                continue;
            }
            cur.push(s);
            rec(left - s, parts - 1, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, r, max, &mut Vec::new(), &mut out);
    out
}

/// Terms whose factors are orthogonal across terms in every pair of modes.
/// Term `k` is confined to its own block of a shared orthonormal frame; all
/// maximal block sizes are searched. For a symmetric tensor the symmetric
/// optimum (orthonormal `v_k`, terms `σ_k v_k^{⊗d}`) is computed as well.
pub fn solve_cross(problem: &ApproxProblem) -> Result<CrossResult> {
    let t = &problem.tensor;
    if !t.is_cubical() {
        return Err(Error::Shape(format!("cross-orthogonal terms need equal dims, got {:?}", t.dims())));
    }
    let n = t.dims()[0];
    let d = t.order();
    let r = problem.rank;
    if r == 0 || r > n {
        return Err(Error::Infeasible(format!("{r} cross-orthogonal terms do not fit in dimension {n}")));
    }
    let con = ApproxProblem {
        notion: Notion::Con,
        symmetric: false,
        structured: false,
        ..problem.clone()
    };
    con.validate()?;
    let symmetric_input = tensor_is_symmetric(t)?;
    let mut general = if t.is_zero() {
        zero_result(&con, true)?
    } else if r == 1 {
        let mut res = rank_one_hopm(t, false, &problem.config)?;
        res.cross = true;
        res
    } else {
        let layouts: Vec<Layout> = allocations(n.min(r * d), r, d)
            .iter()
            .map(|a| layout::blocks(n, d, a))
            .collect();
        finish(&con, frames_search(&con, layouts, Phase::Frames), true)?
    };
    general.cross = true;
    if !general.decomposition.is_empty() && !cross_orthogonality_check(&general.decomposition, 1e-9)? {
        return Err(Error::Infeasible("cross-orthogonality lost during ascent".into()));
    }
    let symmetric = if symmetric_input {
        let sym = if r == 1 {
            rank_one_hopm(t, true, &problem.config)?
        } else {
            solve_con(&ApproxProblem {
                symmetric: true,
                ..con.clone()
            })?
        };
        Some(ApproxResult { cross: true, ..sym })
    } else {
        None
    };
    let tol = 1e-6 * t.frobenius_norm().powi(2).max(1.0);
    let values_agree = symmetric.as_ref().map(|s| (s.objective - general.objective).abs() <= tol);
    Ok(CrossResult {
        general,
        symmetric,
        values_agree,
    })
}
