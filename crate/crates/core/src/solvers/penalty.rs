//! Penalty continuation for orthogonal and strongly orthogonal families of
//! any rank: ascend the fit minus a growing multiple of the constraint
//! violation over free unit factors, read off the pattern the iterate has
//! settled into, and polish inside that pattern's exact parametrization.

use nalgebra::DMatrix;
use rand::Rng;

use super::ascent::{ascend, Objective, Outcome, PenaltyKind, Settings};
use super::layout::{self, Layout, Node};
use crate::linalg::polar;
use crate::tensor::DenseTensor;

#[derive(Debug, Clone)]
pub(crate) struct Schedule {
    pub initial: f64,
    pub growth: f64,
    pub rounds: usize,
}

pub(crate) struct Snapped {
    pub layout: Layout,
    pub outcome: Outcome,
    /// Fit of the last penalized iterate, before snapping.
    pub penalized_initial: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn run<R: Rng + ?Sized>(
    t: &DenseTensor<f64>,
    kind: PenaltyKind,
    r: usize,
    rng: &mut R,
    schedule: &Schedule,
    settings: &Settings,
) -> Option<Snapped> {
    let dims = t.dims().to_vec();
    let free = layout::free(&dims, r);
    let mut frames = free.random_frames(rng);
    let mut initial = None;
    for round in 0..schedule.rounds {
        let rho = schedule.initial * schedule.growth.powi(round as i32);
        let obj = Objective {
            tensor: t,
            layout: &free,
            penalty: Some((kind, rho)),
        };
        let out = ascend(&obj, frames, &Settings { keep_history: false, ..settings.clone() })?;
        initial.get_or_insert(out.initial);
        frames = out.frames;
    }
    let fwd = free.forward(&frames)?;
    let factors = free.factors(&fwd);
    let snapped = match kind {
        PenaltyKind::Son => snap_son(&dims, &factors)?,
        PenaltyKind::On => snap_on(&dims, &factors)?,
    };
    let start = seed_frames(&snapped, &factors);
    let obj = Objective {
        tensor: t,
        layout: &snapped,
        penalty: None,
    };
    let outcome = ascend(&obj, start, settings)?;
    Some(Snapped {
        layout: snapped,
        outcome,
        penalized_initial: initial.unwrap_or(0.0),
    })
}

/// Parallel classes from `|a| > 1/√2`; `None` when two terms end up equal
/// in every mode or a mode has too many classes.
fn snap_son(dims: &[usize], factors: &[Vec<Vec<f64>>]) -> Option<Layout> {
    let r = factors.len();
    let mut classes = Vec::with_capacity(dims.len());
    for j in 0..dims.len() {
        let mut cls: Vec<usize> = (0..r).collect();
        for k in 0..r {
            for l in k + 1..r {
                if dot(&factors[k][j], &factors[l][j]).abs() > std::f64::consts::FRAC_1_SQRT_2 {
                    let (from, to) = (cls[l].max(cls[k]), cls[l].min(cls[k]));
                    cls.iter_mut().filter(|c| **c == from).for_each(|c| *c = to);
                }
            }
        }
        let mut ids: Vec<usize> = cls.clone();
        ids.sort_unstable();
        ids.dedup();
        classes.push(cls.iter().map(|c| ids.binary_search(c).unwrap()).collect::<Vec<_>>());
    }
    let separated = (0..r).all(|k| (k + 1..r).all(|l| classes.iter().any(|c: &Vec<usize>| c[k] != c[l])));
    if !separated {
        return None;
    }
    let mut snapped = layout::partition(dims, &classes)?;
    snapped.label = format!("penalty {}", snapped.label);
    Some(snapped)
}

/// Each pair is made orthogonal in the mode where it is closest to being so.
fn snap_on(dims: &[usize], factors: &[Vec<Vec<f64>>]) -> Option<Layout> {
    let r = factors.len();
    let mut edges = vec![Vec::new(); dims.len()];
    for k in 0..r {
        for l in k + 1..r {
            let j = (0..dims.len())
                .min_by(|&a, &b| {
                    let ia = dot(&factors[k][a], &factors[l][a]).abs();
                    let ib = dot(&factors[k][b], &factors[l][b]).abs();
                    ia.total_cmp(&ib)
                })
                .expect("order at least one");
            edges[j].push((k, l));
        }
    }
    let mut snapped = layout::graph(dims, r, &edges)?;
    snapped.label = format!("penalty {}", snapped.label);
    Some(snapped)
}

/// Frames for `layout` close to the given factors.
fn seed_frames(layout: &Layout, factors: &[Vec<Vec<f64>>]) -> Vec<DMatrix<f64>> {
    let mut cols: Vec<Vec<Option<Vec<f64>>>> = layout.frames.iter().map(|&(_, c)| vec![None; c]).collect();
    for (k, term) in layout.terms.iter().enumerate() {
        for (j, &node) in term.iter().enumerate() {
            let v = &factors[k][j];
            let (frame, col) = match &layout.nodes[node] {
                Node::Column { frame, col } => (*frame, *col),
                Node::Complement { frame, .. } => (*frame, 0),
                Node::Block { .. } => unreachable!("penalty layouts have no blocks"),
            };
            let slot = &mut cols[frame][col];
            match slot {
                None => *slot = Some(v.clone()),
                Some(acc) => {
                    let s = dot(acc, v).signum();
                    acc.iter_mut().zip(v).for_each(|(a, b)| *a += s * b);
                }
            }
        }
    }
    layout
        .frames
        .iter()
        .zip(cols)
        .map(|(&(n, c), cols)| {
            let m = DMatrix::from_fn(n, c, |i, q| cols[q].as_ref().map_or(0.0, |v| v[i]));
            polar(&m).unwrap_or_else(|| DMatrix::identity(n, c))
        })
        .collect()
}
