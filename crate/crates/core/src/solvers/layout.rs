//! Parametrizations of constrained factor families.
//!
//! A layout describes every factor `v_{kj}` as a node computed from a list
//! of frames (matrices with orthonormal columns). Orthogonality between
//! factors is built in, so ascent over the frames never leaves the
//! feasible set:
//!
//! * `Column` takes one column of a frame; columns of one frame are
//!   mutually orthogonal, and nodes sharing a column are parallel.
//! * `Complement` normalizes a free vector after projecting out a clique of
//!   earlier nodes, giving a factor orthogonal to exactly those nodes.
//! * `Block` mixes the columns of a contiguous block of a frame, so factors
//!   drawn from different blocks are orthogonal whatever their mode.

use nalgebra::DMatrix;
use rand::Rng;

use crate::linalg::random_frame;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Column { frame: usize, col: usize },
    Complement { frame: usize, against: Vec<usize> },
    Block { frame: usize, start: usize, len: usize, coeff: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub label: String,
    /// `(rows, cols)` of every frame.
    pub frames: Vec<(usize, usize)>,
    pub nodes: Vec<Node>,
    /// `terms[k][j]` is the node holding `v_{kj}`.
    pub terms: Vec<Vec<usize>>,
}

/// Node vectors plus what the backward pass needs.
pub(crate) struct Forward {
    pub vectors: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

const DEGENERATE_NORM: f64 = 1e-8;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Layout {
    pub fn random_frames<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<DMatrix<f64>> {
        self.frames.iter().map(|&(n, c)| random_frame(rng, n, c)).collect()
    }

    /// Evaluates every node. `None` when a complement projection collapses.
    pub fn forward(&self, frames: &[DMatrix<f64>]) -> Option<Forward> {
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(self.nodes.len());
        let mut norms = vec![1.0; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            let v = match node {
                Node::Column { frame, col } => frames[*frame].column(*col).iter().cloned().collect(),
                Node::Complement { frame, against } => {
                    let x = frames[*frame].column(0);
                    let mut y: Vec<f64> = x.iter().cloned().collect();
                    for &b in against {
                        let b = &vectors[b];
                        let c = dot(b, x.as_slice());
                        y.iter_mut().zip(b).for_each(|(yi, bi)| *yi -= c * bi);
                    }
                    let ny = dot(&y, &y).sqrt();
                    if ny < DEGENERATE_NORM {
                        return None;
                    }
                    norms[i] = ny;
                    y.iter().map(|yi| yi / ny).collect()
                }
                Node::Block { frame, start, len, coeff } => {
                    let q = &frames[*frame];
                    let u = &frames[*coeff];
                    let mut v = vec![0.0; q.nrows()];
                    for c in 0..*len {
                        let w = u[(c, 0)];
                        v.iter_mut().zip(q.column(start + c).iter()).for_each(|(vi, qi)| *vi += w * qi);
                    }
                    v
                }
            };
            vectors.push(v);
        }
        Some(Forward { vectors, norms })
    }

    /// Pulls node gradients back to Euclidean frame gradients. `node_grads`
    /// is consumed as scratch space.
    pub fn backward(
        &self,
        frames: &[DMatrix<f64>],
        fwd: &Forward,
        mut node_grads: Vec<Vec<f64>>,
    ) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.frames.iter().map(|&(n, c)| DMatrix::zeros(n, c)).collect();
        for i in (0..self.nodes.len()).rev() {
            let g = std::mem::take(&mut node_grads[i]);
            if g.is_empty() {
                continue;
            }
            match &self.nodes[i] {
                Node::Column { frame, col } => {
                    let mut c = out[*frame].column_mut(*col);
                    c.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
                }
                Node::Complement { frame, against } => {
                    let v = &fwd.vectors[i];
                    let x = frames[*frame].column(0);
                    let vg = dot(v, &g);
                    let mut h: Vec<f64> = g.iter().zip(v).map(|(gi, vi)| (gi - vg * vi) / fwd.norms[i]).collect();
                    let hy = h.clone();
                    for &b in against {
                        let bv = &fwd.vectors[b];
                        let bh = dot(bv, &hy);
                        let bx = dot(bv, x.as_slice());
                        h.iter_mut().zip(bv).for_each(|(hi, bi)| *hi -= bh * bi);
                        let gb = node_grads[b].get_or_insert_default(bv.len());
                        for ((gbi, hyi), xi) in gb.iter_mut().zip(&hy).zip(x.iter()) {
                            *gbi -= bx * hyi + bh * xi;
                        }
                    }
                    let mut c = out[*frame].column_mut(0);
                    c.iter_mut().zip(&h).for_each(|(a, b)| *a += b);
                }
                Node::Block { frame, start, len, coeff } => {
                    for c in 0..*len {
                        let qc = frames[*frame].column(start + c);
                        out[*coeff][(c, 0)] += dot(qc.as_slice(), &g);
                        let w = frames[*coeff][(c, 0)];
                        let mut dst = out[*frame].column_mut(start + c);
                        dst.iter_mut().zip(&g).for_each(|(a, b)| *a += w * b);
                    }
                }
            }
        }
        out
    }

    /// Replaces the free vector behind each complement node by the node
    /// value itself. The factors are unchanged, and the projection stays
    /// well conditioned over long runs.
    pub fn reseat(&self, frames: &mut [DMatrix<f64>], fwd: &Forward) {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Complement { frame, .. } = node {
                frames[*frame].column_mut(0).copy_from_slice(&fwd.vectors[i]);
            }
        }
    }

    /// Factors `v_{kj}` for a forward pass.
    pub fn factors(&self, fwd: &Forward) -> Vec<Vec<Vec<f64>>> {
        self.terms
            .iter()
            .map(|term| term.iter().map(|&n| fwd.vectors[n].clone()).collect())
            .collect()
    }
}

trait GetOrInsert {
    fn get_or_insert_default(&mut self, n: usize) -> &mut Vec<f64>;
}

impl GetOrInsert for Vec<f64> {
    fn get_or_insert_default(&mut self, n: usize) -> &mut Vec<f64> {
        if self.is_empty() {
            self.resize(n, 0.0);
        }
        self
    }
}

/// Completely orthogonal terms: one `n_j × r` frame per mode, or a single
/// shared frame when the terms are symmetric.
pub(crate) fn con(dims: &[usize], r: usize, symmetric: bool) -> Layout {
    let d = dims.len();
    if symmetric {
        return Layout {
            label: "symmetric".into(),
            frames: vec![(dims[0], r)],
            nodes: (0..r).map(|k| Node::Column { frame: 0, col: k }).collect(),
            terms: (0..r).map(|k| vec![k; d]).collect(),
        };
    }
    Layout {
        label: "frames".into(),
        frames: dims.iter().map(|&n| (n, r)).collect(),
        nodes: (0..d)
            .flat_map(|j| (0..r).map(move |k| Node::Column { frame: j, col: k }))
            .collect(),
        terms: (0..r).map(|k| (0..d).map(|j| j * r + k).collect()).collect(),
    }
}

/// Partially orthogonal terms: frames on the modes in `p`, free unit
/// vectors elsewhere. The structured variant shares one frame across all
/// of `p` and one vector per term across the remaining modes.
pub(crate) fn pcon(dims: &[usize], r: usize, p: &[usize], structured: bool) -> Layout {
    let d = dims.len();
    let in_p: Vec<bool> = (0..d).map(|j| p.contains(&j)).collect();
    let mut frames = Vec::new();
    let mut nodes = Vec::new();
    let mut terms = vec![vec![usize::MAX; d]; r];
    if structured {
        let np = dims[p[0]];
        frames.push((np, r));
        for (k, term) in terms.iter_mut().enumerate() {
            nodes.push(Node::Column { frame: 0, col: k });
            for &j in p {
                term[j] = k;
            }
        }
        if let Some(q0) = (0..d).find(|&j| !in_p[j]) {
            for term in terms.iter_mut() {
                frames.push((dims[q0], 1));
                nodes.push(Node::Column {
                    frame: frames.len() - 1,
                    col: 0,
                });
                for j in (0..d).filter(|&j| !in_p[j]) {
                    term[j] = nodes.len() - 1;
                }
            }
        }
        return Layout {
            label: "structured".into(),
            frames,
            nodes,
            terms,
        };
    }
    for j in 0..d {
        if in_p[j] {
            frames.push((dims[j], r));
            for (col, term) in terms.iter_mut().enumerate() {
                nodes.push(Node::Column {
                    frame: frames.len() - 1,
                    col,
                });
                term[j] = nodes.len() - 1;
            }
        } else {
            for term in terms.iter_mut() {
                frames.push((dims[j], 1));
                nodes.push(Node::Column {
                    frame: frames.len() - 1,
                    col: 0,
                });
                term[j] = nodes.len() - 1;
            }
        }
    }
    Layout {
        label: "frames".into(),
        frames,
        nodes,
        terms,
    }
}

/// Every factor is an independent unit vector.
pub(crate) fn free(dims: &[usize], r: usize) -> Layout {
    let d = dims.len();
    Layout {
        label: "free".into(),
        frames: (0..r).flat_map(|_| dims.iter().map(|&n| (n, 1))).collect(),
        nodes: (0..r * d).map(|f| Node::Column { frame: f, col: 0 }).collect(),
        terms: (0..r).map(|k| (0..d).map(|j| k * d + j).collect()).collect(),
    }
}

/// Strongly orthogonal pattern: `classes[j][k]` is the parallel class of
/// term `k` in mode `j`. Classes become columns of one frame per mode.
/// `None` when a mode has more classes than dimensions.
pub(crate) fn partition(dims: &[usize], classes: &[Vec<usize>]) -> Option<Layout> {
    let r = classes[0].len();
    let mut frames = Vec::new();
    let mut nodes = Vec::new();
    let mut terms = vec![vec![0; dims.len()]; r];
    for (j, cls) in classes.iter().enumerate() {
        let count = cls.iter().max().map_or(0, |m| m + 1);
        if count > dims[j] {
            return None;
        }
        frames.push((dims[j], count));
        let base = nodes.len();
        nodes.extend((0..count).map(|c| Node::Column { frame: j, col: c }));
        for (k, &c) in cls.iter().enumerate() {
            terms[k][j] = base + c;
        }
    }
    let label = classes
        .iter()
        .map(|cls| cls.iter().map(|c| c.to_string()).collect::<String>())
        .collect::<Vec<_>>()
        .join("/");
    Some(Layout {
        label: format!("classes {label}"),
        frames,
        nodes,
        terms,
    })
}

/// Orthogonal pattern: `edges[j]` lists the term pairs required to be
/// orthogonal in mode `j`. Each mode graph is made chordal by elimination
/// fill-in (adding constraints keeps the family feasible); vertices are
/// then built in reverse elimination order, each as the complement of its
/// already-built neighbours, which form an orthogonal clique. `None` when
/// a clique exceeds the mode dimension.
pub(crate) fn graph(dims: &[usize], r: usize, edges: &[Vec<(usize, usize)>]) -> Option<Layout> {
    let mut frames = Vec::new();
    let mut nodes = Vec::new();
    let mut terms = vec![vec![0; dims.len()]; r];
    for (j, es) in edges.iter().enumerate() {
        let mut adj = vec![vec![false; r]; r];
        for &(a, b) in es {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        let order = elimination_order(&mut adj);
        let mut built: Vec<Option<usize>> = vec![None; r];
        for &v in order.iter().rev() {
            let against: Vec<usize> = (0..r)
                .filter(|&u| adj[v][u])
                .filter_map(|u| built[u])
                .collect();
            if against.len() >= dims[j] {
                return None;
            }
            frames.push((dims[j], 1));
            let frame = frames.len() - 1;
            nodes.push(if against.is_empty() {
                Node::Column { frame, col: 0 }
            } else {
                Node::Complement { frame, against }
            });
            built[v] = Some(nodes.len() - 1);
            terms[v][j] = nodes.len() - 1;
        }
    }
    let label = edges
        .iter()
        .map(|es| {
            es.iter()
                .map(|(a, b)| format!("{a}{b}"))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("/");
    Some(Layout {
        label: format!("perp {label}"),
        frames,
        nodes,
        terms,
    })
}

/// Greedy minimum-degree elimination; fills `adj` in place so that it
/// becomes chordal with the returned perfect elimination order.
fn elimination_order(adj: &mut [Vec<bool>]) -> Vec<usize> {
    let r = adj.len();
    let mut gone = vec![false; r];
    let mut order = Vec::with_capacity(r);
    for _ in 0..r {
        let v = (0..r)
            .filter(|&v| !gone[v])
            .min_by_key(|&v| (0..r).filter(|&u| !gone[u] && adj[v][u]).count())
            .expect("a vertex remains");
        let nb: Vec<usize> = (0..r).filter(|&u| !gone[u] && adj[v][u]).collect();
        for &a in &nb {
            for &b in &nb {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
        gone[v] = true;
        order.push(v);
    }
    order
}

/// Cross-orthogonal terms: term `k` lives in its own block of `alloc[k]`
/// columns of a shared `n × Σ alloc` frame; every factor of the term is a
/// unit combination of those columns.
pub(crate) fn blocks(n: usize, d: usize, alloc: &[usize]) -> Layout {
    let total: usize = alloc.iter().sum();
    let mut frames = vec![(n, total)];
    let mut nodes = Vec::new();
    let mut terms = Vec::new();
    let mut start = 0;
    for &len in alloc {
        let mut term = Vec::with_capacity(d);
        for _ in 0..d {
            frames.push((len, 1));
            nodes.push(Node::Block {
                frame: 0,
                start,
                len,
                coeff: frames.len() - 1,
            });
            term.push(nodes.len() - 1);
        }
        terms.push(term);
        start += len;
    }
    let label = alloc.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("+");
    Layout {
        label: format!("blocks {label}"),
        frames,
        nodes,
        terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{Decomposition, RankOneTerm};
    use crate::orthogonality::{decomposition_check, Notion};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn certify(layout: &Layout, dims: &[usize], notion: &Notion, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = layout.random_frames(&mut rng);
        let fwd = layout.forward(&frames).unwrap();
        let terms = layout
            .factors(&fwd)
            .into_iter()
            .map(|f| RankOneTerm::new(1.0, f))
            .collect();
        let d = Decomposition::new(dims.to_vec(), terms).unwrap();
        decomposition_check(&d, notion, 1e-12).unwrap().valid
    }

    #[test]
    fn layouts_are_feasible_by_construction() {
        for seed in 0..20 {
            assert!(certify(&con(&[3, 4, 3], 3, false), &[3, 4, 3], &Notion::Con, seed));
            assert!(certify(&con(&[3, 3, 3], 2, true), &[3, 3, 3], &Notion::Con, seed));
            let p = pcon(&[2, 3, 2], 2, &[0, 2], false);
            assert!(certify(&p, &[2, 3, 2], &Notion::Pcon(vec![0, 2]), seed));
            let s = pcon(&[2, 3, 2], 2, &[0, 2], true);
            assert!(certify(&s, &[2, 3, 2], &Notion::Pcon(vec![0, 2]), seed));
            let son = partition(&[2, 2, 2], &[vec![0, 1, 0], vec![0, 1, 1], vec![0, 1, 0]]).unwrap();
            assert!(certify(&son, &[2, 2, 2], &Notion::Son, seed));
            // A star in mode 0 plus a single edge in mode 1.
            let on = graph(&[3, 3], 3, &[vec![(0, 1), (0, 2)], vec![(1, 2)]]).unwrap();
            assert!(certify(&on, &[3, 3], &Notion::On, seed));
        }
    }

    #[test]
    fn block_layout_is_cross_orthogonal() {
        let layout = blocks(5, 3, &[2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fwd = layout.forward(&layout.random_frames(&mut rng)).unwrap();
        let terms = layout
            .factors(&fwd)
            .into_iter()
            .map(|f| RankOneTerm::new(1.0, f))
            .collect();
        let d = Decomposition::new(vec![5; 3], terms).unwrap();
        assert!(crate::orthogonality::cross_orthogonality_check(&d, 1e-12).unwrap());
        assert!(d.terms().iter().all(|t| t.unit_defect() < 1e-14));
    }

    #[test]
    fn overfull_patterns_are_infeasible() {
        assert!(partition(&[2, 2], &[vec![0, 1, 2], vec![0, 0, 0]]).is_none());
        assert!(graph(&[2], 3, &[vec![(0, 1), (1, 2), (0, 2)]]).is_none());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let layout = graph(&[3, 3], 3, &[vec![(0, 1), (0, 2)], vec![(1, 2)]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let frames = layout.random_frames(&mut rng);
        // Linear test functional: Σ_nodes ⟨c_i, v_i⟩.
        let coef: Vec<Vec<f64>> = (0..layout.nodes.len())
            .map(|i| (0..3).map(|t| ((i * 3 + t) as f64).sin()).collect())
            .collect();
        let f = |frames: &[DMatrix<f64>]| -> f64 {
            let fwd = layout.forward(frames).unwrap();
            fwd.vectors.iter().zip(&coef).map(|(v, c)| dot(v, c)).sum()
        };
        let fwd = layout.forward(&frames).unwrap();
        let grads = layout.backward(&frames, &fwd, coef.clone());
        let h = 1e-6;
        for (fi, frame) in frames.iter().enumerate() {
            for idx in 0..frame.len() {
                let mut plus = frames.clone();
                plus[fi][idx] += h;
                let mut minus = frames.clone();
                minus[fi][idx] -= h;
                let fd = (f(&plus) - f(&minus)) / (2.0 * h);
                assert!((fd - grads[fi][idx]).abs() < 1e-6, "frame {fi} entry {idx}");
            }
        }
    }
}
