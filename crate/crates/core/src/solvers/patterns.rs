//! Enumeration of orthogonality patterns for small ranks.
//!
//! A strongly orthogonal family is determined, mode by mode, by which terms
//! share a factor (up to sign) and which are orthogonal; an orthogonal
//! family needs one orthogonal mode per pair of terms. Both are finite
//! choices for fixed `r` and `d`, and each choice is a smooth layout.

use std::collections::BTreeSet;

use super::layout::{self, Layout};
use crate::tensor::permutations;

/// Largest rank for which patterns are enumerated.
pub(crate) const MAX_PATTERN_RANK: usize = 3;

/// Largest order for which mode permutations are used to merge equivalent
/// patterns of a symmetric tensor.
const MODE_SYMMETRY_ORDER: usize = 4;

/// Set partitions of `0..r` as restricted growth strings with at most
/// `max_classes` classes.
fn set_partitions(r: usize, max_classes: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, r: usize, max_classes: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let next = cur.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next.min(max_classes - 1) {
            cur.push(c);
            rec(cur, r, max_classes, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(r), r, max_classes.max(1), &mut out);
    out
}

/// Relabels classes in order of first appearance.
fn growth_string(cls: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    cls.iter()
        .map(|&c| match map.iter().find(|(from, _)| *from == c) {
            Some(&(_, to)) => to,
            None => {
                map.push((c, map.len()));
                map.len() - 1
            }
        })
        .collect()
}

fn symmetries(r: usize, d: usize, symmetric: bool) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let term_perms = permutations(r);
    let mode_perms = if symmetric && d <= MODE_SYMMETRY_ORDER {
        permutations(d)
    } else {
        vec![(0..d).collect()]
    };
    (term_perms, mode_perms)
}

fn class_key(classes: &[Vec<usize>], term_perms: &[Vec<usize>], mode_perms: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut best: Option<Vec<Vec<usize>>> = None;
    for mp in mode_perms {
        for tp in term_perms {
            let cand: Vec<Vec<usize>> = mp
                .iter()
                .map(|&j| growth_string(&tp.iter().map(|&k| classes[j][k]).collect::<Vec<_>>()))
                .collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.expect("at least the identity permutation")
}

/// Distinct strongly orthogonal patterns (with feasible class counts).
/// When `symmetric` is set, patterns related by a permutation of the modes
/// are merged; this is only valid for a symmetric tensor with equal dims.
pub(crate) fn son_layouts(dims: &[usize], r: usize, symmetric: bool) -> Vec<Layout> {
    let d = dims.len();
    let per_mode: Vec<Vec<Vec<usize>>> = dims.iter().map(|&n| set_partitions(r, n)).collect();
    let (term_perms, mode_perms) = symmetries(r, d, symmetric);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut choice = vec![0usize; d];
    loop {
        let classes: Vec<Vec<usize>> = (0..d).map(|j| per_mode[j][choice[j]].clone()).collect();
        let separated = (0..r).all(|k| (k + 1..r).all(|l| classes.iter().any(|c| c[k] != c[l])));
        if separated && seen.insert(class_key(&classes, &term_perms, &mode_perms)) {
            if let Some(layout) = layout::partition(dims, &classes) {
                out.push(layout);
            }
        }
        // Odometer over the per-mode choices.
        let mut j = d;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            choice[j] += 1;
            if choice[j] < per_mode[j].len() {
                break;
            }
            choice[j] = 0;
        }
    }
}

/// Distinct orthogonal patterns: one orthogonal mode per pair. Returns the
/// feasible layouts and the number of infeasible patterns.
pub(crate) fn on_layouts(dims: &[usize], r: usize, symmetric: bool) -> (Vec<Layout>, usize) {
    let d = dims.len();
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|k| (k + 1..r).map(move |l| (k, l))).collect();
    let (term_perms, mode_perms) = symmetries(r, d, symmetric);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut infeasible = 0;
    let mut choice = vec![0usize; pairs.len()];
    loop {
        let key = {
            let mut best: Option<Vec<Vec<(usize, usize)>>> = None;
            for mp in &mode_perms {
                for tp in &term_perms {
                    // Mode j of the relabeled pattern is mode mp[j] of this one.
                    let mut inv = vec![0; d];
                    for (j, &m) in mp.iter().enumerate() {
                        inv[m] = j;
                    }
                    let mut cand = vec![Vec::new(); d];
                    for (p, &(k, l)) in pairs.iter().enumerate() {
                        let (a, b) = (tp[k], tp[l]);
                        cand[inv[choice[p]]].push((a.min(b), a.max(b)));
                    }
                    cand.iter_mut().for_each(|e| e.sort_unstable());
                    if best.as_ref().is_none_or(|b| cand < *b) {
                        best = Some(cand);
                    }
                }
            }
            best.expect("identity permutation")
        };
        if seen.insert(key) {
            let mut edges = vec![Vec::new(); d];
            for (p, &pair) in pairs.iter().enumerate() {
                edges[choice[p]].push(pair);
            }
            match layout::graph(dims, r, &edges) {
                Some(layout) => out.push(layout),
                None => infeasible += 1,
            }
        }
        let mut p = pairs.len();
        loop {
            if p == 0 {
                return (out, infeasible);
            }
            p -= 1;
            choice[p] += 1;
            if choice[p] < d {
                break;
            }
            choice[p] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        assert_eq!(set_partitions(3, 3).len(), 5);
        assert_eq!(set_partitions(3, 2).len(), 4);
        assert_eq!(set_partitions(4, 4).len(), 15);
        assert_eq!(set_partitions(1, 1), vec![vec![0]]);
    }

    #[test]
    fn rank_two_patterns() {
        // Two terms differ in a nonempty set of modes: 2^d − 1 patterns, or
        // d of them up to mode permutations.
        assert_eq!(son_layouts(&[2, 2, 2], 2, false).len(), 7);
        assert_eq!(son_layouts(&[2, 2, 2], 2, true).len(), 3);
        let (on, bad) = on_layouts(&[2, 2, 2, 2], 2, true);
        assert_eq!((on.len(), bad), (1, 0));
        assert_eq!(on_layouts(&[2, 2, 2], 2, false).0.len(), 3);
    }

    #[test]
    fn rank_three_on_two_dimensional_modes() {
        let son = son_layouts(&[2, 2, 2], 3, true);
        assert!(!son.is_empty());
        // The pattern a⊗b⊗c, a⊥⊗b⊥⊗c⊥, a⊗b⊥⊗c is among them up to relabeling.
        assert!(son.iter().all(|l| l.terms.len() == 3));
        let (on, bad) = on_layouts(&[2, 2, 2], 3, true);
        // All three pairs orthogonal in one mode needs three dimensions.
        assert!(bad >= 1);
        assert!(!on.is_empty());
    }
}
