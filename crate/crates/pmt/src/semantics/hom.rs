//! Homomorphism and immersion search between finite structures.

use super::{denotation, FiniteStructure, SemanticsError};
use crate::syntax::PositiveFormula;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A homomorphism between two finite structures, stored with its endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homomorphism {
    pub source: FiniteStructure,
    pub target: FiniteStructure,
    pub map: Vec<usize>,
}

impl Homomorphism {
    pub fn apply(&self, e: usize) -> usize {
        self.map[e]
    }

    pub fn apply_tuple(&self, tuple: &[usize]) -> Vec<usize> {
        tuple.iter().map(|&e| self.map[e]).collect()
    }

    pub fn identity(m: &FiniteStructure) -> Homomorphism {
        Homomorphism {
            source: m.clone(),
            target: m.clone(),
            map: (0..m.size).collect(),
        }
    }
}

/// Checks the defining condition: every relation tuple is preserved forward.
pub fn is_homomorphism(h: &Homomorphism) -> bool {
    h.map.len() == h.source.size
        && h.map.iter().all(|&v| v < h.target.size)
        && h.source.relations.iter().all(|(sym, tuples)| {
            tuples.iter().all(|t| h.target.holds(sym, &h.apply_tuple(t)))
        })
}

/// `g` after `f`.
pub fn compose(f: &Homomorphism, g: &Homomorphism) -> Homomorphism {
    assert_eq!(f.target, g.source, "composition endpoints must match");
    Homomorphism {
        source: f.source.clone(),
        target: g.target.clone(),
        map: f.map.iter().map(|&e| g.map[e]).collect(),
    }
}

/// The complete list of homomorphisms from `m` to `n`, in lexicographic order
/// of the underlying maps.
///
/// Backtracking search: source elements are assigned in ascending-degree
/// order, candidates are pruned by unary-relation compatibility up front and
/// by per-symbol support checks (a tuple with some positions assigned must
/// still have a matching target tuple) after each assignment.
pub fn homomorphisms(m: &FiniteStructure, n: &FiniteStructure) -> Vec<Homomorphism> {
    // Assignment order: ascending degree, ties by element index.
    let mut order: Vec<usize> = (0..m.size).collect();
    order.sort_by_key(|&e| (m.degree(e), e));

    // Unary-projection compatibility.
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); m.size];
    for a in 0..m.size {
        for b in 0..n.size {
            let ok = m.relations.iter().all(|(sym, tuples)| {
                if tuples.iter().next().map(|t| t.len()) != Some(1) {
                    return true;
                }
                !tuples.contains(&vec![a]) || n.holds(sym, &[b])
            });
            if ok {
                candidates[a].push(b);
            }
        }
    }

    let mut assignment: Vec<Option<usize>> = vec![None; m.size];
    let mut found: Vec<Vec<usize>> = Vec::new();
    search(m, n, &order, 0, &candidates, &mut assignment, &mut found);
    found.sort();
    found
        .into_iter()
        .map(|map| Homomorphism {
            source: m.clone(),
            target: n.clone(),
            map,
        })
        .collect()
}

fn search(
    m: &FiniteStructure,
    n: &FiniteStructure,
    order: &[usize],
    depth: usize,
    candidates: &[Vec<usize>],
    assignment: &mut Vec<Option<usize>>,
    found: &mut Vec<Vec<usize>>,
) {
    if depth == order.len() {
        found.push(assignment.iter().map(|o| o.unwrap()).collect());
        return;
    }
    let a = order[depth];
    for &b in &candidates[a] {
        assignment[a] = Some(b);
        if consistent(m, n, assignment) {
            search(m, n, order, depth + 1, candidates, assignment, found);
        }
        assignment[a] = None;
    }
}

/// Every source tuple must still have a target tuple matching its assigned
/// positions.
fn consistent(m: &FiniteStructure, n: &FiniteStructure, assignment: &[Option<usize>]) -> bool {
    for (sym, tuples) in &m.relations {
        let empty = BTreeSet::new();
        let targets = n.relations.get(sym).unwrap_or(&empty);
        for t in tuples {
            // The empty tuple has no coordinates to assign; it must be
            // present in the target outright.
            if !t.is_empty() && t.iter().all(|&e| assignment[e].is_none()) {
                continue;
            }
            let supported = targets.iter().any(|u| {
                t.iter()
                    .zip(u.iter())
                    .all(|(&e, &v)| assignment[e].is_none_or(|w| w == v))
            });
            if !supported {
                return false;
            }
        }
    }
    true
}

/// Exact immersion check against the given witness formulas per arity: the
/// map must preserve and reflect each formula at every tuple.
pub fn is_immersion(
    h: &Homomorphism,
    witnesses: &[(usize, Vec<PositiveFormula>)],
) -> Result<bool, SemanticsError> {
    for (arity, formulas) in witnesses {
        for phi in formulas {
            let src = denotation(&h.source, phi, *arity)?;
            let tgt = denotation(&h.target, phi, *arity)?;
            let mut tuple = vec![0usize; *arity];
            loop {
                let mapped = h.apply_tuple(&tuple);
                if src.contains(&tuple) != tgt.contains(&mapped) {
                    return Ok(false);
                }
                let mut i = *arity;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    tuple[i] += 1;
                    if tuple[i] < h.source.size {
                        break;
                    }
                    tuple[i] = 0;
                }
                if tuple.iter().all(|&e| e == 0) {
                    break;
                }
            }
        }
    }
    Ok(true)
}

/// True iff every homomorphism from `m` into a member of `class_models` is an
/// immersion (witnessed against the given formula sets).
pub fn is_positively_closed_semantic(
    m: &FiniteStructure,
    class_models: &[FiniteStructure],
    witnesses: &[(usize, Vec<PositiveFormula>)],
) -> Result<bool, SemanticsError> {
    for n in class_models {
        for h in homomorphisms(m, n) {
            if !is_immersion(&h, witnesses)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
