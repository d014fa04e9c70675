//! Bounded model enumeration with canonical-form isomorphism rejection.

use super::{satisfies_axiom, FiniteStructure};
use crate::syntax::{HInductiveSentence, Signature};
use itertools::Itertools;
use std::collections::{BTreeMap, BTreeSet};

/// Lexicographically least relation encoding over all universe permutations.
pub fn canonical_form(m: &FiniteStructure) -> BTreeMap<String, BTreeSet<Vec<usize>>> {
    // Empty relations are dropped so that an absent symbol and an explicitly
    // empty one encode identically.
    let mut best: Option<BTreeMap<String, BTreeSet<Vec<usize>>>> = None;
    for perm in (0..m.size).permutations(m.size) {
        let relabeled: BTreeMap<String, BTreeSet<Vec<usize>>> = m
            .relations
            .iter()
            .filter(|(_, tuples)| !tuples.is_empty())
            .map(|(sym, tuples)| {
                (
                    sym.clone(),
                    tuples
                        .iter()
                        .map(|t| t.iter().map(|&e| perm[e]).collect())
                        .collect(),
                )
            })
            .collect();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
    }
    best.unwrap_or_default()
}

pub fn are_isomorphic(m: &FiniteStructure, n: &FiniteStructure) -> bool {
    m.size == n.size && canonical_form(m) == canonical_form(n)
}

/// All models of the axioms with universe size 1..=max_size, one per
/// isomorphism class, in deterministic order (by size, then by canonical
/// encoding).
///
/// Pure enumeration: for each symbol every subset of the full tuple space is
/// tried, so this is only feasible at desk scale.
pub fn find_models(
    axioms: &[HInductiveSentence],
    sig: &Signature,
    max_size: usize,
) -> Vec<FiniteStructure> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<(usize, BTreeMap<String, BTreeSet<Vec<usize>>>)> = BTreeSet::new();
    for size in 1..=max_size {
        let mut current: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
        enumerate_symbols(sig.symbols(), 0, size, &mut current, &mut |relations| {
            let m = FiniteStructure {
                size,
                relations: relations.clone(),
            };
            if axioms.iter().all(|ax| satisfies_axiom(&m, ax)) {
                let key = (size, canonical_form(&m));
                if seen.insert(key) {
                    out.push(m);
                }
            }
        });
    }
    // `seen` deduplicates; order models by size then canonical form.
    out.sort_by_key(|m| (m.size, canonical_form(m)));
    out
}

fn enumerate_symbols(
    symbols: &[crate::syntax::RelationSymbol],
    idx: usize,
    size: usize,
    current: &mut BTreeMap<String, BTreeSet<Vec<usize>>>,
    emit: &mut dyn FnMut(&BTreeMap<String, BTreeSet<Vec<usize>>>),
) {
    if idx == symbols.len() {
        emit(current);
        return;
    }
    let sym = &symbols[idx];
    let tuples: Vec<Vec<usize>> = all_tuples(size, sym.arity);
    // Odometer over subsets of the tuple space.
    let mut chosen = vec![false; tuples.len()];
    loop {
        let set: BTreeSet<Vec<usize>> = tuples
            .iter()
            .zip(&chosen)
            .filter(|(_, &c)| c)
            .map(|(t, _)| t.clone())
            .collect();
        current.insert(sym.name.clone(), set);
        enumerate_symbols(symbols, idx + 1, size, current, emit);
        let mut i = 0;
        loop {
            if i == chosen.len() {
                current.remove(&sym.name);
                return;
            }
            chosen[i] = !chosen[i];
            if chosen[i] {
                break;
            }
            i += 1;
        }
    }
}

fn all_tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    if arity == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut t = vec![0usize; arity];
    loop {
        out.push(t.clone());
        let mut i = arity;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < size {
                break;
            }
            t[i] = 0;
        }
    }
}
