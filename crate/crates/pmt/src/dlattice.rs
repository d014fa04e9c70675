//! Finite bounded distributive lattices.
//!
//! Elements are extensional: a lattice is either validated meet/join tables
//! or the closure of a family of set-vectors under pointwise intersection and
//! union. Formula witnesses are annotations carried alongside, never the
//! identity of an element.

use crate::syntax::PositiveFormula;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Default cap on the number of lattice elements.
pub const DEFAULT_ELEMENT_CAP: usize = 4096;

/// One subset per carrier of an indexed set family.
pub type SetVector = Vec<BTreeSet<usize>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("{identity} fails at ({a}, {b}, {c})")]
    IdentityViolated {
        identity: &'static str,
        a: usize,
        b: usize,
        c: usize,
    },
    #[error("meet/join tables must be square of the same size")]
    MalformedTables,
    #[error("table entry out of range")]
    EntryOutOfRange,
    #[error("lattice has no elements")]
    Empty,
    #[error("element cap {cap} exceeded during closure")]
    CapExceeded { cap: usize },
    #[error("set-vector has {found} components, family has {expected} carriers")]
    CarrierMismatch { expected: usize, found: usize },
    #[error("set-vector entry outside its carrier")]
    CarrierElementOutOfRange,
    #[error("mapping is not a lattice homomorphism")]
    NotAHomomorphism,
}

/// A finite bounded distributive lattice given by its operation tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DLattice {
    size: usize,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
    bottom: usize,
    top: usize,
    witness: Vec<Option<PositiveFormula>>,
    /// Present when the lattice was generated from a set family; parallel to
    /// the element order.
    vectors: Option<Vec<SetVector>>,
}

impl DLattice {
    /// Validates the tables: lattice identities, distributivity and bounds.
    /// The first violated identity is reported with a witnessing triple.
    pub fn from_tables(
        meet: Vec<Vec<usize>>,
        join: Vec<Vec<usize>>,
    ) -> Result<DLattice, LatticeError> {
        let size = meet.len();
        if size == 0 {
            return Err(LatticeError::Empty);
        }
        if join.len() != size
            || meet.iter().any(|r| r.len() != size)
            || join.iter().any(|r| r.len() != size)
        {
            return Err(LatticeError::MalformedTables);
        }
        if meet
            .iter()
            .chain(join.iter())
            .flatten()
            .any(|&v| v >= size)
        {
            return Err(LatticeError::EntryOutOfRange);
        }

        let viol = |identity: &'static str, a: usize, b: usize, c: usize| {
            LatticeError::IdentityViolated { identity, a, b, c }
        };
        for a in 0..size {
            if meet[a][a] != a {
                return Err(viol("idempotence of meet", a, a, a));
            }
            if join[a][a] != a {
                return Err(viol("idempotence of join", a, a, a));
            }
        }
        for a in 0..size {
            for b in 0..size {
                if meet[a][b] != meet[b][a] {
                    return Err(viol("commutativity of meet", a, b, b));
                }
                if join[a][b] != join[b][a] {
                    return Err(viol("commutativity of join", a, b, b));
                }
                if meet[a][join[a][b]] != a {
                    return Err(viol("absorption (meet over join)", a, b, b));
                }
                if join[a][meet[a][b]] != a {
                    return Err(viol("absorption (join over meet)", a, b, b));
                }
            }
        }
        for a in 0..size {
            for b in 0..size {
                for c in 0..size {
                    if meet[meet[a][b]][c] != meet[a][meet[b][c]] {
                        return Err(viol("associativity of meet", a, b, c));
                    }
                    if join[join[a][b]][c] != join[a][join[b][c]] {
                        return Err(viol("associativity of join", a, b, c));
                    }
                    if meet[a][join[b][c]] != join[meet[a][b]][meet[a][c]] {
                        return Err(viol("distributivity", a, b, c));
                    }
                }
            }
        }
        // Bounds exist in any finite lattice: fold meets and joins.
        let bottom = (0..size).fold(0, |acc, x| meet[acc][x]);
        let top = (0..size).fold(0, |acc, x| join[acc][x]);
        Ok(DLattice {
            size,
            meet,
            join,
            bottom,
            top,
            witness: vec![None; size],
            vectors: None,
        })
    }

    /// Smallest family over the given carriers containing the generators,
    /// the empty and the full vector, closed under pointwise intersection and
    /// union. Elements are ordered by their vector encoding; intersection and
    /// union witnesses are built with `&` / `|` from generator witnesses.
    pub fn from_set_family(
        carrier_sizes: &[usize],
        generators: &[(SetVector, Option<PositiveFormula>)],
        cap: usize,
    ) -> Result<DLattice, LatticeError> {
        for (v, _) in generators {
            if v.len() != carrier_sizes.len() {
                return Err(LatticeError::CarrierMismatch {
                    expected: carrier_sizes.len(),
                    found: v.len(),
                });
            }
            for (set, &size) in v.iter().zip(carrier_sizes) {
                if set.iter().any(|&e| e >= size) {
                    return Err(LatticeError::CarrierElementOutOfRange);
                }
            }
        }
        let empty: SetVector = carrier_sizes.iter().map(|_| BTreeSet::new()).collect();
        let full: SetVector = carrier_sizes.iter().map(|&s| (0..s).collect()).collect();

        let mut elements: Vec<SetVector> = Vec::new();
        let mut witnesses: Vec<Option<PositiveFormula>> = Vec::new();
        let push = |elements: &mut Vec<SetVector>,
                        witnesses: &mut Vec<Option<PositiveFormula>>,
                        v: SetVector,
                        w: Option<PositiveFormula>|
         -> Result<bool, LatticeError> {
            if elements.contains(&v) {
                return Ok(false);
            }
            if elements.len() == cap {
                return Err(LatticeError::CapExceeded { cap });
            }
            elements.push(v);
            witnesses.push(w);
            Ok(true)
        };
        push(
            &mut elements,
            &mut witnesses,
            empty,
            Some(PositiveFormula::Bottom),
        )?;
        push(
            &mut elements,
            &mut witnesses,
            full,
            Some(PositiveFormula::Top),
        )?;
        for (v, w) in generators {
            push(&mut elements, &mut witnesses, v.clone(), w.clone())?;
        }
        // Worklist closure under pairwise intersection / union.
        let mut i = 0;
        while i < elements.len() {
            for j in 0..i {
                let inter: SetVector = elements[i]
                    .iter()
                    .zip(&elements[j])
                    .map(|(a, b)| a.intersection(b).cloned().collect())
                    .collect();
                let uni: SetVector = elements[i]
                    .iter()
                    .zip(&elements[j])
                    .map(|(a, b)| a.union(b).cloned().collect())
                    .collect();
                let wi = combine(&witnesses[i], &witnesses[j], true);
                let wu = combine(&witnesses[i], &witnesses[j], false);
                push(&mut elements, &mut witnesses, inter, wi)?;
                push(&mut elements, &mut witnesses, uni, wu)?;
            }
            i += 1;
        }

        // Canonical order.
        let mut order: Vec<usize> = (0..elements.len()).collect();
        order.sort_by(|&a, &b| elements[a].cmp(&elements[b]));
        let elements: Vec<SetVector> = order.iter().map(|&i| elements[i].clone()).collect();
        let witness: Vec<Option<PositiveFormula>> =
            order.iter().map(|&i| witnesses[i].clone()).collect();

        let size = elements.len();
        let index_of = |v: &SetVector| elements.binary_search(v).expect("closure is closed");
        let mut meet = vec![vec![0usize; size]; size];
        let mut join = vec![vec![0usize; size]; size];
        for a in 0..size {
            for b in 0..size {
                let inter: SetVector = elements[a]
                    .iter()
                    .zip(&elements[b])
                    .map(|(x, y)| x.intersection(y).cloned().collect())
                    .collect();
                let uni: SetVector = elements[a]
                    .iter()
                    .zip(&elements[b])
                    .map(|(x, y)| x.union(y).cloned().collect())
                    .collect();
                meet[a][b] = index_of(&inter);
                join[a][b] = index_of(&uni);
            }
        }
        let bottom = (0..size).fold(0, |acc, x| meet[acc][x]);
        let top = (0..size).fold(0, |acc, x| join[acc][x]);
        Ok(DLattice {
            size,
            meet,
            join,
            bottom,
            top,
            witness,
            vectors: Some(elements),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.meet[a][b] == a
    }

    pub fn witness(&self, a: usize) -> Option<&PositiveFormula> {
        self.witness[a].as_ref()
    }

    pub fn set_witness(&mut self, a: usize, w: PositiveFormula) {
        self.witness[a] = Some(w);
    }

    pub fn vector(&self, a: usize) -> Option<&SetVector> {
        self.vectors.as_ref().map(|vs| &vs[a])
    }

    pub fn vectors(&self) -> Option<&[SetVector]> {
        self.vectors.as_deref()
    }

    pub fn index_of_vector(&self, v: &SetVector) -> Option<usize> {
        self.vectors
            .as_ref()
            .and_then(|vs| vs.binary_search(v).ok())
    }

    /// Non-bottom elements that are not joins of two strictly smaller ones.
    pub fn join_irreducibles(&self) -> Vec<usize> {
        (0..self.size)
            .filter(|&e| {
                if e == self.bottom {
                    return false;
                }
                !(0..self.size).any(|a| {
                    a != e
                        && self.leq(a, e)
                        && (0..self.size)
                            .any(|b| b != e && self.leq(b, e) && self.join[a][b] == e)
                })
            })
            .collect()
    }

    pub fn up_set(&self, e: usize) -> BTreeSet<usize> {
        (0..self.size).filter(|&a| self.leq(e, a)).collect()
    }

    /// All prime filters, via the join-irreducible correspondence: in a finite
    /// distributive lattice each prime filter is the up-set of a unique
    /// join-irreducible. Canonical order follows the element order of the
    /// irreducibles.
    pub fn prime_filters(&self) -> Vec<PrimeFilter> {
        self.join_irreducibles()
            .into_iter()
            .map(|j| PrimeFilter {
                elements: self.up_set(j),
            })
            .collect()
    }

    pub fn is_prime_filter(&self, set: &BTreeSet<usize>) -> bool {
        if set.is_empty() || set.len() == self.size && self.size > 1 || set.contains(&self.bottom) {
            // proper: must omit bottom; in the one-element lattice there is no
            // proper nonempty subset, so no prime filter at all.
            return false;
        }
        if self.size == 1 {
            return false;
        }
        // Upward closed and meet closed.
        for &a in set {
            for b in 0..self.size {
                if self.leq(a, b) && !set.contains(&b) {
                    return false;
                }
            }
            for &b in set {
                if !set.contains(&self.meet[a][b]) {
                    return false;
                }
            }
        }
        // Prime.
        for a in 0..self.size {
            for b in 0..self.size {
                if set.contains(&self.join[a][b]) && !set.contains(&a) && !set.contains(&b) {
                    return false;
                }
            }
        }
        true
    }

    /// Same elements with the operations and bounds swapped.
    pub fn opposite(&self) -> DLattice {
        DLattice {
            size: self.size,
            meet: self.join.clone(),
            join: self.meet.clone(),
            bottom: self.top,
            top: self.bottom,
            witness: self.witness.clone(),
            vectors: None,
        }
    }

    /// The complement of `a`, if any.
    pub fn complement(&self, a: usize) -> Option<usize> {
        (0..self.size)
            .find(|&b| self.meet[a][b] == self.bottom && self.join[a][b] == self.top)
    }

    pub fn is_boolean(&self) -> bool {
        (0..self.size).all(|a| self.complement(a).is_some())
    }

    /// Pairs (a, b) with b covering a.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.size {
            for b in 0..self.size {
                if a == b || !self.leq(a, b) {
                    continue;
                }
                let between = (0..self.size)
                    .any(|c| c != a && c != b && self.leq(a, c) && self.leq(c, b));
                if !between {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// DOT rendering of the Hasse diagram, edges pointing upward.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        let _ = writeln!(out, "  rankdir=BT;");
        for e in 0..self.size {
            let label = match &self.witness[e] {
                Some(w) => format!("{e}: {w}"),
                None => format!("{e}"),
            };
            let _ = writeln!(out, "  n{e} [label=\"{}\"];", label.replace('"', "\\\""));
        }
        for (a, b) in self.covers() {
            let _ = writeln!(out, "  n{a} -> n{b};");
        }
        out.push_str("}\n");
        out
    }
}

fn combine(
    a: &Option<PositiveFormula>,
    b: &Option<PositiveFormula>,
    is_meet: bool,
) -> Option<PositiveFormula> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if is_meet {
            PositiveFormula::And(vec![x.clone(), y.clone()])
        } else {
            PositiveFormula::Or(vec![x.clone(), y.clone()])
        }),
        _ => None,
    }
}

/// A prime filter, as the set of element indices it contains.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeFilter {
    pub elements: BTreeSet<usize>,
}

impl PrimeFilter {
    pub fn contains(&self, e: usize) -> bool {
        self.elements.contains(&e)
    }
}

/// A bounded-lattice homomorphism between two lattices, by element mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeHom {
    pub map: Vec<usize>,
}

impl LatticeHom {
    pub fn new(
        source: &DLattice,
        target: &DLattice,
        map: Vec<usize>,
    ) -> Result<LatticeHom, LatticeError> {
        if map.len() != source.size() || map.iter().any(|&v| v >= target.size()) {
            return Err(LatticeError::NotAHomomorphism);
        }
        for a in 0..source.size() {
            for b in 0..source.size() {
                if map[source.meet(a, b)] != target.meet(map[a], map[b])
                    || map[source.join(a, b)] != target.join(map[a], map[b])
                {
                    return Err(LatticeError::NotAHomomorphism);
                }
            }
        }
        if map[source.bottom()] != target.bottom() || map[source.top()] != target.top() {
            return Err(LatticeError::NotAHomomorphism);
        }
        Ok(LatticeHom { map })
    }

    pub fn apply(&self, e: usize) -> usize {
        self.map[e]
    }

    pub fn identity(l: &DLattice) -> LatticeHom {
        LatticeHom {
            map: (0..l.size()).collect(),
        }
    }

    /// `self` then `other`.
    pub fn then(&self, other: &LatticeHom) -> LatticeHom {
        LatticeHom {
            map: self.map.iter().map(|&e| other.map[e]).collect(),
        }
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        for &v in &self.map {
            if v >= seen.len() || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }
}

/// Searches for some lattice isomorphism between `a` and `b` by backtracking
/// on the element mapping. Feasible only at desk scale.
pub fn find_isomorphism(a: &DLattice, b: &DLattice) -> Option<LatticeHom> {
    if a.size() != b.size() {
        return None;
    }
    // Match elements by their up-set and down-set cardinalities first.
    let profile = |l: &DLattice, e: usize| {
        let up = (0..l.size()).filter(|&x| l.leq(e, x)).count();
        let down = (0..l.size()).filter(|&x| l.leq(x, e)).count();
        (up, down)
    };
    let mut map = vec![usize::MAX; a.size()];
    let mut used = vec![false; b.size()];
    fn rec(
        a: &DLattice,
        b: &DLattice,
        e: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        profile: &dyn Fn(&DLattice, usize) -> (usize, usize),
    ) -> bool {
        if e == a.size() {
            return LatticeHom::new(a, b, map.clone()).is_ok();
        }
        for t in 0..b.size() {
            if used[t] || profile(a, e) != profile(b, t) {
                continue;
            }
            // Partial consistency with already mapped elements.
            let ok = (0..e).all(|x| {
                let (m, j) = (a.meet(x, e), a.join(x, e));
                let consistent = |v: usize, tv: usize| {
                    if v == e {
                        tv == t
                    } else if v < e {
                        map[v] == tv
                    } else {
                        true
                    }
                };
                consistent(m, b.meet(map[x], t)) && consistent(j, b.join(map[x], t))
            });
            if !ok {
                continue;
            }
            map[e] = t;
            used[t] = true;
            if rec(a, b, e + 1, map, used, profile) {
                return true;
            }
            map[e] = usize::MAX;
            used[t] = false;
        }
        false
    }
    if rec(a, b, 0, &mut map, &mut used, &profile) {
        Some(LatticeHom { map })
    } else {
        None
    }
}

/// Builders for the standard small lattices used throughout the tests.
pub mod builders {
    use super::*;

    /// Chain 0 < 1 < ... < n-1.
    pub fn chain(n: usize) -> DLattice {
        let meet = (0..n).map(|a| (0..n).map(|b| a.min(b)).collect()).collect();
        let join = (0..n).map(|a| (0..n).map(|b| a.max(b)).collect()).collect();
        DLattice::from_tables(meet, join).expect("chains are distributive")
    }

    /// Boolean lattice 2^k as subsets of {0..k-1} encoded as bitmasks.
    pub fn boolean(k: usize) -> DLattice {
        let n = 1usize << k;
        let meet = (0..n).map(|a| (0..n).map(|b| a & b).collect()).collect();
        let join = (0..n).map(|a| (0..n).map(|b| a | b).collect()).collect();
        DLattice::from_tables(meet, join).expect("powersets are distributive")
    }

    /// Product of two lattices.
    pub fn product(x: &DLattice, y: &DLattice) -> DLattice {
        let n = x.size() * y.size();
        let enc = |a: usize, b: usize| a * y.size() + b;
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for a1 in 0..x.size() {
            for b1 in 0..y.size() {
                for a2 in 0..x.size() {
                    for b2 in 0..y.size() {
                        meet[enc(a1, b1)][enc(a2, b2)] = enc(x.meet(a1, a2), y.meet(b1, b2));
                        join[enc(a1, b1)][enc(a2, b2)] = enc(x.join(a1, a2), y.join(b1, b2));
                    }
                }
            }
        }
        DLattice::from_tables(meet, join).expect("products preserve distributivity")
    }

    /// Free bounded distributive lattice on two generators: the six-element
    /// lattice bot < x&y < {x, y} < x|y < top, realized as a set family.
    pub fn free_on_two() -> DLattice {
        // Generators as subsets of a 4-point carrier: x = {0,1}, y = {0,2}.
        DLattice::from_set_family(
            &[4],
            &[
                (vec![BTreeSet::from([0, 1])], None),
                (vec![BTreeSet::from([0, 2])], None),
            ],
            DEFAULT_ELEMENT_CAP,
        )
        .expect("set families are distributive")
    }
}

#[cfg(test)]
mod tests {
    use super::builders::*;
    use super::*;

    #[test]
    fn from_set_family_trivial() {
        let l = DLattice::from_set_family(&[2], &[], DEFAULT_ELEMENT_CAP).unwrap();
        assert_eq!(l.size(), 2);
        assert_eq!(l.bottom(), 0);
        assert_eq!(l.top(), 1);
    }

    #[test]
    fn from_set_family_three_chain() {
        let l = DLattice::from_set_family(
            &[2],
            &[(vec![BTreeSet::from([0])], None)],
            DEFAULT_ELEMENT_CAP,
        )
        .unwrap();
        assert_eq!(l.size(), 3);
    }

    #[test]
    fn from_set_family_boolean_square() {
        let l = DLattice::from_set_family(
            &[2],
            &[
                (vec![BTreeSet::from([0])], None),
                (vec![BTreeSet::from([1])], None),
            ],
            DEFAULT_ELEMENT_CAP,
        )
        .unwrap();
        assert_eq!(l.size(), 4);
        assert!(l.is_boolean());
    }

    #[test]
    fn m3_fails_distributivity() {
        // Diamond: bottom 0, atoms 1,2,3, top 4.
        let n = 5;
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        let leq = |a: usize, b: usize| a == b || a == 0 || b == 4;
        for a in 0..n {
            for b in 0..n {
                meet[a][b] = if leq(a, b) {
                    a
                } else if leq(b, a) {
                    b
                } else {
                    0
                };
                join[a][b] = if leq(a, b) {
                    b
                } else if leq(b, a) {
                    a
                } else {
                    4
                };
            }
        }
        let err = DLattice::from_tables(meet, join).unwrap_err();
        assert!(
            matches!(
                err,
                LatticeError::IdentityViolated {
                    identity: "distributivity",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn n5_fails_validation() {
        // Pentagon: 0 < 1 < 2 < 4 and 0 < 3 < 4, with 3 incomparable to 1,2.
        let n = 5;
        let leq = |a: usize, b: usize| -> bool {
            a == b
                || a == 0
                || b == 4
                || (a == 1 && b == 2)
        };
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                meet[a][b] = if leq(a, b) {
                    a
                } else if leq(b, a) {
                    b
                } else {
                    0
                };
                join[a][b] = if leq(a, b) {
                    b
                } else if leq(b, a) {
                    a
                } else {
                    4
                };
            }
        }
        assert!(DLattice::from_tables(meet, join).is_err());
    }

    #[test]
    fn join_irreducibles_of_standards() {
        assert_eq!(chain(3).join_irreducibles(), vec![1, 2]);
        assert_eq!(boolean(2).join_irreducibles(), vec![1, 2]);
        assert_eq!(chain(2).join_irreducibles(), vec![1]);
    }

    #[test]
    fn prime_filter_counts_match_anchors() {
        assert_eq!(chain(3).prime_filters().len(), 2);
        assert_eq!(boolean(2).prime_filters().len(), 2);
        assert_eq!(free_on_two().size(), 6);
        assert_eq!(free_on_two().prime_filters().len(), 4);
    }

    #[test]
    fn three_chain_filters_explicit() {
        let l = chain(3);
        let fs = l.prime_filters();
        let sets: Vec<BTreeSet<usize>> = fs.into_iter().map(|f| f.elements).collect();
        assert!(sets.contains(&BTreeSet::from([1, 2])));
        assert!(sets.contains(&BTreeSet::from([2])));
    }

    #[test]
    fn prime_filters_match_brute_force_scan() {
        for l in [chain(2), chain(3), chain(4), boolean(2), boolean(3), free_on_two()] {
            let fast: BTreeSet<BTreeSet<usize>> = l
                .prime_filters()
                .into_iter()
                .map(|f| f.elements)
                .collect();
            let mut brute = BTreeSet::new();
            for mask in 0u32..(1 << l.size()) {
                let set: BTreeSet<usize> =
                    (0..l.size()).filter(|&e| mask & (1 << e) != 0).collect();
                if l.is_prime_filter(&set) {
                    brute.insert(set);
                }
            }
            assert_eq!(fast, brute, "lattice of size {}", l.size());
        }
    }

    #[test]
    fn opposite_is_involutive() {
        for l in [chain(3), boolean(2), free_on_two()] {
            let opp = l.opposite();
            assert_eq!(opp.opposite().size(), l.size());
            assert_eq!(opp.opposite().meet, l.meet);
            assert_eq!(opp.bottom(), l.top());
            assert_eq!(opp.prime_filters().len(), l.prime_filters().len());
        }
    }

    #[test]
    fn boolean_prime_filters_are_maximal() {
        let l = boolean(3);
        let filters = l.prime_filters();
        for f in &filters {
            for g in &filters {
                if f != g {
                    assert!(!f.elements.is_subset(&g.elements));
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let gens: Vec<(SetVector, Option<PositiveFormula>)> = (0..4)
            .map(|i| (vec![BTreeSet::from([i])], None))
            .collect();
        let err = DLattice::from_set_family(&[4], &gens, 10).unwrap_err();
        assert!(matches!(err, LatticeError::CapExceeded { cap: 10 }));
    }

    #[test]
    fn witnesses_evaluate_to_their_vectors() {
        use crate::syntax::PositiveFormula as F;
        let l = DLattice::from_set_family(
            &[2],
            &[
                (vec![BTreeSet::from([0])], Some(F::atom("P", &["x0"]))),
                (vec![BTreeSet::from([1])], Some(F::atom("Q", &["x0"]))),
            ],
            DEFAULT_ELEMENT_CAP,
        )
        .unwrap();
        // Every element carries a witness; evaluating it over the family
        // (P = {0}, Q = {1}) reproduces the vector.
        let eval = |phi: &F, e: usize| -> bool {
            match phi {
                F::Bottom => false,
                F::Top => true,
                F::Atom { sym, .. } => match sym.as_str() {
                    "P" => e == 0,
                    "Q" => e == 1,
                    _ => unreachable!(),
                },
                F::And(ps) => ps.iter().all(|p| eval2(p, e)),
                F::Or(ps) => ps.iter().any(|p| eval2(p, e)),
                _ => unreachable!(),
            }
        };
        fn eval2(phi: &F, e: usize) -> bool {
            match phi {
                F::Bottom => false,
                F::Top => true,
                F::Atom { sym, .. } => match sym.as_str() {
                    "P" => e == 0,
                    "Q" => e == 1,
                    _ => unreachable!(),
                },
                F::And(ps) => ps.iter().all(|p| eval2(p, e)),
                F::Or(ps) => ps.iter().any(|p| eval2(p, e)),
                _ => unreachable!(),
            }
        }
        for a in 0..l.size() {
            let w = l.witness(a).expect("all elements witnessed");
            let v: BTreeSet<usize> = (0..2).filter(|&e| eval(w, e)).collect();
            assert_eq!(&v, &l.vector(a).unwrap()[0]);
        }
    }

    #[test]
    fn hasse_dot_mentions_all_covers() {
        let l = chain(3);
        let dot = l.to_dot("chain3");
        assert!(dot.contains("n0 -> n1"));
        assert!(dot.contains("n1 -> n2"));
        assert!(!dot.contains("n0 -> n2"));
    }

    #[test]
    fn find_isomorphism_distinguishes() {
        assert!(find_isomorphism(&chain(4), &boolean(2)).is_none());
        assert!(find_isomorphism(&boolean(2), &product(&chain(2), &chain(2))).is_some());
    }
}
