//! The enumeration condition: does a subset of a model's universe enumerate
//! a positively closed model?
//!
//! For every tuple from the subset and every positive quantifier-free formula
//! within the budget, either a witness tuple exists inside the subset, or a
//! quantifier-free blocker holds of the tuple that is jointly inconsistent
//! with the formula across the whole class.

use super::{denotation, FiniteStructure, ModelClass, SemanticsError};
use crate::syntax::{canonical_var, PositiveFormula};

/// A positive quantifier-free conjunction over two variable blocks, given as
/// atoms whose arguments index into the concatenation x-block ++ y-block.
#[derive(Debug, Clone, PartialEq, Eq)]
struct QfConjunction {
    atoms: Vec<QfAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum QfAtom {
    Rel { sym: String, args: Vec<usize> },
    Eq(usize, usize),
}

impl QfConjunction {
    fn holds(&self, m: &FiniteStructure, assignment: &[usize]) -> bool {
        self.atoms.iter().all(|a| match a {
            QfAtom::Rel { sym, args } => {
                let t: Vec<usize> = args.iter().map(|&i| assignment[i]).collect();
                m.holds(sym, &t)
            }
            QfAtom::Eq(i, j) => assignment[*i] == assignment[*j],
        })
    }

    /// As a formula with variables x0..x(total-1), the y-block shifted by
    /// `offset` positions.
    fn to_formula(&self, x_len: usize, offset: usize) -> PositiveFormula {
        let var = |i: usize| {
            if i < x_len {
                canonical_var(i)
            } else {
                canonical_var(i - x_len + offset)
            }
        };
        let parts: Vec<PositiveFormula> = self
            .atoms
            .iter()
            .map(|a| match a {
                QfAtom::Rel { sym, args } => PositiveFormula::Atom {
                    sym: sym.clone(),
                    args: args.iter().map(|&i| var(i)).collect(),
                },
                QfAtom::Eq(i, j) => PositiveFormula::Equal(var(*i), var(*j)),
            })
            .collect();
        if parts.is_empty() {
            PositiveFormula::Top
        } else {
            PositiveFormula::and(parts)
        }
    }
}

/// All single atoms over `vars` variables.
fn all_atoms(class: &ModelClass, vars: usize) -> Vec<QfAtom> {
    let mut out = Vec::new();
    for sym in class.sig.symbols() {
        for args in all_arg_tuples(vars, sym.arity) {
            out.push(QfAtom::Rel {
                sym: sym.name.clone(),
                args,
            });
        }
    }
    for i in 0..vars {
        for j in i + 1..vars {
            out.push(QfAtom::Eq(i, j));
        }
    }
    out
}

fn all_arg_tuples(vars: usize, arity: usize) -> Vec<Vec<usize>> {
    if arity == 0 {
        return vec![vec![]];
    }
    if vars == 0 {
        return vec![];
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
            if t[i] < vars {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Conjunctions of 1..=budget atoms (as index combinations, no repeats).
fn all_conjunctions(atoms: &[QfAtom], budget: usize) -> Vec<QfConjunction> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        atoms: &[QfAtom],
        budget: usize,
        start: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<QfConjunction>,
    ) {
        if !stack.is_empty() {
            out.push(QfConjunction {
                atoms: stack.iter().map(|&i| atoms[i].clone()).collect(),
            });
        }
        if stack.len() == budget {
            return;
        }
        for i in start..atoms.len() {
            stack.push(i);
            rec(atoms, budget, i + 1, stack, out);
            stack.pop();
        }
    }
    rec(atoms, budget, 0, &mut stack, &mut out);
    out
}

fn tuples_from(set: &[usize], len: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; len];
    loop {
        out.push(idx.iter().map(|&i| set[i]).collect());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < set.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Decides the enumeration condition for `subset` inside `m`, with tuple
/// lengths bounded by `tuple_bound` and conjunctions by `qf_budget` atoms.
pub fn check_enumeration_condition(
    subset: &[usize],
    m: &FiniteStructure,
    class: &ModelClass,
    qf_budget: usize,
    tuple_bound: usize,
) -> Result<bool, SemanticsError> {
    assert!(!subset.is_empty(), "subset must be nonempty");
    for a_len in 1..=tuple_bound {
        for a_tuple in tuples_from(subset, a_len) {
            for y_len in 0..=tuple_bound {
                let atoms = all_atoms(class, a_len + y_len);
                for phi in all_conjunctions(&atoms, qf_budget) {
                    // Witness inside the subset?
                    let witnessed = tuples_from(subset, y_len).into_iter().any(|b| {
                        let mut assignment = a_tuple.clone();
                        assignment.extend(b);
                        phi.holds(m, &assignment)
                    });
                    if witnessed {
                        continue;
                    }
                    if !blocked(&phi, &a_tuple, y_len, subset, m, class, qf_budget, tuple_bound)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Searches for a blocker chi(x, z) holding of the tuple inside the subset
/// with exists(phi and chi) failing in every class member.
#[allow(clippy::too_many_arguments)]
fn blocked(
    phi: &QfConjunction,
    a_tuple: &[usize],
    y_len: usize,
    subset: &[usize],
    m: &FiniteStructure,
    class: &ModelClass,
    qf_budget: usize,
    tuple_bound: usize,
) -> Result<bool, SemanticsError> {
    let a_len = a_tuple.len();
    for z_len in 0..=tuple_bound {
        let atoms = all_atoms(class, a_len + z_len);
        for chi in all_conjunctions(&atoms, qf_budget) {
            let holds_somewhere = tuples_from(subset, z_len).into_iter().any(|c| {
                let mut assignment = a_tuple.to_vec();
                assignment.extend(c);
                chi.holds(m, &assignment)
            });
            if !holds_somewhere {
                continue;
            }
            // exists x y z (phi & chi) must fail in every member.
            let total = a_len + y_len + z_len;
            let joint = PositiveFormula::And(vec![
                phi.to_formula(a_len, a_len),
                chi.to_formula(a_len, a_len + y_len),
            ]);
            let mut consistent = false;
            for member in &class.models {
                if !denotation(member, &joint, total)?.is_empty() {
                    consistent = true;
                    break;
                }
            }
            if !consistent {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{RelationSymbol, Signature};
    use std::collections::{BTreeMap, BTreeSet};

    fn sig_r2() -> Signature {
        Signature::new(vec![RelationSymbol {
            name: "R".into(),
            arity: 2,
        }])
        .unwrap()
    }

    fn edge() -> FiniteStructure {
        let mut rel = BTreeMap::new();
        rel.insert("R".to_string(), BTreeSet::from([vec![0, 1]]));
        FiniteStructure::new(2, rel).unwrap()
    }

    #[test]
    fn one_element_no_relations_passes() {
        let m = FiniteStructure::new(1, BTreeMap::new()).unwrap();
        let class = ModelClass::new(
            Signature::new(vec![]).unwrap(),
            vec![("M".into(), m.clone())],
            vec![],
        )
        .unwrap();
        assert!(check_enumeration_condition(&[0], &m, &class, 1, 1).unwrap());
    }

    #[test]
    fn missing_witness_fails() {
        // A = {0} in ({0,1}, R={(0,1)}): R(x,y) has no witness in A and no
        // blocker, since R(0,1) holds in the only member.
        let m = edge();
        let class = ModelClass::new(sig_r2(), vec![("M".into(), m.clone())], vec![]).unwrap();
        assert!(!check_enumeration_condition(&[0], &m, &class, 1, 2).unwrap());
    }

    #[test]
    fn full_universe_passes() {
        let m = edge();
        let class = ModelClass::new(sig_r2(), vec![("M".into(), m.clone())], vec![]).unwrap();
        assert!(check_enumeration_condition(&[0, 1], &m, &class, 1, 2).unwrap());
    }
}
