//! Primitive-positive normal form.
//!
//! Every positive formula is equivalent to a finite disjunction of
//! primitive-positive formulas: an existential prefix over a conjunction of
//! atoms (relation atoms and equalities). `false` becomes the empty
//! disjunction, `true` the pp formula with empty prefix and no atoms.

use super::PositiveFormula;
use std::collections::BTreeSet;

/// An existential prefix over a conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpFormula {
    pub bound: Vec<String>,
    /// Each entry is `Atom` or `Equal`.
    pub atoms: Vec<PositiveFormula>,
}

impl PpFormula {
    pub fn to_formula(&self) -> PositiveFormula {
        let body = if self.atoms.is_empty() {
            PositiveFormula::Top
        } else {
            PositiveFormula::and(self.atoms.clone())
        };
        self.bound
            .iter()
            .rev()
            .fold(body, |acc, v| PositiveFormula::Exists(v.clone(), Box::new(acc)))
    }

    /// Number of distinct variables (free and bound) mentioned.
    pub fn variable_count(&self) -> usize {
        let mut vars: BTreeSet<&str> = self.bound.iter().map(|s| s.as_str()).collect();
        for a in &self.atoms {
            match a {
                PositiveFormula::Atom { args, .. } => {
                    vars.extend(args.iter().map(|s| s.as_str()))
                }
                PositiveFormula::Equal(u, v) => {
                    vars.insert(u);
                    vars.insert(v);
                }
                _ => {}
            }
        }
        vars.len()
    }
}

/// Rewrites `phi` into a list of pp formulas whose disjunction is equivalent
/// to `phi` on every structure.
pub fn pp_normal_form(phi: &PositiveFormula) -> Vec<PpFormula> {
    let free = phi.free_vars();
    let mut fresh = FreshVars {
        counter: 0,
        taken: free,
    };
    normalise(phi, &mut fresh)
}

struct FreshVars {
    counter: usize,
    taken: BTreeSet<String>,
}

impl FreshVars {
    fn next(&mut self) -> String {
        loop {
            let cand = format!("q{}", self.counter);
            self.counter += 1;
            if self.taken.insert(cand.clone()) {
                return cand;
            }
        }
    }
}

fn rename_in_pp(pp: &PpFormula, old: &str, new: &str) -> PpFormula {
    let r = |v: &String| {
        if v == old {
            new.to_string()
        } else {
            v.clone()
        }
    };
    PpFormula {
        bound: pp.bound.iter().map(&r).collect(),
        atoms: pp
            .atoms
            .iter()
            .map(|a| match a {
                PositiveFormula::Atom { sym, args } => PositiveFormula::Atom {
                    sym: sym.clone(),
                    args: args.iter().map(&r).collect(),
                },
                PositiveFormula::Equal(u, v) => PositiveFormula::Equal(r(u), r(v)),
                other => other.clone(),
            })
            .collect(),
    }
}

fn normalise(phi: &PositiveFormula, fresh: &mut FreshVars) -> Vec<PpFormula> {
    match phi {
        PositiveFormula::Bottom => vec![],
        PositiveFormula::Top => vec![PpFormula {
            bound: vec![],
            atoms: vec![],
        }],
        PositiveFormula::Atom { .. } | PositiveFormula::Equal(_, _) => vec![PpFormula {
            bound: vec![],
            atoms: vec![phi.clone()],
        }],
        PositiveFormula::Or(parts) => parts.iter().flat_map(|p| normalise(p, fresh)).collect(),
        PositiveFormula::And(parts) => {
            let mut acc = vec![PpFormula {
                bound: vec![],
                atoms: vec![],
            }];
            for p in parts {
                let pps = normalise(p, fresh);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &pps {
                        // Rename b's prefix apart from everything seen so far.
                        let mut b2 = b.clone();
                        for v in b.bound.clone() {
                            let nv = fresh.next();
                            b2 = rename_in_pp(&b2, &v, &nv);
                        }
                        next.push(PpFormula {
                            bound: a.bound.iter().chain(b2.bound.iter()).cloned().collect(),
                            atoms: a.atoms.iter().chain(b2.atoms.iter()).cloned().collect(),
                        });
                    }
                }
                acc = next;
            }
            acc
        }
        PositiveFormula::Exists(v, body) => normalise(body, fresh)
            .into_iter()
            .map(|pp| {
                // The binder may clash with a prefix variable introduced by a
                // nested renaming; prefix variables are always fresh, so a
                // plain prepend is safe after renaming v itself.
                let nv = fresh.next();
                let pp = rename_in_pp(&pp, v, &nv);
                PpFormula {
                    bound: std::iter::once(nv).chain(pp.bound.iter().cloned()).collect(),
                    atoms: pp.atoms,
                }
            })
            .collect(),
    }
}
