//! Finite Morleisation.
//!
//! Given a finite, subformula-closed, negation-closed set of first-order
//! formulas, extends the signature with one relation symbol per listed
//! formula and produces the h-inductive sentences linking the new symbols
//! across the connectives. Negation is rendered by the excluded-middle /
//! non-contradiction sentence pair, keeping every axiom h-inductive.
//!
//! All variables occurring in the input formulas (free and bound) must be
//! canonical `x<i>` names; the argument order of each new symbol is its
//! formula's free variables sorted by index.

use super::{
    var_index, HInductiveSentence, PositiveFormula, RelationSymbol, Signature,
    SyntaxError,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// First-order formulas accepted by the Morleisation transformer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FirstOrderFormula {
    Atom { sym: String, args: Vec<String> },
    Equal(String, String),
    Not(Box<FirstOrderFormula>),
    And(Box<FirstOrderFormula>, Box<FirstOrderFormula>),
    Or(Box<FirstOrderFormula>, Box<FirstOrderFormula>),
    Exists(String, Box<FirstOrderFormula>),
}

impl FirstOrderFormula {
    pub fn atom(sym: &str, args: &[&str]) -> Self {
        FirstOrderFormula::Atom {
            sym: sym.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn not(phi: FirstOrderFormula) -> Self {
        FirstOrderFormula::Not(Box::new(phi))
    }

    pub fn or(a: FirstOrderFormula, b: FirstOrderFormula) -> Self {
        FirstOrderFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: FirstOrderFormula, b: FirstOrderFormula) -> Self {
        FirstOrderFormula::And(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, body: FirstOrderFormula) -> Self {
        FirstOrderFormula::Exists(v.to_string(), Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(phi: &FirstOrderFormula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match phi {
                FirstOrderFormula::Atom { args, .. } => {
                    for a in args {
                        if !bound.contains(a) {
                            out.insert(a.clone());
                        }
                    }
                }
                FirstOrderFormula::Equal(a, b) => {
                    for v in [a, b] {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                FirstOrderFormula::Not(p) => go(p, bound, out),
                FirstOrderFormula::And(a, b) | FirstOrderFormula::Or(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                FirstOrderFormula::Exists(v, body) => {
                    bound.push(v.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn immediate_subformulas(&self) -> Vec<FirstOrderFormula> {
        match self {
            FirstOrderFormula::Atom { .. } | FirstOrderFormula::Equal(_, _) => vec![],
            FirstOrderFormula::Not(p) => vec![(**p).clone()],
            FirstOrderFormula::And(a, b) | FirstOrderFormula::Or(a, b) => {
                vec![(**a).clone(), (**b).clone()]
            }
            FirstOrderFormula::Exists(_, body) => vec![(**body).clone()],
        }
    }

    /// Free variables sorted by canonical index; errors on non-canonical names.
    fn sorted_free(&self) -> Result<Vec<String>, SyntaxError> {
        let mut indexed = Vec::new();
        for v in self.free_vars() {
            match var_index(&v) {
                Some(i) => indexed.push((i, v)),
                None => return Err(SyntaxError::NonCanonicalVariable(v)),
            }
        }
        indexed.sort();
        Ok(indexed.into_iter().map(|(_, v)| v).collect())
    }
}

impl fmt::Display for FirstOrderFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FirstOrderFormula::Atom { sym, args } => {
                if args.is_empty() {
                    write!(f, "{sym}")
                } else {
                    write!(f, "{sym}({})", args.join(","))
                }
            }
            FirstOrderFormula::Equal(a, b) => write!(f, "{a} = {b}"),
            FirstOrderFormula::Not(p) => write!(f, "!({p})"),
            FirstOrderFormula::And(a, b) => write!(f, "({a} & {b})"),
            FirstOrderFormula::Or(a, b) => write!(f, "({a} | {b})"),
            FirstOrderFormula::Exists(v, body) => write!(f, "(exists {v}. {body})"),
        }
    }
}

fn mangle(phi: &FirstOrderFormula) -> String {
    let mut out = String::from("R_");
    for c in phi.to_string().chars() {
        match c {
            c if c.is_ascii_alphanumeric() || c == '_' => out.push(c),
            '(' | ')' | ',' | '.' => out.push('_'),
            '!' => out.push_str("not_"),
            '&' => out.push_str("and"),
            '|' => out.push_str("or"),
            '=' => out.push_str("eq"),
            ' ' => {}
            _ => out.push('_'),
        }
    }
    // Collapse runs of underscores and trim trailing ones.
    let mut collapsed = String::new();
    let mut prev_us = false;
    for c in out.chars() {
        if c == '_' {
            if !prev_us {
                collapsed.push(c);
            }
            prev_us = true;
        } else {
            collapsed.push(c);
            prev_us = false;
        }
    }
    collapsed.trim_end_matches('_').to_string()
}

/// The name of the relation symbol the transformer assigns to `phi`.
pub fn morley_symbol(phi: &FirstOrderFormula) -> String {
    mangle(phi)
}

/// Extends `sig` with one symbol per listed formula and returns the linking
/// h-inductive sentences.
pub fn morleise(
    formulas: &[FirstOrderFormula],
    sig: &Signature,
) -> Result<(Signature, Vec<HInductiveSentence>), SyntaxError> {
    let set: BTreeSet<FirstOrderFormula> = formulas.iter().cloned().collect();
    for phi in &set {
        for sub in phi.immediate_subformulas() {
            if !set.contains(&sub) {
                return Err(SyntaxError::NotSubformulaClosed(sub.to_string()));
            }
        }
        if !matches!(phi, FirstOrderFormula::Not(_)) {
            let neg = FirstOrderFormula::not(phi.clone());
            if !set.contains(&neg) {
                return Err(SyntaxError::NotNegationClosed(neg.to_string()));
            }
        }
    }

    let mut names: BTreeMap<FirstOrderFormula, String> = BTreeMap::new();
    let mut used: BTreeSet<String> = sig.symbols().iter().map(|s| s.name.clone()).collect();
    let mut new_symbols = Vec::new();
    for phi in &set {
        let mut name = mangle(phi);
        while used.contains(&name) {
            name.push('_');
        }
        used.insert(name.clone());
        new_symbols.push(RelationSymbol {
            name: name.clone(),
            arity: phi.sorted_free()?.len(),
        });
        names.insert(phi.clone(), name);
    }
    let extended = sig.extended(new_symbols)?;

    // Atom applying the new symbol of `phi` to its own free variables.
    let app = |phi: &FirstOrderFormula| -> Result<PositiveFormula, SyntaxError> {
        Ok(PositiveFormula::Atom {
            sym: names[phi].clone(),
            args: phi.sorted_free()?,
        })
    };

    let mut axioms = Vec::new();
    fn both(
        axioms: &mut Vec<HInductiveSentence>,
        a: PositiveFormula,
        b: PositiveFormula,
    ) -> Result<(), SyntaxError> {
        axioms.push(HInductiveSentence::new(a.clone(), b.clone())?);
        axioms.push(HInductiveSentence::new(b, a)?);
        Ok(())
    }

    for phi in &set {
        let r_phi = app(phi)?;
        match phi {
            FirstOrderFormula::Atom { sym, args } => {
                let base = PositiveFormula::Atom {
                    sym: sym.clone(),
                    args: args.clone(),
                };
                base.well_formed(sig)?;
                both(&mut axioms, r_phi, base)?;
            }
            FirstOrderFormula::Equal(a, b) => {
                both(&mut axioms, r_phi, PositiveFormula::Equal(a.clone(), b.clone()))?;
            }
            FirstOrderFormula::Not(inner) => {
                let r_inner = app(inner)?;
                axioms.push(HInductiveSentence::new(
                    PositiveFormula::Top,
                    PositiveFormula::Or(vec![r_inner.clone(), r_phi.clone()]),
                )?);
                axioms.push(HInductiveSentence::new(
                    PositiveFormula::And(vec![r_inner, r_phi]),
                    PositiveFormula::Bottom,
                )?);
            }
            FirstOrderFormula::And(a, b) => {
                both(
                    &mut axioms,
                    r_phi,
                    PositiveFormula::And(vec![app(a)?, app(b)?]),
                )?;
            }
            FirstOrderFormula::Or(a, b) => {
                both(
                    &mut axioms,
                    r_phi,
                    PositiveFormula::Or(vec![app(a)?, app(b)?]),
                )?;
            }
            FirstOrderFormula::Exists(v, body) => {
                if var_index(v).is_none() {
                    return Err(SyntaxError::NonCanonicalVariable(v.clone()));
                }
                let body_free = body.sorted_free()?;
                let rhs = if body_free.contains(v) {
                    // Quantify the bound position with a name clear of the
                    // ambient canonical variables.
                    let fresh = {
                        let mut i = 0;
                        loop {
                            let cand = format!("w{i}");
                            if !body_free.contains(&cand) {
                                break cand;
                            }
                            i += 1;
                        }
                    };
                    let args: Vec<String> = body_free
                        .iter()
                        .map(|u| if u == v { fresh.clone() } else { u.clone() })
                        .collect();
                    PositiveFormula::Exists(
                        fresh,
                        Box::new(PositiveFormula::Atom {
                            sym: names[body.as_ref()].clone(),
                            args,
                        }),
                    )
                } else {
                    app(body)?
                };
                both(&mut axioms, r_phi, rhs)?;
            }
        }
    }
    // Deduplicate while keeping first occurrence order; `both` can emit the
    // same sentence twice when a formula and its negation share structure.
    let mut seen = BTreeSet::new();
    axioms.retain(|ax| seen.insert(ax.to_string()));
    Ok((extended, axioms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_p1() -> Signature {
        Signature::new(vec![RelationSymbol {
            name: "P".into(),
            arity: 1,
        }])
        .unwrap()
    }

    #[test]
    fn empty_set_is_vacuous() {
        let (sig2, axioms) = morleise(&[], &sig_p1()).unwrap();
        assert_eq!(sig2, sig_p1());
        assert!(axioms.is_empty());
    }

    #[test]
    fn atomic_pair_yields_excluded_middle_and_non_contradiction() {
        let phi = FirstOrderFormula::atom("P", &["x0"]);
        let neg = FirstOrderFormula::not(phi.clone());
        let (sig2, axioms) = morleise(&[phi.clone(), neg.clone()], &sig_p1()).unwrap();
        assert_eq!(sig2.symbols().len(), 3);
        let r = morley_symbol(&phi);
        let rn = morley_symbol(&neg);
        assert!(sig2.arity(&r) == Some(1) && sig2.arity(&rn) == Some(1));
        let texts: Vec<String> = axioms.iter().map(|a| a.to_string()).collect();
        assert!(
            texts.contains(&format!("true -> {r}(x0) | {rn}(x0)")),
            "{texts:?}"
        );
        assert!(
            texts.contains(&format!("{r}(x0) & {rn}(x0) -> false")),
            "{texts:?}"
        );
        // The link back to the base symbol.
        assert!(texts.contains(&format!("{r}(x0) -> P(x0)")));
        assert!(texts.contains(&format!("P(x0) -> {r}(x0)")));
    }

    #[test]
    fn disjunction_links_both_directions() {
        let p = FirstOrderFormula::atom("P", &["x0"]);
        let q = FirstOrderFormula::atom("P", &["x1"]);
        let or = FirstOrderFormula::or(p.clone(), q.clone());
        let set = vec![
            or.clone(),
            p.clone(),
            q.clone(),
            FirstOrderFormula::not(or.clone()),
            FirstOrderFormula::not(p.clone()),
            FirstOrderFormula::not(q.clone()),
        ];
        let (_, axioms) = morleise(&set, &sig_p1()).unwrap();
        let texts: Vec<String> = axioms.iter().map(|a| a.to_string()).collect();
        let r_or = morley_symbol(&or);
        let r_p = morley_symbol(&p);
        let r_q = morley_symbol(&q);
        assert!(
            texts.contains(&format!("{r_or}(x0,x1) -> {r_p}(x0) | {r_q}(x1)")),
            "{texts:?}"
        );
        assert!(texts.contains(&format!("{r_p}(x0) | {r_q}(x1) -> {r_or}(x0,x1)")));
    }

    #[test]
    fn missing_subformula_rejected() {
        let p = FirstOrderFormula::atom("P", &["x0"]);
        let or = FirstOrderFormula::or(p.clone(), p.clone());
        let err = morleise(
            &[or.clone(), FirstOrderFormula::not(or)],
            &sig_p1(),
        )
        .unwrap_err();
        assert!(matches!(err, SyntaxError::NotSubformulaClosed(_)));
    }

    #[test]
    fn all_axioms_are_h_inductive_shaped() {
        // Positive antecedent and consequent by construction; spot-check a
        // quantified formula.
        let p = FirstOrderFormula::atom("P", &["x0"]);
        let ex = FirstOrderFormula::exists("x0", p.clone());
        let set = vec![
            p.clone(),
            FirstOrderFormula::not(p.clone()),
            ex.clone(),
            FirstOrderFormula::not(ex.clone()),
        ];
        let (sig2, axioms) = morleise(&set, &sig_p1()).unwrap();
        for ax in &axioms {
            ax.antecedent.well_formed(&sig2).unwrap();
            ax.consequent.well_formed(&sig2).unwrap();
        }
        let r_ex = morley_symbol(&ex);
        let r_p = morley_symbol(&p);
        let texts: Vec<String> = axioms.iter().map(|a| a.to_string()).collect();
        assert!(
            texts.contains(&format!("{r_ex} -> exists w0. {r_p}(w0)")),
            "{texts:?}"
        );
    }
}
