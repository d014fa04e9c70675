//! Finite structures and formula evaluation.

mod cond;
mod enumerate;
mod hom;

pub use cond::check_enumeration_condition;
pub use enumerate::{are_isomorphic, canonical_form, find_models};
pub use hom::{
    compose, homomorphisms, is_homomorphism, is_immersion, is_positively_closed_semantic,
    Homomorphism,
};

use crate::syntax::parse;
use crate::syntax::{
    canonical_var, var_index, HInductiveSentence, Lexer, PositiveFormula, Signature, SyntaxError,
    Token, TokenKind,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("universe must be nonempty")]
    EmptyUniverse,
    #[error("relation `{sym}` holds a tuple of length {found}, arity is {expected}")]
    TupleArity {
        sym: String,
        expected: usize,
        found: usize,
    },
    #[error("tuple entry {element} outside universe of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("arity {arity} too small for free variables of `{formula}`")]
    ArityTooSmall { arity: usize, formula: String },
    #[error("model `{model}` violates axiom `{axiom}`")]
    AxiomViolated { model: String, axiom: String },
    #[error("structure not in the model class")]
    NotInClass,
}

/// A finite relational structure with universe {0, ..., size-1}.
///
/// Relations not present in the map are empty. A nullary relation holds iff
/// the empty tuple is present.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteStructure {
    pub size: usize,
    pub relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl FiniteStructure {
    pub fn new(
        size: usize,
        relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    ) -> Result<Self, SemanticsError> {
        if size == 0 {
            return Err(SemanticsError::EmptyUniverse);
        }
        for tuples in relations.values() {
            for t in tuples {
                for &e in t {
                    if e >= size {
                        return Err(SemanticsError::ElementOutOfRange { element: e, size });
                    }
                }
            }
        }
        Ok(FiniteStructure { size, relations })
    }

    pub fn validate(&self, sig: &Signature) -> Result<(), SemanticsError> {
        for (sym, tuples) in &self.relations {
            let arity = sig
                .arity(sym)
                .ok_or_else(|| SyntaxError::UnknownSymbol(sym.clone()))?;
            for t in tuples {
                if t.len() != arity {
                    return Err(SemanticsError::TupleArity {
                        sym: sym.clone(),
                        expected: arity,
                        found: t.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn holds(&self, sym: &str, tuple: &[usize]) -> bool {
        self.relations
            .get(sym)
            .is_some_and(|ts| ts.contains(tuple))
    }

    /// Number of relation tuples mentioning `element`.
    pub fn degree(&self, element: usize) -> usize {
        self.relations
            .values()
            .flat_map(|ts| ts.iter())
            .filter(|t| t.contains(&element))
            .count()
    }

    /// Canonical text form in the structure DSL.
    pub fn to_dsl(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = write!(out, "model {name} {{ universe {};", self.size);
        for (sym, tuples) in &self.relations {
            let body = tuples
                .iter()
                .map(|t| {
                    format!(
                        "({})",
                        t.iter()
                            .map(|e| e.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                })
                .collect::<Vec<_>>()
                .join(",");
            let _ = write!(out, " {sym} = {{{body}}};");
        }
        out.push_str(" }");
        out
    }
}

/// Evaluates `phi` under an assignment of variable names to elements.
fn eval(m: &FiniteStructure, phi: &PositiveFormula, env: &mut Vec<(String, usize)>) -> bool {
    let lookup = |name: &str, env: &Vec<(String, usize)>| {
        env.iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, e)| *e)
            .expect("unbound variable during evaluation")
    };
    match phi {
        PositiveFormula::Bottom => false,
        PositiveFormula::Top => true,
        PositiveFormula::Atom { sym, args } => {
            let tuple: Vec<usize> = args.iter().map(|a| lookup(a, env)).collect();
            m.holds(sym, &tuple)
        }
        PositiveFormula::Equal(a, b) => lookup(a, env) == lookup(b, env),
        PositiveFormula::And(parts) => parts.iter().all(|p| eval(m, p, env)),
        PositiveFormula::Or(parts) => parts.iter().any(|p| eval(m, p, env)),
        PositiveFormula::Exists(v, body) => (0..m.size).any(|e| {
            env.push((v.clone(), e));
            let r = eval(m, body, env);
            env.pop();
            r
        }),
    }
}

/// The set of n-tuples satisfying `phi` in `m`. Free variables of `phi` must
/// be canonical and below `n`.
pub fn denotation(
    m: &FiniteStructure,
    phi: &PositiveFormula,
    n: usize,
) -> Result<BTreeSet<Vec<usize>>, SemanticsError> {
    for v in phi.free_vars() {
        match var_index(&v) {
            Some(i) if i < n => {}
            _ => {
                return Err(SemanticsError::ArityTooSmall {
                    arity: n,
                    formula: phi.to_string(),
                })
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut tuple = vec![0usize; n];
    loop {
        let mut env: Vec<(String, usize)> = tuple
            .iter()
            .enumerate()
            .map(|(i, &e)| (canonical_var(i), e))
            .collect();
        if eval(m, phi, &mut env) {
            out.insert(tuple.clone());
        }
        // Odometer over the n-fold product of the universe.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < m.size {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// True iff the universal closure of the implication holds in `m`.
pub fn satisfies_axiom(m: &FiniteStructure, ax: &HInductiveSentence) -> bool {
    let ante = denotation(m, &ax.antecedent, ax.arity).expect("axiom arity covers free vars");
    let cons = denotation(m, &ax.consequent, ax.arity).expect("axiom arity covers free vars");
    ante.is_subset(&cons)
}

/// A finitely presented class of finite structures over one signature,
/// optionally constrained by h-inductive axioms (validated on load).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelClass {
    pub sig: Signature,
    pub names: Vec<String>,
    pub models: Vec<FiniteStructure>,
    pub axioms: Vec<HInductiveSentence>,
}

impl ModelClass {
    pub fn new(
        sig: Signature,
        named_models: Vec<(String, FiniteStructure)>,
        axioms: Vec<HInductiveSentence>,
    ) -> Result<Self, SemanticsError> {
        let mut names = Vec::new();
        let mut models = Vec::new();
        for (name, m) in named_models {
            m.validate(&sig)?;
            for ax in &axioms {
                ax.antecedent.well_formed(&sig)?;
                ax.consequent.well_formed(&sig)?;
                if !satisfies_axiom(&m, ax) {
                    return Err(SemanticsError::AxiomViolated {
                        model: name,
                        axiom: ax.to_string(),
                    });
                }
            }
            names.push(name);
            models.push(m);
        }
        Ok(ModelClass {
            sig,
            names,
            models,
            axioms,
        })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn index_of(&self, m: &FiniteStructure) -> Option<usize> {
        self.models.iter().position(|x| x == m)
    }
}

/// Parses a whole theory file: `sig`, `model` and `axiom` declarations in any
/// order (the `sig` must precede formulas that use its symbols).
pub fn parse_theory(text: &str) -> Result<ModelClass, SemanticsError> {
    let mut lx = Lexer::new(text)?;
    let mut sig = Signature::empty();
    let mut models: Vec<(String, FiniteStructure)> = Vec::new();
    let mut axioms = Vec::new();
    while !lx.at_eof() {
        let kw = lx.expect_ident("`sig`, `model` or `axiom`")?;
        match kw.as_str() {
            "sig" => {
                let symbols = parse::signature_body(&mut lx)?;
                sig = sig.extended(symbols)?;
            }
            "model" => {
                let (name, m) = model_body(&mut lx, &sig)?;
                models.push((name, m));
            }
            "axiom" => {
                let s = parse::sentence(&mut lx, &sig)?;
                lx.expect(TokenKind::Semicolon, "`;` after axiom")?;
                axioms.push(s);
            }
            other => {
                return Err(SyntaxError::Parse {
                    line: 0,
                    col: 0,
                    msg: format!("unknown declaration `{other}`"),
                }
                .into())
            }
        }
    }
    ModelClass::new(sig, models, axioms)
}

/// Parses a single `model NAME { universe k; R = {(..),..}; }` block, with
/// the leading `model` keyword already consumed.
fn model_body(lx: &mut Lexer, sig: &Signature) -> Result<(String, FiniteStructure), SemanticsError> {
    let name = lx.expect_ident("a model name")?;
    lx.expect(TokenKind::LBrace, "`{`")?;
    let kw = lx.expect_ident("`universe`")?;
    if kw != "universe" {
        return Err(lx.error("expected `universe`").into());
    }
    let size = lx.expect_number("the universe size")?;
    lx.expect(TokenKind::Semicolon, "`;`")?;
    let mut relations: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
    while !lx.eat(TokenKind::RBrace) {
        let sym = lx.expect_ident("a relation symbol")?;
        let arity = sig
            .arity(&sym)
            .ok_or_else(|| SyntaxError::UnknownSymbol(sym.clone()))?;
        lx.expect(TokenKind::Eq, "`=`")?;
        lx.expect(TokenKind::LBrace, "`{`")?;
        let mut tuples = BTreeSet::new();
        if !lx.eat(TokenKind::RBrace) {
            loop {
                let t = tuple_body(lx)?;
                if t.len() != arity {
                    return Err(SemanticsError::TupleArity {
                        sym: sym.clone(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                tuples.insert(t);
                if lx.eat(TokenKind::RBrace) {
                    break;
                }
                lx.expect(TokenKind::Comma, "`,` or `}`")?;
            }
        }
        lx.expect(TokenKind::Semicolon, "`;` after relation")?;
        relations.insert(sym, tuples);
    }
    let m = FiniteStructure::new(size, relations)?;
    m.validate(sig)?;
    Ok((name, m))
}

/// `(0,1)`, `(0)`, `()` or a bare element for unary tuples.
fn tuple_body(lx: &mut Lexer) -> Result<Vec<usize>, SemanticsError> {
    if let Token {
        kind: TokenKind::Number(_),
        ..
    } = lx.peek()
    {
        return Ok(vec![lx.expect_number("an element")?]);
    }
    lx.expect(TokenKind::LParen, "`(`")?;
    let mut out = Vec::new();
    if lx.eat(TokenKind::RParen) {
        return Ok(out);
    }
    loop {
        out.push(lx.expect_number("an element")?);
        if lx.eat(TokenKind::RParen) {
            return Ok(out);
        }
        lx.expect(TokenKind::Comma, "`,` or `)`")?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn sig() -> Signature {
        crate::syntax::Signature::new(vec![
            crate::syntax::RelationSymbol {
                name: "R".into(),
                arity: 2,
            },
            crate::syntax::RelationSymbol {
                name: "P".into(),
                arity: 1,
            },
        ])
        .unwrap()
    }

    fn edge() -> FiniteStructure {
        // {0,1} with R = {(0,1)}
        let mut rel = BTreeMap::new();
        rel.insert("R".to_string(), BTreeSet::from([vec![0, 1]]));
        FiniteStructure::new(2, rel).unwrap()
    }

    #[test]
    fn denotation_exists_edge() {
        let phi = parse_formula("exists y. R(x0,y)", &sig()).unwrap();
        let d = denotation(&edge(), &phi, 1).unwrap();
        assert_eq!(d, BTreeSet::from([vec![0]]));
    }

    #[test]
    fn denotation_top_bottom() {
        let top = denotation(&edge(), &PositiveFormula::Top, 1).unwrap();
        assert_eq!(top, BTreeSet::from([vec![0], vec![1]]));
        let bot = denotation(&edge(), &PositiveFormula::Bottom, 0).unwrap();
        assert!(bot.is_empty());
        // Arity 0, Top: the empty tuple satisfies it.
        let top0 = denotation(&edge(), &PositiveFormula::Top, 0).unwrap();
        assert_eq!(top0, BTreeSet::from([vec![]]));
    }

    #[test]
    fn denotation_rejects_small_arity() {
        let phi = parse_formula("R(x0,x1)", &sig()).unwrap();
        assert!(denotation(&edge(), &phi, 1).is_err());
    }

    #[test]
    fn axiom_checks() {
        let m = edge();
        let tautology = crate::syntax::parse_sentence("true -> true", &sig()).unwrap();
        assert!(satisfies_axiom(&m, &tautology));
        let sym = crate::syntax::parse_sentence("R(x0,x1) -> R(x1,x0)", &sig()).unwrap();
        assert!(!satisfies_axiom(&m, &sym));
        let irref = crate::syntax::parse_sentence("R(x0,x0) -> false", &sig()).unwrap();
        assert!(satisfies_axiom(&m, &irref));
    }

    #[test]
    fn class_validates_axioms_on_load() {
        let ax = crate::syntax::parse_sentence("true -> exists y. R(x0,y)", &sig()).unwrap();
        let err = ModelClass::new(sig(), vec![("M".into(), edge())], vec![ax]).unwrap_err();
        assert!(matches!(err, SemanticsError::AxiomViolated { .. }));
    }

    #[test]
    fn parse_theory_round_trip() {
        let text = "sig R/2 P/1;\n\
                    model M { universe 2; R = {(0,1)}; P = {0}; }\n\
                    axiom R(x0,x0) -> false;\n";
        let class = parse_theory(text).unwrap();
        assert_eq!(class.models.len(), 1);
        assert_eq!(class.models[0], {
            let mut m = edge();
            m.relations
                .insert("P".into(), BTreeSet::from([vec![0]]));
            m
        });
        assert_eq!(class.axioms.len(), 1);
    }

    #[test]
    fn empty_universe_rejected() {
        assert!(matches!(
            FiniteStructure::new(0, BTreeMap::new()),
            Err(SemanticsError::EmptyUniverse)
        ));
    }

    #[test]
    fn dsl_print_reparses() {
        let m = edge();
        let text = m.to_dsl("M");
        let full = format!("sig R/2;\n{text}");
        let class = parse_theory(&full).unwrap();
        assert_eq!(class.models[0], m);
    }
}
