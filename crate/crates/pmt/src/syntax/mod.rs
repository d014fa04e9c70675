//! Signatures and positive-formula syntax.
//!
//! Formulas are built from `false`, `true`, atoms, equality, `&`, `|` and
//! `exists`; negation never appears inside a [`PositiveFormula`]. Free
//! variables that take part in arity-indexed constructions are the canonical
//! variables `x0, x1, ...`; bound variables may carry arbitrary names and are
//! normalised away by [`PositiveFormula::canonical`] before equality tests.

mod morley;
mod normal;
pub(crate) mod parse;

pub use morley::{morleise, morley_symbol, FirstOrderFormula};
pub use normal::{pp_normal_form, PpFormula};
pub use parse::{parse_formula, parse_sentence, Lexer, Token, TokenKind};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{sym}` has arity {expected}, applied to {found} arguments")]
    ArityMismatch {
        sym: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate relation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("invalid symbol name `{0}`")]
    InvalidSymbolName(String),
    #[error("empty conjunction or disjunction")]
    EmptyConnective,
    #[error("free variable `{var}` is not a canonical variable x0..x{max}", max = limit.saturating_sub(1))]
    FreeVarOutOfRange { var: String, limit: usize },
    #[error("variable `{0}` is not of the canonical form x<i>")]
    NonCanonicalVariable(String),
    #[error("formula set is not closed under immediate subformulas: missing `{0}`")]
    NotSubformulaClosed(String),
    #[error("formula set is not closed under single negation: missing `{0}`")]
    NotNegationClosed(String),
}

/// A relation symbol with a fixed arity. Equality is implicit and not listed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// A purely relational signature.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Signature {
    symbols: Vec<RelationSymbol>,
}

fn valid_ident(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Signature {
    pub fn new(symbols: Vec<RelationSymbol>) -> Result<Self, SyntaxError> {
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !valid_ident(&s.name) {
                return Err(SyntaxError::InvalidSymbolName(s.name.clone()));
            }
            if !seen.insert(s.name.clone()) {
                return Err(SyntaxError::DuplicateSymbol(s.name.clone()));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn symbols(&self) -> &[RelationSymbol] {
        &self.symbols
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.arity)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.arity(name).is_some()
    }

    /// Appends the given symbols, rejecting name clashes.
    pub fn extended(&self, extra: Vec<RelationSymbol>) -> Result<Self, SyntaxError> {
        let mut symbols = self.symbols.clone();
        symbols.extend(extra);
        Signature::new(symbols)
    }
}

/// The canonical name of the i-th free variable.
pub fn canonical_var(i: usize) -> String {
    format!("x{i}")
}

/// Index of a canonical variable name, if it is one.
pub fn var_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    if rest.is_empty() || (rest.len() > 1 && rest.starts_with('0')) {
        return None;
    }
    rest.parse().ok()
}

/// A positive formula: no negation, no universal quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PositiveFormula {
    Bottom,
    Top,
    Atom { sym: String, args: Vec<String> },
    Equal(String, String),
    And(Vec<PositiveFormula>),
    Or(Vec<PositiveFormula>),
    Exists(String, Box<PositiveFormula>),
}

impl PositiveFormula {
    pub fn atom(sym: &str, args: &[&str]) -> Self {
        PositiveFormula::Atom {
            sym: sym.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn and(parts: Vec<PositiveFormula>) -> Self {
        match parts.len() {
            1 => parts.into_iter().next().unwrap(),
            _ => PositiveFormula::And(parts),
        }
    }

    pub fn or(parts: Vec<PositiveFormula>) -> Self {
        match parts.len() {
            1 => parts.into_iter().next().unwrap(),
            _ => PositiveFormula::Or(parts),
        }
    }

    pub fn exists(var: &str, body: PositiveFormula) -> Self {
        PositiveFormula::Exists(var.to_string(), Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>, bound: &mut Vec<String>) {
        match self {
            PositiveFormula::Bottom | PositiveFormula::Top => {}
            PositiveFormula::Atom { args, .. } => {
                for a in args {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
            }
            PositiveFormula::Equal(a, b) => {
                for v in [a, b] {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            PositiveFormula::And(parts) | PositiveFormula::Or(parts) => {
                for p in parts {
                    p.collect_free(out, bound);
                }
            }
            PositiveFormula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(out, bound);
                bound.pop();
            }
        }
    }

    /// Smallest n such that all free variables are among x0..x(n-1).
    /// Errors if a free variable is not canonical.
    pub fn min_arity(&self) -> Result<usize, SyntaxError> {
        let mut n = 0;
        for v in self.free_vars() {
            match var_index(&v) {
                Some(i) => n = n.max(i + 1),
                None => return Err(SyntaxError::NonCanonicalVariable(v)),
            }
        }
        Ok(n)
    }

    /// Checks symbol existence, arities and connective nonemptiness.
    pub fn well_formed(&self, sig: &Signature) -> Result<(), SyntaxError> {
        match self {
            PositiveFormula::Bottom | PositiveFormula::Top | PositiveFormula::Equal(_, _) => Ok(()),
            PositiveFormula::Atom { sym, args } => match sig.arity(sym) {
                None => Err(SyntaxError::UnknownSymbol(sym.clone())),
                Some(a) if a != args.len() => Err(SyntaxError::ArityMismatch {
                    sym: sym.clone(),
                    expected: a,
                    found: args.len(),
                }),
                Some(_) => Ok(()),
            },
            PositiveFormula::And(parts) | PositiveFormula::Or(parts) => {
                if parts.is_empty() {
                    return Err(SyntaxError::EmptyConnective);
                }
                parts.iter().try_for_each(|p| p.well_formed(sig))
            }
            PositiveFormula::Exists(_, body) => body.well_formed(sig),
        }
    }

    /// Alpha-normal form: bound variables renamed, in traversal order, to the
    /// first names `v0, v1, ...` that do not clash with any free variable.
    pub fn canonical(&self) -> PositiveFormula {
        let free = self.free_vars();
        let mut counter = 0;
        self.canon_rec(&mut Vec::new(), &free, &mut counter)
    }

    fn canon_rec(
        &self,
        renames: &mut Vec<(String, String)>,
        free: &BTreeSet<String>,
        counter: &mut usize,
    ) -> PositiveFormula {
        let resolve = |name: &String, renames: &Vec<(String, String)>| {
            renames
                .iter()
                .rev()
                .find(|(old, _)| old == name)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| name.clone())
        };
        match self {
            PositiveFormula::Bottom => PositiveFormula::Bottom,
            PositiveFormula::Top => PositiveFormula::Top,
            PositiveFormula::Atom { sym, args } => PositiveFormula::Atom {
                sym: sym.clone(),
                args: args.iter().map(|a| resolve(a, renames)).collect(),
            },
            PositiveFormula::Equal(a, b) => {
                PositiveFormula::Equal(resolve(a, renames), resolve(b, renames))
            }
            PositiveFormula::And(parts) => PositiveFormula::And(
                parts
                    .iter()
                    .map(|p| p.canon_rec(renames, free, counter))
                    .collect(),
            ),
            PositiveFormula::Or(parts) => PositiveFormula::Or(
                parts
                    .iter()
                    .map(|p| p.canon_rec(renames, free, counter))
                    .collect(),
            ),
            PositiveFormula::Exists(v, body) => {
                let fresh = loop {
                    let cand = format!("v{counter}");
                    *counter += 1;
                    if !free.contains(&cand) {
                        break cand;
                    }
                };
                renames.push((v.clone(), fresh.clone()));
                let body = body.canon_rec(renames, free, counter);
                renames.pop();
                PositiveFormula::Exists(fresh, Box::new(body))
            }
        }
    }

    pub fn alpha_eq(&self, other: &PositiveFormula) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for PositiveFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: exists < | < & < atoms.
        fn go(phi: &PositiveFormula, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match phi {
                PositiveFormula::Bottom => write!(f, "false"),
                PositiveFormula::Top => write!(f, "true"),
                PositiveFormula::Atom { sym, args } => {
                    if args.is_empty() {
                        write!(f, "{sym}")
                    } else {
                        write!(f, "{sym}({})", args.join(","))
                    }
                }
                PositiveFormula::Equal(a, b) => write!(f, "{a} = {b}"),
                PositiveFormula::And(parts) => {
                    let need = prec > 2;
                    if need {
                        write!(f, "(")?;
                    }
                    for (i, p) in parts.iter().enumerate() {
                        if i > 0 {
                            write!(f, " & ")?;
                        }
                        go(p, f, 3)?;
                    }
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                PositiveFormula::Or(parts) => {
                    let need = prec > 1;
                    if need {
                        write!(f, "(")?;
                    }
                    for (i, p) in parts.iter().enumerate() {
                        if i > 0 {
                            write!(f, " | ")?;
                        }
                        go(p, f, 2)?;
                    }
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                PositiveFormula::Exists(v, body) => {
                    let need = prec > 0;
                    if need {
                        write!(f, "(")?;
                    }
                    write!(f, "exists {v}. ")?;
                    go(body, f, 0)?;
                    if need {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0)
    }
}

/// A negative formula, stored as the positive formula it negates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeFormula(pub PositiveFormula);

impl fmt::Display for NegativeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "!({})", self.0)
    }
}

/// A universally closed implication between two positive formulas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HInductiveSentence {
    pub antecedent: PositiveFormula,
    pub consequent: PositiveFormula,
    /// Number of universally quantified variables x0..x(arity-1); covers all
    /// free variables of both sides.
    pub arity: usize,
}

impl HInductiveSentence {
    pub fn new(
        antecedent: PositiveFormula,
        consequent: PositiveFormula,
    ) -> Result<Self, SyntaxError> {
        let arity = antecedent.min_arity()?.max(consequent.min_arity()?);
        Ok(HInductiveSentence {
            antecedent,
            consequent,
            arity,
        })
    }
}

impl fmt::Display for HInductiveSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.antecedent, self.consequent)
    }
}

/// A function between finite ordinals, n -> m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalMap {
    pub source: usize,
    pub target: usize,
    map: Vec<usize>,
}

impl OrdinalMap {
    pub fn new(source: usize, target: usize, map: Vec<usize>) -> Option<Self> {
        if map.len() != source || map.iter().any(|&v| v >= target) {
            return None;
        }
        Some(OrdinalMap {
            source,
            target,
            map,
        })
    }

    pub fn identity(n: usize) -> Self {
        OrdinalMap {
            source: n,
            target: n,
            map: (0..n).collect(),
        }
    }

    /// The inclusion n -> m for n <= m.
    pub fn inclusion(n: usize, m: usize) -> Option<Self> {
        if n > m {
            return None;
        }
        Some(OrdinalMap {
            source: n,
            target: m,
            map: (0..n).collect(),
        })
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn values(&self) -> &[usize] {
        &self.map
    }

    /// `self` then `other`: (other . self) as functions.
    pub fn then(&self, other: &OrdinalMap) -> Option<OrdinalMap> {
        if self.target != other.source {
            return None;
        }
        Some(OrdinalMap {
            source: self.source,
            target: other.target,
            map: self.map.iter().map(|&i| other.map[i]).collect(),
        })
    }

    /// All functions n -> m, in lexicographic order of their value vectors.
    pub fn all(n: usize, m: usize) -> Vec<OrdinalMap> {
        if n == 0 {
            return vec![OrdinalMap {
                source: 0,
                target: m,
                map: vec![],
            }];
        }
        if m == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        let mut vals = vec![0usize; n];
        loop {
            out.push(OrdinalMap {
                source: n,
                target: m,
                map: vals.clone(),
            });
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                vals[i] += 1;
                if vals[i] < m {
                    break;
                }
                vals[i] = 0;
            }
        }
    }
}

/// Replaces each free variable x_i by x_{f(i)}, renaming bound variables to
/// avoid capture. Free variables of `phi` must be canonical and below
/// `f.source`.
pub fn substitute(phi: &PositiveFormula, f: &OrdinalMap) -> Result<PositiveFormula, SyntaxError> {
    for v in phi.free_vars() {
        match var_index(&v) {
            Some(i) if i < f.source => {}
            Some(_) | None => {
                return Err(SyntaxError::FreeVarOutOfRange {
                    var: v,
                    limit: f.source,
                })
            }
        }
    }
    // Rename all bound variables first so no binder can capture a target x_i.
    let canon = phi.canonical();
    let forbidden: BTreeSet<String> = (0..f.target).map(canonical_var).collect();
    let mut counter = 0;
    let safe = rename_binders_avoiding(&canon, &forbidden, &mut counter);
    Ok(apply_free_renaming(&safe, &|name: &str| {
        match var_index(name) {
            Some(i) if i < f.source => canonical_var(f.apply(i)),
            _ => name.to_string(),
        }
    }))
}

fn rename_binders_avoiding(
    phi: &PositiveFormula,
    forbidden: &BTreeSet<String>,
    counter: &mut usize,
) -> PositiveFormula {
    match phi {
        PositiveFormula::Exists(v, body) => {
            if forbidden.contains(v) {
                let fresh = loop {
                    let cand = format!("w{counter}");
                    *counter += 1;
                    if !forbidden.contains(&cand) && !body.free_vars().contains(&cand) {
                        break cand;
                    }
                };
                let renamed = apply_bound_rename(body, v, &fresh);
                PositiveFormula::Exists(
                    fresh,
                    Box::new(rename_binders_avoiding(&renamed, forbidden, counter)),
                )
            } else {
                PositiveFormula::Exists(
                    v.clone(),
                    Box::new(rename_binders_avoiding(body, forbidden, counter)),
                )
            }
        }
        PositiveFormula::And(parts) => PositiveFormula::And(
            parts
                .iter()
                .map(|p| rename_binders_avoiding(p, forbidden, counter))
                .collect(),
        ),
        PositiveFormula::Or(parts) => PositiveFormula::Or(
            parts
                .iter()
                .map(|p| rename_binders_avoiding(p, forbidden, counter))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Renames free occurrences of `old` to `new` (stops at shadowing binders).
fn apply_bound_rename(phi: &PositiveFormula, old: &str, new: &str) -> PositiveFormula {
    match phi {
        PositiveFormula::Bottom => PositiveFormula::Bottom,
        PositiveFormula::Top => PositiveFormula::Top,
        PositiveFormula::Atom { sym, args } => PositiveFormula::Atom {
            sym: sym.clone(),
            args: args
                .iter()
                .map(|a| if a == old { new.to_string() } else { a.clone() })
                .collect(),
        },
        PositiveFormula::Equal(a, b) => {
            let r = |v: &String| {
                if v == old {
                    new.to_string()
                } else {
                    v.clone()
                }
            };
            PositiveFormula::Equal(r(a), r(b))
        }
        PositiveFormula::And(parts) => {
            PositiveFormula::And(parts.iter().map(|p| apply_bound_rename(p, old, new)).collect())
        }
        PositiveFormula::Or(parts) => {
            PositiveFormula::Or(parts.iter().map(|p| apply_bound_rename(p, old, new)).collect())
        }
        PositiveFormula::Exists(v, body) => {
            if v == old {
                PositiveFormula::Exists(v.clone(), body.clone())
            } else {
                PositiveFormula::Exists(v.clone(), Box::new(apply_bound_rename(body, old, new)))
            }
        }
    }
}

fn apply_free_renaming(
    phi: &PositiveFormula,
    rename: &dyn Fn(&str) -> String,
) -> PositiveFormula {
    fn go(
        phi: &PositiveFormula,
        rename: &dyn Fn(&str) -> String,
        bound: &mut Vec<String>,
    ) -> PositiveFormula {
        let r = |v: &String, bound: &Vec<String>| {
            if bound.contains(v) {
                v.clone()
            } else {
                rename(v)
            }
        };
        match phi {
            PositiveFormula::Bottom => PositiveFormula::Bottom,
            PositiveFormula::Top => PositiveFormula::Top,
            PositiveFormula::Atom { sym, args } => PositiveFormula::Atom {
                sym: sym.clone(),
                args: args.iter().map(|a| r(a, bound)).collect(),
            },
            PositiveFormula::Equal(a, b) => PositiveFormula::Equal(r(a, bound), r(b, bound)),
            PositiveFormula::And(parts) => {
                PositiveFormula::And(parts.iter().map(|p| go(p, rename, bound)).collect())
            }
            PositiveFormula::Or(parts) => {
                PositiveFormula::Or(parts.iter().map(|p| go(p, rename, bound)).collect())
            }
            PositiveFormula::Exists(v, body) => {
                bound.push(v.clone());
                let body = go(body, rename, bound);
                bound.pop();
                PositiveFormula::Exists(v.clone(), Box::new(body))
            }
        }
    }
    go(phi, rename, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_r2() -> Signature {
        Signature::new(vec![RelationSymbol {
            name: "R".into(),
            arity: 2,
        }])
        .unwrap()
    }

    #[test]
    fn free_vars_skip_bound() {
        let phi = PositiveFormula::exists("y", PositiveFormula::atom("R", &["x0", "y"]));
        assert_eq!(
            phi.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["x0".to_string()]
        );
    }

    #[test]
    fn substitute_identity() {
        let phi = PositiveFormula::atom("R", &["x0", "x1"]);
        let f = OrdinalMap::identity(2);
        assert_eq!(substitute(&phi, &f).unwrap(), phi);
    }

    #[test]
    fn substitute_diagonal() {
        let phi = PositiveFormula::atom("R", &["x0", "x1"]);
        let f = OrdinalMap::new(2, 1, vec![0, 0]).unwrap();
        assert_eq!(
            substitute(&phi, &f).unwrap(),
            PositiveFormula::atom("R", &["x0", "x0"])
        );
    }

    #[test]
    fn substitute_shift_under_binder() {
        let phi = PositiveFormula::exists("y", PositiveFormula::atom("R", &["x0", "y"]));
        let f = OrdinalMap::new(1, 2, vec![1]).unwrap();
        let got = substitute(&phi, &f).unwrap();
        let want = PositiveFormula::exists("y", PositiveFormula::atom("R", &["x1", "y"]));
        assert!(got.alpha_eq(&want), "got {got}");
    }

    #[test]
    fn substitute_avoids_capture() {
        // exists x1. R(x0, x1) with x0 -> x1 must not capture.
        let phi = PositiveFormula::exists("x1", PositiveFormula::atom("R", &["x0", "x1"]));
        let f = OrdinalMap::new(1, 2, vec![1]).unwrap();
        let got = substitute(&phi, &f).unwrap();
        let bad = PositiveFormula::exists("x1", PositiveFormula::atom("R", &["x1", "x1"]));
        assert!(!got.alpha_eq(&bad));
        let want = PositiveFormula::exists("z", PositiveFormula::atom("R", &["x1", "z"]));
        assert!(got.alpha_eq(&want), "got {got}");
    }

    #[test]
    fn substitute_rejects_out_of_range() {
        let phi = PositiveFormula::atom("R", &["x0", "x3"]);
        let f = OrdinalMap::identity(2);
        assert!(substitute(&phi, &f).is_err());
    }

    #[test]
    fn well_formed_checks_arity() {
        let phi = PositiveFormula::atom("R", &["x0"]);
        assert!(matches!(
            phi.well_formed(&sig_r2()),
            Err(SyntaxError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn alpha_eq_ignores_binder_names() {
        let a = PositiveFormula::exists("y", PositiveFormula::atom("R", &["x0", "y"]));
        let b = PositiveFormula::exists("z", PositiveFormula::atom("R", &["x0", "z"]));
        assert!(a.alpha_eq(&b));
    }

    #[test]
    fn ordinal_map_all_counts() {
        assert_eq!(OrdinalMap::all(2, 3).len(), 9);
        assert_eq!(OrdinalMap::all(0, 3).len(), 1);
        assert_eq!(OrdinalMap::all(2, 0).len(), 0);
    }
}
