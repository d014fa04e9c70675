//! Lexer and recursive-descent parser for the workbench DSL.
//!
//! Formula grammar (lowest precedence first):
//!
//! ```text
//! formula  := "exists" IDENT "." formula | or
//! or       := and ("|" and)*
//! and      := atomic ("&" atomic)*
//! atomic   := "false" | "true" | "(" formula ")"
//!           | IDENT "(" IDENT ("," IDENT)* ")"    relation atom
//!           | IDENT "(" ")" | IDENT               nullary atom
//!           | IDENT "=" IDENT                     equality
//! ```
//!
//! Declarations (`sig`, `axiom`, `model`) are parsed by the callers that own
//! the corresponding data; the shared token stream lives here.

use super::{HInductiveSentence, PositiveFormula, Signature, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(usize),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semicolon,
    Dot,
    Amp,
    Pipe,
    Eq,
    Arrow,
    Slash,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

pub struct Lexer {
    tokens: Vec<Token>,
    pos: usize,
}

impl Lexer {
    pub fn new(input: &str) -> Result<Lexer, SyntaxError> {
        let mut tokens = Vec::new();
        let mut line = 1usize;
        let mut col = 1usize;
        let mut chars = input.chars().peekable();
        while let Some(&c) = chars.peek() {
            let (tline, tcol) = (line, col);
            let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
                let c = chars.next().unwrap();
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                c
            };
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    bump(&mut chars);
                }
                '#' => {
                    // comment to end of line
                    while let Some(&c) = chars.peek() {
                        bump(&mut chars);
                        if c == '\n' {
                            break;
                        }
                    }
                }
                '(' | ')' | '{' | '}' | ',' | ';' | '.' | '&' | '|' | '=' | '/' | '-' => {
                    bump(&mut chars);
                    let kind = match c {
                        '(' => TokenKind::LParen,
                        ')' => TokenKind::RParen,
                        '{' => TokenKind::LBrace,
                        '}' => TokenKind::RBrace,
                        ',' => TokenKind::Comma,
                        ';' => TokenKind::Semicolon,
                        '.' => TokenKind::Dot,
                        '&' => TokenKind::Amp,
                        '|' => TokenKind::Pipe,
                        '=' => TokenKind::Eq,
                        '/' => TokenKind::Slash,
                        '-' => {
                            if chars.peek() == Some(&'>') {
                                bump(&mut chars);
                                TokenKind::Arrow
                            } else {
                                return Err(SyntaxError::Parse {
                                    line: tline,
                                    col: tcol,
                                    msg: "expected `->`".into(),
                                });
                            }
                        }
                        _ => unreachable!(),
                    };
                    tokens.push(Token {
                        kind,
                        line: tline,
                        col: tcol,
                    });
                }
                c if c.is_ascii_digit() => {
                    let mut text = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            text.push(bump(&mut chars));
                        } else {
                            break;
                        }
                    }
                    let n = text.parse().map_err(|_| SyntaxError::Parse {
                        line: tline,
                        col: tcol,
                        msg: format!("number `{text}` out of range"),
                    })?;
                    tokens.push(Token {
                        kind: TokenKind::Number(n),
                        line: tline,
                        col: tcol,
                    });
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut text = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            text.push(bump(&mut chars));
                        } else {
                            break;
                        }
                    }
                    tokens.push(Token {
                        kind: TokenKind::Ident(text),
                        line: tline,
                        col: tcol,
                    });
                }
                other => {
                    return Err(SyntaxError::Parse {
                        line: tline,
                        col: tcol,
                        msg: format!("unexpected character `{other}`"),
                    });
                }
            }
        }
        tokens.push(Token {
            kind: TokenKind::Eof,
            line,
            col,
        });
        Ok(Lexer { tokens, pos: 0 })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let t = self.peek();
        SyntaxError::Parse {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    pub fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, SyntaxError> {
        if self.peek().kind == kind {
            Ok(self.next())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().kind.clone() {
            TokenKind::Ident(name) => {
                self.next();
                Ok(name)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn expect_number(&mut self, what: &str) -> Result<usize, SyntaxError> {
        match self.peek().kind {
            TokenKind::Number(n) => {
                self.next();
                Ok(n)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek().kind == kind {
            self.next();
            true
        } else {
            false
        }
    }
}

/// Parses a single formula, checking symbols and arities against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<PositiveFormula, SyntaxError> {
    let mut lx = Lexer::new(text)?;
    let phi = formula(&mut lx, sig)?;
    if !lx.at_eof() {
        return Err(lx.error("trailing input after formula"));
    }
    Ok(phi)
}

/// Parses `phi -> psi` as an h-inductive sentence with implicit universal
/// closure over its canonical free variables.
pub fn parse_sentence(text: &str, sig: &Signature) -> Result<HInductiveSentence, SyntaxError> {
    let mut lx = Lexer::new(text)?;
    let s = sentence(&mut lx, sig)?;
    if !lx.at_eof() {
        return Err(lx.error("trailing input after sentence"));
    }
    Ok(s)
}

pub(crate) fn sentence(
    lx: &mut Lexer,
    sig: &Signature,
) -> Result<HInductiveSentence, SyntaxError> {
    let ante = formula(lx, sig)?;
    lx.expect(TokenKind::Arrow, "`->`")?;
    let cons = formula(lx, sig)?;
    HInductiveSentence::new(ante, cons)
}

pub(crate) fn formula(lx: &mut Lexer, sig: &Signature) -> Result<PositiveFormula, SyntaxError> {
    if let TokenKind::Ident(name) = &lx.peek().kind {
        if name == "exists" {
            lx.next();
            let var = lx.expect_ident("a variable after `exists`")?;
            lx.expect(TokenKind::Dot, "`.` after the bound variable")?;
            let body = formula(lx, sig)?;
            return Ok(PositiveFormula::Exists(var, Box::new(body)));
        }
    }
    or_formula(lx, sig)
}

fn or_formula(lx: &mut Lexer, sig: &Signature) -> Result<PositiveFormula, SyntaxError> {
    let mut parts = vec![and_formula(lx, sig)?];
    while lx.eat(TokenKind::Pipe) {
        parts.push(and_formula(lx, sig)?);
    }
    Ok(PositiveFormula::or(parts))
}

fn and_formula(lx: &mut Lexer, sig: &Signature) -> Result<PositiveFormula, SyntaxError> {
    let mut parts = vec![atomic_formula(lx, sig)?];
    while lx.eat(TokenKind::Amp) {
        parts.push(atomic_formula(lx, sig)?);
    }
    Ok(PositiveFormula::and(parts))
}

fn atomic_formula(lx: &mut Lexer, sig: &Signature) -> Result<PositiveFormula, SyntaxError> {
    match lx.peek().kind.clone() {
        TokenKind::LParen => {
            lx.next();
            let inner = formula(lx, sig)?;
            lx.expect(TokenKind::RParen, "`)`")?;
            Ok(inner)
        }
        TokenKind::Ident(name) => {
            lx.next();
            match name.as_str() {
                "false" => return Ok(PositiveFormula::Bottom),
                "true" => return Ok(PositiveFormula::Top),
                "exists" => {
                    let var = lx.expect_ident("a variable after `exists`")?;
                    lx.expect(TokenKind::Dot, "`.` after the bound variable")?;
                    let body = formula(lx, sig)?;
                    return Ok(PositiveFormula::Exists(var, Box::new(body)));
                }
                _ => {}
            }
            match lx.peek().kind.clone() {
                TokenKind::LParen => {
                    lx.next();
                    let mut args = Vec::new();
                    if !lx.eat(TokenKind::RParen) {
                        loop {
                            args.push(lx.expect_ident("a variable")?);
                            if lx.eat(TokenKind::RParen) {
                                break;
                            }
                            lx.expect(TokenKind::Comma, "`,` or `)`")?;
                        }
                    }
                    let atom = PositiveFormula::Atom { sym: name, args };
                    atom.well_formed(sig)?;
                    Ok(atom)
                }
                TokenKind::Eq => {
                    lx.next();
                    let rhs = lx.expect_ident("a variable after `=`")?;
                    Ok(PositiveFormula::Equal(name, rhs))
                }
                _ => {
                    // Bare identifier: a nullary relation atom.
                    let atom = PositiveFormula::Atom {
                        sym: name,
                        args: vec![],
                    };
                    atom.well_formed(sig)?;
                    Ok(atom)
                }
            }
        }
        _ => Err(lx.error("expected a formula")),
    }
}

/// Parses a `sig R/2 S/1;` declaration body after the `sig` keyword.
pub(crate) fn signature_body(lx: &mut Lexer) -> Result<Vec<super::RelationSymbol>, SyntaxError> {
    let mut symbols = Vec::new();
    loop {
        if lx.eat(TokenKind::Semicolon) {
            break;
        }
        let name = lx.expect_ident("a relation symbol name")?;
        lx.expect(TokenKind::Slash, "`/` before the arity")?;
        let arity = lx.expect_number("an arity")?;
        symbols.push(super::RelationSymbol { name, arity });
    }
    Ok(symbols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::RelationSymbol;

    fn sig() -> Signature {
        Signature::new(vec![
            RelationSymbol {
                name: "R".into(),
                arity: 2,
            },
            RelationSymbol {
                name: "S".into(),
                arity: 1,
            },
            RelationSymbol {
                name: "B".into(),
                arity: 0,
            },
        ])
        .unwrap()
    }

    #[test]
    fn parses_exists_atom() {
        let phi = parse_formula("exists y. R(x,y)", &sig()).unwrap();
        assert_eq!(
            phi,
            PositiveFormula::exists("y", PositiveFormula::atom("R", &["x", "y"]))
        );
    }

    #[test]
    fn parses_constants() {
        assert_eq!(
            parse_formula("false", &sig()).unwrap(),
            PositiveFormula::Bottom
        );
        assert_eq!(parse_formula("true", &sig()).unwrap(), PositiveFormula::Top);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err = parse_formula("R(x)", &sig()).unwrap_err();
        assert!(matches!(err, SyntaxError::ArityMismatch { .. }), "{err}");
    }

    #[test]
    fn unknown_symbol_rejected() {
        let err = parse_formula("Q(x)", &sig()).unwrap_err();
        assert!(matches!(err, SyntaxError::UnknownSymbol(_)));
    }

    #[test]
    fn precedence_and_over_or() {
        let phi = parse_formula("S(x) & S(y) | B", &sig()).unwrap();
        assert_eq!(
            phi,
            PositiveFormula::Or(vec![
                PositiveFormula::And(vec![
                    PositiveFormula::atom("S", &["x"]),
                    PositiveFormula::atom("S", &["y"]),
                ]),
                PositiveFormula::atom("B", &[]),
            ])
        );
    }

    #[test]
    fn equality_and_nullary() {
        let phi = parse_formula("x = y & B()", &sig()).unwrap();
        assert_eq!(
            phi,
            PositiveFormula::And(vec![
                PositiveFormula::Equal("x".into(), "y".into()),
                PositiveFormula::atom("B", &[]),
            ])
        );
    }

    #[test]
    fn parse_error_has_location() {
        let err = parse_formula("R(x,\n  ,y)", &sig()).unwrap_err();
        match err {
            SyntaxError::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sentence_closure_arity() {
        let s = parse_sentence("R(x0,x1) -> R(x1,x0)", &sig()).unwrap();
        assert_eq!(s.arity, 2);
    }

    #[test]
    fn print_parse_round_trip() {
        for text in [
            "exists y. R(x0,y) & S(x0)",
            "(S(x0) | B) & x0 = x1",
            "false",
            "true & B",
            "exists u. exists v. R(u,v) | S(x0)",
        ] {
            let phi = parse_formula(text, &sig()).unwrap();
            let printed = phi.to_string();
            let back = parse_formula(&printed, &sig()).unwrap();
            assert_eq!(phi, back, "printed as {printed}");
        }
    }
}
