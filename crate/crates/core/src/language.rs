//! Propositional languages: signatures, formulas, substitutions and the
//! concrete prefix syntax.
//!
//! Formulas are written `imp(p, neg(q))`. Every identifier that is not a
//! declared connective is a variable, so the variable set is never
//! materialized. A 0-ary connective `c` may be written `c` or `c()`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};

/// A connective symbol together with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Connective {
    pub symbol: String,
    pub arity: usize,
}

/// The connectives of a propositional language, in declaration order.
///
/// Declaration order matters: operation tables, formula enumeration and
/// matrix enumeration all follow it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    name: String,
    connectives: Vec<Connective>,
}

/// Identifiers `p1`, `p2`, ... name the canonical variables of term
/// functions; connectives may not use them.
pub(crate) fn is_reserved_variable(ident: &str) -> bool {
    ident.len() > 1 && ident.starts_with('p') && ident[1..].bytes().all(|b| b.is_ascii_digit())
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl Signature {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        connectives: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self> {
        let connectives: Vec<Connective> = connectives
            .into_iter()
            .map(|(symbol, arity)| Connective {
                symbol: symbol.into(),
                arity,
            })
            .collect();
        for (i, c) in connectives.iter().enumerate() {
            if !is_identifier(&c.symbol) {
                return Err(Error::Signature(format!(
                    "`{}` is not an identifier",
                    c.symbol
                )));
            }
            if is_reserved_variable(&c.symbol) {
                return Err(Error::Signature(format!(
                    "`{}` is reserved for variables",
                    c.symbol
                )));
            }
            if connectives[..i].iter().any(|d| d.symbol == c.symbol) {
                return Err(Error::Signature(format!(
                    "connective `{}` declared twice",
                    c.symbol
                )));
            }
        }
        Ok(Signature {
            name: name.into(),
            connectives,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn connectives(&self) -> &[Connective] {
        &self.connectives
    }

    pub fn len(&self) -> usize {
        self.connectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.connectives.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.connectives.iter().position(|c| c.symbol == symbol)
    }

    pub fn arity(&self, symbol: &str) -> Option<usize> {
        self.index_of(symbol).map(|i| self.connectives[i].arity)
    }

    pub fn max_arity(&self) -> usize {
        self.connectives.iter().map(|c| c.arity).max().unwrap_or(0)
    }

    pub fn has_constants(&self) -> bool {
        self.connectives.iter().any(|c| c.arity == 0)
    }

    /// Two signatures are interchangeable when they declare the same
    /// connectives in the same order; the name is ignored.
    pub fn same_connectives(&self, other: &Signature) -> bool {
        self.connectives == other.connectives
    }

    pub(crate) fn ensure_same(&self, other: &Signature) -> Result<()> {
        if self.same_connectives(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "`{}` and `{}` declare different connectives",
                self.name, other.name
            )))
        }
    }

    /// This signature with one more 0-ary connective appended.
    pub fn with_constant(&self, symbol: &str) -> Result<Signature> {
        let mut all: Vec<(String, usize)> = self
            .connectives
            .iter()
            .map(|c| (c.symbol.clone(), c.arity))
            .collect();
        all.push((symbol.to_string(), 0));
        Signature::new(self.name.clone(), all)
    }
}

/// A formula of the absolutely free formula algebra.
///
/// Equality is structural; the derived `Ord` gives a deterministic order
/// used when formulas are collected into sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    App(String, Vec<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn app(symbol: impl Into<String>, args: Vec<Formula>) -> Formula {
        Formula::App(symbol.into(), args)
    }

    /// The i-th canonical variable `p{i}` (1-based).
    pub fn canonical_var(i: usize) -> Formula {
        Formula::Var(canonical_var_name(i))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) => 1,
            Formula::App(_, args) => 1 + args.iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// Tree depth; variables and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) => 0,
            Formula::App(_, args) if args.is_empty() => 0,
            Formula::App(_, args) => 1 + args.iter().map(Formula::depth).max().unwrap_or(0),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// All subformulas, each once, in post-order of first occurrence.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut Vec<Formula>) {
        if let Formula::App(_, args) = self {
            args.iter().for_each(|a| a.collect_subformulas(out));
        }
        if !out.contains(self) {
            out.push(self.clone());
        }
    }

    /// Checks that every application matches the arity declared in `sig`.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Formula::Var(v) => {
                if sig.index_of(v).is_some() {
                    return Err(Error::Invalid(format!(
                        "`{v}` is a connective, not a variable"
                    )));
                }
                Ok(())
            }
            Formula::App(symbol, args) => {
                let arity = sig
                    .arity(symbol)
                    .ok_or_else(|| Error::UnknownConnective(symbol.clone()))?;
                if arity != args.len() {
                    return Err(Error::Arity {
                        symbol: symbol.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }

    pub fn substitute(&self, s: &Substitution) -> Formula {
        s.apply(self)
    }
}

pub(crate) fn canonical_var_name(i: usize) -> String {
    format!("p{i}")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(v) => f.write_str(v),
            Formula::App(symbol, args) if args.is_empty() => f.write_str(symbol),
            Formula::App(symbol, args) => {
                write!(f, "{symbol}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Variables occurring in a collection of formulas; `V(∅) = ∅`.
pub fn vars_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for f in formulas {
        f.collect_vars(&mut out);
    }
    out
}

/// A finite map from variables to formulas, identity elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    map: BTreeMap<String, Formula>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: impl Into<String>, image: Formula) {
        self.map.insert(var.into(), image);
    }

    pub fn get(&self, var: &str) -> Option<&Formula> {
        self.map.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Formula)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, f: &Formula) -> Formula {
        match f {
            Formula::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| f.clone()),
            Formula::App(symbol, args) => {
                Formula::App(symbol.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &Substitution) -> Substitution {
        let mut map: BTreeMap<String, Formula> = inner
            .map
            .iter()
            .map(|(v, f)| (v.clone(), self.apply(f)))
            .collect();
        for (v, f) in &self.map {
            map.entry(v.clone()).or_insert_with(|| f.clone());
        }
        Substitution { map }
    }
}

impl FromIterator<(String, Formula)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Formula)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

/// Applies `s` homomorphically to `f`. Both are assumed well-formed over `sig`.
pub fn substitute(sig: &Signature, s: &Substitution, f: &Formula) -> Formula {
    debug_assert!(f.check(sig).is_ok());
    s.apply(f)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
    },
    #[error("unknown connective `{0}`")]
    UnknownConnective(String),
    #[error("`{0}` is a variable and cannot be applied")]
    VariableApplied(String),
    #[error("connective `{symbol}` takes {expected} argument(s), found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
}

/// A parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    Comma,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> std::result::Result<Vec<(Token, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push((Token::LParen, pos));
            }
            ')' => {
                chars.next();
                out.push((Token::RParen, pos));
            }
            ',' => {
                chars.next();
                out.push((Token::Comma, pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = pos;
                while let Some(&(i, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = i + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Token::Ident(text[pos..end].to_string()), pos));
            }
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnexpectedChar(other),
                    position: pos,
                })
            }
        }
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    sig: &'a Signature,
    tokens: Vec<(Token, usize)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.at].0
    }

    fn position(&self) -> usize {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Unexpected {
                expected,
                found: self.peek().describe(),
            },
            position: self.position(),
        }
    }

    fn formula(&mut self) -> std::result::Result<Formula, ParseError> {
        if !matches!(self.peek(), Token::Ident(_)) {
            return Err(self.unexpected("a formula"));
        }
        let (tok, pos) = self.bump();
        let Token::Ident(ident) = tok else {
            unreachable!()
        };
        let declared = self.sig.arity(&ident);
        if *self.peek() != Token::LParen {
            return match declared {
                None => Ok(Formula::Var(ident)),
                Some(0) => Ok(Formula::App(ident, Vec::new())),
                Some(arity) => Err(ParseError {
                    kind: ParseErrorKind::ArityMismatch {
                        symbol: ident,
                        expected: arity,
                        found: 0,
                    },
                    position: pos,
                }),
            };
        }
        let arity = match declared {
            Some(a) => a,
            None if is_reserved_variable(&ident) => {
                return Err(ParseError {
                    kind: ParseErrorKind::VariableApplied(ident),
                    position: pos,
                })
            }
            None => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownConnective(ident),
                    position: pos,
                })
            }
        };
        self.bump();
        let mut args = Vec::new();
        if *self.peek() == Token::RParen {
            self.bump();
        } else {
            loop {
                args.push(self.formula()?);
                match self.peek() {
                    Token::Comma => {
                        self.bump();
                    }
                    Token::RParen => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected("`,` or `)`")),
                }
            }
        }
        if args.len() != arity {
            return Err(ParseError {
                kind: ParseErrorKind::ArityMismatch {
                    symbol: ident,
                    expected: arity,
                    found: args.len(),
                },
                position: pos,
            });
        }
        Ok(Formula::App(ident, args))
    }
}

pub fn parse_formula(sig: &Signature, text: &str) -> std::result::Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { sig, tokens, at: 0 };
    let f = parser.formula()?;
    if *parser.peek() != Token::End {
        return Err(parser.unexpected("end of input"));
    }
    Ok(f)
}

pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}

/// Parses a sequent `A1, ..., An |- B`. The premise side may be empty.
pub fn parse_sequent(
    sig: &Signature,
    text: &str,
) -> std::result::Result<(Vec<Formula>, Formula), ParseError> {
    let Some(turnstile) = text.find("|-") else {
        return Err(ParseError {
            kind: ParseErrorKind::Unexpected {
                expected: "`|-`",
                found: "end of input".into(),
            },
            position: text.len(),
        });
    };
    let (lhs, rhs) = (&text[..turnstile], &text[turnstile + 2..]);
    let shift = |e: ParseError, by: usize| ParseError {
        position: e.position + by,
        ..e
    };
    let conclusion = parse_formula(sig, rhs).map_err(|e| shift(e, turnstile + 2))?;
    let mut premises = Vec::new();
    if !lhs.trim().is_empty() {
        let tokens = tokenize(lhs)?;
        let mut parser = Parser { sig, tokens, at: 0 };
        loop {
            premises.push(parser.formula()?);
            match parser.peek() {
                Token::Comma => {
                    parser.bump();
                }
                Token::End => break,
                _ => return Err(parser.unexpected("`,` or `|-`")),
            }
        }
    }
    Ok((premises, conclusion))
}
