//! Formulas of interpretability logic.
//!
//! The AST keeps only the primitive connectives `¬`, `→`, `□`, `▷` and the
//! tableau-internal `□_σ`. Everything else the parser accepts (`∧`, `∨`,
//! `↔`, `◇`, `⊤`, `⊥`) is rewritten into these on the way in.
//!
//! Binding strength, strongest first:
//!
//! | level | connectives            | associativity |
//! |-------|------------------------|---------------|
//! | 4     | `~` `[]` `<>`          | prefix        |
//! | 3     | `&` `\|`               | left          |
//! | 2     | `\|>`                  | none          |
//! | 1     | `->`                   | right         |
//! | 0     | `<->`                  | none          |
//!
//! UTF-8 aliases: `¬ ∧ ∨ → ↔ □ ◇ ▷ ⊤ ⊥`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::label::Label;

/// Variable name reserved for `⊤ := p → p`. Not lexable as a user identifier.
pub const TOP_VAR: &str = "_top";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    Neg(Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Boxed(Box<Formula>),
    Rhd(Box<Formula>, Box<Formula>),
    /// `□_σ A`; only ever produced by tableau rules.
    BoxAt(Label, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Self {
        Formula::Neg(Box::new(a))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn boxed(a: Formula) -> Self {
        Formula::Boxed(Box::new(a))
    }

    pub fn rhd(a: Formula, b: Formula) -> Self {
        Formula::Rhd(Box::new(a), Box::new(b))
    }

    pub fn box_at(label: Label, a: Formula) -> Self {
        Formula::BoxAt(label, Box::new(a))
    }

    /// `A ∧ B := ¬(A → ¬B)`
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::neg(Formula::imp(a, Formula::neg(b)))
    }

    /// `A ∨ B := ¬A → B`
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::imp(Formula::neg(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    /// `◇A := ¬□¬A`
    pub fn diamond(a: Formula) -> Self {
        Formula::neg(Formula::boxed(Formula::neg(a)))
    }

    pub fn top() -> Self {
        Formula::imp(Formula::var(TOP_VAR), Formula::var(TOP_VAR))
    }

    pub fn bottom() -> Self {
        Formula::neg(Formula::top())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::Imp(a, b)
            if matches!((&**a, &**b), (Formula::Var(x), Formula::Var(y)) if x == TOP_VAR && y == TOP_VAR))
    }

    /// Variables and negated variables.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Var(_) => true,
            Formula::Neg(a) => matches!(**a, Formula::Var(_)),
            _ => false,
        }
    }

    pub fn contains_box_at(&self) -> bool {
        match self {
            Formula::Var(_) => false,
            Formula::BoxAt(..) => true,
            Formula::Neg(a) | Formula::Boxed(a) => a.contains_box_at(),
            Formula::Imp(a, b) | Formula::Rhd(a, b) => a.contains_box_at() || b.contains_box_at(),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) => 1,
            Formula::Neg(a) | Formula::Boxed(a) | Formula::BoxAt(_, a) => 1 + a.size(),
            Formula::Imp(a, b) | Formula::Rhd(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) => 0,
            Formula::Neg(a) | Formula::Boxed(a) | Formula::BoxAt(_, a) => 1 + a.depth(),
            Formula::Imp(a, b) | Formula::Rhd(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(p) => {
                out.insert(p.clone());
            }
            Formula::Neg(a) | Formula::Boxed(a) | Formula::BoxAt(_, a) => a.collect_vars(out),
            Formula::Imp(a, b) | Formula::Rhd(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Formula::Var(_) => {}
            Formula::Neg(a) | Formula::Boxed(a) | Formula::BoxAt(_, a) => {
                a.collect_subformulas(out)
            }
            Formula::Imp(a, b) | Formula::Rhd(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
        }
    }
}

/// All subformulas of `gamma` together with their single negations.
pub fn closure_set<'a, I>(gamma: I) -> BTreeSet<Formula>
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut sub = BTreeSet::new();
    for f in gamma {
        f.collect_subformulas(&mut sub);
    }
    let negs: Vec<Formula> = sub.iter().cloned().map(Formula::neg).collect();
    sub.extend(negs);
    sub
}

// ---------------------------------------------------------------------------
// Printing

const LVL_IMP: u8 = 1;
const LVL_RHD: u8 = 2;
const LVL_ANDOR: u8 = 3;
const LVL_UNARY: u8 = 4;
const LVL_ATOM: u8 = 5;

fn render_at(f: &Formula) -> (String, u8) {
    use Formula::*;
    if f.is_top() {
        return ("true".into(), LVL_ATOM);
    }
    match f {
        Var(p) => (p.clone(), LVL_ATOM),
        Neg(a) if a.is_top() => ("false".into(), LVL_ATOM),
        Neg(a) => match &**a {
            Boxed(inner) => match &**inner {
                Neg(b) => (format!("<>{}", wrap(b, LVL_UNARY)), LVL_UNARY),
                _ => (format!("~{}", wrap(a, LVL_UNARY)), LVL_UNARY),
            },
            Imp(b, c) => match &**c {
                Neg(d) => (
                    format!("{} & {}", wrap(b, LVL_ANDOR), wrap(d, LVL_UNARY)),
                    LVL_ANDOR,
                ),
                _ => (format!("~{}", wrap(a, LVL_UNARY)), LVL_UNARY),
            },
            _ => (format!("~{}", wrap(a, LVL_UNARY)), LVL_UNARY),
        },
        Boxed(a) => (format!("[]{}", wrap(a, LVL_UNARY)), LVL_UNARY),
        BoxAt(l, a) => (format!("[_{}]{}", l, wrap(a, LVL_UNARY)), LVL_UNARY),
        Rhd(a, b) => (
            format!("{} |> {}", wrap(a, LVL_ANDOR), wrap(b, LVL_ANDOR)),
            LVL_RHD,
        ),
        Imp(a, b) => (
            format!("{} -> {}", wrap(a, LVL_RHD), wrap(b, LVL_IMP)),
            LVL_IMP,
        ),
    }
}

fn wrap(f: &Formula, min: u8) -> String {
    let (s, lvl) = render_at(f);
    if lvl >= min {
        s
    } else {
        format!("({s})")
    }
}

/// Render with the minimal parentheses the grammar needs. `∧`, `◇`, `⊤`
/// and `⊥` shapes are printed in their sugared form.
pub fn render(f: &Formula) -> String {
    render_at(f).0
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("reserved token `{token}` at byte {pos}")]
    Reserved { pos: usize, token: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Imp,
    Iff,
    Box,
    Dia,
    Rhd,
    Top,
    Bot,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::End => "end of input".into(),
            other => format!("{other:?}"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    const SYMBOLS: &[(&str, Tok)] = &[
        ("<->", Tok::Iff),
        ("<>", Tok::Dia),
        ("->", Tok::Imp),
        ("|>", Tok::Rhd),
        ("[]", Tok::Box),
        ("~", Tok::Not),
        ("&", Tok::And),
        ("|", Tok::Or),
        ("(", Tok::LParen),
        (")", Tok::RParen),
        ("¬", Tok::Not),
        ("∧", Tok::And),
        ("∨", Tok::Or),
        ("→", Tok::Imp),
        ("↔", Tok::Iff),
        ("□", Tok::Box),
        ("◇", Tok::Dia),
        ("▷", Tok::Rhd),
        ("⊤", Tok::Top),
        ("⊥", Tok::Bot),
    ];
    let mut out = Vec::new();
    let mut pos = 0;
    'outer: while pos < src.len() {
        let rest = &src[pos..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        if rest.starts_with("[_") {
            return Err(ParseError::Reserved {
                pos,
                token: "[_".into(),
            });
        }
        for (sym, tok) in SYMBOLS {
            if rest.starts_with(sym) {
                out.push((pos, tok.clone()));
                pos += sym.len();
                continue 'outer;
            }
        }
        if c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            return Err(ParseError::Reserved {
                pos,
                token: rest[..len].into(),
            });
        }
        if c.is_ascii_alphabetic() {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            let word = &rest[..len];
            let tok = match word {
                "true" => Tok::Top,
                "false" => Tok::Bot,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((pos, tok));
            pos += len;
            continue;
        }
        return Err(ParseError::Syntax {
            pos,
            msg: format!("unexpected character `{c}`"),
        });
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            if *self.peek() == Tok::Iff {
                return self.error("`<->` is non-associative; add parentheses");
            }
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.rhd()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn rhd(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.andor()?;
        if *self.peek() == Tok::Rhd {
            self.bump();
            let rhs = self.andor()?;
            if *self.peek() == Tok::Rhd {
                return self.error("`|>` is non-associative; add parentheses");
            }
            return Ok(Formula::rhd(lhs, rhs));
        }
        Ok(lhs)
    }

    fn andor(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::And => {
                    self.bump();
                    acc = Formula::and(acc, self.unary()?);
                }
                Tok::Or => {
                    self.bump();
                    acc = Formula::or(acc, self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::Box => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::Dia => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Tok::Ident(name) => Ok(Formula::Var(name)),
            Tok::Top => Ok(Formula::top()),
            Tok::Bot => Ok(Formula::bottom()),
            Tok::LParen => {
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return self.error("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            other => {
                self.at = self.at.saturating_sub(usize::from(other != Tok::End));
                self.error(format!("expected a formula, found {}", other.describe()))
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = parser.iff()?;
    if *parser.peek() != Tok::End {
        let found = parser.peek().describe();
        return parser.error(format!("unexpected {found}"));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
