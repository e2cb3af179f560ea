//! Strict universal Horn frame conditions over `R(x,y)` and `S(x;y,z)`.
//!
//! File format: one clause per line, `R(x,y), R(y,z), S(x;z,u) -> S(y;z,u)`.
//! `S(x;y,z)` reads "y S_x z". Blank lines and `#` comments are ignored.
//! Every head variable has to occur in the body, so empty bodies are
//! rejected.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: the head must be a single R or S atom")]
    NonAtomicHead { line: usize },
    #[error("line {line}: head variable `{var}` does not occur in the body")]
    UnrestrictedHead { line: usize, var: String },
    #[error("unknown logic `{0}` (expected il, ilm or ilp)")]
    UnknownPreset(String),
}

/// An atom over clause-local variable indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    R(usize, usize),
    /// `S(base; from, to)`
    S(usize, usize, usize),
}

impl Atom {
    pub fn vars(&self) -> Vec<usize> {
        match *self {
            Atom::R(a, b) => vec![a, b],
            Atom::S(a, b, c) => vec![a, b, c],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HornClause {
    vars: Vec<String>,
    body: Vec<Atom>,
    head: Atom,
}

impl HornClause {
    /// Builds a clause from atoms over `vars`. Panics on an out-of-range
    /// variable index; returns `None` if the head is not range restricted.
    pub fn new(vars: Vec<String>, body: Vec<Atom>, head: Atom) -> Option<Self> {
        let all = body.iter().chain(std::iter::once(&head));
        assert!(all.flat_map(|a| a.vars()).all(|v| v < vars.len()));
        let restricted = head
            .vars()
            .iter()
            .all(|v| body.iter().any(|a| a.vars().contains(v)));
        restricted.then_some(HornClause { vars, body, head })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> Atom {
        self.head
    }

    fn write_atom(&self, atom: &Atom, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |i: usize| &self.vars[i];
        match *atom {
            Atom::R(a, b) => write!(f, "R({},{})", v(a), v(b)),
            Atom::S(a, b, c) => write!(f, "S({};{},{})", v(a), v(b), v(c)),
        }
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, atom) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            self.write_atom(atom, f)?;
        }
        f.write_str(" -> ")?;
        self.write_atom(&self.head, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameCondition {
    name: String,
    clauses: Vec<HornClause>,
}

impl FrameCondition {
    pub fn new(name: impl Into<String>, clauses: Vec<HornClause>) -> Self {
        FrameCondition {
            name: name.into(),
            clauses,
        }
    }

    pub fn empty() -> Self {
        FrameCondition::new("IL", Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn clauses(&self) -> &[HornClause] {
        &self.clauses
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

impl fmt::Display for FrameCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for clause in &self.clauses {
            writeln!(f, "{clause}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Il,
    Ilm,
    Ilp,
}

impl Preset {
    pub fn from_name(name: &str) -> Result<Preset, FrameError> {
        match name.to_ascii_lowercase().as_str() {
            "il" => Ok(Preset::Il),
            "ilm" => Ok(Preset::Ilm),
            "ilp" => Ok(Preset::Ilp),
            _ => Err(FrameError::UnknownPreset(name.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Il => "IL",
            Preset::Ilm => "ILM",
            Preset::Ilp => "ILP",
        }
    }

    /// Clause text for the preset.
    ///
    /// ILM uses the usual Veltman condition `y S_x z R u => y R u`.
    pub fn source(self) -> &'static str {
        match self {
            Preset::Il => "",
            Preset::Ilm => "S(x;y,z), R(z,u) -> R(y,u)\n",
            Preset::Ilp => "R(x,y), R(y,z), S(x;z,u) -> S(y;z,u)\n",
        }
    }

    pub fn condition(self) -> FrameCondition {
        parse_horn(self.source())
            .expect("preset conditions parse")
            .with_name(self.name())
    }
}

pub fn preset(name: &str) -> Result<FrameCondition, FrameError> {
    Preset::from_name(name).map(Preset::condition)
}

struct LineParser<'a> {
    line: usize,
    src: &'a [u8],
    pos: usize,
}

impl LineParser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FrameError> {
        Err(FrameError::Syntax {
            line: self.line,
            msg: format!("{} (column {})", msg.into(), self.pos + 1),
        })
    }

    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), FrameError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn var(&mut self, vars: &mut Vec<String>) -> Result<usize, FrameError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a variable");
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(match vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                vars.push(name.to_string());
                vars.len() - 1
            }
        })
    }

    fn atom(&mut self, vars: &mut Vec<String>) -> Result<Atom, FrameError> {
        if self.eat("R") {
            self.expect("(")?;
            let a = self.var(vars)?;
            self.expect(",")?;
            let b = self.var(vars)?;
            self.expect(")")?;
            Ok(Atom::R(a, b))
        } else if self.eat("S") {
            self.expect("(")?;
            let a = self.var(vars)?;
            self.expect(";")?;
            let b = self.var(vars)?;
            self.expect(",")?;
            let c = self.var(vars)?;
            self.expect(")")?;
            Ok(Atom::S(a, b, c))
        } else {
            self.err("expected an atom `R(..)` or `S(..;..)`")
        }
    }

    fn clause(&mut self) -> Result<HornClause, FrameError> {
        let mut vars = Vec::new();
        let mut body = Vec::new();
        if !self.eat("->") {
            loop {
                body.push(self.atom(&mut vars)?);
                if self.eat(",") {
                    continue;
                }
                self.expect("->")?;
                break;
            }
        }
        self.skip_ws();
        if matches!(self.src.get(self.pos), Some(b'~' | b'!' | b'(')) {
            return Err(FrameError::NonAtomicHead { line: self.line });
        }
        let head = self.atom(&mut vars)?;
        if !self.at_end() {
            return Err(FrameError::NonAtomicHead { line: self.line });
        }
        if let Some(&v) = head
            .vars()
            .iter()
            .find(|v| !body.iter().any(|a| a.vars().contains(v)))
        {
            return Err(FrameError::UnrestrictedHead {
                line: self.line,
                var: vars[v].clone(),
            });
        }
        Ok(HornClause { vars, body, head })
    }
}

/// Parses a frame-condition file. The result is named `custom`.
pub fn parse_horn(text: &str) -> Result<FrameCondition, FrameError> {
    let mut clauses = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parser = LineParser {
            line: i + 1,
            src: line.as_bytes(),
            pos: 0,
        };
        clauses.push(parser.clause()?);
    }
    Ok(FrameCondition::new("custom", clauses))
}
