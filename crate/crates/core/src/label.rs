//! Labels name prospective worlds of a tableau branch.
//!
//! A label is `0`, an R-step `σRn`, or an S-step `σS_ρn` where `ρ` is a
//! strict non-empty prefix of `σ`. Since the base of an S-step is always a
//! prefix of the label it extends, it is stored as a prefix length.
//!
//! Concrete syntax: `0` | `<label>R<n>` | `<label>S_{<label>}<n>`. The
//! parser also accepts whitespace between the closing brace and the index.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("`{base}` is not a strict non-empty prefix of `{label}`")]
    PrefixViolation { base: String, label: String },
    #[error("label syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// One step of a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Root,
    R(u32),
    /// S-step whose base is the prefix made of the first `base_len` segments.
    S {
        base_len: usize,
        n: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    segments: Vec<Segment>,
}

#[allow(clippy::len_without_is_empty)]
impl Label {
    pub fn root() -> Self {
        Label {
            segments: vec![Segment::Root],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Number of segments; the root has length 1.
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_root(&self) -> bool {
        self.segments.len() == 1
    }

    pub fn extend_r(&self, n: u32) -> Label {
        let mut segments = self.segments.clone();
        segments.push(Segment::R(n));
        Label { segments }
    }

    pub fn extend_s(&self, base: &Label, n: u32) -> Result<Label, LabelError> {
        if !base.is_strict_prefix_of(self) {
            return Err(LabelError::PrefixViolation {
                base: base.to_string(),
                label: self.to_string(),
            });
        }
        let mut segments = self.segments.clone();
        segments.push(Segment::S {
            base_len: base.len(),
            n,
        });
        Ok(Label { segments })
    }

    /// True iff `self` is a proper initial segment of `other`.
    pub fn is_strict_prefix_of(&self, other: &Label) -> bool {
        self.len() < other.len() && other.segments[..self.len()] == self.segments[..]
    }

    /// The first `len` segments as a label.
    pub fn prefix(&self, len: usize) -> Label {
        assert!(len >= 1 && len <= self.len(), "prefix length out of range");
        Label {
            segments: self.segments[..len].to_vec(),
        }
    }

    /// The label this one was created from, `None` for the root.
    pub fn parent(&self) -> Option<Label> {
        (!self.is_root()).then(|| self.prefix(self.len() - 1))
    }

    pub fn last(&self) -> Segment {
        *self.segments.last().expect("labels are never empty")
    }

    /// Base label of a trailing S-step.
    pub fn s_base(&self) -> Option<Label> {
        match self.last() {
            Segment::S { base_len, .. } => Some(self.prefix(base_len)),
            _ => None,
        }
    }

    fn write_prefix(&self, len: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for seg in &self.segments[..len] {
            match *seg {
                Segment::Root => f.write_str("0")?,
                Segment::R(n) => write!(f, "R{n}")?,
                Segment::S { base_len, n } => {
                    f.write_str("S_{")?;
                    self.write_prefix(base_len, f)?;
                    write!(f, "}}{n}")?;
                }
            }
        }
        Ok(())
    }
}

/// Free-function form of [`Label::is_strict_prefix_of`].
pub fn is_strict_prefix(rho: &Label, sigma: &Label) -> bool {
    rho.is_strict_prefix_of(sigma)
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prefix(self.len(), f)
    }
}

struct LabelParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl LabelParser<'_> {
    fn err(&self, msg: impl Into<String>) -> LabelError {
        LabelError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), LabelError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn number(&mut self) -> Result<u32, LabelError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an index"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| LabelError::Syntax {
                pos: start,
                msg: "index out of range".into(),
            })
    }

    fn label(&mut self) -> Result<Label, LabelError> {
        self.expect(b'0')?;
        let mut label = Label::root();
        loop {
            match self.peek() {
                Some(b'R') => {
                    self.pos += 1;
                    let n = self.number()?;
                    label = label.extend_r(n);
                }
                Some(b'S') => {
                    self.pos += 1;
                    self.expect(b'_')?;
                    self.expect(b'{')?;
                    let base = self.label()?;
                    self.expect(b'}')?;
                    while matches!(self.peek(), Some(b' ' | b'\t')) {
                        self.pos += 1;
                    }
                    let n = self.number()?;
                    label = label.extend_s(&base, n)?;
                }
                _ => return Ok(label),
            }
        }
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut parser = LabelParser {
            src: s.as_bytes(),
            pos: 0,
        };
        let label = parser.label()?;
        if parser.pos != s.len() {
            return Err(parser.err("trailing input"));
        }
        Ok(label)
    }
}

impl serde::Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
