//! Label structures: the least relations `R`, `S` on a finite set of labels
//! that contain the syntactic seeds, obey the frame laws and satisfy the
//! logic's Horn frame condition.
//!
//! Seeds: `σ R σRn` whenever both labels are present, and `σ S_ρ σS_ρn`
//! whenever `σ`, `ρ` and `σS_ρn` are present.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::frame::{FrameCondition, HornClause};
use crate::horn::{frame_laws, Fact, Relations};
use crate::label::{Label, Segment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("label `{0}` is already present")]
    Duplicate(Label),
    #[error("label `{0}` is not in the structure")]
    UnknownLabel(Label),
}

/// Tuples newly derived by [`LabelStructure::add_label`], in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Delta {
    pub r: Vec<(Label, Label)>,
    pub s: Vec<(Label, Label, Label)>,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.r.is_empty() && self.s.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LabelStructure {
    labels: Vec<Label>,
    ids: HashMap<Label, u32>,
    rel: Relations,
    condition: Arc<FrameCondition>,
    rules: Arc<Vec<HornClause>>,
}

impl LabelStructure {
    /// An empty structure for `condition`.
    pub fn new(condition: &FrameCondition) -> Self {
        let mut rules = frame_laws();
        rules.extend(condition.clauses().iter().cloned());
        LabelStructure {
            labels: Vec::new(),
            ids: HashMap::new(),
            rel: Relations::new(),
            condition: Arc::new(condition.clone()),
            rules: Arc::new(rules),
        }
    }

    /// Least structure on `lambda`. Duplicates in `lambda` are ignored.
    pub fn close<'a>(
        lambda: impl IntoIterator<Item = &'a Label>,
        condition: &FrameCondition,
    ) -> Self {
        let mut ls = LabelStructure::new(condition);
        for label in lambda {
            if !ls.ids.contains_key(label) {
                ls.push(label.clone());
            }
        }
        let seeds: Vec<Fact> = (0..ls.labels.len() as u32)
            .flat_map(|id| ls.own_seeds(id))
            .collect();
        let rules = Arc::clone(&ls.rules);
        ls.rel.saturate(&rules, seeds);
        ls
    }

    pub fn condition(&self) -> &FrameCondition {
        &self.condition
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.ids.contains_key(label)
    }

    /// Labels in canonical order.
    pub fn labels(&self) -> Vec<Label> {
        let mut out = self.labels.clone();
        out.sort();
        out
    }

    fn push(&mut self, label: Label) -> u32 {
        let id = self.labels.len() as u32;
        self.ids.insert(label.clone(), id);
        self.labels.push(label);
        id
    }

    fn id(&self, label: &Label) -> Result<u32, StructureError> {
        self.ids
            .get(label)
            .copied()
            .ok_or_else(|| StructureError::UnknownLabel(label.clone()))
    }

    /// Seeds in which `id` is the created label.
    fn own_seeds(&self, id: u32) -> Option<Fact> {
        let label = &self.labels[id as usize];
        let parent = self.ids.get(&label.parent()?)?;
        match label.last() {
            Segment::Root => None,
            Segment::R(_) => Some(Fact::R(*parent, id)),
            Segment::S { base_len, .. } => {
                let base = self.ids.get(&label.prefix(base_len))?;
                Some(Fact::S(*base, *parent, id))
            }
        }
    }

    /// Adds `new` in place and returns what became derivable.
    pub fn insert_label(&mut self, new: Label) -> Result<Delta, StructureError> {
        if self.contains(&new) {
            return Err(StructureError::Duplicate(new));
        }
        let id = self.push(new.clone());
        // `new` can also complete the seed of an already present extension
        let mut seeds: Vec<Fact> = self.own_seeds(id).into_iter().collect();
        for other in 0..id {
            let l = &self.labels[other as usize];
            let mentions_new =
                l.parent().as_ref() == Some(&new) || l.s_base().as_ref() == Some(&new);
            if mentions_new {
                seeds.extend(self.own_seeds(other));
            }
        }
        let rules = Arc::clone(&self.rules);
        let facts = self.rel.saturate(&rules, seeds);
        Ok(self.delta_of(facts))
    }

    /// Persistent form of [`insert_label`](Self::insert_label).
    pub fn add_label(&self, new: Label) -> Result<(LabelStructure, Delta), StructureError> {
        let mut next = self.clone();
        let delta = next.insert_label(new)?;
        Ok((next, delta))
    }

    fn delta_of(&self, facts: Vec<Fact>) -> Delta {
        let lab = |i: u32| self.labels[i as usize].clone();
        let mut r = Vec::new();
        let mut s = Vec::new();
        for fact in facts {
            match fact {
                Fact::R(a, b) => r.push((lab(a), lab(b))),
                Fact::S(a, b, c) => s.push((lab(a), lab(b), lab(c))),
            }
        }
        r.sort();
        s.sort();
        Delta { r, s }
    }

    pub fn r_related(&self, sigma: &Label, tau: &Label) -> Result<bool, StructureError> {
        Ok(self.rel.contains(Fact::R(self.id(sigma)?, self.id(tau)?)))
    }

    /// `σ S_ρ τ`
    pub fn s_related(
        &self,
        rho: &Label,
        sigma: &Label,
        tau: &Label,
    ) -> Result<bool, StructureError> {
        Ok(self
            .rel
            .contains(Fact::S(self.id(rho)?, self.id(sigma)?, self.id(tau)?)))
    }

    /// R-successors of `sigma` in canonical order.
    pub fn r_successors(&self, sigma: &Label) -> Vec<Label> {
        let Some(&id) = self.ids.get(sigma) else {
            return Vec::new();
        };
        self.sorted(self.rel.r_successors(id))
    }

    /// All `τ` with `σ S_ρ τ`, in canonical order.
    pub fn s_successors(&self, rho: &Label, sigma: &Label) -> Vec<Label> {
        let (Some(&r), Some(&s)) = (self.ids.get(rho), self.ids.get(sigma)) else {
            return Vec::new();
        };
        self.sorted(self.rel.s_successors(r, s))
    }

    fn sorted(&self, ids: &[u32]) -> Vec<Label> {
        let mut out: Vec<Label> = ids
            .iter()
            .map(|&i| self.labels[i as usize].clone())
            .collect();
        out.sort();
        out
    }

    pub fn r_pairs(&self) -> BTreeSet<(Label, Label)> {
        let lab = |i: u32| self.labels[i as usize].clone();
        self.rel.r_pairs().map(|(a, b)| (lab(a), lab(b))).collect()
    }

    /// Triples `(ρ, σ, τ)` meaning `σ S_ρ τ`.
    pub fn s_triples(&self) -> BTreeSet<(Label, Label, Label)> {
        let lab = |i: u32| self.labels[i as usize].clone();
        self.rel
            .s_triples()
            .map(|(a, b, c)| (lab(a), lab(b), lab(c)))
            .collect()
    }

    /// R is transitive here, so any cycle shows up as a reflexive pair.
    pub fn has_r_cycle(&self) -> bool {
        self.rel.r_pairs().any(|(a, b)| a == b)
    }

    /// One `R σ τ` / `S ρ σ τ` line per tuple, sorted.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.r_pairs() {
            writeln!(out, "R {a} {b}").unwrap();
        }
        for (a, b, c) in self.s_triples() {
            writeln!(out, "S {a} {b} {c}").unwrap();
        }
        out
    }
}
