//! Labelled tableaux and the systematic proof procedure.
//!
//! A tableau is an append-only arena of nodes. Each leaf ends exactly one
//! branch, and every branch carries the label structure over the labels
//! occurring on it. Nodes are marked awake, asleep or finished; a stage
//! picks the awake node closest to the root (leftmost among equals) that
//! still lies on an open branch and applies its rule to every open branch
//! through it.
//!
//! A labelled formula already present on a branch is never appended to it
//! again, and a split is skipped when one of its forks would add nothing.
//!
//! [`run`] stops with an open verdict as soon as some open branch is a
//! Hintikka set over an acyclic structure, even if other branches still
//! have awake nodes.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::frame::FrameCondition;
use crate::label::{Label, LabelError};
use crate::semantics::{extract_model, verify_hintikka_set, Model};
use crate::structure::{Delta, LabelStructure};

/// `σ :: A`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelledFormula {
    pub label: Label,
    pub formula: Formula,
}

impl LabelledFormula {
    pub fn new(label: Label, formula: Formula) -> Self {
        LabelledFormula { label, formula }
    }

    /// The formula whose presence at the same label closes a branch.
    pub fn complement(&self) -> LabelledFormula {
        let formula = match &self.formula {
            Formula::Neg(a) => (**a).clone(),
            f => Formula::neg(f.clone()),
        };
        LabelledFormula::new(self.label.clone(), formula)
    }
}

impl fmt::Display for LabelledFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :: {}", self.label, self.formula)
    }
}

// ---------------------------------------------------------------------------
// Rules

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleId {
    Neg,
    Imp,
    NegImp,
    NuBox,
    NuS,
    NuRhd,
    PiBox,
    PiS,
    PiRhd,
}

impl RuleId {
    pub const ALL: [RuleId; 9] = [
        RuleId::Neg,
        RuleId::Imp,
        RuleId::NegImp,
        RuleId::NuBox,
        RuleId::NuS,
        RuleId::NuRhd,
        RuleId::PiBox,
        RuleId::PiS,
        RuleId::PiRhd,
    ];

    /// The rule whose antecedent has the shape of `f`; `None` for literals.
    pub fn for_formula(f: &Formula) -> Option<RuleId> {
        match f {
            Formula::Var(_) => None,
            Formula::Imp(..) => Some(RuleId::Imp),
            Formula::Boxed(_) => Some(RuleId::NuBox),
            Formula::BoxAt(..) => Some(RuleId::NuS),
            Formula::Rhd(..) => Some(RuleId::NuRhd),
            Formula::Neg(a) => match &**a {
                Formula::Var(_) => None,
                Formula::Neg(_) => Some(RuleId::Neg),
                Formula::Imp(..) => Some(RuleId::NegImp),
                Formula::Boxed(_) => Some(RuleId::PiBox),
                Formula::BoxAt(..) => Some(RuleId::PiS),
                Formula::Rhd(..) => Some(RuleId::PiRhd),
            },
        }
    }

    pub fn is_nu(self) -> bool {
        matches!(self, RuleId::NuBox | RuleId::NuS | RuleId::NuRhd)
    }

    pub fn is_pi(self) -> bool {
        matches!(self, RuleId::PiBox | RuleId::PiS | RuleId::PiRhd)
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Neg => "neg",
            RuleId::Imp => "imp",
            RuleId::NegImp => "neg_imp",
            RuleId::NuBox => "nu_box",
            RuleId::NuS => "nu_s",
            RuleId::NuRhd => "nu_rhd",
            RuleId::PiBox => "pi_box",
            RuleId::PiS => "pi_s",
            RuleId::PiRhd => "pi_rhd",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a rule instance needs besides its antecedent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleTarget {
    None,
    /// the related label `τ` of a ν-rule
    Witness(Label),
    /// the index `n` of the label a π-rule creates
    Fresh(u32),
}

/// The succedents of one rule instance: one fork, or two when it splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub forks: Vec<Vec<LabelledFormula>>,
    /// label created by a π-rule
    pub fresh: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {rule} does not apply to `{formula}`")]
    ShapeMismatch { rule: RuleId, formula: Formula },
    #[error("rule {rule} needs a {expected}")]
    MissingTarget {
        rule: RuleId,
        expected: &'static str,
    },
    #[error("`{tau}` is not related to `{sigma}` as rule {rule} requires")]
    NotRelated {
        rule: RuleId,
        sigma: Label,
        tau: Label,
    },
    #[error("fresh label `{0}` is already in use")]
    FreshCollision(Label),
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Applies one rule instance to `item` relative to `structure`.
pub fn apply_rule(
    rule: RuleId,
    item: &LabelledFormula,
    structure: &LabelStructure,
    target: &RuleTarget,
) -> Result<Extension, RuleError> {
    let shape = || RuleError::ShapeMismatch {
        rule,
        formula: item.formula.clone(),
    };
    if RuleId::for_formula(&item.formula) != Some(rule) {
        return Err(shape());
    }
    let sigma = &item.label;
    let at = |l: &Label, f: Formula| LabelledFormula::new(l.clone(), f);
    let neg = |f: &Formula| Formula::neg(f.clone());
    let one = |fork: Vec<LabelledFormula>| Extension {
        forks: vec![fork],
        fresh: None,
    };

    let witness = || match target {
        RuleTarget::Witness(tau) => Ok(tau),
        _ => Err(RuleError::MissingTarget {
            rule,
            expected: "witness label",
        }),
    };
    let not_related = |tau: &Label| RuleError::NotRelated {
        rule,
        sigma: sigma.clone(),
        tau: tau.clone(),
    };
    let fresh = |label: Label| {
        if structure.contains(&label) {
            Err(RuleError::FreshCollision(label))
        } else {
            Ok(label)
        }
    };
    let index = || match target {
        RuleTarget::Fresh(n) => Ok(*n),
        _ => Err(RuleError::MissingTarget {
            rule,
            expected: "fresh index",
        }),
    };

    match (&item.formula, rule) {
        (Formula::Neg(a), RuleId::Neg) => match &**a {
            Formula::Neg(b) => Ok(one(vec![at(sigma, (**b).clone())])),
            _ => Err(shape()),
        },
        (Formula::Imp(a, b), RuleId::Imp) => Ok(Extension {
            forks: vec![vec![at(sigma, neg(a))], vec![at(sigma, (**b).clone())]],
            fresh: None,
        }),
        (Formula::Neg(x), RuleId::NegImp) => match &**x {
            Formula::Imp(a, b) => Ok(one(vec![at(sigma, (**a).clone()), at(sigma, neg(b))])),
            _ => Err(shape()),
        },
        (Formula::Boxed(a), RuleId::NuBox) => {
            let tau = witness()?;
            if !structure.r_related(sigma, tau).unwrap_or(false) {
                return Err(not_related(tau));
            }
            Ok(one(vec![at(tau, (**a).clone())]))
        }
        (Formula::BoxAt(rho, a), RuleId::NuS) => {
            let tau = witness()?;
            if !structure.s_related(rho, sigma, tau).unwrap_or(false) {
                return Err(not_related(tau));
            }
            Ok(one(vec![at(tau, (**a).clone())]))
        }
        (Formula::Rhd(a, b), RuleId::NuRhd) => {
            let tau = witness()?;
            if !structure.r_related(sigma, tau).unwrap_or(false) {
                return Err(not_related(tau));
            }
            let right = neg(&Formula::box_at(sigma.clone(), neg(b)));
            Ok(Extension {
                forks: vec![vec![at(tau, neg(a))], vec![at(tau, right)]],
                fresh: None,
            })
        }
        (Formula::Neg(x), RuleId::PiBox) => match &**x {
            Formula::Boxed(a) => {
                let new = fresh(sigma.extend_r(index()?))?;
                Ok(Extension {
                    forks: vec![vec![
                        at(&new, neg(a)),
                        at(&new, Formula::boxed((**a).clone())),
                    ]],
                    fresh: Some(new),
                })
            }
            _ => Err(shape()),
        },
        (Formula::Neg(x), RuleId::PiS) => match &**x {
            Formula::BoxAt(rho, a) => {
                let new = fresh(sigma.extend_s(rho, index()?)?)?;
                Ok(Extension {
                    forks: vec![vec![
                        at(&new, neg(a)),
                        at(&new, Formula::boxed((**a).clone())),
                    ]],
                    fresh: Some(new),
                })
            }
            _ => Err(shape()),
        },
        (Formula::Neg(x), RuleId::PiRhd) => match &**x {
            Formula::Rhd(a, b) => {
                let new = fresh(sigma.extend_r(index()?))?;
                Ok(Extension {
                    forks: vec![vec![
                        at(&new, (**a).clone()),
                        at(&new, Formula::box_at(sigma.clone(), neg(b))),
                        at(&new, Formula::boxed(neg(a))),
                    ]],
                    fresh: Some(new),
                })
            }
            _ => Err(shape()),
        },
        _ => Err(shape()),
    }
}

/// All instances of a ν-rule on `item`, one per related label in canonical
/// order.
pub fn saturate(
    rule: RuleId,
    item: &LabelledFormula,
    structure: &LabelStructure,
) -> Result<Vec<Extension>, RuleError> {
    let witnesses = match (&item.formula, rule) {
        (Formula::Boxed(_), RuleId::NuBox) | (Formula::Rhd(..), RuleId::NuRhd) => {
            structure.r_successors(&item.label)
        }
        (Formula::BoxAt(rho, _), RuleId::NuS) => structure.s_successors(rho, &item.label),
        _ => {
            return Err(RuleError::ShapeMismatch {
                rule,
                formula: item.formula.clone(),
            })
        }
    };
    witnesses
        .into_iter()
        .map(|tau| apply_rule(rule, item, structure, &RuleTarget::Witness(tau)))
        .collect()
}

/// Least `n` whose π-label is not yet in `structure`.
pub fn least_fresh_index(
    rule: RuleId,
    item: &LabelledFormula,
    structure: &LabelStructure,
) -> Result<u32, RuleError> {
    for n in 0.. {
        let candidate = match (&item.formula, rule) {
            (Formula::Neg(x), RuleId::PiS) => match &**x {
                Formula::BoxAt(rho, _) => item.label.extend_s(rho, n)?,
                _ => break,
            },
            (_, RuleId::PiBox | RuleId::PiRhd) => item.label.extend_r(n),
            _ => break,
        };
        if !structure.contains(&candidate) {
            return Ok(n);
        }
    }
    Err(RuleError::ShapeMismatch {
        rule,
        formula: item.formula.clone(),
    })
}

// ---------------------------------------------------------------------------
// Tableau

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Awake,
    Asleep,
    Finished,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::Awake => "awake",
            Mark::Asleep => "asleep",
            Mark::Finished => "finished",
        })
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Node {
    pub item: LabelledFormula,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub mark: Mark,
    pub birth_stage: usize,
    pub depth: usize,
    /// child positions taken at every split above this node
    fork_path: Vec<u8>,
}

#[derive(Debug, Clone)]
struct BranchState {
    leaf: NodeId,
    members: HashSet<LabelledFormula>,
    structure: LabelStructure,
    /// stage at which the branch closed and the clashing pair of nodes
    closed: Option<(usize, NodeId, NodeId)>,
}

/// Snapshot of one branch.
#[derive(Debug, Clone)]
pub struct Branch {
    /// root-to-leaf node ids
    pub nodes: Vec<NodeId>,
    pub formulas: Vec<LabelledFormula>,
    pub structure: LabelStructure,
    pub closed: bool,
}

impl Branch {
    pub fn formula_set(&self) -> BTreeSet<LabelledFormula> {
        self.formulas.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_stages: usize,
    pub max_labels_per_branch: usize,
    /// cap on simultaneously open branches
    pub max_branches: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_stages: 2000,
            max_labels_per_branch: 64,
            max_branches: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("the initial set of formulas is empty")]
    EmptyInput,
    #[error("input formula `{0}` contains an internal `[_σ]` operator")]
    InternalOperator(Formula),
}

/// What a call to [`Tableau::step`] did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepStatus {
    Stepped {
        node: NodeId,
    },
    /// no awake node lies on an open branch
    Idle,
    /// a π-rule would exceed `max_labels_per_branch`
    LabelBound,
    /// a rule instance could not be formed; the run cannot continue
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct Tableau {
    nodes: Vec<Node>,
    branches: Vec<BranchState>,
    /// number of open branches through each node
    open_through: Vec<usize>,
    awake: BTreeSet<(usize, Vec<u8>, NodeId)>,
    condition: FrameCondition,
    max_labels: usize,
    stage: usize,
    /// leaves of open branches already found not to be Hintikka sets
    hintikka_checked: HashSet<NodeId>,
}

enum Halt {
    LabelBound,
    Failed(String),
}

impl Tableau {
    /// Stage 0: `0 :: A` for every `A` in `gamma`, in the given order.
    pub fn init(gamma: &[Formula], condition: &FrameCondition) -> Result<Tableau, TableauError> {
        Self::with_label_bound(gamma, condition, Bounds::default().max_labels_per_branch)
    }

    pub fn with_label_bound(
        gamma: &[Formula],
        condition: &FrameCondition,
        max_labels: usize,
    ) -> Result<Tableau, TableauError> {
        if gamma.is_empty() {
            return Err(TableauError::EmptyInput);
        }
        if let Some(f) = gamma.iter().find(|f| f.contains_box_at()) {
            return Err(TableauError::InternalOperator(f.clone()));
        }
        let root = Label::root();
        let mut t = Tableau {
            nodes: Vec::new(),
            branches: Vec::new(),
            open_through: Vec::new(),
            awake: BTreeSet::new(),
            condition: condition.clone(),
            max_labels,
            stage: 0,
            hintikka_checked: HashSet::new(),
        };
        let first = t.new_node(LabelledFormula::new(root.clone(), gamma[0].clone()), None);
        t.branches.push(BranchState {
            leaf: first,
            members: HashSet::from([t.nodes[first].item.clone()]),
            structure: LabelStructure::close([&root], condition),
            closed: None,
        });
        let rest: Vec<_> = gamma[1..]
            .iter()
            .map(|f| LabelledFormula::new(root.clone(), f.clone()))
            .collect();
        t.append(0, rest);
        Ok(t)
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn condition(&self) -> &FrameCondition {
        &self.condition
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_closed(&self) -> bool {
        self.branches.iter().all(|b| b.closed.is_some())
    }

    pub fn open_branch_count(&self) -> usize {
        self.branches.iter().filter(|b| b.closed.is_none()).count()
    }

    /// Largest label set over the open branches.
    pub fn max_open_labels(&self) -> usize {
        self.branches
            .iter()
            .filter(|b| b.closed.is_none())
            .map(|b| b.structure.len())
            .max()
            .unwrap_or(0)
    }

    /// Largest label set over all branches.
    pub fn max_labels(&self) -> usize {
        self.branches
            .iter()
            .map(|b| b.structure.len())
            .max()
            .unwrap_or(0)
    }

    /// Branches in left-to-right order.
    pub fn branches(&self) -> Vec<Branch> {
        self.branch_order()
            .into_iter()
            .map(|i| self.snapshot(i))
            .collect()
    }

    /// The leftmost open branch.
    pub fn first_open_branch(&self) -> Option<Branch> {
        self.branch_order()
            .into_iter()
            .find(|&i| self.branches[i].closed.is_none())
            .map(|i| self.snapshot(i))
    }

    /// The leftmost open branch whose formulas already form a Hintikka set
    /// over an acyclic structure. A branch is examined again only after it
    /// has grown.
    pub fn saturated_open_branch(&mut self) -> Option<Branch> {
        for i in self.branch_order() {
            let b = &self.branches[i];
            if b.closed.is_some() || !self.hintikka_checked.insert(b.leaf) {
                continue;
            }
            let items: BTreeSet<LabelledFormula> = b.members.iter().cloned().collect();
            if !b.structure.has_r_cycle() && verify_hintikka_set(&items, &b.structure).is_ok() {
                return Some(self.snapshot(i));
            }
        }
        None
    }

    fn branch_order(&self) -> Vec<usize> {
        let by_leaf: HashMap<NodeId, usize> = self
            .branches
            .iter()
            .enumerate()
            .map(|(i, b)| (b.leaf, i))
            .collect();
        let mut order = Vec::new();
        let mut stack = vec![0];
        while let Some(n) = stack.pop() {
            if self.nodes[n].children.is_empty() {
                order.push(by_leaf[&n]);
            }
            stack.extend(self.nodes[n].children.iter().rev());
        }
        order
    }

    fn path(&self, leaf: NodeId) -> Vec<NodeId> {
        let mut path = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    fn snapshot(&self, i: usize) -> Branch {
        let b = &self.branches[i];
        let nodes = self.path(b.leaf);
        Branch {
            formulas: nodes.iter().map(|&n| self.nodes[n].item.clone()).collect(),
            nodes,
            structure: b.structure.clone(),
            closed: b.closed.is_some(),
        }
    }

    fn new_node(&mut self, item: LabelledFormula, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        // chain children share the parent's fork path; see `push_fork_head`
        let (depth, fork_path) = match parent {
            Some(p) => (self.nodes[p].depth + 1, self.nodes[p].fork_path.clone()),
            None => (0, Vec::new()),
        };
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        self.awake.insert((depth, fork_path.clone(), id));
        self.nodes.push(Node {
            item,
            parent,
            children: Vec::new(),
            mark: Mark::Awake,
            birth_stage: self.stage,
            depth,
            fork_path,
        });
        self.open_through.push(1);
        id
    }

    fn set_mark(&mut self, n: NodeId, mark: Mark) {
        let node = &self.nodes[n];
        let key = (node.depth, node.fork_path.clone(), n);
        if mark == Mark::Awake {
            self.awake.insert(key);
        } else {
            self.awake.remove(&key);
        }
        self.nodes[n].mark = mark;
    }

    /// Appends `items` below the leaf of branch `b`, skipping those already
    /// on it and stopping once the branch closes.
    fn append(&mut self, b: usize, items: Vec<LabelledFormula>) {
        for item in items {
            if self.branches[b].closed.is_some() {
                return;
            }
            if self.branches[b].members.contains(&item) {
                continue;
            }
            let leaf = self.branches[b].leaf;
            let node = self.new_node(item.clone(), Some(leaf));
            self.attach(b, node);
        }
    }

    fn attach(&mut self, b: usize, node: NodeId) {
        let item = self.nodes[node].item.clone();
        let clash = item.complement();
        let branch = &mut self.branches[b];
        branch.leaf = node;
        branch.members.insert(item);
        if branch.members.contains(&clash) {
            let other = self
                .path(node)
                .into_iter()
                .find(|&n| self.nodes[n].item == clash)
                .expect("clashing node is on the branch");
            self.branches[b].closed = Some((self.stage, other, node));
            self.close_path(node);
        }
    }

    fn close_path(&mut self, leaf: NodeId) {
        let mut cur = Some(leaf);
        while let Some(n) = cur {
            self.open_through[n] -= 1;
            cur = self.nodes[n].parent;
        }
    }

    /// Splits branch `b` into `left` and `right`. Returns the index of the
    /// right branch, or `None` if no split was needed.
    fn split(
        &mut self,
        b: usize,
        left: Vec<LabelledFormula>,
        right: Vec<LabelledFormula>,
    ) -> Option<usize> {
        let members = &self.branches[b].members;
        let fresh = |fork: &[LabelledFormula]| -> Vec<LabelledFormula> {
            let mut seen = HashSet::new();
            fork.iter()
                .filter(|x| !members.contains(x) && seen.insert((*x).clone()))
                .cloned()
                .collect()
        };
        let (left, right) = (fresh(&left), fresh(&right));
        if left.is_empty() || right.is_empty() {
            return None;
        }
        let leaf = self.branches[b].leaf;
        let mut right_branch = self.branches[b].clone();
        // one more open branch now passes through the old leaf and above
        let mut cur = Some(leaf);
        while let Some(n) = cur {
            self.open_through[n] += 1;
            cur = self.nodes[n].parent;
        }
        let l0 = self.push_fork_head(leaf, left[0].clone(), 0);
        self.attach(b, l0);
        self.append(b, left[1..].to_vec());

        let r0 = self.push_fork_head(leaf, right[0].clone(), 1);
        let rb = self.branches.len();
        right_branch.leaf = leaf;
        self.branches.push(right_branch);
        self.attach(rb, r0);
        self.append(rb, right[1..].to_vec());
        Some(rb)
    }

    fn push_fork_head(&mut self, parent: NodeId, item: LabelledFormula, pos: u8) -> NodeId {
        let id = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        let mut fork_path = self.nodes[parent].fork_path.clone();
        fork_path.push(pos);
        self.nodes[parent].children.push(id);
        self.awake.insert((depth, fork_path.clone(), id));
        self.nodes.push(Node {
            item,
            parent: Some(parent),
            children: Vec::new(),
            mark: Mark::Awake,
            birth_stage: self.stage,
            depth,
            fork_path,
        });
        self.open_through.push(1);
        id
    }

    /// Open branches whose path contains `node`, left to right.
    fn open_branches_through(&self, node: NodeId) -> Vec<usize> {
        let by_leaf: HashMap<NodeId, usize> = self
            .branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.closed.is_none())
            .map(|(i, b)| (b.leaf, i))
            .collect();
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if self.open_through[n] == 0 {
                continue;
            }
            if self.nodes[n].children.is_empty() {
                out.push(by_leaf[&n]);
            }
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    /// The awake node the next stage works on.
    pub fn next_awake(&mut self) -> Option<NodeId> {
        while let Some(key) = self.awake.first().cloned() {
            let n = key.2;
            if self.open_through[n] > 0 {
                return Some(n);
            }
            // only closed branches pass through it; nothing can change there
            self.awake.remove(&key);
        }
        None
    }

    /// One stage of the systematic procedure.
    pub fn step(&mut self) -> StepStatus {
        let Some(node) = self.next_awake() else {
            return StepStatus::Idle;
        };
        self.stage += 1;
        let item = self.nodes[node].item.clone();
        let Some(rule) = RuleId::for_formula(&item.formula) else {
            self.set_mark(node, Mark::Finished);
            return StepStatus::Stepped { node };
        };
        let mark = if rule.is_nu() {
            Mark::Asleep
        } else {
            Mark::Finished
        };
        self.set_mark(node, mark);
        for b in self.open_branches_through(node) {
            let outcome = if rule.is_pi() {
                self.expand_pi(b, rule, &item)
            } else if rule.is_nu() {
                self.expand_nu(b, rule, &item)
            } else {
                self.expand_prop(b, rule, &item)
            };
            match outcome {
                Ok(()) => {}
                Err(Halt::LabelBound) => return StepStatus::LabelBound,
                Err(Halt::Failed(msg)) => return StepStatus::Failed(msg),
            }
        }
        StepStatus::Stepped { node }
    }

    fn expand_prop(&mut self, b: usize, rule: RuleId, item: &LabelledFormula) -> Result<(), Halt> {
        let ext = apply_rule(rule, item, &self.branches[b].structure, &RuleTarget::None)
            .map_err(|e| Halt::Failed(e.to_string()))?;
        self.extend(b, ext.forks);
        Ok(())
    }

    fn extend(&mut self, b: usize, mut forks: Vec<Vec<LabelledFormula>>) {
        if forks.len() == 2 {
            let right = forks.pop().unwrap();
            let left = forks.pop().unwrap();
            self.split(b, left, right);
        } else {
            self.append(b, forks.pop().unwrap_or_default());
        }
    }

    fn expand_nu(&mut self, b: usize, rule: RuleId, item: &LabelledFormula) -> Result<(), Halt> {
        let exts = saturate(rule, item, &self.branches[b].structure)
            .map_err(|e| Halt::Failed(e.to_string()))?;
        if rule != RuleId::NuRhd {
            let items = exts
                .into_iter()
                .flat_map(|e| e.forks.into_iter().flatten())
                .collect();
            self.append(b, items);
            return Ok(());
        }
        // one split per related label, nested left to right
        let mut current = vec![b];
        for ext in exts {
            let mut next = Vec::with_capacity(current.len() * 2);
            for &cb in &current {
                if self.branches[cb].closed.is_some() {
                    next.push(cb);
                    continue;
                }
                let [left, right]: [Vec<LabelledFormula>; 2] =
                    ext.forks.clone().try_into().expect("ν▷ splits in two");
                next.push(cb);
                if let Some(rb) = self.split(cb, left, right) {
                    next.push(rb);
                }
            }
            current = next;
        }
        Ok(())
    }

    fn expand_pi(&mut self, b: usize, rule: RuleId, item: &LabelledFormula) -> Result<(), Halt> {
        if self.branches[b].structure.len() >= self.max_labels {
            return Err(Halt::LabelBound);
        }
        let structure = &self.branches[b].structure;
        let n =
            least_fresh_index(rule, item, structure).map_err(|e| Halt::Failed(e.to_string()))?;
        let ext = apply_rule(rule, item, structure, &RuleTarget::Fresh(n))
            .map_err(|e| Halt::Failed(e.to_string()))?;
        let new = ext.fresh.clone().expect("π-rules create a label");
        let delta = self.branches[b]
            .structure
            .insert_label(new)
            .map_err(|e| Halt::Failed(e.to_string()))?;
        self.extend(b, ext.forks);
        self.reawaken(b, &delta);
        Ok(())
    }

    /// Wakes the asleep ν-nodes of branch `b` that gained related labels.
    fn reawaken(&mut self, b: usize, delta: &Delta) {
        if delta.is_empty() {
            return;
        }
        let r_sources: HashSet<&Label> = delta.r.iter().map(|(a, _)| a).collect();
        let s_sources: HashSet<(&Label, &Label)> =
            delta.s.iter().map(|(rho, a, _)| (rho, a)).collect();
        let mut wake = Vec::new();
        for n in self.path(self.branches[b].leaf) {
            let node = &self.nodes[n];
            if node.mark != Mark::Asleep {
                continue;
            }
            let sigma = &node.item.label;
            let hit = match &node.item.formula {
                Formula::Boxed(_) | Formula::Rhd(..) => r_sources.contains(sigma),
                Formula::BoxAt(rho, _) => s_sources.contains(&(rho, sigma)),
                _ => false,
            };
            if hit {
                wake.push(n);
            }
        }
        for n in wake {
            self.set_mark(n, Mark::Awake);
        }
    }

    /// Indented text dump. A fork head is prefixed with `- `; closed
    /// branches end in `✗`.
    pub fn render_text(&self) -> String {
        let closed_leaves: HashSet<NodeId> = self
            .branches
            .iter()
            .filter(|b| b.closed.is_some())
            .map(|b| b.leaf)
            .collect();
        let mut out = String::new();
        let mut stack: Vec<(NodeId, usize, bool)> = vec![(0, 0, false)];
        while let Some((n, indent, fork_head)) = stack.pop() {
            let node = &self.nodes[n];
            let pad = " ".repeat(indent);
            let bullet = if fork_head { "- " } else { "" };
            write!(out, "{pad}{bullet}{} [{}]", node.item, node.mark).unwrap();
            if closed_leaves.contains(&n) {
                out.push_str(" ✗");
            }
            out.push('\n');
            let inner = if fork_head { indent + 2 } else { indent };
            match node.children.as_slice() {
                [] => {}
                [only] => stack.push((*only, inner, false)),
                kids => {
                    for &k in kids.iter().rev() {
                        stack.push((k, inner + 2, true));
                    }
                }
            }
        }
        out
    }

    /// Graphviz digraph of the tree.
    pub fn render_dot(&self) -> String {
        let mut out =
            String::from("digraph tableau {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let text = escape_dot(&format!("{}\\n[{}]", node.item, node.mark));
            writeln!(out, "  n{i} [label=\"{text}\"];").unwrap();
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                writeln!(out, "  n{i} -> n{c};").unwrap();
            }
        }
        for (k, b) in self.branches.iter().enumerate() {
            if let Some((stage, a, z)) = b.closed {
                writeln!(
                    out,
                    "  x{k} [label=\"✗ (stage {stage})\", shape=plaintext];"
                )
                .unwrap();
                writeln!(out, "  n{} -> x{k} [style=dashed];", b.leaf).unwrap();
                writeln!(
                    out,
                    "  n{a} -> n{z} [style=dotted, color=red, constraint=false];"
                )
                .unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape_dot(s: &str) -> String {
    // `\n` sequences in the input are kept as DOT line breaks
    s.replace('"', "\\\"")
}

// ---------------------------------------------------------------------------
// Running

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Verdict {
    /// every branch closed: the input set is unsatisfiable
    Closed,
    /// a saturated open branch and the model read off it
    Open {
        branch: Branch,
        model: Model,
    },
    /// a bound tripped before the procedure settled
    Exhausted,
    Unsupported(String),
}

impl Verdict {
    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Closed => "closed",
            Verdict::Open { .. } => "open",
            Verdict::Exhausted => "exhausted",
            Verdict::Unsupported(_) => "unsupported",
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Verdict::Closed)
    }

    pub fn is_open(&self) -> bool {
        matches!(self, Verdict::Open { .. })
    }
}

#[derive(Debug, Clone)]
pub struct ProverResult {
    pub verdict: Verdict,
    pub tableau: Tableau,
    pub stages: usize,
    /// `max_open_labels` after every stage
    pub label_trace: Vec<usize>,
}

impl ProverResult {
    pub fn model(&self) -> Option<&Model> {
        match &self.verdict {
            Verdict::Open { model, .. } => Some(model),
            _ => None,
        }
    }
}

/// Runs the systematic procedure on `gamma` until it closes, saturates
/// an open branch, or trips a bound.
pub fn run(
    gamma: &[Formula],
    condition: &FrameCondition,
    bounds: Bounds,
) -> Result<ProverResult, TableauError> {
    let mut t = Tableau::with_label_bound(gamma, condition, bounds.max_labels_per_branch)?;
    let mut trace = Vec::new();
    let finish = |verdict, tableau: Tableau, trace| {
        let stages = tableau.stage();
        Ok(ProverResult {
            verdict,
            tableau,
            stages,
            label_trace: trace,
        })
    };
    loop {
        if t.is_closed() {
            return finish(Verdict::Closed, t, trace);
        }
        if t.stage() >= bounds.max_stages || t.open_branch_count() > bounds.max_branches {
            return finish(Verdict::Exhausted, t, trace);
        }
        match t.step() {
            StepStatus::Stepped { .. } => {
                trace.push(t.max_open_labels());
                if t.is_closed() {
                    continue;
                }
                if let Some(branch) = t.saturated_open_branch() {
                    let verdict = match extract_model(&branch) {
                        Ok(model) => Verdict::Open { branch, model },
                        Err(e) => Verdict::Unsupported(format!("countermodel check failed: {e}")),
                    };
                    return finish(verdict, t, trace);
                }
            }
            StepStatus::LabelBound => return finish(Verdict::Exhausted, t, trace),
            StepStatus::Failed(reason) => return finish(Verdict::Unsupported(reason), t, trace),
            StepStatus::Idle => {
                let branch = t.first_open_branch().expect("an open branch remains");
                if branch.structure.has_r_cycle() {
                    let reason =
                        "the open branch has a cyclic R; no countermodel is extracted".to_string();
                    return finish(Verdict::Unsupported(reason), t, trace);
                }
                let verdict = match extract_model(&branch) {
                    Ok(model) => Verdict::Open { branch, model },
                    Err(e) => Verdict::Unsupported(format!("countermodel check failed: {e}")),
                };
                return finish(verdict, t, trace);
            }
        }
    }
}

/// `a` is provable iff the tableau for `{¬a}` closes.
pub fn prove(
    a: &Formula,
    condition: &FrameCondition,
    bounds: Bounds,
) -> Result<ProverResult, TableauError> {
    run(&[Formula::neg(a.clone())], condition, bounds)
}

/// The JSON result record.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord<'a> {
    pub status: &'static str,
    pub stages: usize,
    pub labels: usize,
    pub formula: String,
    pub logic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<&'a Model>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<&'a str>,
}

impl ProverResult {
    pub fn record(&self, formula: impl Into<String>, logic: impl Into<String>) -> ResultRecord<'_> {
        ResultRecord {
            status: self.verdict.status(),
            stages: self.stages,
            labels: self.tableau.max_labels(),
            formula: formula.into(),
            logic: logic.into(),
            countermodel: self.model(),
            reason: match &self.verdict {
                Verdict::Unsupported(r) => Some(r),
                _ => None,
            },
        }
    }
}
