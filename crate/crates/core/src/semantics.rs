//! Finite Veltman models and everything that evaluates formulas on them:
//! forcing, frame-condition checks, random model generation, Hintikka
//! checking of tableau branches and countermodel extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::frame::{Atom, FrameCondition, HornClause};
use crate::horn::{frame_laws, Fact, Relations};
use crate::label::Label;
use crate::structure::LabelStructure;
use crate::tableau::{Branch, LabelledFormula};

/// World index into [`Model::worlds`].
pub type World = usize;

/// Assigns worlds to the labels that occur as `□_σ` bases.
pub type Interpretation = BTreeMap<Label, World>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate world name `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("world index {0} out of range")]
    WorldOutOfRange(World),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("random models support 1 to 8 worlds, got {0}")]
    Size(usize),
    #[error("could not generate an acyclic frame for the condition after {0} attempts")]
    Cyclic(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no world named after label `{0}`")]
    UnresolvedBase(Label),
    #[error("world index {0} out of range")]
    NoSuchWorld(World),
}

/// A finite model `⟨W, R, S, V⟩`. Worlds are opaque names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    worlds: Vec<String>,
    index: HashMap<String, World>,
    r: BTreeSet<(World, World)>,
    s: BTreeSet<(World, World, World)>,
    valuation: BTreeMap<String, BTreeSet<World>>,
    r_succ: Vec<Vec<World>>,
    s_succ: HashMap<(World, World), Vec<World>>,
}

impl Model {
    pub fn new(
        worlds: Vec<String>,
        r: impl IntoIterator<Item = (World, World)>,
        s: impl IntoIterator<Item = (World, World, World)>,
        valuation: BTreeMap<String, BTreeSet<World>>,
    ) -> Result<Model, ModelError> {
        let mut index = HashMap::new();
        for (i, w) in worlds.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let n = worlds.len();
        let check = |w: World| {
            if w < n {
                Ok(())
            } else {
                Err(ModelError::WorldOutOfRange(w))
            }
        };
        let r: BTreeSet<_> = r.into_iter().collect();
        let s: BTreeSet<_> = s.into_iter().collect();
        for &(a, b) in &r {
            check(a)?;
            check(b)?;
        }
        for &(a, b, c) in &s {
            check(a)?;
            check(b)?;
            check(c)?;
        }
        for &w in valuation.values().flatten() {
            check(w)?;
        }
        let mut r_succ = vec![Vec::new(); n];
        for &(a, b) in &r {
            r_succ[a].push(b);
        }
        let mut s_succ: HashMap<_, Vec<_>> = HashMap::new();
        for &(x, y, z) in &s {
            s_succ.entry((x, y)).or_default().push(z);
        }
        Ok(Model {
            worlds,
            index,
            r,
            s,
            valuation,
            r_succ,
            s_succ,
        })
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world(&self, name: &str) -> Option<World> {
        self.index.get(name).copied()
    }

    pub fn r(&self) -> &BTreeSet<(World, World)> {
        &self.r
    }

    /// Triples `(x, y, z)` meaning `y S_x z`.
    pub fn s(&self) -> &BTreeSet<(World, World, World)> {
        &self.s
    }

    pub fn valuation(&self) -> &BTreeMap<String, BTreeSet<World>> {
        &self.valuation
    }

    pub fn r_successors(&self, x: World) -> &[World] {
        &self.r_succ[x]
    }

    /// All `z` with `y S_x z`.
    pub fn s_successors(&self, x: World, y: World) -> &[World] {
        self.s_succ.get(&(x, y)).map_or(&[], Vec::as_slice)
    }

    /// Same frame, new valuation.
    pub fn with_valuation(
        &self,
        valuation: BTreeMap<String, BTreeSet<World>>,
    ) -> Result<Model, ModelError> {
        Model::new(
            self.worlds.clone(),
            self.r.clone(),
            self.s.clone(),
            valuation,
        )
    }

    /// Forcing. `□_σ` bases are resolved through `interp` when given, and
    /// otherwise by looking up a world whose name is the label itself.
    pub fn eval(
        &self,
        w: World,
        f: &Formula,
        interp: Option<&Interpretation>,
    ) -> Result<bool, EvalError> {
        if w >= self.len() {
            return Err(EvalError::NoSuchWorld(w));
        }
        Ok(match f {
            Formula::Var(p) => self.valuation.get(p).is_some_and(|ws| ws.contains(&w)),
            Formula::Neg(a) => !self.eval(w, a, interp)?,
            Formula::Imp(a, b) => !self.eval(w, a, interp)? || self.eval(w, b, interp)?,
            Formula::Boxed(a) => {
                for &y in self.r_successors(w) {
                    if !self.eval(y, a, interp)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Rhd(a, b) => {
                for &y in self.r_successors(w) {
                    if !self.eval(y, a, interp)? {
                        continue;
                    }
                    let mut found = false;
                    for &z in self.s_successors(w, y) {
                        if self.eval(z, b, interp)? {
                            found = true;
                            break;
                        }
                    }
                    if !found {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::BoxAt(label, a) => {
                let x = match interp {
                    Some(i) => i.get(label).copied(),
                    None => self.world(&label.to_string()),
                }
                .ok_or_else(|| EvalError::UnresolvedBase(label.clone()))?;
                for &z in self.s_successors(x, w) {
                    if !self.eval(z, a, interp)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }

    /// True iff `f` holds at every world.
    pub fn validates(&self, f: &Formula) -> Result<bool, EvalError> {
        for w in 0..self.len() {
            if !self.eval(w, f, None)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Checks the Veltman frame laws: R transitive and acyclic, each `S_x`
    /// a reflexive transitive relation on the R-successors of `x`, and
    /// `xRyRz ⇒ y S_x z`.
    pub fn check_invariants(&self) -> Result<(), String> {
        let name = |w: World| &self.worlds[w];
        for &(a, b) in &self.r {
            if a == b {
                return Err(format!("R is reflexive at {}", name(a)));
            }
            for &c in self.r_successors(b) {
                if !self.r.contains(&(a, c)) {
                    return Err(format!(
                        "R not transitive: {} {} {}",
                        name(a),
                        name(b),
                        name(c)
                    ));
                }
                if !self.s.contains(&(a, b, c)) {
                    return Err(format!("missing {} S_{} {}", name(b), name(a), name(c)));
                }
            }
            if !self.s.contains(&(a, b, b)) {
                return Err(format!("S_{} not reflexive at {}", name(a), name(b)));
            }
        }
        for &(x, y, z) in &self.s {
            if !self.r.contains(&(x, y)) || !self.r.contains(&(x, z)) {
                return Err(format!(
                    "{} S_{} {} leaves the R-successors of {}",
                    name(y),
                    name(x),
                    name(z),
                    name(x)
                ));
            }
            for &u in self.s_successors(x, z) {
                if !self.s.contains(&(x, y, u)) {
                    return Err(format!(
                        "S_{} not transitive at {} {} {}",
                        name(x),
                        name(y),
                        name(z),
                        name(u)
                    ));
                }
            }
        }
        // transitive + irreflexive already rules out cycles
        Ok(())
    }

    fn holds(&self, fact: Fact) -> bool {
        match fact {
            Fact::R(a, b) => self.r.contains(&(a as World, b as World)),
            Fact::S(a, b, c) => self.s.contains(&(a as World, b as World, c as World)),
        }
    }

    /// Writes the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "worlds: {}", self.worlds.join(" ")).unwrap();
        let name = |w: World| &self.worlds[w];
        for &(a, b) in &self.r {
            writeln!(out, "R: {} {}", name(a), name(b)).unwrap();
        }
        for &(x, y, z) in &self.s {
            writeln!(out, "S: {}; {} {}", name(x), name(y), name(z)).unwrap();
        }
        for (p, ws) in &self.valuation {
            out.push_str("V ");
            out.push_str(p);
            out.push(':');
            for &w in ws {
                out.push(' ');
                out.push_str(name(w));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the format written by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Model, ModelError> {
        let mut worlds: Option<Vec<String>> = None;
        let mut index = HashMap::new();
        let mut r = Vec::new();
        let mut s = Vec::new();
        let mut valuation = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            let syntax = |msg: &str| ModelError::Syntax {
                line: lineno,
                msg: msg.to_string(),
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| syntax("expected `key: ...`"))?;
            let key = key.trim();
            if key == "worlds" {
                if worlds.is_some() {
                    return Err(syntax("duplicate `worlds` line"));
                }
                let ws: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                for (j, w) in ws.iter().enumerate() {
                    if index.insert(w.clone(), j).is_some() {
                        return Err(ModelError::DuplicateWorld(w.clone()));
                    }
                }
                worlds = Some(ws);
                continue;
            }
            if worlds.is_none() {
                return Err(syntax("`worlds` must come first"));
            }
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| ModelError::UnknownWorld(name.to_string()))
            };
            match key {
                "R" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    let [a, b] = parts[..] else {
                        return Err(syntax("`R:` takes two worlds"));
                    };
                    r.push((lookup(a)?, lookup(b)?));
                }
                "S" => {
                    let (base, pair) = rest
                        .split_once(';')
                        .ok_or_else(|| syntax("`S:` needs `x; y z`"))?;
                    let parts: Vec<&str> = pair.split_whitespace().collect();
                    let [y, z] = parts[..] else {
                        return Err(syntax("`S:` needs `x; y z`"));
                    };
                    s.push((lookup(base.trim())?, lookup(y)?, lookup(z)?));
                }
                _ => {
                    let var = key
                        .strip_prefix("V ")
                        .map(str::trim)
                        .filter(|v| !v.is_empty())
                        .ok_or_else(|| syntax("unknown line kind"))?;
                    let set: BTreeSet<World> = rest
                        .split_whitespace()
                        .map(lookup)
                        .collect::<Result<_, _>>()?;
                    valuation.insert(var.to_string(), set);
                }
            }
        }
        let worlds = worlds.ok_or(ModelError::Syntax {
            line: 0,
            msg: "missing `worlds` line".into(),
        })?;
        Model::new(worlds, r, s, valuation)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// JSON form with the same field names as the text format.
impl Serialize for Model {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let name = |w: &World| self.worlds[*w].clone();
        let r: Vec<[String; 2]> = self.r.iter().map(|(a, b)| [name(a), name(b)]).collect();
        let s: Vec<[String; 3]> = self
            .s
            .iter()
            .map(|(x, y, z)| [name(x), name(y), name(z)])
            .collect();
        let v: BTreeMap<&String, Vec<String>> = self
            .valuation
            .iter()
            .map(|(p, ws)| (p, ws.iter().map(name).collect()))
            .collect();
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("worlds", &self.worlds)?;
        map.serialize_entry("R", &r)?;
        map.serialize_entry("S", &s)?;
        map.serialize_entry("V", &v)?;
        map.end()
    }
}

// ---------------------------------------------------------------------------
// Frame conditions

/// A clause instance that fails in a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameViolation {
    pub clause: String,
    /// `(variable, world name)` in clause variable order.
    pub assignment: Vec<(String, String)>,
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` fails for ", self.clause)?;
        for (i, (v, w)) in self.assignment.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}={w}")?;
        }
        Ok(())
    }
}

/// Checks every clause under every assignment of worlds to its variables.
pub fn check_frame(m: &Model, condition: &FrameCondition) -> Result<(), FrameViolation> {
    for clause in condition.clauses() {
        let mut binding = vec![None; clause.vars().len()];
        if let Some(bad) = find_violation(m, clause, 0, &mut binding) {
            return Err(FrameViolation {
                clause: clause.to_string(),
                assignment: clause
                    .vars()
                    .iter()
                    .zip(bad)
                    .map(|(v, w)| (v.clone(), m.worlds[w].clone()))
                    .collect(),
            });
        }
    }
    Ok(())
}

fn find_violation(
    m: &Model,
    clause: &HornClause,
    i: usize,
    binding: &mut Vec<Option<World>>,
) -> Option<Vec<World>> {
    if i == clause.body().len() {
        let get = |v: usize| binding[v].unwrap() as u32;
        let head = match clause.head() {
            Atom::R(a, b) => Fact::R(get(a), get(b)),
            Atom::S(a, b, c) => Fact::S(get(a), get(b), get(c)),
        };
        return (!m.holds(head)).then(|| binding.iter().map(|w| w.unwrap()).collect());
    }
    let atom = clause.body()[i];
    let tuples: Vec<Vec<World>> = match atom {
        Atom::R(..) => m.r.iter().map(|&(a, b)| vec![a, b]).collect(),
        Atom::S(..) => m.s.iter().map(|&(a, b, c)| vec![a, b, c]).collect(),
    };
    for tuple in tuples {
        let saved = binding.clone();
        let fits = atom
            .vars()
            .iter()
            .zip(&tuple)
            .all(|(&v, &w)| match binding[v] {
                Some(b) => b == w,
                None => {
                    binding[v] = Some(w);
                    true
                }
            });
        if fits {
            if let Some(found) = find_violation(m, clause, i + 1, binding) {
                return Some(found);
            }
        }
        *binding = saved;
    }
    None
}

// ---------------------------------------------------------------------------
// Random models

const RANDOM_ATTEMPTS: usize = 64;
const DEFAULT_VARS: [&str; 4] = ["p", "q", "r", "s"];

/// Random model over the variables `p q r s`; see [`random_model_with_vars`].
pub fn random_model(
    n_worlds: usize,
    condition: &FrameCondition,
    seed: u64,
) -> Result<Model, ModelError> {
    let vars: Vec<String> = DEFAULT_VARS.iter().map(|s| s.to_string()).collect();
    random_model_with_vars(n_worlds, condition, seed, &vars)
}

/// Deterministic per seed. R is a random strict order along a shuffled
/// ordering of the worlds, S gets the forced pairs plus random extra pairs
/// among R-successors, and the result is closed under the frame laws and
/// `condition`. Draws that close into an R-cycle are retried with fewer
/// extra pairs; the last attempt adds none.
pub fn random_model_with_vars(
    n_worlds: usize,
    condition: &FrameCondition,
    seed: u64,
    vars: &[String],
) -> Result<Model, ModelError> {
    if n_worlds == 0 || n_worlds > 8 {
        return Err(ModelError::Size(n_worlds));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rules = frame_laws();
    rules.extend(condition.clauses().iter().cloned());
    for attempt in 0..RANDOM_ATTEMPTS {
        let extra_p = if attempt + 1 == RANDOM_ATTEMPTS {
            0.0
        } else {
            0.3 / (1 + attempt) as f64
        };
        let mut order: Vec<u32> = (0..n_worlds as u32).collect();
        order.shuffle(&mut rng);
        let edge_p = rng.gen_range(0.2..0.8);
        let mut seeds = Vec::new();
        for i in 0..n_worlds {
            for j in i + 1..n_worlds {
                if rng.gen_bool(edge_p) {
                    seeds.push(Fact::R(order[i], order[j]));
                }
            }
        }
        let mut rel = Relations::new();
        rel.saturate(&rules, seeds);
        let mut extras = Vec::new();
        for x in 0..n_worlds as u32 {
            let mut succ = rel.r_successors(x).to_vec();
            succ.sort_unstable();
            for &y in &succ {
                for &z in &succ {
                    if y != z && rng.gen_bool(extra_p) {
                        extras.push(Fact::S(x, y, z));
                    }
                }
            }
        }
        rel.saturate(&rules, extras);
        if rel.r_pairs().any(|(a, b)| a == b) {
            continue;
        }
        let worlds = (0..n_worlds).map(|i| format!("w{i}")).collect();
        let r: Vec<_> = rel
            .r_pairs()
            .map(|(a, b)| (a as World, b as World))
            .collect();
        let s: Vec<_> = rel
            .s_triples()
            .map(|(a, b, c)| (a as World, b as World, c as World))
            .collect();
        let valuation = random_valuation(&mut rng, n_worlds, vars);
        return Model::new(worlds, r, s, valuation);
    }
    Err(ModelError::Cyclic(RANDOM_ATTEMPTS))
}

pub fn random_valuation(
    rng: &mut impl Rng,
    n_worlds: usize,
    vars: &[String],
) -> BTreeMap<String, BTreeSet<World>> {
    vars.iter()
        .map(|p| {
            let set = (0..n_worlds).filter(|_| rng.gen_bool(0.5)).collect();
            (p.clone(), set)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Hintikka sets and countermodels

/// The ten closure conditions a Hintikka set must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HintikkaClause {
    /// no `σ::A` together with `σ::¬A`
    Consistent,
    DoubleNeg,
    Imp,
    NegImp,
    Rhd,
    NegRhd,
    Box,
    NegBox,
    BoxAt,
    NegBoxAt,
}

impl HintikkaClause {
    pub fn numeral(self) -> &'static str {
        match self {
            HintikkaClause::Consistent => "i",
            HintikkaClause::DoubleNeg => "ii",
            HintikkaClause::Imp => "iii",
            HintikkaClause::NegImp => "iv",
            HintikkaClause::Rhd => "v",
            HintikkaClause::NegRhd => "vi",
            HintikkaClause::Box => "vii",
            HintikkaClause::NegBox => "viii",
            HintikkaClause::BoxAt => "ix",
            HintikkaClause::NegBoxAt => "x",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("Hintikka condition ({}) fails for `{item}`: {detail}", clause.numeral())]
pub struct HintikkaViolation {
    pub clause: HintikkaClause,
    pub item: LabelledFormula,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Hintikka(#[from] HintikkaViolation),
    #[error("label `{0}` occurs in a formula but not in the label structure")]
    StrayLabel(Label),
    #[error("the branch relation R has a cycle")]
    CyclicR,
    #[error("extracted model does not force `{0}`")]
    TruthLemma(LabelledFormula),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Checks the Hintikka conditions on a set of labelled formulas against its
/// label structure, returning the first failure.
pub fn verify_hintikka_set(
    items: &BTreeSet<LabelledFormula>,
    structure: &LabelStructure,
) -> Result<(), HintikkaViolation> {
    let has = |label: &Label, f: Formula| {
        items.contains(&LabelledFormula {
            label: label.clone(),
            formula: f,
        })
    };
    let neg = |f: &Formula| Formula::neg(f.clone());
    for item in items {
        let sigma = &item.label;
        let fail = |clause, detail: String| {
            Err(HintikkaViolation {
                clause,
                item: item.clone(),
                detail,
            })
        };
        if has(sigma, neg(&item.formula)) {
            return fail(HintikkaClause::Consistent, "its negation is present".into());
        }
        match &item.formula {
            Formula::Var(_) | Formula::Neg(..) if item.formula.is_literal() => {}
            Formula::Neg(inner) => match &**inner {
                Formula::Neg(a) => {
                    if !has(sigma, (**a).clone()) {
                        return fail(
                            HintikkaClause::DoubleNeg,
                            format!("missing `{sigma} :: {a}`"),
                        );
                    }
                }
                Formula::Imp(a, b) => {
                    if !has(sigma, (**a).clone()) || !has(sigma, neg(b)) {
                        return fail(HintikkaClause::NegImp, "a conjunct is missing".into());
                    }
                }
                Formula::Rhd(a, b) => {
                    let target = Formula::box_at(sigma.clone(), neg(b));
                    let ok = structure
                        .r_successors(sigma)
                        .iter()
                        .any(|tau| has(tau, (**a).clone()) && has(tau, target.clone()));
                    if !ok {
                        return fail(HintikkaClause::NegRhd, "no witnessing R-successor".into());
                    }
                }
                Formula::Boxed(a) => {
                    let ok = structure
                        .r_successors(sigma)
                        .iter()
                        .any(|tau| has(tau, neg(a)));
                    if !ok {
                        return fail(HintikkaClause::NegBox, "no witnessing R-successor".into());
                    }
                }
                Formula::BoxAt(rho, a) => {
                    let ok = structure
                        .s_successors(rho, sigma)
                        .iter()
                        .any(|tau| has(tau, neg(a)));
                    if !ok {
                        return fail(HintikkaClause::NegBoxAt, "no witnessing S-successor".into());
                    }
                }
                Formula::Var(_) => unreachable!(),
            },
            Formula::Imp(a, b) => {
                if !has(sigma, neg(a)) && !has(sigma, (**b).clone()) {
                    return fail(HintikkaClause::Imp, "neither disjunct is present".into());
                }
            }
            Formula::Rhd(a, b) => {
                let target = neg(&Formula::box_at(sigma.clone(), neg(b)));
                for tau in structure.r_successors(sigma) {
                    if !has(&tau, neg(a)) && !has(&tau, target.clone()) {
                        return fail(
                            HintikkaClause::Rhd,
                            format!("nothing at R-successor `{tau}`"),
                        );
                    }
                }
            }
            Formula::Boxed(a) => {
                for tau in structure.r_successors(sigma) {
                    if !has(&tau, (**a).clone()) {
                        return fail(HintikkaClause::Box, format!("missing `{tau} :: {a}`"));
                    }
                }
            }
            Formula::BoxAt(rho, a) => {
                for tau in structure.s_successors(rho, sigma) {
                    if !has(&tau, (**a).clone()) {
                        return fail(HintikkaClause::BoxAt, format!("missing `{tau} :: {a}`"));
                    }
                }
            }
            Formula::Var(_) => unreachable!(),
        }
    }
    Ok(())
}

pub fn verify_hintikka(branch: &Branch) -> Result<(), HintikkaViolation> {
    verify_hintikka_set(&branch.formula_set(), &branch.structure)
}

/// Reads a model off a Hintikka set: worlds are the labels, R and S come
/// from the label structure, and `V(p)` holds the labels `σ` with `σ::p`.
/// Every formula of the set is then re-evaluated at its own label.
pub fn extract_model_from(
    items: &BTreeSet<LabelledFormula>,
    structure: &LabelStructure,
) -> Result<Model, ExtractError> {
    for item in items {
        if !structure.contains(&item.label) {
            return Err(ExtractError::StrayLabel(item.label.clone()));
        }
    }
    verify_hintikka_set(items, structure)?;
    if structure.has_r_cycle() {
        return Err(ExtractError::CyclicR);
    }
    let labels = structure.labels();
    let id: HashMap<&Label, World> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let r = structure
        .r_pairs()
        .iter()
        .map(|(a, b)| (id[a], id[b]))
        .collect::<Vec<_>>();
    let s = structure
        .s_triples()
        .iter()
        .map(|(a, b, c)| (id[a], id[b], id[c]))
        .collect::<Vec<_>>();
    let mut valuation: BTreeMap<String, BTreeSet<World>> = BTreeMap::new();
    for item in items {
        for p in item.formula.variables() {
            valuation.entry(p).or_default();
        }
        if let Formula::Var(p) = &item.formula {
            valuation.get_mut(p).unwrap().insert(id[&item.label]);
        }
    }
    let worlds = labels.iter().map(Label::to_string).collect();
    let model = Model::new(worlds, r, s, valuation).expect("indices come from the structure");
    let identity: Interpretation = labels.iter().cloned().zip(0..).collect();
    for item in items {
        if !model.eval(id[&item.label], &item.formula, Some(&identity))? {
            return Err(ExtractError::TruthLemma(item.clone()));
        }
    }
    Ok(model)
}

pub fn extract_model(branch: &Branch) -> Result<Model, ExtractError> {
    extract_model_from(&branch.formula_set(), &branch.structure)
}
