//! Independent oracles shared by the integration tests. Nothing here calls
//! into the closure engine, the tableau or the library evaluator.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use iltab::frame::Atom;
use iltab::label::Segment;
use iltab::{Formula, FrameCondition, HornClause, Label, Model};
use rand::Rng;

pub type RSet = BTreeSet<(Label, Label)>;
pub type SSet = BTreeSet<(Label, Label, Label)>;

/// Least relations on `lambda` by plain fixpoint iteration: every round
/// re-applies every law over all tuples until nothing
/// changes.
pub fn naive_close(lambda: &[Label], cond: &FrameCondition) -> (RSet, SSet) {
    let labels: Vec<Label> = lambda
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = labels.len();
    let mut r = vec![vec![false; n]; n];
    let mut s = vec![vec![vec![false; n]; n]; n];
    let index = |l: &Label| labels.iter().position(|m| m == l);

    // Seeds read off the label syntax.
    for (i, l) in labels.iter().enumerate() {
        if l.is_root() {
            continue;
        }
        let parent = index(&l.parent().unwrap());
        match l.last() {
            Segment::R(_) => {
                if let Some(p) = parent {
                    r[p][i] = true;
                }
            }
            Segment::S { base_len, .. } => {
                if let (Some(p), Some(b)) = (parent, index(&l.prefix(base_len))) {
                    s[b][p][i] = true;
                }
            }
            Segment::Root => unreachable!(),
        }
    }

    loop {
        let mut changed = false;
        // R is transitive.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if r[a][b] && r[b][c] {
                        set_r(&mut r, &mut changed, a, c);
                    }
                }
            }
        }
        // S_x relates R-successors of x.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if s[a][b][c] {
                        set_r(&mut r, &mut changed, a, b);
                        set_r(&mut r, &mut changed, a, c);
                    }
                }
            }
        }
        // xRy gives y S_x y, and xRyRz gives y S_x z.
        for a in 0..n {
            for b in 0..n {
                if r[a][b] {
                    set_s(&mut s, &mut changed, a, b, b);
                    for c in 0..n {
                        if r[b][c] {
                            set_s(&mut s, &mut changed, a, b, c);
                        }
                    }
                }
            }
        }
        // Each S_x is transitive.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if !s[a][b][c] {
                        continue;
                    }
                    for d in 0..n {
                        if s[a][c][d] {
                            set_s(&mut s, &mut changed, a, b, d);
                        }
                    }
                }
            }
        }
        // The frame condition, under every assignment.
        for clause in cond.clauses() {
            for asg in assignments(clause.vars().len(), n) {
                if body_holds(clause, &asg, &r, &s) {
                    match clause.head() {
                        Atom::R(x, y) => set_r(&mut r, &mut changed, asg[x], asg[y]),
                        Atom::S(x, y, z) => set_s(&mut s, &mut changed, asg[x], asg[y], asg[z]),
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut rs = RSet::new();
    let mut ss = SSet::new();
    for a in 0..n {
        for b in 0..n {
            if r[a][b] {
                rs.insert((labels[a].clone(), labels[b].clone()));
            }
            for c in 0..n {
                if s[a][b][c] {
                    ss.insert((labels[a].clone(), labels[b].clone(), labels[c].clone()));
                }
            }
        }
    }
    (rs, ss)
}

fn set_r(r: &mut [Vec<bool>], changed: &mut bool, a: usize, b: usize) {
    *changed |= !std::mem::replace(&mut r[a][b], true);
}

fn set_s(s: &mut [Vec<Vec<bool>>], changed: &mut bool, a: usize, b: usize, c: usize) {
    *changed |= !std::mem::replace(&mut s[a][b][c], true);
}

fn assignments(vars: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

fn body_holds(clause: &HornClause, asg: &[usize], r: &[Vec<bool>], s: &[Vec<Vec<bool>>]) -> bool {
    clause.body().iter().all(|atom| match *atom {
        Atom::R(x, y) => r[asg[x]][asg[y]],
        Atom::S(x, y, z) => s[asg[x]][asg[y]][asg[z]],
    })
}

/// Checks that `(r, s)` over `lambda` obeys every law of a label
/// structure. Leastness is not checked here.
pub fn check_structure_items(
    lambda: &[Label],
    r: &RSet,
    s: &SSet,
    cond: &FrameCondition,
) -> Result<(), String> {
    let set: BTreeSet<&Label> = lambda.iter().collect();
    let has_r = |a: &Label, b: &Label| r.contains(&(a.clone(), b.clone()));
    let has_s = |a: &Label, b: &Label, c: &Label| s.contains(&(a.clone(), b.clone(), c.clone()));
    for (a, b) in r {
        if !set.contains(a) || !set.contains(b) {
            return Err(format!("R({a}, {b}) leaves the label set"));
        }
    }
    for (a, b, c) in s {
        if !set.contains(a) || !set.contains(b) || !set.contains(c) {
            return Err(format!("S({a}; {b}, {c}) leaves the label set"));
        }
    }
    for l in lambda {
        if l.is_root() {
            continue;
        }
        let parent = l.parent().unwrap();
        if !set.contains(&parent) {
            continue;
        }
        match l.last() {
            Segment::R(_) if !has_r(&parent, l) => {
                return Err(format!("R-step seed missing for {l}"))
            }
            Segment::S { base_len, .. } => {
                let base = l.prefix(base_len);
                if set.contains(&base) && !has_s(&base, &parent, l) {
                    return Err(format!("S-step seed missing for {l}"));
                }
            }
            _ => {}
        }
    }
    for (a, b) in r {
        if !has_s(a, b, b) {
            return Err(format!("S reflexivity fails for R({a}, {b})"));
        }
        for (c, d) in r {
            if c == b {
                if !has_r(a, d) {
                    return Err(format!("R transitivity fails for R({a}, {b}), R({b}, {d})"));
                }
                if !has_s(a, b, d) {
                    return Err(format!("R-chain into S fails for R({a}, {b}), R({b}, {d})"));
                }
            }
        }
    }
    for (a, b, c) in s {
        if !has_r(a, b) || !has_r(a, c) {
            return Err(format!("S outside R at S({a}; {b}, {c})"));
        }
        for (d, e, f) in s {
            if d == a && e == c && !has_s(a, b, f) {
                return Err(format!(
                    "S transitivity fails for S({a}; {b}, {c}), S({a}; {c}, {f})"
                ));
            }
        }
    }
    let labels: Vec<&Label> = set.into_iter().collect();
    let n = labels.len();
    for clause in cond.clauses() {
        for asg in assignments(clause.vars().len(), n) {
            let holds = |atom: &Atom| match *atom {
                Atom::R(x, y) => has_r(labels[asg[x]], labels[asg[y]]),
                Atom::S(x, y, z) => has_s(labels[asg[x]], labels[asg[y]], labels[asg[z]]),
            };
            if clause.body().iter().all(holds) && !holds(&clause.head()) {
                return Err(format!("condition clause `{clause}` fails"));
            }
        }
    }
    Ok(())
}

/// A random label set of at most `max` labels. Labels are grown from the
/// root, and afterwards some non-root labels may be dropped so that the set
/// need not be prefix closed.
pub fn random_label_set(rng: &mut impl Rng, max: usize) -> Vec<Label> {
    let target = rng.gen_range(1..=max);
    let mut labels = vec![Label::root()];
    while labels.len() < target {
        let parent = labels[rng.gen_range(0..labels.len())].clone();
        let n = rng.gen_range(0..3);
        let child = if parent.is_root() || rng.gen_bool(0.5) {
            parent.extend_r(n)
        } else {
            let base = parent.prefix(rng.gen_range(1..parent.len()));
            parent.extend_s(&base, n).expect("base is a strict prefix")
        };
        if !labels.contains(&child) {
            labels.push(child);
        }
    }
    let mut kept: Vec<Label> = labels
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i == 0 || !rng.gen_bool(0.15))
        .map(|(_, l)| l)
        .collect();
    kept.sort();
    kept
}

/// A random Horn condition of one or two clauses over four variables.
/// Atoms never repeat a variable in a position that an acyclic frame
/// makes vacuous, heads are range restricted, and no head repeats a body
/// atom.
pub fn random_condition(rng: &mut impl Rng, name: &str) -> FrameCondition {
    let vars: Vec<String> = ["x", "y", "z", "u"].iter().map(|s| s.to_string()).collect();
    let wanted = rng.gen_range(1..=2);
    let mut clauses = Vec::new();
    while clauses.len() < wanted {
        let body: Vec<Atom> = (0..rng.gen_range(1..=3))
            .map(|_| random_atom(rng))
            .collect();
        let head = random_atom(rng);
        if body.contains(&head) {
            continue;
        }
        if let Some(c) = HornClause::new(vars.clone(), body, head) {
            clauses.push(c);
        }
    }
    FrameCondition::new(name, clauses)
}

fn random_atom(rng: &mut impl Rng) -> Atom {
    let v = rand::seq::index::sample(rng, 4, 3).into_vec();
    if rng.gen_bool(0.5) {
        Atom::R(v[0], v[1])
    } else if rng.gen_bool(0.8) {
        Atom::S(v[0], v[1], v[2])
    } else {
        Atom::S(v[0], v[1], v[1])
    }
}

/// True iff the relation has a cycle, found by depth-first search.
pub fn has_cycle(r: &RSet) -> bool {
    let mut succ: BTreeMap<&Label, Vec<&Label>> = BTreeMap::new();
    for (a, b) in r {
        succ.entry(a).or_default().push(b);
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let mut colour: BTreeMap<&Label, Colour> = BTreeMap::new();
    fn visit<'a>(
        n: &'a Label,
        succ: &BTreeMap<&'a Label, Vec<&'a Label>>,
        colour: &mut BTreeMap<&'a Label, Colour>,
    ) -> bool {
        colour.insert(n, Colour::Grey);
        for &m in succ.get(n).map_or(&[][..], Vec::as_slice) {
            match colour.get(m).copied().unwrap_or(Colour::White) {
                Colour::Grey => return true,
                Colour::White if visit(m, succ, colour) => return true,
                _ => {}
            }
        }
        colour.insert(n, Colour::Black);
        false
    }
    let nodes: Vec<&Label> = succ.keys().copied().collect();
    for n in nodes {
        if colour.get(n).copied().unwrap_or(Colour::White) == Colour::White
            && visit(n, &succ, &mut colour)
        {
            return true;
        }
    }
    false
}

/// Forcing computed straight from the relation sets of the model, by
/// scanning every world. `interp` resolves the bases of `[_σ]`.
pub fn force(m: &Model, w: usize, f: &Formula, interp: &BTreeMap<Label, usize>) -> bool {
    let worlds = 0..m.len();
    match f {
        Formula::Var(p) => m.valuation().get(p).is_some_and(|ws| ws.contains(&w)),
        Formula::Neg(a) => !force(m, w, a, interp),
        Formula::Imp(a, b) => !force(m, w, a, interp) || force(m, w, b, interp),
        Formula::Boxed(a) => worlds
            .filter(|&y| m.r().contains(&(w, y)))
            .all(|y| force(m, y, a, interp)),
        Formula::Rhd(a, b) => worlds
            .clone()
            .filter(|&y| m.r().contains(&(w, y)))
            .all(|y| {
                !force(m, y, a, interp)
                    || worlds
                        .clone()
                        .any(|z| m.s().contains(&(w, y, z)) && force(m, z, b, interp))
            }),
        Formula::BoxAt(l, a) => {
            let x = interp[l];
            worlds
                .filter(|&z| m.s().contains(&(x, w, z)))
                .all(|z| force(m, z, a, interp))
        }
    }
}

/// Light syntax check for the DOT output: a single digraph block whose
/// statements all end in `;`.
pub fn is_valid_dot(text: &str) -> bool {
    let text = text.trim();
    if !text.starts_with("digraph") || !text.ends_with('}') {
        return false;
    }
    let Some(open) = text.find('{') else {
        return false;
    };
    let body = &text[open + 1..text.len() - 1];
    let mut depth = 0i32;
    let mut in_str = false;
    let mut prev = ' ';
    for c in body.chars() {
        match c {
            '"' if prev != '\\' => in_str = !in_str,
            '[' if !in_str => depth += 1,
            ']' if !in_str => depth -= 1,
            '{' | '}' if !in_str => return false,
            _ => {}
        }
        if depth < 0 {
            return false;
        }
        prev = c;
    }
    depth == 0
        && !in_str
        && body
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .all(|l| l.ends_with(';'))
}

/// Formulas over `p`, `q`, `r` built from the primitive connectives.
pub fn formula_strategy() -> impl proptest::strategy::Strategy<Value = Formula> {
    use proptest::prelude::*;
    let leaf = prop_oneof![Just("p"), Just("q"), Just("r")].prop_map(Formula::var);
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            inner.clone().prop_map(Formula::boxed),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::rhd(a, b)),
        ]
    })
}
