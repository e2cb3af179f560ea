//! Semi-naive forward chaining for Horn clauses over a binary relation `R`
//! and a ternary relation `S` on integer-identified elements.
//!
//! Used both for label structures and for closing random frames.

use std::collections::{HashMap, HashSet};

use crate::frame::{parse_horn, Atom, HornClause};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fact {
    R(u32, u32),
    /// `S(base; from, to)`
    S(u32, u32, u32),
}

/// The laws every label structure and every frame obeys besides its own
/// condition: R is transitive, `xRy ⇒ y S_x y`, `xRyRz ⇒ y S_x z`, each
/// `S_x` is transitive, and `y S_x z ⇒ xRy ∧ xRz`.
pub fn frame_laws() -> Vec<HornClause> {
    const LAWS: &str = "\
R(x,y), R(y,z) -> R(x,z)
R(x,y) -> S(x;y,y)
R(x,y), R(y,z) -> S(x;y,z)
S(x;y,z), S(x;z,u) -> S(x;y,u)
S(x;y,z) -> R(x,y)
S(x;y,z) -> R(x,z)
";
    parse_horn(LAWS)
        .expect("frame laws parse")
        .clauses()
        .to_vec()
}

#[derive(Debug, Clone, Default)]
pub struct Relations {
    r: HashSet<(u32, u32)>,
    s: HashSet<(u32, u32, u32)>,
    r_out: HashMap<u32, Vec<u32>>,
    r_in: HashMap<u32, Vec<u32>>,
    s_base: HashMap<u32, Vec<(u32, u32)>>,
    s_from: HashMap<(u32, u32), Vec<u32>>,
    s_to: HashMap<(u32, u32), Vec<u32>>,
}

type Binding = Vec<Option<u32>>;

impl Relations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, fact: Fact) -> bool {
        match fact {
            Fact::R(a, b) => self.r.contains(&(a, b)),
            Fact::S(a, b, c) => self.s.contains(&(a, b, c)),
        }
    }

    pub fn r_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.r.iter().copied()
    }

    pub fn s_triples(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.s.iter().copied()
    }

    pub fn r_len(&self) -> usize {
        self.r.len()
    }

    pub fn s_len(&self) -> usize {
        self.s.len()
    }

    pub fn r_successors(&self, a: u32) -> &[u32] {
        self.r_out.get(&a).map_or(&[], Vec::as_slice)
    }

    pub fn s_successors(&self, base: u32, from: u32) -> &[u32] {
        self.s_from.get(&(base, from)).map_or(&[], Vec::as_slice)
    }

    fn insert(&mut self, fact: Fact) -> bool {
        match fact {
            Fact::R(a, b) => {
                if !self.r.insert((a, b)) {
                    return false;
                }
                self.r_out.entry(a).or_default().push(b);
                self.r_in.entry(b).or_default().push(a);
            }
            Fact::S(a, b, c) => {
                if !self.s.insert((a, b, c)) {
                    return false;
                }
                self.s_base.entry(a).or_default().push((b, c));
                self.s_from.entry((a, b)).or_default().push(c);
                self.s_to.entry((a, c)).or_default().push(b);
            }
        }
        true
    }

    /// Adds `seeds` and closes under `rules`. Returns every fact that was
    /// not present before, in derivation order.
    ///
    /// `self` must already be closed under `rules`; facts derivable without
    /// the seeds are then never rediscovered.
    pub fn saturate(
        &mut self,
        rules: &[HornClause],
        seeds: impl IntoIterator<Item = Fact>,
    ) -> Vec<Fact> {
        let mut delta: Vec<Fact> = seeds.into_iter().filter(|&f| self.insert(f)).collect();
        let mut added = delta.clone();
        while !delta.is_empty() {
            let mut derived = Vec::new();
            for rule in rules {
                for (pos, atom) in rule.body().iter().enumerate() {
                    for &fact in &delta {
                        let mut binding: Binding = vec![None; rule.vars().len()];
                        if !unify(atom, fact, &mut binding) {
                            continue;
                        }
                        let mut done = vec![false; rule.body().len()];
                        done[pos] = true;
                        self.join(rule, &mut done, &mut binding, &mut derived);
                    }
                }
            }
            delta = derived.into_iter().filter(|&f| self.insert(f)).collect();
            added.extend_from_slice(&delta);
        }
        added
    }

    fn join(
        &self,
        rule: &HornClause,
        done: &mut [bool],
        binding: &mut Binding,
        out: &mut Vec<Fact>,
    ) {
        // next atom: the pending one with most bound variables
        let next = (0..done.len()).filter(|&i| !done[i]).max_by_key(|&i| {
            let vars = rule.body()[i].vars();
            (
                vars.iter().filter(|&&v| binding[v].is_some()).count(),
                usize::MAX - i,
            )
        });
        let Some(i) = next else {
            out.push(instantiate(rule.head(), binding));
            return;
        };
        let atom = rule.body()[i];
        done[i] = true;
        for fact in self.candidates(atom, binding) {
            let saved = binding.clone();
            if unify(&atom, fact, binding) {
                self.join(rule, done, binding, out);
            }
            *binding = saved;
        }
        done[i] = false;
    }

    fn candidates(&self, atom: Atom, binding: &Binding) -> Vec<Fact> {
        match atom {
            Atom::R(x, y) => match (binding[x], binding[y]) {
                (Some(a), _) => self
                    .r_successors(a)
                    .iter()
                    .map(|&b| Fact::R(a, b))
                    .collect(),
                (None, Some(b)) => self
                    .r_in
                    .get(&b)
                    .map_or(&[][..], Vec::as_slice)
                    .iter()
                    .map(|&a| Fact::R(a, b))
                    .collect(),
                (None, None) => self.r.iter().map(|&(a, b)| Fact::R(a, b)).collect(),
            },
            Atom::S(x, y, z) => match (binding[x], binding[y], binding[z]) {
                (Some(a), Some(b), _) => self
                    .s_successors(a, b)
                    .iter()
                    .map(|&c| Fact::S(a, b, c))
                    .collect(),
                (Some(a), None, Some(c)) => self
                    .s_to
                    .get(&(a, c))
                    .map_or(&[][..], Vec::as_slice)
                    .iter()
                    .map(|&b| Fact::S(a, b, c))
                    .collect(),
                (Some(a), None, None) => self
                    .s_base
                    .get(&a)
                    .map_or(&[][..], Vec::as_slice)
                    .iter()
                    .map(|&(b, c)| Fact::S(a, b, c))
                    .collect(),
                _ => self.s.iter().map(|&(a, b, c)| Fact::S(a, b, c)).collect(),
            },
        }
    }
}

fn unify(atom: &Atom, fact: Fact, binding: &mut Binding) -> bool {
    let pairs: &[(usize, u32)] = &match (*atom, fact) {
        (Atom::R(x, y), Fact::R(a, b)) => [(x, a), (y, b), (y, b)],
        (Atom::S(x, y, z), Fact::S(a, b, c)) => [(x, a), (y, b), (z, c)],
        _ => return false,
    };
    for &(var, val) in pairs {
        match binding[var] {
            Some(bound) if bound != val => return false,
            _ => binding[var] = Some(val),
        }
    }
    true
}

fn instantiate(head: Atom, binding: &Binding) -> Fact {
    let get = |v: usize| binding[v].expect("range-restricted head");
    match head {
        Atom::R(x, y) => Fact::R(get(x), get(y)),
        Atom::S(x, y, z) => Fact::S(get(x), get(y), get(z)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_closure_under_frame_laws() {
        let mut rel = Relations::new();
        let added = rel.saturate(&frame_laws(), [Fact::R(0, 1), Fact::R(1, 2)]);
        assert!(rel.contains(Fact::R(0, 2)));
        assert!(rel.contains(Fact::S(0, 1, 2)));
        assert!(rel.contains(Fact::S(0, 1, 1)));
        assert!(rel.contains(Fact::S(0, 2, 2)));
        assert!(rel.contains(Fact::S(1, 2, 2)));
        assert!(!rel.contains(Fact::R(2, 0)));
        assert_eq!(added.len(), rel.r_len() + rel.s_len());
        assert_eq!(rel.r_len(), 3);
        assert_eq!(rel.s_len(), 4);
    }

    #[test]
    fn incremental_matches_batch() {
        let laws = frame_laws();
        let seeds = [
            Fact::R(0, 1),
            Fact::R(1, 2),
            Fact::S(0, 1, 3),
            Fact::R(3, 4),
        ];
        let mut batch = Relations::new();
        batch.saturate(&laws, seeds);
        let mut inc = Relations::new();
        for s in seeds {
            inc.saturate(&laws, [s]);
        }
        assert_eq!(batch.r, inc.r);
        assert_eq!(batch.s, inc.s);
    }

    #[test]
    fn repeated_variables_in_atoms() {
        let rules = parse_horn("R(x,x) -> S(x;x,x)").unwrap().clauses().to_vec();
        let mut rel = Relations::new();
        rel.saturate(&rules, [Fact::R(0, 1), Fact::R(2, 2)]);
        assert!(rel.contains(Fact::S(2, 2, 2)));
        assert!(!rel.contains(Fact::S(0, 0, 0)));
    }
}
