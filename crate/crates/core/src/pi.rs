//! Prime-implicate normal form of the initial situation and the entailment
//! services built on it.
//!
//! Once `I` is in PI form, `I ⊨ c` holds iff `c` is a tautology or is
//! subsumed by a clause of `I`. Every query below reduces to that test.

use thiserror::Error;

use crate::model::{has_complementary_pair, Clause, Fluent, Lit};

/// A conjunction of literals, sorted and duplicate-free.
pub type Tag = Vec<Lit>;

pub const DEFAULT_PI_CAP: usize = 5000;
pub const DEFAULT_MERGE_CAP: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PiError {
    #[error("initial situation is unsatisfiable")]
    InconsistentInit,
    #[error("prime implicate count exceeded the cap of {cap} clauses")]
    PiBlowup { cap: usize },
    #[error("merge validity undecided after exploring {cap} assignments")]
    ValidityUndecidedAtCap { cap: usize },
}

/// A clause set in prime-implicate form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pi {
    num_fluents: usize,
    clauses: Vec<Clause>,
}

impl Pi {
    /// Runs Tison's method: resolve on each variable in id order, keeping
    /// the clause set subsumption-free and tautology-free throughout.
    pub fn compute(num_fluents: usize, init: &[Clause], cap: usize) -> Result<Pi, PiError> {
        let mut set = ClauseSet::default();
        let mut sorted: Vec<Clause> = init.to_vec();
        sorted.sort_by_key(Clause::len);
        for c in sorted {
            if c.is_empty() {
                return Err(PiError::InconsistentInit);
            }
            if !c.is_tautology() {
                set.insert(c);
            }
        }
        if set.len_alive > cap {
            return Err(PiError::PiBlowup { cap });
        }
        for v in 0..num_fluents {
            let pos: Vec<usize> = set.ids_with(Lit::pos(v));
            let neg: Vec<usize> = set.ids_with(Lit::neg(v));
            for &p in &pos {
                for &q in &neg {
                    if !set.alive[p] || !set.alive[q] {
                        continue;
                    }
                    let Some(r) = resolve(&set.clauses[p], &set.clauses[q], v) else {
                        continue;
                    };
                    if r.is_empty() {
                        return Err(PiError::InconsistentInit);
                    }
                    set.insert(r);
                    if set.len_alive > cap {
                        return Err(PiError::PiBlowup { cap });
                    }
                }
            }
        }
        let mut clauses: Vec<Clause> = set.into_alive();
        clauses.sort();
        Ok(Pi {
            num_fluents,
            clauses,
        })
    }

    pub fn num_fluents(&self) -> usize {
        self.num_fluents
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Literals that are unit clauses of `I`.
    pub fn units(&self) -> Vec<Lit> {
        self.clauses
            .iter()
            .filter(|c| c.is_unit())
            .map(|c| c.lits()[0])
            .collect()
    }

    /// Fluents whose value is not fixed by a unit clause.
    pub fn unknown_fluents(&self) -> Vec<Fluent> {
        let mut known = vec![false; self.num_fluents];
        for l in self.units() {
            known[l.fluent()] = true;
        }
        (0..self.num_fluents).filter(|&f| !known[f]).collect()
    }

    pub fn is_known(&self, f: Fluent) -> bool {
        self.clauses
            .iter()
            .any(|c| c.is_unit() && c.lits()[0].fluent() == f)
    }

    /// `I, t ⊨ L`.
    pub fn entails(&self, t: &[Lit], l: Lit) -> bool {
        if t.contains(&l) || has_pair(t) {
            return true;
        }
        let falsified = |x: &Lit| t.contains(&!*x);
        self.clauses
            .iter()
            .any(|c| c.lits().iter().all(|x| *x == l || falsified(x)))
    }

    /// `t* = {L | I, t ⊨ L}`, sorted. For an inconsistent `t` every literal
    /// is entailed.
    pub fn closure(&self, t: &[Lit]) -> Vec<Lit> {
        let n = self.num_fluents;
        let mut neg_t = vec![false; 2 * n];
        for l in t {
            neg_t[l.complement().code()] = true;
        }
        let everything = || (0..2 * n).map(Lit::from_code).collect();
        if has_pair(t) {
            return everything();
        }
        let mut out: Vec<Lit> = t.to_vec();
        for c in &self.clauses {
            let mut open = c.lits().iter().filter(|x| !neg_t[x.code()]);
            match (open.next(), open.next()) {
                (None, _) => return everything(),
                (Some(&l), None) => out.push(l),
                _ => {}
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True iff `t` is satisfiable together with `I`.
    pub fn tag_consistent(&self, t: &[Lit]) -> bool {
        !has_pair(t) && !self.falsifies_some_clause(t)
    }

    /// True iff the partial assignment `t` falsifies a clause of `I`; for a
    /// consistent `t` this is exactly unsatisfiability of `I ∧ t`.
    fn falsifies_some_clause(&self, t: &[Lit]) -> bool {
        self.clauses
            .iter()
            .any(|c| c.lits().iter().all(|x| t.contains(&!*x)))
    }

    /// Decides `I ⊨ ⋁_{t ∈ m} t` by searching for an assignment consistent
    /// with `I` that falsifies every tag.
    pub fn merge_valid(&self, merge: &[Tag], cap: usize) -> Result<bool, PiError> {
        if merge.iter().any(|t| t.is_empty()) {
            return Ok(true);
        }
        let mut assignment: Vec<Lit> = Vec::new();
        let mut budget = cap;
        match self.falsify_all(merge, &mut assignment, &mut budget) {
            Some(found) => Ok(!found),
            None => Err(PiError::ValidityUndecidedAtCap { cap }),
        }
    }

    /// Returns `Some(true)` when a counter-model exists, `None` when the
    /// budget runs out.
    fn falsify_all(
        &self,
        merge: &[Tag],
        assignment: &mut Vec<Lit>,
        budget: &mut usize,
    ) -> Option<bool> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let open = merge
            .iter()
            .find(|t| !t.iter().any(|l| assignment.contains(&!*l)));
        let Some(tag) = open else {
            return Some(true);
        };
        for &l in tag {
            let neg = !l;
            if assignment.contains(&l) {
                continue;
            }
            let fresh = !assignment.contains(&neg);
            if fresh {
                assignment.push(neg);
            }
            let consistent = !self.falsifies_some_clause(assignment);
            let result = if consistent {
                self.falsify_all(merge, assignment, budget)
            } else {
                Some(false)
            };
            if fresh {
                assignment.pop();
            }
            match result {
                Some(false) => {}
                other => return other,
            }
        }
        Some(false)
    }
}

fn has_pair(t: &[Lit]) -> bool {
    if t.windows(2).all(|w| w[0] < w[1]) {
        has_complementary_pair(t)
    } else {
        t.iter().any(|l| t.contains(&!*l))
    }
}

/// Resolvent of `p` (containing `v`) and `q` (containing `¬v`), or `None`
/// when it is a tautology.
fn resolve(p: &Clause, q: &Clause, v: Fluent) -> Option<Clause> {
    let lits: Vec<Lit> = p
        .lits()
        .iter()
        .chain(q.lits())
        .copied()
        .filter(|l| l.fluent() != v)
        .collect();
    let c = Clause::new(lits);
    (!c.is_tautology()).then_some(c)
}

/// Append-only clause store with tombstones and eager subsumption.
#[derive(Default)]
struct ClauseSet {
    clauses: Vec<Clause>,
    alive: Vec<bool>,
    len_alive: usize,
}

impl ClauseSet {
    fn ids_with(&self, l: Lit) -> Vec<usize> {
        (0..self.clauses.len())
            .filter(|&i| self.alive[i] && self.clauses[i].contains(l))
            .collect()
    }

    /// Adds `c` unless subsumed; drops every clause `c` subsumes.
    fn insert(&mut self, c: Clause) {
        let subsumed = self
            .clauses
            .iter()
            .zip(&self.alive)
            .any(|(d, &a)| a && d.subsumes(&c));
        if subsumed {
            return;
        }
        for i in 0..self.clauses.len() {
            if self.alive[i] && c.subsumes(&self.clauses[i]) {
                self.alive[i] = false;
                self.len_alive -= 1;
            }
        }
        self.clauses.push(c);
        self.alive.push(true);
        self.len_alive += 1;
    }

    fn into_alive(self) -> Vec<Clause> {
        self.clauses
            .into_iter()
            .zip(self.alive)
            .filter_map(|(c, a)| a.then_some(c))
            .collect()
    }
}
