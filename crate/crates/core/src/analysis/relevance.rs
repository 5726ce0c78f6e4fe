//! Conformant relevance `L ⟶ L'`.

use fixedbitset::FixedBitSet;

use crate::model::{ConformantProblem, Lit};

/// Which closure rule handles preemption of deleting effects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreemptionRule {
    /// `L ⟶ L'` if `L ⟶ ¬L''` and `L'' ⟶ ¬L'`.
    Chained,
    /// `L ⟶ L'` if `¬L ⟶ ¬L'`.
    Complement,
}

/// Reflexive, transitive relevance relation over literal codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relevance {
    /// `out[L]`: literals `L` is relevant to.
    out: Vec<FixedBitSet>,
    /// `inc[L]`: literals relevant to `L`.
    inc: Vec<FixedBitSet>,
}

impl Relevance {
    pub fn compute(p: &ConformantProblem) -> Self {
        Self::compute_with(p, PreemptionRule::Chained)
    }

    pub fn compute_with(p: &ConformantProblem, rule: PreemptionRule) -> Self {
        let m = 2 * p.num_fluents();
        let mut out: Vec<FixedBitSet> = (0..m)
            .map(|i| {
                let mut b = FixedBitSet::with_capacity(m);
                b.insert(i);
                b
            })
            .collect();
        for a in &p.actions {
            for r in &a.rules {
                for c in &r.condition {
                    out[c.code()].insert(r.effect.code());
                }
            }
            for e in &a.nondet {
                for c in &e.condition {
                    for l in e.outcomes.iter().flatten() {
                        out[c.code()].insert(l.code());
                    }
                }
            }
        }
        loop {
            let negated: Vec<FixedBitSet> = out.iter().map(|b| negate(b, m)).collect();
            let mut changed = false;
            for l in 0..m {
                let mut next = out[l].clone();
                for x in out[l].ones() {
                    next.union_with(&out[x]);
                    if rule == PreemptionRule::Chained {
                        next.union_with(&negated[x ^ 1]);
                    }
                }
                if rule == PreemptionRule::Complement {
                    next.union_with(&negated[l ^ 1]);
                }
                if next != out[l] {
                    out[l] = next;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut inc: Vec<FixedBitSet> = (0..m).map(|_| FixedBitSet::with_capacity(m)).collect();
        for (l, row) in out.iter().enumerate() {
            for x in row.ones() {
                inc[x].insert(l);
            }
        }
        Relevance { out, inc }
    }

    /// `from ⟶ to`.
    pub fn relevant(&self, from: Lit, to: Lit) -> bool {
        self.out[from.code()].contains(to.code())
    }

    /// All literals relevant to `l`, as a bitset over literal codes.
    pub fn relevant_to(&self, l: Lit) -> &FixedBitSet {
        &self.inc[l.code()]
    }

    /// All literals `l` is relevant to.
    pub fn relevant_from(&self, l: Lit) -> &FixedBitSet {
        &self.out[l.code()]
    }

    pub fn relevant_to_lits(&self, l: Lit) -> Vec<Lit> {
        self.inc[l.code()].ones().map(Lit::from_code).collect()
    }

    pub fn num_literals(&self) -> usize {
        self.out.len()
    }

    /// Pairs on which two relations disagree.
    pub fn differences(&self, other: &Relevance) -> Vec<(Lit, Lit)> {
        let mut out = Vec::new();
        for (l, (a, b)) in self.out.iter().zip(&other.out).enumerate() {
            for x in a.symmetric_difference(b) {
                out.push((Lit::from_code(l), Lit::from_code(x)));
            }
        }
        out
    }
}

/// `{¬x : x ∈ b}`.
fn negate(b: &FixedBitSet, m: usize) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(m);
    for x in b.ones() {
        out.insert(x ^ 1);
    }
    out
}
