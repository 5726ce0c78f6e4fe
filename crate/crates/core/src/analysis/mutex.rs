//! Greatest mutex set and the consistency test built on it.

use fixedbitset::FixedBitSet;

use crate::model::{has_complementary_pair, normalize_lits, ConformantProblem, Lit};
use crate::pi::Pi;

/// Unordered literal pairs that never hold together in a reachable state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutexSet {
    rows: Vec<FixedBitSet>,
}

impl MutexSet {
    pub fn is_mutex(&self, a: Lit, b: Lit) -> bool {
        self.rows[a.code()].contains(b.code())
    }

    /// Literals mutex with `l`, sorted.
    pub fn mutex_with(&self, l: Lit) -> Vec<Lit> {
        self.rows[l.code()].ones().map(Lit::from_code).collect()
    }

    /// Each pair once, smaller code first.
    pub fn pairs(&self) -> Vec<(Lit, Lit)> {
        let mut out = Vec::new();
        for (a, row) in self.rows.iter().enumerate() {
            for b in row.ones().filter(|&b| b > a) {
                out.push((Lit::from_code(a), Lit::from_code(b)));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.pairs().len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_clear())
    }

    fn remove(&mut self, a: Lit, b: Lit) {
        self.rows[a.code()].set(b.code(), false);
        self.rows[b.code()].set(a.code(), false);
    }

    /// `S` contains a pair of the set.
    fn set_is_mutex(&self, s: &[Lit]) -> bool {
        s.iter()
            .enumerate()
            .any(|(i, &a)| s[i + 1..].iter().any(|&b| self.is_mutex(a, b)))
    }

    /// Some member of `S` is mutex with `l`.
    fn set_mutex_with(&self, s: &[Lit], l: Lit) -> bool {
        s.iter().any(|&y| self.is_mutex(y, l))
    }

    /// `S` is mutex with the complement of every literal of `target` outside `S`.
    fn implies(&self, s: &[Lit], target: &[Lit]) -> bool {
        target
            .iter()
            .filter(|x| !s.contains(x))
            .all(|&x| self.set_mutex_with(s, !x))
    }
}

struct FlatRule {
    condition: Vec<Lit>,
    effect: Lit,
}

/// Computes the maximal mutex set by deleting pairs until every clause of
/// the definition holds. With `strengthened`, the deleting-rule clause is
/// checked against `Pre ∪ C ∪ {L'}` instead of `Pre ∪ C`.
pub fn mutex_set(p: &ConformantProblem, pi: &Pi, strengthened: bool) -> MutexSet {
    let m = 2 * p.num_fluents();
    let mut r = MutexSet {
        rows: (0..m).map(|_| FixedBitSet::with_capacity(m)).collect(),
    };
    for a in 0..m {
        for b in a + 1..m {
            let (x, y) = (Lit::from_code(a), Lit::from_code(b));
            if !pi.tag_consistent(&[x, y]) {
                r.rows[a].insert(b);
                r.rows[b].insert(a);
            }
        }
    }
    let actions: Vec<Vec<FlatRule>> = p
        .actions
        .iter()
        .map(|a| {
            a.rules
                .iter()
                .map(|rule| {
                    let mut condition = a.pre.clone();
                    condition.extend_from_slice(&rule.condition);
                    normalize_lits(&mut condition);
                    FlatRule {
                        condition,
                        effect: rule.effect,
                    }
                })
                .collect()
        })
        .collect();

    loop {
        let mut changed = false;
        for rules in &actions {
            let live: Vec<&FlatRule> = rules
                .iter()
                .filter(|fr| {
                    !has_complementary_pair(&fr.condition) && !r.set_is_mutex(&fr.condition)
                })
                .collect();
            for r1 in &live {
                let l = r1.effect;
                for lp in r.mutex_with(l) {
                    if violates(&r, &live, r1, l, lp, strengthened) {
                        r.remove(l, lp);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

fn violates(
    r: &MutexSet,
    live: &[&FlatRule],
    r1: &FlatRule,
    l: Lit,
    lp: Lit,
    strengthened: bool,
) -> bool {
    for r2 in live.iter().filter(|x| x.effect == lp) {
        let mut joint = r1.condition.clone();
        joint.extend_from_slice(&r2.condition);
        normalize_lits(&mut joint);
        if !has_complementary_pair(&joint) && !r.set_is_mutex(&joint) {
            return true;
        }
    }
    if lp == !l || r.set_mutex_with(&r1.condition, lp) {
        return false;
    }
    let mut s = r1.condition.clone();
    if strengthened {
        s.push(lp);
        normalize_lits(&mut s);
    }
    let deleted = live
        .iter()
        .filter(|x| x.effect == !lp)
        .any(|r3| r.implies(&s, &r3.condition));
    !deleted
}

/// `I` satisfiable and every complementary pair mutex. The first argument
/// is only used to read the fluent count.
pub fn consistency_check(p: &ConformantProblem, mutex: &MutexSet) -> bool {
    (0..p.num_fluents()).all(|f| mutex.is_mutex(Lit::pos(f), Lit::neg(f)))
}
