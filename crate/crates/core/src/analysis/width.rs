//! Relevant clauses, covers, satisfaction, and conformant width.

use serde::Serialize;

use super::relevance::Relevance;
use super::AnalysisError;
use crate::model::{Clause, Lit};
use crate::pi::{Pi, Tag};

/// The uncertain part of `I`: non-unit prime implicates plus `p ∨ ¬p` for
/// every fluent not fixed by a unit clause.
pub fn c_i(pi: &Pi) -> Vec<Clause> {
    let mut out: Vec<Clause> = pi
        .clauses()
        .iter()
        .filter(|c| !c.is_unit())
        .cloned()
        .collect();
    out.extend(pi.unknown_fluents().into_iter().map(Clause::tautology));
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelevantClauses {
    pub target: Lit,
    /// `C_I(L)`.
    pub clauses: Vec<Clause>,
    /// `C_I*(L)`: `C_I(L)` plus tautologies over its fluents.
    pub extended: Vec<Clause>,
}

pub fn relevant_clauses(ci: &[Clause], rel: &Relevance, target: Lit) -> RelevantClauses {
    let to = rel.relevant_to(target);
    let clauses: Vec<Clause> = ci
        .iter()
        .filter(|c| c.lits().iter().all(|l| to.contains(l.code())))
        .cloned()
        .collect();
    let mut extended = clauses.clone();
    let mut fluents: Vec<usize> = clauses
        .iter()
        .flat_map(|c| c.lits())
        .map(|l| l.fluent())
        .collect();
    fluents.sort_unstable();
    fluents.dedup();
    extended.extend(fluents.into_iter().map(Clause::tautology));
    extended.sort();
    extended.dedup();
    RelevantClauses {
        target,
        clauses,
        extended,
    }
}

/// All inclusion-minimal literal sets consistent with `I` that hit every
/// clause of `clauses`, sorted.
pub fn cover(clauses: &[Clause], pi: &Pi) -> Vec<Tag> {
    let mut found: Vec<Tag> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    hit(clauses, pi, &mut current, &mut found);
    for t in &mut found {
        t.sort_unstable();
    }
    found.sort();
    found.dedup();
    let minimal: Vec<Tag> = found
        .iter()
        .filter(|t| !found.iter().any(|u| u.len() < t.len() && is_subset(u, t)))
        .cloned()
        .collect();
    minimal
}

fn hit(clauses: &[Clause], pi: &Pi, current: &mut Vec<Lit>, found: &mut Vec<Tag>) {
    let Some((first, rest)) = clauses.split_first() else {
        found.push(current.clone());
        return;
    };
    if first.lits().iter().any(|l| current.contains(l)) {
        hit(rest, pi, current, found);
        return;
    }
    for &l in first.lits() {
        current.push(l);
        let mut sorted = current.clone();
        sorted.sort_unstable();
        if pi.tag_consistent(&sorted) {
            hit(rest, pi, current, found);
        }
        current.pop();
    }
}

fn is_subset(small: &[Lit], big: &[Lit]) -> bool {
    small.iter().all(|l| big.contains(l))
}

/// Every tag's closure intersects every clause.
pub fn satisfies(tags: &[Tag], clauses: &[Clause], pi: &Pi) -> bool {
    tags.iter().all(|t| {
        let star = pi.closure(t);
        clauses
            .iter()
            .all(|c| c.lits().iter().any(|l| star.binary_search(l).is_ok()))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiteralWidth {
    pub literal: String,
    pub width: usize,
    pub witness: Vec<Vec<String>>,
    pub relevant_clauses: usize,
}

/// Smallest subset of `C_I*(L)` whose cover satisfies `C_I(L)`, searched
/// by increasing size and lexicographic order within a size.
pub fn width_of_literal(
    rc: &RelevantClauses,
    pi: &Pi,
    bound: usize,
) -> Result<(usize, Vec<Clause>), AnalysisError> {
    if rc.clauses.is_empty() {
        return Ok((0, Vec::new()));
    }
    for k in 1..=bound.min(rc.extended.len()) {
        if let Some(w) = first_covering_subset(rc, pi, k) {
            return Ok((k, w));
        }
    }
    Err(AnalysisError::WidthSearchCap {
        literal: rc.target,
        bound,
    })
}

/// The lexicographically first `k`-subset of `C_I*(L)` whose cover
/// satisfies `C_I(L)`.
pub fn first_covering_subset(rc: &RelevantClauses, pi: &Pi, k: usize) -> Option<Vec<Clause>> {
    let mut found = None;
    for_each_subset(rc.extended.len(), k, &mut |idx| {
        let subset: Vec<Clause> = idx.iter().map(|&i| rc.extended[i].clone()).collect();
        if satisfies(&cover(&subset, pi), &rc.clauses, pi) {
            found = Some(subset);
            false
        } else {
            true
        }
    });
    found
}

/// Calls `f` on each `k`-subset of `0..n` in lexicographic order until it
/// returns false.
pub fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            return;
        }
    }
}
