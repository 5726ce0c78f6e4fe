//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use conformant::analysis::{Analysis, AnalysisOptions};
use conformant::model::{
    apply, Action, ClassicalProblem, Clause, ConformantProblem, Lit, Rule, State,
};
use conformant::pddl;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn analyse(p: &ConformantProblem) -> Analysis {
    Analysis::new(p, AnalysisOptions::default()).expect("analysis")
}

/// `F = {p, q, r}`, `I = {q}`, `G = {p, r}`; `a: q → r`, `a: p → ¬p`,
/// `b: q → p`.
pub fn k0_example() -> ConformantProblem {
    let (p, q, r) = (0, 1, 2);
    ConformantProblem {
        name: "k0-example".into(),
        fluents: vec!["p".into(), "q".into(), "r".into()],
        init: vec![Clause::unit(Lit::pos(q))],
        actions: vec![
            Action::new(
                "a",
                vec![],
                vec![
                    Rule::new(vec![Lit::pos(q)], Lit::pos(r)),
                    Rule::new(vec![Lit::pos(p)], Lit::neg(p)),
                ],
            ),
            Action::new("b", vec![], vec![Rule::new(vec![Lit::pos(q)], Lit::pos(p))]),
        ],
        goal: vec![Lit::pos(p), Lit::pos(r)],
        goal_clauses: vec![],
    }
}

pub const PICK_DROP_DOMAIN: &str = "
(define (domain pickdrop)
  (:requirements :strips :typing :negative-preconditions :conditional-effects)
  (:types loc)
  (:predicates (hold) (at ?l - loc))
  (:action pick :parameters (?l - loc)
    :effect (and (when (and (not (hold)) (at ?l)) (and (hold) (not (at ?l))))
                 (when (hold) (and (not (hold)) (at ?l)))))
  (:action drop :parameters (?l - loc)
    :effect (when (hold) (and (not (hold)) (at ?l)))))";

pub const PICK_DROP_PROBLEM: &str = "
(define (problem pd3)
  (:domain pickdrop)
  (:objects l1 l2 l3 - loc)
  (:init (oneof (at l1) (at l2)))
  (:goal (at l3)))";

pub fn pick_drop() -> ConformantProblem {
    pddl::load(PICK_DROP_DOMAIN, PICK_DROP_PROBLEM).expect("pick/drop loads")
}

pub fn generated(family: &str, params: &[usize]) -> ConformantProblem {
    let fam = conformant::generators::Family::parse(family, params).expect("family");
    let (d, p) = fam.generate();
    pddl::load(&d, &p).expect("generated instance loads")
}

pub fn lit(p: &ConformantProblem, name: &str) -> Lit {
    match name.strip_prefix('-') {
        Some(f) => Lit::neg(p.fluent_index(f).expect(f)),
        None => Lit::pos(p.fluent_index(name).expect(name)),
    }
}

/// Bounds for [`random_problem`].
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_fluents: usize,
    pub max_actions: usize,
    pub max_init_clauses: usize,
}

pub const SUITE_SHAPE: Shape = Shape {
    max_fluents: 8,
    max_actions: 6,
    max_init_clauses: 4,
};

pub const SMALL_SHAPE: Shape = Shape {
    max_fluents: 5,
    max_actions: 4,
    max_init_clauses: 3,
};

fn random_lit(rng: &mut ChaCha8Rng, n: usize) -> Lit {
    Lit::new(rng.gen_range(0..n), rng.gen_bool(0.5))
}

fn random_lits(rng: &mut ChaCha8Rng, n: usize, max: usize) -> Vec<Lit> {
    let k = rng.gen_range(0..=max);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..k {
        let l = random_lit(rng, n);
        if seen.insert(l.fluent()) {
            out.push(l);
        }
    }
    out
}

/// A random problem; not necessarily satisfiable or consistent.
pub fn random_problem(rng: &mut ChaCha8Rng, shape: Shape) -> ConformantProblem {
    let n = rng.gen_range(2..=shape.max_fluents);
    let fluents: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
    let init = (0..rng.gen_range(0..=shape.max_init_clauses))
        .map(|_| {
            let mut c = random_lits(rng, n, 3);
            if c.is_empty() {
                c.push(random_lit(rng, n));
            }
            Clause::new(c)
        })
        .collect();
    let actions = (0..rng.gen_range(1..=shape.max_actions))
        .map(|i| {
            let pre = if rng.gen_bool(0.3) {
                vec![random_lit(rng, n)]
            } else {
                vec![]
            };
            let rules = (0..rng.gen_range(1..=3))
                .map(|_| Rule::new(random_lits(rng, n, 2), random_lit(rng, n)))
                .filter(|r| !r.condition.contains(&r.effect))
                .collect();
            Action::new(format!("a{i}"), pre, rules)
        })
        .collect();
    let mut goal = random_lits(rng, n, 2);
    if goal.is_empty() {
        goal.push(random_lit(rng, n));
    }
    goal.sort_unstable();
    ConformantProblem {
        name: "random".into(),
        fluents,
        init,
        actions,
        goal,
        goal_clauses: vec![],
    }
}

/// Rejection-samples problems with satisfiable `I` that pass the
/// consistency check.
pub fn consistent_suite(
    seed: u64,
    count: usize,
    shape: Shape,
) -> Vec<(ConformantProblem, Analysis)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p = random_problem(&mut rng, shape);
        if let Ok(an) = Analysis::new(&p, AnalysisOptions::default()) {
            if an.consistent {
                out.push((p, an));
            }
        }
    }
    out
}

/// Random CNF with no tautologies or empty clauses.
pub fn random_cnf(rng: &mut ChaCha8Rng, n: usize, max_clauses: usize) -> Vec<Clause> {
    (0..rng.gen_range(0..=max_clauses))
        .map(|_| {
            let mut c = random_lits(rng, n, 3);
            if c.is_empty() {
                c.push(random_lit(rng, n));
            }
            Clause::new(c)
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All assignments over `n` variables, as bitmasks, that satisfy `cnf`.
pub fn models(n: usize, cnf: &[Clause]) -> Vec<u32> {
    (0..1u32 << n)
        .filter(|&m| {
            cnf.iter().all(|c| {
                c.lits()
                    .iter()
                    .any(|l| (m >> l.fluent() & 1 == 1) == l.is_positive())
            })
        })
        .collect()
}

/// Prime implicates by truth table: every non-tautological clause entailed
/// by `cnf` with no entailed proper subset. `None` when `cnf` is
/// unsatisfiable.
pub fn truth_table_pi(n: usize, cnf: &[Clause]) -> Option<Vec<Clause>> {
    let ms = models(n, cnf);
    if ms.is_empty() {
        return None;
    }
    let entailed = |c: &[Lit]| {
        ms.iter().all(|&m| {
            c.iter()
                .any(|l| (m >> l.fluent() & 1 == 1) == l.is_positive())
        })
    };
    // Each variable is absent, positive or negative.
    let mut candidates: Vec<Vec<Lit>> = vec![vec![]];
    for v in 0..n {
        let mut next = Vec::with_capacity(candidates.len() * 3);
        for c in &candidates {
            next.push(c.clone());
            let mut p = c.clone();
            p.push(Lit::pos(v));
            next.push(p);
            let mut q = c.clone();
            q.push(Lit::neg(v));
            next.push(q);
        }
        candidates = next;
    }
    let implicates: Vec<Vec<Lit>> = candidates
        .into_iter()
        .filter(|c| !c.is_empty() && entailed(c))
        .collect();
    let mut prime: Vec<Clause> = implicates
        .iter()
        .filter(|c| {
            !implicates
                .iter()
                .any(|d| d.len() < c.len() && d.iter().all(|l| c.contains(l)))
        })
        .map(|c| Clause::new(c.clone()))
        .collect();
    prime.sort();
    Some(prime)
}

/// Calls `f` on every sequence over `0..m` of length at most `max_len`,
/// shortest first.
pub fn for_each_sequence(m: usize, max_len: usize, f: &mut dyn FnMut(&[usize])) {
    let mut level: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..=max_len {
        for s in &level {
            f(s);
        }
        if m == 0 {
            return;
        }
        level = level
            .iter()
            .flat_map(|s| {
                (0..m).map(move |a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
}

/// Classical index of each source action, matched by name.
pub fn action_map(p: &ConformantProblem, k: &ClassicalProblem) -> Vec<usize> {
    p.actions
        .iter()
        .map(|a| {
            k.action_index(&a.name)
                .expect("source action present in translation")
        })
        .collect()
}

/// Breadth-first reachable states from `starts`, stopping at `cap`.
/// Successors that fire conflicting effects are reported via `conflict`.
pub fn reachable(
    actions: &[Action],
    starts: Vec<State>,
    cap: usize,
    conflict: &mut dyn FnMut(&State, usize),
) -> (Vec<State>, bool) {
    let mut seen: HashSet<State> = starts.iter().cloned().collect();
    let mut order: Vec<State> = Vec::new();
    let mut queue: VecDeque<State> = starts.into_iter().collect();
    while let Some(s) = queue.pop_front() {
        for (ai, a) in actions.iter().enumerate() {
            match apply(&s, a) {
                Ok(next) => {
                    if seen.len() < cap && seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
                Err(conformant::ApplyError::InconsistentResult { .. }) => conflict(&s, ai),
                Err(_) => {}
            }
        }
        order.push(s);
    }
    let truncated = seen.len() >= cap;
    (order, truncated)
}
