//! Exact oracles: initial-state enumeration, brute-force conformance,
//! the 0-approximation, belief-space search, and basis construction.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{satisfies, Analysis, Relevance};
use crate::model::{
    add_set, normalize_lits, Action, ApplyError, Clause, ConformantProblem, Fluent, Lit, State,
};
use crate::pi::{Pi, PiError, Tag};
use crate::translate::TranslationSpec;

pub const DEFAULT_STATE_CAP: usize = 4096;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("model enumeration exceeded its cap")]
pub struct CapExceeded;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("more than {cap} possible initial states")]
    TooManyInitialStates { cap: usize },
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("no initial state agrees with tag {tag:?} for literal {literal}")]
    BasisStateNotFound { literal: String, tag: Vec<String> },
    #[error("no merge for literal {0} covers its relevant clauses")]
    NotCovering(String),
    #[error(transparent)]
    Pi(#[from] PiError),
}

/// Backtracking enumeration of assignments to `vars` (ascending) that
/// falsify no clause of `clauses` and, if given, no clause of `pi`.
/// `f` receives each model as sorted literals and returns false to stop.
/// Returns the number of models visited.
pub fn enumerate_models(
    vars: &[Fluent],
    clauses: &[Clause],
    pi: Option<&Pi>,
    cap: usize,
    f: &mut dyn FnMut(&[Lit]) -> bool,
) -> Result<usize, CapExceeded> {
    let width = vars
        .iter()
        .copied()
        .chain(clauses.iter().flat_map(|c| c.lits()).map(|l| l.fluent()))
        .chain(pi.map(|p| p.num_fluents().saturating_sub(1)))
        .max()
        .map_or(0, |m| m + 1);
    let mut watch: Vec<Vec<&Clause>> = vec![Vec::new(); 2 * width];
    for c in clauses.iter().chain(pi.map_or(&[][..], |p| p.clauses())) {
        for l in c.lits() {
            watch[l.code()].push(c);
        }
    }
    let mut e = Enumerator {
        vars,
        watch,
        value: vec![None; width],
        lits: Vec::with_capacity(vars.len()),
        count: 0,
        cap,
        stopped: false,
    };
    if clauses
        .iter()
        .chain(pi.map_or(&[][..], |p| p.clauses()))
        .any(|c| c.is_empty())
    {
        return Ok(0);
    }
    e.run(0, f)?;
    Ok(e.count)
}

struct Enumerator<'a> {
    vars: &'a [Fluent],
    watch: Vec<Vec<&'a Clause>>,
    value: Vec<Option<bool>>,
    lits: Vec<Lit>,
    count: usize,
    cap: usize,
    stopped: bool,
}

impl Enumerator<'_> {
    fn falsified(&self, c: &Clause) -> bool {
        c.lits()
            .iter()
            .all(|l| self.value[l.fluent()] == Some(!l.is_positive()))
    }

    fn run(&mut self, depth: usize, f: &mut dyn FnMut(&[Lit]) -> bool) -> Result<(), CapExceeded> {
        if self.stopped {
            return Ok(());
        }
        if depth == self.vars.len() {
            self.count += 1;
            if self.count > self.cap {
                return Err(CapExceeded);
            }
            if !f(&self.lits) {
                self.stopped = true;
            }
            return Ok(());
        }
        let v = self.vars[depth];
        for value in [true, false] {
            self.value[v] = Some(value);
            let now_false = Lit::new(v, !value);
            let ok = !self.watch[now_false.code()]
                .iter()
                .any(|c| self.falsified(c));
            if ok {
                self.lits.push(Lit::new(v, value));
                self.run(depth + 1, f)?;
                self.lits.pop();
            }
            self.value[v] = None;
            if self.stopped {
                break;
            }
        }
        Ok(())
    }
}

/// Streams every possible initial state of `p` to `f` (return false to
/// stop). Returns the number visited.
pub fn for_each_initial_state(
    p: &ConformantProblem,
    cap: usize,
    f: &mut dyn FnMut(&State) -> bool,
) -> Result<usize, VerifyError> {
    let n = p.num_fluents();
    let vars: Vec<Fluent> = (0..n).collect();
    enumerate_models(&vars, &p.init, None, cap, &mut |lits| {
        f(&State::from_lits(n, lits))
    })
    .map_err(|_| VerifyError::TooManyInitialStates { cap })
}

/// All possible initial states, in enumeration order.
pub fn initial_states(p: &ConformantProblem, cap: usize) -> Result<Vec<State>, VerifyError> {
    let mut out = Vec::new();
    for_each_initial_state(p, cap, &mut |s| {
        out.push(s.clone());
        true
    })?;
    Ok(out)
}

/// Successor states of `s` under `a`, branching over the outcomes of
/// nondeterministic effects whose conditions hold.
pub fn successors(s: &State, a: &Action) -> Result<Vec<State>, ApplyError> {
    if let Some(&l) = a.pre.iter().find(|&&l| !s.holds(l)) {
        return Err(ApplyError::PreconditionViolation {
            action: a.name.clone(),
            literal: l,
        });
    }
    let base = add_set(s, a)?;
    let active: Vec<&Vec<Vec<Lit>>> = a
        .nondet
        .iter()
        .filter(|e| s.holds_all(&e.condition))
        .map(|e| &e.outcomes)
        .collect();
    let mut adds: Vec<Vec<Lit>> = vec![base];
    for outcomes in active {
        let mut next = Vec::new();
        for partial in &adds {
            for o in outcomes {
                let mut x = partial.clone();
                x.extend_from_slice(o);
                next.push(x);
            }
        }
        adds = next;
    }
    let mut out = Vec::with_capacity(adds.len());
    for mut add in adds {
        normalize_lits(&mut add);
        if let Some(w) = add.windows(2).find(|w| w[0].fluent() == w[1].fluent()) {
            return Err(ApplyError::InconsistentResult {
                action: a.name.clone(),
                fluent: w[0].fluent(),
            });
        }
        let mut t = s.clone();
        for l in add {
            t.apply_lit(l);
        }
        out.push(t);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn goal_holds(p: &ConformantProblem, s: &State) -> bool {
    s.holds_all(&p.goal) && p.goal_clauses.iter().all(|c| c.satisfied_by(s))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FailureKind {
    Precondition,
    Conflict,
    Goal,
}

impl std::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FailureKind::Precondition => "precondition fails",
            FailureKind::Conflict => "conflicting effects",
            FailureKind::Goal => "goal not reached",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub conformant: bool,
    pub checked_states: usize,
    pub failure: Option<FailureKind>,
    /// Step index at which execution failed, if it did.
    pub failed_step: Option<usize>,
    /// A possible initial state on which the plan fails.
    pub counterexample: Option<Vec<String>>,
}

/// Resolves step names to action indices.
pub fn resolve_steps(p: &ConformantProblem, steps: &[String]) -> Result<Vec<usize>, VerifyError> {
    steps
        .iter()
        .map(|s| {
            p.action_index(s)
                .ok_or_else(|| VerifyError::UnknownAction(s.clone()))
        })
        .collect()
}

/// Runs `steps` from `s`, following every nondeterministic branch.
pub fn execute(
    p: &ConformantProblem,
    s: &State,
    steps: &[usize],
) -> Result<Vec<State>, (usize, FailureKind)> {
    let mut frontier = vec![s.clone()];
    for (i, &a) in steps.iter().enumerate() {
        let mut next = Vec::with_capacity(frontier.len());
        for st in &frontier {
            match successors(st, &p.actions[a]) {
                Ok(succ) => next.extend(succ),
                Err(ApplyError::PreconditionViolation { .. }) => {
                    return Err((i, FailureKind::Precondition))
                }
                Err(ApplyError::InconsistentResult { .. }) => {
                    return Err((i, FailureKind::Conflict))
                }
            }
        }
        if next.len() > 1 {
            next.sort();
            next.dedup();
        }
        frontier = next;
    }
    Ok(frontier)
}

/// Checks `steps` (already stripped of inference actions) from every
/// possible initial state.
pub fn conformant_check(
    p: &ConformantProblem,
    steps: &[String],
    cap: usize,
) -> Result<Verdict, VerifyError> {
    let idx = resolve_steps(p, steps)?;
    check_from_states(p, &idx, |f| for_each_initial_state(p, cap, f))
}

/// Checks `steps` against an explicit collection of states.
pub fn conforms_with(p: &ConformantProblem, steps: &[usize], states: &[State]) -> Verdict {
    check_from_states(p, steps, |f| {
        let mut n = 0;
        for s in states {
            n += 1;
            if !f(s) {
                break;
            }
        }
        Ok(n)
    })
    .expect("explicit state lists cannot exceed a cap")
}

fn check_from_states(
    p: &ConformantProblem,
    steps: &[usize],
    source: impl FnOnce(&mut dyn FnMut(&State) -> bool) -> Result<usize, VerifyError>,
) -> Result<Verdict, VerifyError> {
    let mut failure: Option<(State, Option<usize>, FailureKind)> = None;
    let checked = source(&mut |s| {
        match execute(p, s, steps) {
            Ok(finals) => {
                if finals.iter().all(|f| goal_holds(p, f)) {
                    return true;
                }
                failure = Some((s.clone(), None, FailureKind::Goal));
            }
            Err((i, kind)) => failure = Some((s.clone(), Some(i), kind)),
        }
        false
    })?;
    Ok(match failure {
        None => Verdict {
            conformant: true,
            checked_states: checked,
            failure: None,
            failed_step: None,
            counterexample: None,
        },
        Some((s, step, kind)) => Verdict {
            conformant: false,
            checked_states: checked,
            failure: Some(kind),
            failed_step: step,
            counterexample: Some(s.display(&p.fluents)),
        },
    })
}

/// Per-fluent knowledge in the 0-approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    True,
    False,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThreeValuedState(pub Vec<Value>);

impl ThreeValuedState {
    /// Literals entailed by `I` are known; everything else is unknown.
    pub fn initial(pi: &Pi) -> Self {
        let mut v = vec![Value::Unknown; pi.num_fluents()];
        for l in pi.units() {
            v[l.fluent()] = if l.is_positive() {
                Value::True
            } else {
                Value::False
            };
        }
        ThreeValuedState(v)
    }

    pub fn is_true(&self, l: Lit) -> bool {
        self.0[l.fluent()]
            == if l.is_positive() {
                Value::True
            } else {
                Value::False
            }
    }

    pub fn is_false(&self, l: Lit) -> bool {
        self.is_true(!l)
    }

    /// Known-true literals, sorted.
    pub fn known(&self) -> Vec<Lit> {
        let mut out = Vec::new();
        for (f, v) in self.0.iter().enumerate() {
            match v {
                Value::True => out.push(Lit::pos(f)),
                Value::False => out.push(Lit::neg(f)),
                Value::Unknown => {}
            }
        }
        out
    }

    /// Progression; `None` when preconditions are not known or when the
    /// update would make a literal and its complement true.
    pub fn progress(&self, a: &Action) -> Option<ThreeValuedState> {
        if !a.pre.iter().all(|&l| self.is_true(l)) {
            return None;
        }
        let n = self.0.len();
        let mut next = vec![Value::Unknown; n];
        for (f, slot) in next.iter_mut().enumerate() {
            let pos = self.next_true(a, Lit::pos(f));
            let neg = self.next_true(a, Lit::neg(f));
            *slot = match (pos, neg) {
                (true, true) => return None,
                (true, false) => Value::True,
                (false, true) => Value::False,
                (false, false) => Value::Unknown,
            };
        }
        Some(ThreeValuedState(next))
    }

    fn next_true(&self, a: &Action, l: Lit) -> bool {
        let supported = a
            .rules
            .iter()
            .any(|r| r.effect == l && r.condition.iter().all(|&c| self.is_true(c)));
        let persists = self.is_true(l)
            && a.rules
                .iter()
                .filter(|r| r.effect == !l)
                .all(|r| r.condition.iter().any(|&c| self.is_false(c)));
        supported || persists
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroApproxVerdict {
    pub valid: bool,
    pub failed_step: Option<usize>,
}

/// Plan validity under the 0-approximation.
pub fn zero_approx_run(p: &ConformantProblem, pi: &Pi, steps: &[usize]) -> ZeroApproxVerdict {
    let mut b = ThreeValuedState::initial(pi);
    for (i, &a) in steps.iter().enumerate() {
        match b.progress(&p.actions[a]) {
            Some(next) => b = next,
            None => {
                return ZeroApproxVerdict {
                    valid: false,
                    failed_step: Some(i),
                }
            }
        }
    }
    let valid = p.goal.iter().all(|&g| b.is_true(g))
        && p.goal_clauses
            .iter()
            .all(|c| c.lits().iter().any(|&l| b.is_true(l)));
    ZeroApproxVerdict {
        valid,
        failed_step: None,
    }
}

/// Shortest conformant plan by breadth-first search over belief states,
/// up to `depth_cap` steps.
pub fn belief_bfs(
    p: &ConformantProblem,
    depth_cap: usize,
    cap: usize,
) -> Result<Option<Vec<String>>, VerifyError> {
    let mut b0 = initial_states(p, cap)?;
    b0.sort();
    if b0.iter().all(|s| goal_holds(p, s)) {
        return Ok(Some(Vec::new()));
    }
    let mut beliefs: Vec<Vec<State>> = vec![b0.clone()];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX)];
    let mut seen: HashMap<Vec<State>, usize> = HashMap::new();
    seen.insert(b0, 0);
    let mut queue: VecDeque<(usize, usize)> = VecDeque::from([(0, 0)]);
    while let Some((id, depth)) = queue.pop_front() {
        if depth == depth_cap {
            continue;
        }
        for (ai, a) in p.actions.iter().enumerate() {
            let Some(next) = progress_belief(&beliefs[id], a) else {
                continue;
            };
            if seen.contains_key(&next) {
                continue;
            }
            let nid = beliefs.len();
            let done = next.iter().all(|s| goal_holds(p, s));
            seen.insert(next.clone(), nid);
            beliefs.push(next);
            parent.push((id, ai));
            if done {
                let mut steps = Vec::new();
                let mut cur = nid;
                while parent[cur].0 != usize::MAX {
                    steps.push(p.actions[parent[cur].1].name.clone());
                    cur = parent[cur].0;
                }
                steps.reverse();
                return Ok(Some(steps));
            }
            queue.push_back((nid, depth + 1));
        }
    }
    Ok(None)
}

/// Exact belief progression; `None` if `a` fails in some state.
pub fn progress_belief(b: &[State], a: &Action) -> Option<Vec<State>> {
    let mut out = Vec::with_capacity(b.len());
    for s in b {
        out.extend(successors(s, a).ok()?);
    }
    out.sort();
    out.dedup();
    Some(out)
}

/// `rel(s, L) = {L' ∈ s | L' ⟶ L}`.
pub fn rel_state(s: &State, l: Lit, rel: &Relevance) -> Vec<Lit> {
    let to = rel.relevant_to(l);
    s.lits()
        .into_iter()
        .filter(|x| to.contains(x.code()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub states: Vec<State>,
    /// `(L, t, index into states)` for every critical state chosen.
    pub provenance: Vec<(Lit, Tag, usize)>,
}

/// Collects one state `s[t, L]` with `rel(s, L) ⊆ t*` for each
/// precondition or goal literal `L` and each tag `t` of a merge covering
/// `L`. Literals with no relevant uncertainty contribute a state for the
/// empty tag.
pub fn build_basis(
    p: &ConformantProblem,
    an: &Analysis,
    spec: &TranslationSpec,
) -> Result<Basis, VerifyError> {
    let mut states: Vec<State> = Vec::new();
    let mut provenance = Vec::new();
    let mut index: HashSet<State> = HashSet::new();
    for l in p.precondition_and_goal_literals() {
        let rc = an.relevant_clauses(l);
        let tags: Vec<Tag> = if rc.clauses.is_empty() {
            vec![Vec::new()]
        } else {
            spec.merges_for(l)
                .map(|m| spec.merge_tags(m))
                .find(|tags| satisfies(tags, &rc.clauses, &an.pi))
                .ok_or_else(|| VerifyError::NotCovering(p.lit_name(l)))?
        };
        for t in tags {
            let s = critical_state(p, an, l, &t)?;
            if index.insert(s.clone()) {
                states.push(s.clone());
            }
            let at = states
                .iter()
                .position(|x| *x == s)
                .expect("state was just recorded");
            provenance.push((l, t, at));
        }
    }
    Ok(Basis { states, provenance })
}

/// First possible initial state making `t` true and every literal relevant
/// to `l` outside `t*` false.
pub fn critical_state(
    p: &ConformantProblem,
    an: &Analysis,
    l: Lit,
    t: &[Lit],
) -> Result<State, VerifyError> {
    let star = an.pi.closure(t);
    let mut forced: Vec<Clause> = t.iter().map(|&x| Clause::unit(x)).collect();
    for x in an.relevance.relevant_to_lits(l) {
        if star.binary_search(&x).is_err() {
            forced.push(Clause::unit(!x));
        }
    }
    forced.extend(p.init.iter().cloned());
    let n = p.num_fluents();
    let vars: Vec<Fluent> = (0..n).collect();
    let mut found = None;
    let _ = enumerate_models(&vars, &forced, Some(&an.pi), usize::MAX, &mut |m| {
        found = Some(State::from_lits(n, m));
        false
    });
    found.ok_or_else(|| VerifyError::BasisStateNotFound {
        literal: p.lit_name(l),
        tag: t.iter().map(|&x| p.lit_name(x)).collect(),
    })
}
