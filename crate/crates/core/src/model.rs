//! Ground problem representation: literals, rules, actions, conformant and
//! classical problems, states, plans, and exact state progression.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

/// Index of a ground fluent inside its problem.
pub type Fluent = usize;

/// A fluent literal, packed as `fluent * 2 + negated`.
///
/// The positive literal of a fluent sorts immediately before its negation,
/// so sorted literal vectors group the two polarities of a fluent together.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Lit(u32);

impl Lit {
    pub fn new(fluent: Fluent, positive: bool) -> Self {
        Lit((fluent as u32) << 1 | u32::from(!positive))
    }

    pub fn pos(fluent: Fluent) -> Self {
        Lit::new(fluent, true)
    }

    pub fn neg(fluent: Fluent) -> Self {
        Lit::new(fluent, false)
    }

    pub fn from_code(code: usize) -> Self {
        Lit(code as u32)
    }

    /// Dense index in `0..2 * num_fluents`.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn fluent(self) -> Fluent {
        (self.0 >> 1) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn complement(self) -> Self {
        Lit(self.0 ^ 1)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        self.complement()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.fluent())
        } else {
            write!(f, "-{}", self.fluent())
        }
    }
}

/// Sorts and deduplicates a literal vector in place.
pub fn normalize_lits(lits: &mut Vec<Lit>) {
    lits.sort_unstable();
    lits.dedup();
}

/// True if the (sorted) literal slice contains a complementary pair.
pub fn has_complementary_pair(sorted: &[Lit]) -> bool {
    sorted
        .windows(2)
        .any(|w| w[0].fluent() == w[1].fluent() && w[0] != w[1])
}

/// A disjunction of literals, kept sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(mut lits: Vec<Lit>) -> Self {
        normalize_lits(&mut lits);
        Clause(lits)
    }

    pub fn unit(lit: Lit) -> Self {
        Clause(vec![lit])
    }

    pub fn tautology(fluent: Fluent) -> Self {
        Clause(vec![Lit::pos(fluent), Lit::neg(fluent)])
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.0.len() == 1
    }

    pub fn is_tautology(&self) -> bool {
        has_complementary_pair(&self.0)
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    /// `self ⊆ other`.
    pub fn subsumes(&self, other: &Clause) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for l in &self.0 {
            for o in it.by_ref() {
                if o == l {
                    continue 'outer;
                }
                if o > l {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn satisfied_by(&self, state: &State) -> bool {
        self.0.iter().any(|&l| state.holds(l))
    }
}

/// A conditional effect `condition → effect`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Rule {
    pub condition: Vec<Lit>,
    pub effect: Lit,
}

impl Rule {
    pub fn new(mut condition: Vec<Lit>, effect: Lit) -> Self {
        normalize_lits(&mut condition);
        Rule { condition, effect }
    }
}

/// A nondeterministic effect `condition → oneof(outcome_1, ..., outcome_m)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NondetEffect {
    pub condition: Vec<Lit>,
    pub outcomes: Vec<Vec<Lit>>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Action {
    pub name: String,
    pub pre: Vec<Lit>,
    pub rules: Vec<Rule>,
    /// Empty for deterministic actions.
    pub nondet: Vec<NondetEffect>,
}

impl Action {
    pub fn new(name: impl Into<String>, mut pre: Vec<Lit>, rules: Vec<Rule>) -> Self {
        normalize_lits(&mut pre);
        Action {
            name: name.into(),
            pre,
            rules,
            nondet: Vec::new(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.nondet.is_empty()
    }
}

/// `P = <F, I, O, G>`: fluents, initial clauses, ground actions, goal.
///
/// Fluents not constrained by `init` are unknown. Non-unit goal clauses are
/// kept apart in `goal_clauses` until they are compiled away.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ConformantProblem {
    pub name: String,
    pub fluents: Vec<String>,
    pub init: Vec<Clause>,
    pub actions: Vec<Action>,
    pub goal: Vec<Lit>,
    pub goal_clauses: Vec<Clause>,
}

impl ConformantProblem {
    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn lit_name(&self, lit: Lit) -> String {
        lit_display(&self.fluents, lit)
    }

    pub fn fluent_index(&self, name: &str) -> Option<Fluent> {
        self.fluents.iter().position(|f| f == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        find_action(&self.actions, name)
    }

    pub fn is_deterministic(&self) -> bool {
        self.actions.iter().all(Action::is_deterministic)
    }

    /// Precondition and goal literals, sorted and deduplicated.
    pub fn precondition_and_goal_literals(&self) -> Vec<Lit> {
        let mut out: Vec<Lit> = self.goal.clone();
        for a in &self.actions {
            out.extend_from_slice(&a.pre);
        }
        normalize_lits(&mut out);
        out
    }

    /// Checks that every literal ranges over the declared fluents.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let n = self.num_fluents();
        let ok = |l: &Lit| l.fluent() < n;
        for c in &self.init {
            if !c.lits().iter().all(ok) {
                return Err(format!("init clause {c:?} mentions an undeclared fluent"));
            }
        }
        for a in &self.actions {
            let rules_ok = a
                .rules
                .iter()
                .all(|r| ok(&r.effect) && r.condition.iter().all(ok));
            let nd_ok = a
                .nondet
                .iter()
                .all(|e| e.condition.iter().all(ok) && e.outcomes.iter().flatten().all(ok));
            if !a.pre.iter().all(ok) || !rules_ok || !nd_ok {
                return Err(format!("action {} mentions an undeclared fluent", a.name));
            }
            for r in &a.rules {
                if has_complementary_pair(&r.condition) {
                    return Err(format!(
                        "action {} has a rule with a contradictory condition",
                        a.name
                    ));
                }
            }
        }
        if !self.goal.iter().all(ok) || !self.goal_clauses.iter().flat_map(|c| c.lits()).all(ok) {
            return Err("goal mentions an undeclared fluent".into());
        }
        Ok(())
    }
}

/// Human-readable literal, `p` or `-p`.
pub fn lit_display(fluents: &[String], lit: Lit) -> String {
    let name = &fluents[lit.fluent()];
    if lit.is_positive() {
        name.clone()
    } else {
        format!("-{name}")
    }
}

/// Matches an action by exact name, then by a relaxed comparison that
/// accepts PDDL-style `(pick l1)` and sanitized `pick_l1` spellings.
pub fn find_action(actions: &[Action], name: &str) -> Option<usize> {
    if let Some(i) = actions.iter().position(|a| a.name == name) {
        return Some(i);
    }
    let key = crate::names::sanitize(&crate::names::plan_step_to_name(name)).to_lowercase();
    actions
        .iter()
        .position(|a| crate::names::sanitize(&a.name).to_lowercase() == key)
}

/// A fully known problem: single initial state, some actions flagged as
/// merges (or other auxiliary inference actions absent from the source
/// problem).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ClassicalProblem {
    pub name: String,
    pub fluents: Vec<String>,
    /// Literals true initially; fluents not listed positively are false.
    pub init: Vec<Lit>,
    pub actions: Vec<Action>,
    pub goal: Vec<Lit>,
    pub merge_flags: Vec<bool>,
}

impl ClassicalProblem {
    pub fn num_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn initial_state(&self) -> State {
        let mut s = State::empty(self.num_fluents());
        for l in &self.init {
            s.set(l.fluent(), l.is_positive());
        }
        s
    }

    pub fn is_merge(&self, action: usize) -> bool {
        self.merge_flags.get(action).copied().unwrap_or(false)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        find_action(&self.actions, name)
    }

    pub fn lit_name(&self, lit: Lit) -> String {
        lit_display(&self.fluents, lit)
    }

    pub fn num_effects(&self) -> usize {
        self.actions.iter().map(|a| a.rules.len()).sum()
    }

    /// Builds a plan from action indices, carrying the merge flags along.
    pub fn plan_from_indices(&self, steps: &[usize]) -> Plan {
        Plan {
            steps: steps
                .iter()
                .map(|&i| self.actions[i].name.clone())
                .collect(),
            merge_mask: steps.iter().map(|&i| self.is_merge(i)).collect(),
        }
    }
}

/// A complete, consistent state: the set of true fluents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(FixedBitSet);

impl State {
    pub fn empty(num_fluents: usize) -> Self {
        State(FixedBitSet::with_capacity(num_fluents))
    }

    pub fn from_true_fluents(
        num_fluents: usize,
        fluents: impl IntoIterator<Item = Fluent>,
    ) -> Self {
        let mut s = State::empty(num_fluents);
        for f in fluents {
            s.0.insert(f);
        }
        s
    }

    /// Builds a state from literals; fluents not mentioned are false.
    pub fn from_lits(num_fluents: usize, lits: &[Lit]) -> Self {
        let mut s = State::empty(num_fluents);
        for l in lits {
            s.set(l.fluent(), l.is_positive());
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    pub fn is_true(&self, f: Fluent) -> bool {
        self.0.contains(f)
    }

    pub fn holds(&self, l: Lit) -> bool {
        self.0.contains(l.fluent()) == l.is_positive()
    }

    pub fn holds_all(&self, lits: &[Lit]) -> bool {
        lits.iter().all(|&l| self.holds(l))
    }

    pub fn set(&mut self, f: Fluent, value: bool) {
        self.0.set(f, value);
    }

    pub fn apply_lit(&mut self, l: Lit) {
        self.0.set(l.fluent(), l.is_positive());
    }

    /// The literal set view: one literal per fluent.
    pub fn lits(&self) -> Vec<Lit> {
        (0..self.len())
            .map(|f| Lit::new(f, self.is_true(f)))
            .collect()
    }

    pub fn true_fluents(&self) -> impl Iterator<Item = Fluent> + '_ {
        self.0.ones()
    }

    pub fn display(&self, fluents: &[String]) -> Vec<String> {
        self.lits()
            .into_iter()
            .map(|l| lit_display(fluents, l))
            .collect()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}

/// An action sequence; merge-flagged steps are inference steps of a
/// translation and are dropped when mapping back to the source problem.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct Plan {
    pub steps: Vec<String>,
    pub merge_mask: Vec<bool>,
}

impl Plan {
    pub fn new(steps: Vec<String>) -> Self {
        let merge_mask = vec![false; steps.len()];
        Plan { steps, merge_mask }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn stripped(&self) -> Plan {
        Plan::new(
            self.steps
                .iter()
                .zip(&self.merge_mask)
                .filter(|(_, &m)| !m)
                .map(|(s, _)| s.clone())
                .collect(),
        )
    }

    pub fn stripped_len(&self) -> usize {
        self.merge_mask.iter().filter(|&&m| !m).count()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("precondition {literal:?} of action {action} does not hold")]
    PreconditionViolation { action: String, literal: Lit },
    #[error("action {action} both adds and deletes fluent {fluent}")]
    InconsistentResult { action: String, fluent: Fluent },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RestrictError {
    #[error("state violates initial clause {0:?}")]
    NotAPossibleInitialState(Clause),
}

/// Computes `Add(a, s)`, or the first complementary pair it contains.
pub fn add_set(s: &State, a: &Action) -> Result<Vec<Lit>, ApplyError> {
    let mut add: Vec<Lit> = a
        .rules
        .iter()
        .filter(|r| s.holds_all(&r.condition))
        .map(|r| r.effect)
        .collect();
    normalize_lits(&mut add);
    if let Some(w) = add.windows(2).find(|w| w[0].fluent() == w[1].fluent()) {
        return Err(ApplyError::InconsistentResult {
            action: a.name.clone(),
            fluent: w[0].fluent(),
        });
    }
    Ok(add)
}

/// `s_a = (s \ Del(a, s)) ∪ Add(a, s)`.
///
/// Nondeterministic effects are ignored here; they are compiled away before
/// any progression happens.
pub fn apply(s: &State, a: &Action) -> Result<State, ApplyError> {
    if let Some(&l) = a.pre.iter().find(|&&l| !s.holds(l)) {
        return Err(ApplyError::PreconditionViolation {
            action: a.name.clone(),
            literal: l,
        });
    }
    let add = add_set(s, a)?;
    let mut next = s.clone();
    for l in add {
        next.apply_lit(l);
    }
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub applicable: bool,
    pub final_state: State,
    pub achieved_goal: bool,
    /// Index of the first step that could not be executed.
    pub failed_step: Option<usize>,
    /// Set when the failing step fired conflicting effects.
    pub conflict: bool,
}

/// Executes action indices from `state`, stopping at the first failure.
pub fn run_actions(k: &ClassicalProblem, state: State, steps: &[usize]) -> RunOutcome {
    let mut s = state;
    for (i, &a) in steps.iter().enumerate() {
        match apply(&s, &k.actions[a]) {
            Ok(next) => s = next,
            Err(e) => {
                return RunOutcome {
                    applicable: false,
                    final_state: s,
                    achieved_goal: false,
                    failed_step: Some(i),
                    conflict: matches!(e, ApplyError::InconsistentResult { .. }),
                }
            }
        }
    }
    let achieved_goal = s.holds_all(&k.goal);
    RunOutcome {
        applicable: true,
        final_state: s,
        achieved_goal,
        failed_step: None,
        conflict: false,
    }
}

/// Runs a plan by action name; an unknown name makes the plan inapplicable.
pub fn run_plan(k: &ClassicalProblem, plan: &Plan) -> RunOutcome {
    let names: HashMap<&str, usize> = k
        .actions
        .iter()
        .enumerate()
        .map(|(i, a)| (a.name.as_str(), i))
        .collect();
    let mut steps = Vec::with_capacity(plan.len());
    for (i, name) in plan.steps.iter().enumerate() {
        match names
            .get(name.as_str())
            .copied()
            .or_else(|| k.action_index(name))
        {
            Some(a) => steps.push(a),
            None => {
                let prefix = run_actions(k, k.initial_state(), &steps);
                return RunOutcome {
                    applicable: false,
                    failed_step: Some(prefix.failed_step.unwrap_or(i)),
                    achieved_goal: false,
                    ..prefix
                };
            }
        }
    }
    run_actions(k, k.initial_state(), &steps)
}

/// `P/s`: the classical problem whose initial state is fixed to `s`.
pub fn restrict(p: &ConformantProblem, s: &State) -> Result<ClassicalProblem, RestrictError> {
    if let Some(c) = p.init.iter().find(|c| !c.satisfied_by(s)) {
        return Err(RestrictError::NotAPossibleInitialState(c.clone()));
    }
    Ok(ClassicalProblem {
        name: p.name.clone(),
        fluents: p.fluents.clone(),
        init: s.lits(),
        actions: p.actions.clone(),
        goal: p.goal.clone(),
        merge_flags: vec![false; p.actions.len()],
    })
}
