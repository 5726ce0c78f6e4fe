//! Compilation of nondeterministic effects into deterministic copies over
//! hidden fluents.

use super::RESET_PREFIX;
use crate::model::{Action, Clause, ConformantProblem, Fluent, Lit, Rule};

/// Knowledge-erasing effects to attach to a reset action after translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResetSpec {
    pub action: String,
    /// Hidden fluents of the copy being re-enabled.
    pub hidden: Vec<Fluent>,
    /// Fluents the reset action sets itself.
    pub own: Vec<Fluent>,
}

#[derive(Clone, Debug)]
pub struct NondetCompilation {
    pub problem: ConformantProblem,
    pub copies: usize,
    /// For each compiled action, the source action it stands for; `None`
    /// for reset actions.
    pub origin: Vec<Option<usize>>,
    pub resets: Vec<ResetSpec>,
}

impl NondetCompilation {
    /// Maps a plan over the compiled problem back onto source action names,
    /// dropping resets.
    pub fn source_plan(&self, source: &ConformantProblem, steps: &[String]) -> Vec<String> {
        steps
            .iter()
            .filter_map(|s| {
                let i = self.problem.action_index(s)?;
                self.origin[i].map(|o| source.actions[o].name.clone())
            })
            .collect()
    }
}

/// Each action `a` with effects `C → oneof(S_1, …, S_m)` becomes `copies`
/// deterministic actions `a_k` with rules `C, h^k_i → S_i`, a fresh
/// `oneof(h^k_1, …, h^k_m)` in `I`, and a precondition `enabled(a_k)` that
/// `a_k` deletes. A `reset` action per copy re-adds `enabled(a_k)`.
pub fn nondet_compile(p: &ConformantProblem, copies: usize) -> NondetCompilation {
    assert!(copies >= 1, "at least one copy is required");
    let mut out = ConformantProblem {
        name: p.name.clone(),
        fluents: p.fluents.clone(),
        init: p.init.clone(),
        actions: Vec::new(),
        goal: p.goal.clone(),
        goal_clauses: p.goal_clauses.clone(),
    };
    let mut origin = Vec::new();
    let mut resets = Vec::new();
    for (ai, a) in p.actions.iter().enumerate() {
        if a.is_deterministic() {
            out.actions.push(a.clone());
            origin.push(Some(ai));
            continue;
        }
        for k in 1..=copies {
            let copy = format!("{}__c{}", a.name, k);
            let enabled = push_fluent(&mut out, format!("enabled__{copy}"));
            out.init.push(Clause::unit(Lit::pos(enabled)));
            let mut pre = a.pre.clone();
            pre.push(Lit::pos(enabled));
            let mut rules = a.rules.clone();
            rules.push(Rule::new(vec![], Lit::neg(enabled)));
            let mut hidden = Vec::new();
            for (ei, e) in a.nondet.iter().enumerate() {
                let group: Vec<Fluent> = (0..e.outcomes.len())
                    .map(|oi| push_fluent(&mut out, format!("hidden__{copy}__e{ei}__o{oi}")))
                    .collect();
                add_oneof(&mut out.init, &group);
                for (outcome, &h) in e.outcomes.iter().zip(&group) {
                    for &l in outcome {
                        let mut cond = e.condition.clone();
                        cond.push(Lit::pos(h));
                        rules.push(Rule::new(cond, l));
                    }
                }
                hidden.extend(group);
            }
            out.actions.push(Action::new(copy.clone(), pre, rules));
            origin.push(Some(ai));

            let reset = format!("{RESET_PREFIX}{copy}");
            out.actions.push(Action::new(
                reset.clone(),
                vec![],
                vec![Rule::new(vec![], Lit::pos(enabled))],
            ));
            origin.push(None);
            resets.push(ResetSpec {
                action: reset,
                hidden,
                own: vec![enabled],
            });
        }
    }
    NondetCompilation {
        problem: out,
        copies,
        origin,
        resets,
    }
}

fn push_fluent(p: &mut ConformantProblem, name: String) -> Fluent {
    p.fluents.push(name);
    p.fluents.len() - 1
}

/// `x_1 ∨ … ∨ x_n` plus `¬x_i ∨ ¬x_j` for `i < j`.
pub fn add_oneof(init: &mut Vec<Clause>, group: &[Fluent]) {
    if group.len() == 1 {
        init.push(Clause::unit(Lit::pos(group[0])));
        return;
    }
    init.push(Clause::new(group.iter().map(|&f| Lit::pos(f)).collect()));
    for (i, &x) in group.iter().enumerate() {
        for &y in &group[i + 1..] {
            init.push(Clause::new(vec![Lit::neg(x), Lit::neg(y)]));
        }
    }
}
