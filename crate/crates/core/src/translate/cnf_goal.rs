//! Compilation of clausal goals into atomic ones.

use crate::model::{Action, Clause, ConformantProblem, Lit, Rule};

pub const GOAL_ACTION_PREFIX: &str = "goal__";

/// Replaces each non-unit goal clause `L_1 ∨ … ∨ L_m` by a fresh atom `G_C`
/// achieved by a new action with rules `L_i → G_C`. The action consumes a
/// fresh enabling fluent, so it runs at most once. Unit clauses become
/// plain goal literals.
pub fn cnf_goal_compile(p: &ConformantProblem) -> ConformantProblem {
    let mut out = p.clone();
    out.goal_clauses.clear();
    let mut k = 0;
    for c in &p.goal_clauses {
        if c.is_unit() {
            out.goal.push(c.lits()[0]);
            continue;
        }
        let g = out.fluents.len();
        out.fluents.push(format!("{GOAL_ACTION_PREFIX}sat{k}"));
        let enabled = out.fluents.len();
        out.fluents.push(format!("{GOAL_ACTION_PREFIX}enabled{k}"));
        out.init.push(Clause::unit(Lit::neg(g)));
        out.init.push(Clause::unit(Lit::pos(enabled)));
        let mut rules: Vec<Rule> = c
            .lits()
            .iter()
            .map(|&l| Rule::new(vec![l], Lit::pos(g)))
            .collect();
        rules.push(Rule::new(vec![], Lit::neg(enabled)));
        out.actions.push(Action::new(
            format!("{GOAL_ACTION_PREFIX}achieve{k}"),
            vec![Lit::pos(enabled)],
            rules,
        ));
        out.goal.push(Lit::pos(g));
        k += 1;
    }
    crate::model::normalize_lits(&mut out.goal);
    out
}

/// True for actions introduced by [`cnf_goal_compile`].
pub fn is_goal_action(name: &str) -> bool {
    name.starts_with(GOAL_ACTION_PREFIX)
}
