//! Worked examples across modules, checked through the public API.

mod common;

use common::*;
use conformant::analysis::{c_i, consistency_check, cover, satisfies};
use conformant::model::{
    restrict, run_plan, Action, Clause, ConformantProblem, Lit, NondetEffect, Plan, Rule, State,
};
use conformant::pddl::emit_classical;
use conformant::pi::{Pi, DEFAULT_PI_CAP};
use conformant::pipeline::{self, PipelineError, PipelineOptions, Scheme};
use conformant::planner::{bfs_optimal, solve, Budget, SolveOutcome};
use conformant::translate::{
    cnf_goal_compile, k0, ki_spec, kmodels_spec, ks0_spec, ktm, nondet_compile, MergeTargets,
    Provenance, TranslateOptions, TranslationSpec,
};
use conformant::verify::{
    belief_bfs, build_basis, conformant_check, initial_states, rel_state, resolve_steps,
    zero_approx_run, FailureKind, DEFAULT_STATE_CAP,
};

const PG: MergeTargets = MergeTargets::PreconditionsAndGoals;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `I = {x1 ∨ … ∨ xn}`, `a_i: x_i → g`, `G = {g}`.
fn disjunction_toy(n: usize) -> ConformantProblem {
    let g = n;
    ConformantProblem {
        name: format!("toy-{n}"),
        fluents: (1..=n)
            .map(|i| format!("x{i}"))
            .chain(["g".to_string()])
            .collect(),
        init: vec![
            Clause::new((0..n).map(Lit::pos).collect()),
            Clause::unit(Lit::neg(g)),
        ],
        actions: (0..n)
            .map(|i| {
                Action::new(
                    format!("a{}", i + 1),
                    vec![],
                    vec![Rule::new(vec![Lit::pos(i)], Lit::pos(g))],
                )
            })
            .collect(),
        goal: vec![Lit::pos(g)],
        goal_clauses: vec![],
    }
}

fn oneof_clauses(vars: &[usize]) -> Vec<Clause> {
    let mut init = vec![Clause::new(vars.iter().map(|&v| Lit::pos(v)).collect())];
    for (i, &x) in vars.iter().enumerate() {
        for &y in &vars[i + 1..] {
            init.push(Clause::new(vec![Lit::neg(x), Lit::neg(y)]));
        }
    }
    init
}

#[test]
fn restricting_the_k0_example() {
    let p = k0_example();
    let s = State::from_lits(3, &[Lit::neg(0), Lit::pos(1), Lit::neg(2)]);
    let k = restrict(&p, &s).unwrap();
    assert_eq!(k.initial_state(), s);
    assert!(run_plan(&k, &Plan::new(names(&["a", "b"]))).achieved_goal);
    let s2 = State::from_lits(3, &[Lit::pos(0), Lit::pos(1), Lit::neg(2)]);
    let k2 = restrict(&p, &s2).unwrap();
    let out = run_plan(&k2, &Plan::new(names(&["a"])));
    assert!(out.applicable && !out.achieved_goal);
}

#[test]
fn pick_drop_restricted_to_l1_needs_pick_l1_for_hold() {
    let p = pick_drop();
    let s = State::from_lits(
        4,
        &[
            lit(&p, "at(l1)"),
            lit(&p, "-at(l2)"),
            lit(&p, "-at(l3)"),
            lit(&p, "-hold"),
        ],
    );
    let mut k = restrict(&p, &s).unwrap();
    k.goal = vec![lit(&p, "hold")];
    let plan = bfs_optimal(&k, 2).unwrap();
    assert_eq!(plan.steps, ["pick(l1)"]);
}

#[test]
fn k0_of_the_example_has_six_effects() {
    let p = k0_example();
    let an = analyse(&p);
    let t = k0(&p, &an).unwrap();
    assert_eq!(t.classical.num_effects(), 6);
    assert_eq!(t.classical.num_fluents(), 6);
    assert_eq!(t.classical.init.len(), 1);
    let (dom, _) = emit_classical(&t.classical);
    assert!(dom.contains("(when (K_q) (K_r))"), "{dom}");
    assert!(!dom.contains("merge__"));
}

#[test]
fn ktm_with_only_the_empty_tag_is_k0() {
    let p = pick_drop();
    let an = analyse(&p);
    let a = k0(&p, &an).unwrap();
    let b = ktm(
        &p,
        &an,
        &TranslationSpec::empty(Provenance::Custom),
        &TranslateOptions::default(),
    )
    .unwrap();
    assert_eq!(a.classical, b.classical);
}

#[test]
fn ks0_tag_counts() {
    let p = pick_drop();
    let an = analyse(&p);
    assert_eq!(
        ks0_spec(&p, &an, DEFAULT_STATE_CAP).unwrap().tags.len(),
        1 + 2
    );
    let toy = disjunction_toy(3);
    let an = analyse(&toy);
    assert_eq!(
        ks0_spec(&toy, &an, DEFAULT_STATE_CAP).unwrap().tags.len(),
        1 + 7
    );
}

#[test]
fn kmodels_of_a_oneof_has_one_tag_per_member() {
    let m = 4;
    let g = m;
    let p = ConformantProblem {
        fluents: (0..=m).map(|i| format!("f{i}")).collect(),
        init: [
            oneof_clauses(&(0..m).collect::<Vec<_>>()),
            vec![Clause::unit(Lit::neg(g))],
        ]
        .concat(),
        actions: (0..m)
            .map(|i| {
                Action::new(
                    format!("a{i}"),
                    vec![],
                    vec![Rule::new(vec![Lit::pos(i)], Lit::pos(g))],
                )
            })
            .collect(),
        goal: vec![Lit::pos(g)],
        ..Default::default()
    };
    let an = analyse(&p);
    let spec = kmodels_spec(&p, &an, 4096, PG).unwrap();
    assert_eq!(spec.merges.len(), 1);
    assert_eq!(spec.merges[0].tags.len(), m);
}

#[test]
fn k1_of_the_toy_is_one_linear_merge() {
    for n in [3, 6, 9] {
        let p = disjunction_toy(n);
        let an = analyse(&p);
        let spec = ki_spec(&p, &an, 1, PG);
        assert_eq!(spec.merges.len(), 1);
        assert_eq!(spec.merges[0].tags.len(), n);
        let t = ktm(&p, &an, &spec, &TranslateOptions::default()).unwrap();
        let plan = bfs_optimal(&t.classical, n).unwrap();
        assert_eq!(plan.stripped_len(), n);
    }
}

#[test]
fn static_oneof_yields_static_disjunction_rules() {
    // x1, x2 never change; `a` needs x2 known, which only follows from ¬x1.
    let p = ConformantProblem {
        fluents: vec!["x1".into(), "x2".into(), "g".into()],
        init: [oneof_clauses(&[0, 1]), vec![Clause::unit(Lit::neg(2))]].concat(),
        actions: vec![Action::new(
            "a",
            vec![],
            vec![Rule::new(vec![Lit::pos(1)], Lit::pos(2))],
        )],
        goal: vec![Lit::pos(2)],
        ..Default::default()
    };
    let an = analyse(&p);
    let t = ktm(
        &p,
        &an,
        &TranslationSpec::empty(Provenance::K0),
        &TranslateOptions::optimized(),
    )
    .unwrap();
    let k = &t.classical;
    let aux = &k.actions[k.action_index("aux__static_disjunctions").unwrap()];
    let kx2 = t.atom_for_tag(Lit::pos(1), &[]).unwrap();
    let knx1 = t.atom_for_tag(Lit::neg(0), &[]).unwrap();
    assert!(aux
        .rules
        .iter()
        .any(|r| r.condition == [Lit::pos(knx1)] && r.effect == Lit::pos(kx2)));
}

#[test]
fn cnf_goal_adds_one_goal_atom_and_one_action() {
    let mut p = k0_example();
    p.goal = vec![];
    p.goal_clauses = vec![Clause::new(vec![Lit::pos(0), Lit::pos(2)])];
    let q = cnf_goal_compile(&p);
    assert_eq!(q.actions.len(), p.actions.len() + 1);
    let achieve = q.actions.last().unwrap();
    // Two rules for the disjuncts, one consuming the enabling fluent.
    assert_eq!(achieve.rules.len(), 3);
    assert_eq!(q.goal.len(), 1);
    assert!(q.goal_clauses.is_empty());
}

#[test]
fn nondet_move_compiles_to_one_copy_and_one_reset() {
    let p = ConformantProblem {
        fluents: vec!["up".into(), "right".into()],
        init: vec![Clause::unit(Lit::neg(0)), Clause::unit(Lit::neg(1))],
        actions: vec![Action {
            nondet: vec![NondetEffect {
                condition: vec![],
                outcomes: vec![vec![Lit::pos(0)], vec![Lit::pos(1)]],
            }],
            ..Action::new("move", vec![], vec![])
        }],
        goal: vec![],
        ..Default::default()
    };
    let nc = nondet_compile(&p, 1);
    let hidden = nc
        .problem
        .fluents
        .iter()
        .filter(|f| f.starts_with("hidden__"))
        .count();
    let resets = nc
        .problem
        .actions
        .iter()
        .filter(|a| a.name.starts_with("reset__"))
        .count();
    assert_eq!(hidden, 2);
    assert_eq!(resets, 1);
    assert_eq!(nc.problem.actions.len(), 2);
}

#[test]
fn c_i_of_the_k0_example() {
    let p = k0_example();
    let pi = Pi::compute(3, &p.init, DEFAULT_PI_CAP).unwrap();
    let ci = c_i(&pi);
    assert!(ci.contains(&Clause::tautology(0)));
    assert!(ci.contains(&Clause::tautology(2)));
    let classical = Pi::compute(
        2,
        &[Clause::unit(Lit::pos(0)), Clause::unit(Lit::neg(1))],
        10,
    )
    .unwrap();
    assert!(c_i(&classical).is_empty());
    // Fluents without a unit clause keep their tautology, but only the
    // disjunction is relevant to the goal of the toy problem.
    let x12 = Clause::new(vec![Lit::pos(0), Lit::pos(1)]);
    let two = Pi::compute(2, std::slice::from_ref(&x12), 10).unwrap();
    assert_eq!(
        c_i(&two),
        vec![Clause::tautology(0), x12.clone(), Clause::tautology(1)]
    );
    let an = analyse(&disjunction_toy(2));
    assert_eq!(an.relevant_clauses(Lit::pos(2)).clauses, vec![x12]);
}

#[test]
fn covers_and_satisfaction() {
    let pi = Pi::compute(2, &[], 10).unwrap();
    let taut = vec![Clause::tautology(0), Clause::tautology(1)];
    let m3 = cover(&taut, &pi);
    assert_eq!(m3.len(), 4);
    assert!(m3.iter().all(|t| t.len() == 2));
    assert!(satisfies(&m3, &taut, &pi));
    let m1 = cover(&taut[..1], &pi);
    assert_eq!(m1, vec![vec![Lit::pos(0)], vec![Lit::neg(0)]]);
    assert!(!satisfies(&m1, &taut, &pi));
    assert!(satisfies(&m1, &[], &pi));
}

#[test]
fn literal_widths() {
    let an = analyse(&disjunction_toy(4));
    assert_eq!(an.width_of_literal(Lit::pos(4), 4).unwrap().0, 1);
    // p, ¬p, q and ¬q are all relevant to g.
    let p = ConformantProblem {
        fluents: vec!["p".into(), "q".into(), "g".into()],
        init: vec![Clause::unit(Lit::neg(2))],
        actions: vec![
            Action::new(
                "a",
                vec![],
                vec![Rule::new(vec![Lit::pos(0), Lit::pos(1)], Lit::pos(2))],
            ),
            Action::new(
                "b",
                vec![],
                vec![Rule::new(vec![Lit::neg(0), Lit::neg(1)], Lit::pos(2))],
            ),
        ],
        goal: vec![Lit::pos(2)],
        ..Default::default()
    };
    let an = analyse(&p);
    assert_eq!(
        an.relevant_clauses(Lit::pos(2)).clauses,
        [Clause::tautology(0), Clause::tautology(1)]
    );
    assert_eq!(an.width_of_literal(Lit::pos(2), 2).unwrap().0, 2);
    assert_eq!(an.width(&p, 2).unwrap().width, 2);
    let classical = ConformantProblem {
        init: vec![
            Clause::unit(Lit::pos(0)),
            Clause::unit(Lit::pos(1)),
            Clause::unit(Lit::neg(2)),
        ],
        ..p
    };
    assert_eq!(analyse(&classical).width(&classical, 2).unwrap().width, 0);
}

#[test]
fn consistency_of_the_worked_examples() {
    for p in [k0_example(), pick_drop()] {
        let an = analyse(&p);
        assert!(an.consistent, "{}", p.name);
        assert!(consistency_check(&p, &an.mutex));
    }
}

#[test]
fn initial_state_counts() {
    assert_eq!(
        initial_states(&pick_drop(), DEFAULT_STATE_CAP)
            .unwrap()
            .len(),
        2
    );
    assert_eq!(
        initial_states(&disjunction_toy(4), DEFAULT_STATE_CAP)
            .unwrap()
            .len(),
        15
    );
    let classical = ConformantProblem {
        fluents: vec!["p".into()],
        init: vec![Clause::unit(Lit::pos(0))],
        ..Default::default()
    };
    assert_eq!(
        initial_states(&classical, DEFAULT_STATE_CAP).unwrap().len(),
        1
    );
}

#[test]
fn validating_the_pick_drop_plans() {
    let p = pick_drop();
    let pi1 = names(&["pick(l1)", "drop(l3)", "pick(l2)", "drop(l3)"]);
    let v = conformant_check(&p, &pi1, DEFAULT_STATE_CAP).unwrap();
    assert!(v.conformant);
    assert_eq!(v.checked_states, 2);
    let pi2 = names(&["pick(l1)", "pick(l2)", "drop(l3)"]);
    let v = conformant_check(&p, &pi2, DEFAULT_STATE_CAP).unwrap();
    assert!(!v.conformant);
    assert_eq!(v.failure, Some(FailureKind::Goal));
    assert!(v.counterexample.unwrap().contains(&"at(l1)".to_string()));
}

#[test]
fn empty_plan_with_entailed_goal_is_conformant() {
    let mut p = k0_example();
    p.goal = vec![Lit::pos(1)];
    assert!(
        conformant_check(&p, &[], DEFAULT_STATE_CAP)
            .unwrap()
            .conformant
    );
}

#[test]
fn zero_approximation_of_the_disjunctive_example() {
    // I = {p ∨ q}, a: p → q, G = {q}: conformant but not sanctioned.
    let p = ConformantProblem {
        fluents: vec!["p".into(), "q".into()],
        init: vec![Clause::new(vec![Lit::pos(0), Lit::pos(1)])],
        actions: vec![Action::new(
            "a",
            vec![],
            vec![Rule::new(vec![Lit::pos(0)], Lit::pos(1))],
        )],
        goal: vec![Lit::pos(1)],
        ..Default::default()
    };
    let pi = Pi::compute(2, &p.init, DEFAULT_PI_CAP).unwrap();
    assert!(
        conformant_check(&p, &names(&["a"]), DEFAULT_STATE_CAP)
            .unwrap()
            .conformant
    );
    assert!(!zero_approx_run(&p, &pi, &[0]).valid);
}

#[test]
fn belief_search_on_the_worked_examples() {
    assert_eq!(
        belief_bfs(&k0_example(), 4, DEFAULT_STATE_CAP)
            .unwrap()
            .unwrap(),
        ["a", "b"]
    );
    let plan = belief_bfs(&pick_drop(), 5, DEFAULT_STATE_CAP)
        .unwrap()
        .unwrap();
    assert_eq!(plan.len(), 4);
    assert!(
        conformant_check(&pick_drop(), &plan, DEFAULT_STATE_CAP)
            .unwrap()
            .conformant
    );
    let mut p = k0_example();
    p.goal = vec![Lit::neg(1)];
    assert_eq!(belief_bfs(&p, 4, DEFAULT_STATE_CAP).unwrap(), None);
}

#[test]
fn rel_of_a_toy_state() {
    let p = disjunction_toy(3);
    let an = analyse(&p);
    let s = State::from_lits(4, &[Lit::neg(0), Lit::pos(1), Lit::neg(2), Lit::neg(3)]);
    let rel = rel_state(&s, Lit::pos(3), &an.relevance);
    assert!(rel.contains(&Lit::pos(1)));
    assert!(!rel.contains(&Lit::pos(0)) && !rel.contains(&Lit::pos(2)));
}

#[test]
fn bases_of_the_worked_examples() {
    let toy = disjunction_toy(4);
    let an = analyse(&toy);
    let basis = build_basis(&toy, &an, &ki_spec(&toy, &an, 1, PG)).unwrap();
    assert_eq!(basis.states.len(), 4);
    for s in &basis.states {
        assert_eq!((0..4).filter(|&i| s.is_true(i)).count(), 1);
    }

    let pd = pick_drop();
    let an = analyse(&pd);
    let basis = build_basis(&pd, &an, &ki_spec(&pd, &an, 1, PG)).unwrap();
    let mut all = initial_states(&pd, DEFAULT_STATE_CAP).unwrap();
    let mut got = basis.states.clone();
    all.sort();
    got.sort();
    assert_eq!(got, all);

    let classical = ConformantProblem {
        fluents: vec!["p".into()],
        init: vec![Clause::unit(Lit::neg(0))],
        actions: vec![Action::new(
            "a",
            vec![],
            vec![Rule::new(vec![], Lit::pos(0))],
        )],
        goal: vec![Lit::pos(0)],
        ..Default::default()
    };
    let an = analyse(&classical);
    let basis = build_basis(&classical, &an, &ki_spec(&classical, &an, 1, PG)).unwrap();
    assert_eq!(basis.states, initial_states(&classical, 4).unwrap());
}

#[test]
fn planners_on_the_worked_examples() {
    let p = k0_example();
    let an = analyse(&p);
    let t = k0(&p, &an).unwrap();
    assert_eq!(bfs_optimal(&t.classical, 4).unwrap().steps, ["a", "b"]);
    let SolveOutcome::Plan(plan) = solve(&t.classical, Budget::default()).0 else {
        panic!()
    };
    assert_eq!(plan.steps, ["a", "b"]);

    let pd = pick_drop();
    let an = analyse(&pd);
    let t = ktm(
        &pd,
        &an,
        &ki_spec(&pd, &an, 1, PG),
        &TranslateOptions::default(),
    )
    .unwrap();
    let plan = bfs_optimal(&t.classical, 6).unwrap();
    assert_eq!(plan.stripped_len(), 4);
    let idx = resolve_steps(&pd, &plan.stripped().steps).unwrap();
    assert_eq!(idx.len(), 4);
}

#[test]
fn pipeline_reports() {
    let safe = generated("safe", &[10]);
    let opts = PipelineOptions {
        scheme: Some(Scheme::Ki(1)),
        ..Default::default()
    };
    let r = pipeline::solve(&safe, &opts).unwrap();
    assert_eq!(r.report.width.as_ref().unwrap().width, 1);
    assert!(r.report.warnings.is_empty());

    let sortnet = generated("sortnet", &[4]);
    let (_, report) = pipeline::translate(&sortnet, Scheme::Ki(1), &opts).unwrap();
    assert_eq!(report.width.as_ref().unwrap().width, 4);
    assert!(report.warnings.iter().any(|w| w.contains("completeness")));

    let ring = generated("ring", &[4]);
    let r = pipeline::solve(&ring, &PipelineOptions::default()).unwrap();
    assert!(r.report.validation.unwrap().conformant);
}

#[test]
fn unsatisfiable_goal_runs_the_whole_ladder() {
    let mut p = k0_example();
    p.goal = vec![Lit::neg(1)];
    match pipeline::solve(&p, &PipelineOptions::default()) {
        Err(PipelineError::NoPlanFound { report }) => {
            let schemes: Vec<&str> = report.stages.iter().map(|s| s.scheme.as_str()).collect();
            assert_eq!(schemes, ["ki:1", "kmodels"]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn inconsistent_problem_is_flagged() {
    let p = ConformantProblem {
        fluents: vec!["c".into(), "l".into()],
        init: vec![Clause::unit(Lit::pos(0))],
        actions: vec![Action::new(
            "a",
            vec![],
            vec![
                Rule::new(vec![Lit::pos(0)], Lit::pos(1)),
                Rule::new(vec![Lit::pos(0)], Lit::neg(1)),
            ],
        )],
        goal: vec![Lit::pos(1)],
        ..Default::default()
    };
    let (_, report) = pipeline::translate(&p, Scheme::K0, &PipelineOptions::default()).unwrap();
    assert_eq!(report.consistent, Some(false));
    assert!(!report.warnings.is_empty());
}
