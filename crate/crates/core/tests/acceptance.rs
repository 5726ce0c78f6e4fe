//! Acceptance criteria, one PASS/FAIL line each. Runs as a custom harness
//! so that the lines come out in order and the process fails if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use conformant::analysis::Analysis;
use conformant::model::{apply, run_actions, Lit, Plan, State};
use conformant::pi::{Pi, PiError, DEFAULT_PI_CAP};
use conformant::pipeline::{self, PipelineOptions, Scheme};
use conformant::planner::{self, Budget, SolveOutcome};
use conformant::report::StageOutcome;
use conformant::translate::{
    is_inference_action, k0, ki_spec, kmodels_spec, ks0_spec, ktm, nondet_compile, MergeTargets,
    Provenance, TranslateOptions, Translation, TranslationSpec, MERGE_PREFIX,
};
use conformant::verify::{
    belief_bfs, build_basis, conformant_check, conforms_with, initial_states, zero_approx_run,
    DEFAULT_STATE_CAP,
};
use conformant::ConformantProblem;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("K0 worked example", c01_k0_example),
        ("tags and merges worked example", c02_pick_drop),
        ("width table", c03_width_table),
        ("forced plan lengths", c04_plan_lengths),
        (
            "corners-square and disjunction toy",
            c05_corners_and_disjtoy,
        ),
        ("soundness suite", c06_soundness),
        ("completeness suite", c07_completeness),
        ("0-approximation equivalence", c08_zero_approx),
        ("prime implicate oracle", c09_pi_oracle),
        ("basis", c10_basis),
        (
            "mutex soundness and translation consistency",
            c11_mutex_consistency,
        ),
        ("sortnet ladder", c12_sortnet_ladder),
        ("nondeterminism", c13_nondet),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn steps(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn c01_k0_example() -> Outcome {
    let t0 = Instant::now();
    let p = k0_example();
    let an = analyse(&p);
    let t = k0(&p, &an).map_err(|e| e.to_string())?;
    let good = conformant::run_plan(&t.classical, &Plan::new(steps(&["a", "b"])));
    ensure!(good.achieved_goal, "{{a, b}} does not solve K0(P)");
    let bad = conformant::run_plan(&t.classical, &Plan::new(steps(&["a"])));
    ensure!(!bad.achieved_goal, "{{a}} solves K0(P)");

    let v =
        conformant_check(&p, &steps(&["a", "b"]), DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    ensure!(v.conformant, "validator rejects {{a, b}}: {v:?}");
    let v = conformant_check(&p, &steps(&["a"]), DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    ensure!(!v.conformant, "validator accepts {{a}}");
    let cex = v.counterexample.unwrap_or_default();
    ensure!(
        cex.iter().any(|l| l == "p"),
        "counterexample {cex:?} does not make p true"
    );
    ensure!(
        t0.elapsed() < Duration::from_secs(1),
        "took {:?}",
        t0.elapsed()
    );
    Ok(format!(
        "K0 accepts {{a,b}}, rejects {{a}}; counterexample {cex:?}"
    ))
}

fn c02_pick_drop() -> Outcome {
    let t0 = Instant::now();
    let p = pick_drop();
    let an = analyse(&p);
    let (hold, at1, at2, at3) = (
        lit(&p, "hold"),
        lit(&p, "at(l1)"),
        lit(&p, "at(l2)"),
        lit(&p, "at(l3)"),
    );
    let (t1, t2): (Vec<Lit>, Vec<Lit>) = (vec![at1], vec![at2]);
    let mut spec = TranslationSpec::empty(Provenance::Custom);
    spec.add_merge(hold, &[t1.clone(), t2.clone()]);
    spec.add_merge(at3, &[t1.clone(), t2.clone()]);
    let t = ktm(&p, &an, &spec, &TranslateOptions::default()).map_err(|e| e.to_string())?;
    let k = &t.classical;
    let atom = |l: Lit, tag: &[Lit]| -> Result<usize, String> {
        t.atom_for_tag(l, tag)
            .ok_or_else(|| format!("no atom K{}/{tag:?}", p.lit_name(l)))
    };

    // I' as listed, for l, l' in {l1, l2}, l' != l.
    let mut expected = vec![atom(!hold, &[])?, atom(!at3, &[])?];
    for (l, other, tag) in [(at1, at2, &t1), (at2, at1, &t2)] {
        expected.extend([
            atom(!hold, tag)?,
            atom(!at3, tag)?,
            atom(l, tag)?,
            atom(!other, tag)?,
        ]);
    }
    expected.sort_unstable();
    let init: Vec<usize> = k.initial_state().true_fluents().collect();
    ensure!(
        init == expected,
        "I' has {} atoms {:?}, expected {:?}",
        init.len(),
        init,
        expected
    );

    let merge = |target: &str| -> Result<String, String> {
        let name = format!("{MERGE_PREFIX}{target}__");
        let found: Vec<&str> = k
            .actions
            .iter()
            .map(|a| a.name.as_str())
            .filter(|n| n.starts_with(&name))
            .collect();
        match found.as_slice() {
            [one] => Ok(one.to_string()),
            _ => Err(format!("expected one merge for {target}, found {found:?}")),
        }
    };
    let m_at3 = merge("at_l3")?;
    let m_hold = merge("hold")?;

    let pi1 = [
        "pick(l1)",
        "drop(l3)",
        "pick(l2)",
        "drop(l3)",
        m_at3.as_str(),
    ];
    let rows: [Vec<(Lit, &[Lit])>; 6] = [
        vec![(at1, &t1), (at2, &t2)],
        vec![(hold, &t1), (at2, &t2)],
        vec![(at3, &t1), (at2, &t2)],
        vec![(at3, &t1), (hold, &t2)],
        vec![(at3, &t1), (at3, &t2)],
        vec![(at3, &[])],
    ];
    let mut s = k.initial_state();
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            let a = k
                .action_index(pi1[i - 1])
                .ok_or(format!("no action {}", pi1[i - 1]))?;
            s = apply(&s, &k.actions[a]).map_err(|e| format!("step {i}: {e}"))?;
        }
        for &(l, tag) in row {
            ensure!(
                s.is_true(atom(l, tag)?),
                "row {i}: K{}/{tag:?} is false",
                p.lit_name(l)
            );
        }
    }
    let run1 = conformant::run_plan(k, &Plan::new(steps(&pi1)));
    ensure!(run1.achieved_goal, "pi1' does not solve the translation");

    let pi2 = ["pick(l1)", "pick(l2)", m_hold.as_str(), "drop(l3)"];
    let run2 = conformant::run_plan(k, &Plan::new(steps(&pi2)));
    ensure!(!run2.achieved_goal, "pi2' solves the translation");
    let idx: Vec<usize> = pi2.iter().map(|n| k.action_index(n).unwrap()).collect();
    let after1 = run_actions(k, k.initial_state(), &idx[..1]).final_state;
    let after2 = run_actions(k, k.initial_state(), &idx[..2]).final_state;
    let kh1 = atom(hold, &t1)?;
    ensure!(
        after1.is_true(kh1) && !after2.is_true(kh1),
        "Khold/at(l1) should hold after pick(l1) only"
    );
    ensure!(
        t0.elapsed() < Duration::from_secs(1),
        "took {:?}",
        t0.elapsed()
    );
    Ok(format!(
        "|I'| = {}, 6-row trace matches, pi1' solves, pi2' fails",
        init.len()
    ))
}

fn c03_width_table() -> Outcome {
    let opts = PipelineOptions::default();
    let cases: &[(&str, &[usize], usize)] = &[
        ("safe", &[10], 1),
        ("bomb", &[5, 5], 1),
        ("ring", &[4], 1),
        ("square-center", &[4], 1),
        ("corners-square", &[4], 1),
        ("sortnet", &[3], 3),
        ("sortnet", &[4], 4),
        ("sortnet", &[5], 5),
    ];
    let mut seen = Vec::new();
    for &(fam, params, want) in cases {
        let p = generated(fam, params);
        let r = pipeline::width(&p, &opts).map_err(|e| e.to_string())?;
        let w = r.width.map(|w| w.width);
        ensure!(
            w == Some(want),
            "{fam}{params:?}: width {w:?}, expected {want}"
        );
        seen.push(format!("{fam}{params:?}={want}"));
    }
    Ok(seen.join(" "))
}

fn solve_checked(
    p: &ConformantProblem,
    opts: &PipelineOptions,
) -> Result<pipeline::SolveResult, String> {
    let r = pipeline::solve(p, opts).map_err(|e| format!("{}: {e}", p.name))?;
    let v = r
        .report
        .validation
        .as_ref()
        .ok_or("no validation verdict")?;
    ensure!(
        v.conformant,
        "{}: plan rejected by validation: {v:?}",
        p.name
    );
    Ok(r)
}

fn c04_plan_lengths() -> Outcome {
    let t0 = Instant::now();
    let opts = PipelineOptions {
        scheme: Some(Scheme::Ki(1)),
        ..Default::default()
    };
    let mut seen = Vec::new();
    for n in [10, 30, 50] {
        let p = generated("safe", &[n]);
        let r = solve_checked(&p, &opts)?;
        ensure!(
            r.stripped.len() == n,
            "safe-{n}: length {}",
            r.stripped.len()
        );
        let v = r.report.validation.unwrap();
        ensure!(
            v.checked_states == n,
            "safe-{n}: checked {} states",
            v.checked_states
        );
        seen.push(format!("safe-{n}={n}"));
    }
    let p = generated("bomb", &[20, 20]);
    let r = solve_checked(&p, &opts)?;
    ensure!(
        r.stripped.len() == 20,
        "bomb-20-20: length {}",
        r.stripped.len()
    );
    let checked = r.report.validation.unwrap().checked_states;
    ensure!(checked == 1 << 20, "bomb-20-20: checked {checked} states");
    seen.push(format!("bomb-20-20=20 over {checked} states"));
    ensure!(
        t0.elapsed() < Duration::from_secs(60),
        "took {:?}",
        t0.elapsed()
    );
    Ok(seen.join(", "))
}

fn c05_corners_and_disjtoy() -> Outcome {
    let opts = PipelineOptions::default();
    let p = generated("corners-square", &[4]);
    let s0 = initial_states(&p, DEFAULT_STATE_CAP)
        .map_err(|e| e.to_string())?
        .len();
    ensure!(s0 == 4, "corners-square-4 has {s0} initial states");
    let r = solve_checked(&p, &opts)?;
    let mut seen = vec![format!(
        "corners-square-4 |S0|=4 length {}",
        r.stripped.len()
    )];
    for n in 2..=6 {
        let p = generated("disjtoy", &[n]);
        let r = solve_checked(&p, &opts)?;
        ensure!(
            r.stripped.len() == n,
            "disjtoy-{n}: length {}",
            r.stripped.len()
        );
        seen.push(format!("disjtoy-{n}={n}"));
    }
    Ok(seen.join(", "))
}

/// Every tag/merge scheme the suites try, as `(label, spec)`; schemes whose
/// construction hits a cap are left out.
fn all_specs(p: &ConformantProblem, an: &Analysis) -> Vec<(&'static str, TranslationSpec)> {
    let pg = MergeTargets::PreconditionsAndGoals;
    let mut out = vec![
        ("k0", TranslationSpec::empty(Provenance::K0)),
        ("k1", ki_spec(p, an, 1, pg)),
        ("k2", ki_spec(p, an, 2, pg)),
    ];
    if let Ok(s) = kmodels_spec(p, an, pipeline::DEFAULT_MODEL_CAP, pg) {
        out.push(("kmodels", s));
    }
    if let Ok(s) = ks0_spec(p, an, DEFAULT_STATE_CAP) {
        out.push(("ks0", s));
    }
    out
}

fn translations(
    p: &ConformantProblem,
    an: &Analysis,
) -> Result<Vec<(String, Translation)>, String> {
    let mut out = Vec::new();
    for (label, spec) in all_specs(p, an) {
        for optimize in [false, true] {
            let opts = TranslateOptions {
                optimize,
                ..Default::default()
            };
            let t = ktm(p, an, &spec, &opts).map_err(|e| format!("{label}: {e}"))?;
            out.push((format!("{label}{}", if optimize { "+opt" } else { "" }), t));
        }
    }
    Ok(out)
}

fn source_steps(plan: &Plan) -> Vec<String> {
    plan.stripped()
        .steps
        .into_iter()
        .filter(|s| !is_inference_action(s))
        .collect()
}

fn c06_soundness() -> Outcome {
    let suite = consistent_suite(0x5eed_0006, 200, SUITE_SHAPE);
    let (mut plans, mut translations_tried) = (0, 0);
    let mut violations = Vec::new();
    for (pi, (p, an)) in suite.iter().enumerate() {
        for (label, t) in translations(p, an)? {
            translations_tried += 1;
            let budget = Budget {
                max_nodes: 200_000,
                max_time: None,
            };
            let mut found = Vec::new();
            if let Some(plan) = planner::bfs_optimal(&t.classical, 6) {
                found.push(plan);
            }
            if let (SolveOutcome::Plan(plan), _) = planner::solve(&t.classical, budget) {
                found.push(plan);
            }
            for plan in found {
                plans += 1;
                let s = source_steps(&plan);
                let v = conformant_check(p, &s, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
                if !v.conformant {
                    violations.push(format!("problem {pi} {label}: {s:?}"));
                }
            }
        }
    }
    ensure!(
        violations.is_empty(),
        "{} violations, first {}",
        violations.len(),
        violations[0]
    );
    Ok(format!(
        "{} problems, {translations_tried} translations, {plans} plans, 0 violations",
        suite.len()
    ))
}

fn c07_completeness() -> Outcome {
    let suite = consistent_suite(0x5eed_0007, 200, SUITE_SHAPE);
    let mut checks = 0;
    let mut with_plan = 0;
    let mut violations = Vec::new();
    for (pi, (p, an)) in suite.iter().enumerate() {
        let w = an
            .width(p, an.default_width_bound())
            .map_err(|e| e.to_string())?
            .width;
        if w > 2 {
            continue;
        }
        let Some(plan) = belief_bfs(p, 5, DEFAULT_STATE_CAP).map_err(|e| e.to_string())? else {
            continue;
        };
        with_plan += 1;
        let ell = plan.len();
        for i in w..=2 {
            for optimize in [false, true] {
                let spec = ki_spec(p, an, i, MergeTargets::PreconditionsAndGoals);
                let opts = TranslateOptions {
                    optimize,
                    ..Default::default()
                };
                let t = ktm(p, an, &spec, &opts).map_err(|e| e.to_string())?;
                checks += 1;
                let got = planner::bfs_optimal(&t.classical, ell).map(|k| source_steps(&k).len());
                if got != Some(ell) {
                    violations.push(format!(
                        "problem {pi} w={w} K{i} opt={optimize}: belief plan {ell}, got {got:?}"
                    ));
                }
            }
        }
    }
    ensure!(
        violations.is_empty(),
        "{} violations, first {}",
        violations.len(),
        violations[0]
    );
    Ok(format!(
        "{with_plan} problems with w <= 2 and a plan, {checks} checks, 0 violations"
    ))
}

fn c08_zero_approx() -> Outcome {
    let suite = consistent_suite(0x5eed_0008, 50, SMALL_SHAPE);
    let (mut sequences, mut accepted) = (0, 0);
    let mut discrepancies = Vec::new();
    for (pi, (p, an)) in suite.iter().enumerate() {
        let t = k0(p, an).map_err(|e| e.to_string())?;
        let map = action_map(p, &t.classical);
        for_each_sequence(p.actions.len(), 4, &mut |seq| {
            sequences += 1;
            let k: Vec<usize> = seq.iter().map(|&a| map[a]).collect();
            let run = run_actions(&t.classical, t.classical.initial_state(), &k);
            let by_k0 = run.applicable && run.achieved_goal;
            let by_zero = zero_approx_run(p, &an.pi, seq).valid;
            accepted += by_k0 as usize;
            if by_k0 != by_zero {
                discrepancies.push(format!(
                    "problem {pi} {seq:?}: K0 {by_k0}, 0-approx {by_zero}"
                ));
            }
        });
    }
    ensure!(
        discrepancies.is_empty(),
        "{} discrepancies, first {}",
        discrepancies.len(),
        discrepancies[0]
    );
    Ok(format!(
        "{sequences} sequences ({accepted} accepted), 0 discrepancies"
    ))
}

fn c09_pi_oracle() -> Outcome {
    let mut rng = rng(0x5eed_0009);
    let mut unsat = 0;
    for i in 0..100 {
        let n = 1 + i % 6;
        let cnf = random_cnf(&mut rng, n, 8);
        let oracle = truth_table_pi(n, &cnf);
        match (Pi::compute(n, &cnf, DEFAULT_PI_CAP), oracle) {
            (Ok(pi), Some(want)) => {
                ensure!(
                    pi.clauses() == want.as_slice(),
                    "cnf {i} {cnf:?}: {:?} vs {want:?}",
                    pi.clauses()
                )
            }
            (Err(PiError::InconsistentInit), None) => unsat += 1,
            (got, want) => return Err(format!("cnf {i} {cnf:?}: {got:?} vs {want:?}")),
        }
    }
    Ok(format!("100 CNFs ({unsat} unsatisfiable), 0 discrepancies"))
}

fn c10_basis() -> Outcome {
    let mut seen = Vec::new();
    for n in 3..=5 {
        let p = generated("disjtoy", &[n]);
        let an = analyse(&p);
        let spec = ki_spec(&p, &an, 1, MergeTargets::PreconditionsAndGoals);
        let basis = build_basis(&p, &an, &spec).map_err(|e| e.to_string())?;
        let all: Vec<State> = initial_states(&p, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
        ensure!(
            basis.states.len() == n,
            "n={n}: basis has {} states",
            basis.states.len()
        );
        ensure!(
            all.len() == (1 << n) - 1,
            "n={n}: {} initial states",
            all.len()
        );
        let (mut conforming, mut violations) = (0, 0);
        // Length 3 as required, extended to n so that plans exist for every n.
        for_each_sequence(p.actions.len(), n.max(3), &mut |seq| {
            if conforms_with(&p, seq, &basis.states).conformant {
                conforming += 1;
                if !conforms_with(&p, seq, &all).conformant {
                    violations += 1;
                }
            }
        });
        ensure!(
            violations == 0,
            "n={n}: {violations} plans conform with the basis only"
        );
        seen.push(format!(
            "n={n}: {}/{} states, {conforming} basis plans",
            n,
            all.len()
        ));
    }
    Ok(seen.join("; "))
}

const REACH_CAP: usize = 20_000;

fn c11_mutex_consistency() -> Outcome {
    let suite = consistent_suite(0x5eed_0011, 200, SUITE_SHAPE);
    let (mut states, mut kstates, mut truncated) = (0, 0, 0);
    let mut violations = Vec::new();
    for (pi, (p, an)) in suite.iter().enumerate() {
        let starts = initial_states(p, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
        let pairs = an.mutex.pairs();
        let (reach, cut) = reachable(&p.actions, starts, usize::MAX, &mut |_, _| {});
        debug_assert!(!cut);
        states += reach.len();
        for s in &reach {
            if let Some((a, b)) = pairs.iter().find(|(a, b)| s.holds(*a) && s.holds(*b)) {
                violations.push(format!("problem {pi}: mutex {a:?} {b:?} in {s:?}"));
            }
        }
        for (label, t) in translations(p, an)? {
            let k = &t.classical;
            let mut conflicts = 0;
            let (reach, cut) = reachable(
                &k.actions,
                vec![k.initial_state()],
                REACH_CAP,
                &mut |_, _| conflicts += 1,
            );
            truncated += cut as usize;
            kstates += reach.len();
            if conflicts > 0 {
                violations.push(format!(
                    "problem {pi} {label}: {conflicts} conflicting successors"
                ));
            }
            // Fluents grouped by literal: KL/t and K¬L/t' with t ∪ t'
            // consistent with I must never hold together.
            for s in &reach {
                let on: Vec<usize> = s.true_fluents().collect();
                for &x in &on {
                    let (l, tx) = t.atoms[x];
                    for &y in &on {
                        let (m, ty) = t.atoms[y];
                        if m != !l || x > y {
                            continue;
                        }
                        let mut joint = t.spec.tags[tx].clone();
                        joint.extend_from_slice(&t.spec.tags[ty]);
                        if an.pi.tag_consistent(&joint) {
                            violations
                                .push(format!("problem {pi} {label}: K{l:?}/{tx} and K{m:?}/{ty}"));
                        }
                    }
                }
            }
        }
    }
    ensure!(
        violations.is_empty(),
        "{} violations, first {}",
        violations.len(),
        violations[0]
    );
    Ok(format!(
        "{} problems, {states} source states, {kstates} translation states ({truncated} explorations hit the {REACH_CAP} cap), 0 violations",
        suite.len()
    ))
}

fn c12_sortnet_ladder() -> Outcome {
    let p = generated("sortnet", &[3]);
    let r = solve_checked(&p, &PipelineOptions::default())?;
    let stages: Vec<(String, StageOutcome)> = r
        .report
        .stages
        .iter()
        .map(|s| (s.scheme.clone(), s.outcome))
        .collect();
    ensure!(
        stages.first() == Some(&("ki:1".to_string(), StageOutcome::Unsolvable)),
        "first stage {stages:?}"
    );
    ensure!(
        stages.last() == Some(&("kmodels".to_string(), StageOutcome::Plan)),
        "last stage {stages:?}"
    );
    let checked = r.report.validation.unwrap().checked_states;
    Ok(format!(
        "{stages:?}, plan of length {} validated over {checked} states",
        r.stripped.len()
    ))
}

fn c13_nondet() -> Outcome {
    let t0 = Instant::now();
    let p = generated("sgripper", &[2]);
    let opts = PipelineOptions {
        max_copies: 1,
        ..Default::default()
    };
    let r = solve_checked(&p, &opts)?;
    let stage = r.report.stages.last().ok_or("no stages")?;
    ensure!(
        stage.copies == Some(1),
        "solved with copies {:?}",
        stage.copies
    );
    // The compiled plan, resets included, over every hidden assignment.
    let nc = nondet_compile(&p, 1);
    let compiled: Vec<String> = r
        .plan
        .steps
        .iter()
        .filter(|s| !s.starts_with(MERGE_PREFIX))
        .cloned()
        .collect();
    let resets = compiled.iter().filter(|s| s.starts_with("reset__")).count();
    let v =
        conformant_check(&nc.problem, &compiled, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    ensure!(v.conformant, "compiled plan fails: {v:?}");
    ensure!(
        t0.elapsed() < Duration::from_secs(30),
        "took {:?}",
        t0.elapsed()
    );
    Ok(format!(
        "source plan of length {} ({resets} resets) valid over {} hidden assignments and all branches",
        r.stripped.len(),
        v.checked_states
    ))
}
