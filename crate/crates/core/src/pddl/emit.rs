//! Classical PDDL emission (STRIPS with negative preconditions and
//! conditional effects) and the matching reader.

use std::fmt::Write;

use super::{ground, parse, GroundOptions, PddlError};
use crate::model::{ClassicalProblem, Lit, Rule};
use crate::names::sanitize;
use crate::translate::is_inference_action;

fn lit(k: &ClassicalProblem, l: Lit) -> String {
    let atom = format!("({})", sanitize(&k.fluents[l.fluent()]));
    if l.is_positive() {
        atom
    } else {
        format!("(not {atom})")
    }
}

/// A conjunction; a single literal is written bare.
fn conj(k: &ClassicalProblem, lits: &[Lit]) -> String {
    if let [l] = lits {
        return lit(k, *l);
    }
    let parts: Vec<String> = lits.iter().map(|&l| lit(k, l)).collect();
    format!(
        "(and{}{})",
        if parts.is_empty() { "" } else { " " },
        parts.join(" ")
    )
}

fn problem_name(k: &ClassicalProblem) -> String {
    if k.name.is_empty() {
        "translated".to_string()
    } else {
        sanitize(&k.name)
    }
}

/// Returns `(domain_text, problem_text)`. Rules sharing a condition are
/// grouped under one `when`.
pub fn emit_classical(k: &ClassicalProblem) -> (String, String) {
    let name = problem_name(k);
    let mut d = String::new();
    let _ = writeln!(d, "(define (domain {name})");
    let _ = writeln!(
        d,
        "  (:requirements :strips :negative-preconditions :conditional-effects)"
    );
    let _ = writeln!(d, "  (:predicates");
    for f in &k.fluents {
        let _ = writeln!(d, "    ({})", sanitize(f));
    }
    let _ = writeln!(d, "  )");
    for a in &k.actions {
        let _ = writeln!(d, "  (:action {}", sanitize(&a.name));
        let _ = writeln!(d, "    :parameters ()");
        let _ = writeln!(d, "    :precondition {}", conj(k, &a.pre));
        let mut groups: Vec<(&[Lit], Vec<Lit>)> = Vec::new();
        for Rule { condition, effect } in &a.rules {
            match groups.iter_mut().find(|(c, _)| *c == condition.as_slice()) {
                Some((_, effs)) => effs.push(*effect),
                None => groups.push((condition, vec![*effect])),
            }
        }
        let mut parts = Vec::new();
        for (c, effs) in groups {
            if c.is_empty() {
                parts.extend(effs.iter().map(|&l| lit(k, l)));
            } else {
                parts.push(format!("(when {} {})", conj(k, c), conj(k, &effs)));
            }
        }
        let _ = writeln!(
            d,
            "    :effect (and{}{}))",
            if parts.is_empty() { "" } else { " " },
            parts.join(" ")
        );
    }
    let _ = writeln!(d, ")");

    let mut p = String::new();
    let _ = writeln!(p, "(define (problem {name})");
    let _ = writeln!(p, "  (:domain {name})");
    let init: Vec<String> = k
        .init
        .iter()
        .filter(|l| l.is_positive())
        .map(|&l| lit(k, l))
        .collect();
    let _ = writeln!(p, "  (:init {})", init.join(" "));
    let _ = writeln!(p, "  (:goal {})", conj(k, &k.goal));
    let _ = writeln!(p, ")");
    (d, p)
}

/// Reads classical PDDL back. Every declared nullary predicate becomes a
/// fluent; actions named with an inference prefix are flagged as merges.
pub fn parse_classical(domain: &str, problem: &str) -> Result<ClassicalProblem, PddlError> {
    let (d, pr) = parse(domain, problem)?;
    let opts = GroundOptions {
        compile_static: false,
        keep_nullary: true,
        ..Default::default()
    };
    let p = ground(&d, &pr, opts)?;
    if let Some(c) = p.init.iter().find(|c| !c.is_unit()) {
        return Err(PddlError::Malformed(format!(
            "classical init has a non-unit clause of {} literals",
            c.len()
        )));
    }
    if !p.goal_clauses.is_empty() {
        return Err(PddlError::Malformed(
            "classical goal must be a conjunction".into(),
        ));
    }
    if let Some(a) = p.actions.iter().find(|a| !a.is_deterministic()) {
        return Err(PddlError::Malformed(format!(
            "action {} is nondeterministic",
            a.name
        )));
    }
    let init: Vec<Lit> = p
        .init
        .iter()
        .map(|c| c.lits()[0])
        .filter(|l| l.is_positive())
        .collect();
    let merge_flags = p
        .actions
        .iter()
        .map(|a| is_inference_action(&a.name))
        .collect();
    Ok(ClassicalProblem {
        name: p.name,
        fluents: p.fluents,
        init,
        actions: p.actions,
        goal: p.goal,
        merge_flags,
    })
}
