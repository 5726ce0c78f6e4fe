//! Conformant planning by translation into classical planning.
//!
//! A [`ConformantProblem`] (uncertain initial situation, deterministic
//! actions) is compiled into a [`ClassicalProblem`] over tagged knowledge
//! atoms `KL/t`, solved with an embedded heuristic search planner, and the
//! resulting plan is checked against exact oracles.

pub mod analysis;
pub mod generators;
pub mod model;
pub mod names;
pub mod pddl;
pub mod pi;
pub mod pipeline;
pub mod planner;
pub mod report;
pub mod translate;
pub mod verify;

pub use model::{
    apply, restrict, run_plan, Action, ApplyError, ClassicalProblem, Clause, ConformantProblem,
    Fluent, Lit, NondetEffect, Plan, RestrictError, Rule, RunOutcome, State,
};
pub use pi::{Pi, PiError, Tag};
