//! Conformant PDDL input (typed schemas, conditional effects, `oneof`,
//! `or` and `unknown` in `:init`) and classical PDDL output.

pub mod ast;
pub mod emit;
pub mod ground;
pub mod sexpr;

use thiserror::Error;

pub use ast::{DomainAst, ProblemAst};
pub use emit::{emit_classical, parse_classical};
pub use ground::{ground, GroundOptions, DEFAULT_GROUNDING_CAP};

use crate::model::ConformantProblem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("undeclared {0}")]
    Undeclared(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("grounding exceeded {cap} instances")]
    GroundingBlowup { cap: usize },
}

pub fn parse(domain_text: &str, problem_text: &str) -> Result<(DomainAst, ProblemAst), PddlError> {
    let d = ast::parse_domain(&sexpr::parse_one(domain_text)?)?;
    let p = ast::parse_problem(&sexpr::parse_one(problem_text)?)?;
    if !p.domain.is_empty() && p.domain != d.name {
        return Err(PddlError::Malformed(format!(
            "problem is for domain {}, not {}",
            p.domain, d.name
        )));
    }
    Ok((d, p))
}

/// Parses and grounds with default options.
pub fn load(domain_text: &str, problem_text: &str) -> Result<ConformantProblem, PddlError> {
    let (d, p) = parse(domain_text, problem_text)?;
    ground(&d, &p, GroundOptions::default())
}
