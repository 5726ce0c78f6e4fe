//! Static analyses over a grounded conformant problem: relevance, relevant
//! clauses and width, and mutexes.

pub mod mutex;
pub mod relevance;
pub mod width;

use serde::Serialize;
use thiserror::Error;

pub use mutex::{consistency_check, mutex_set, MutexSet};
pub use relevance::{PreemptionRule, Relevance};
pub use width::{c_i, cover, relevant_clauses, satisfies, LiteralWidth, RelevantClauses};

use crate::model::{Clause, ConformantProblem, Lit};
use crate::pi::{Pi, PiError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error(transparent)]
    Pi(#[from] PiError),
    #[error("width search for literal {literal:?} exceeded the bound {bound}")]
    WidthSearchCap { literal: Lit, bound: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    pub pi_cap: usize,
    pub strengthened_mutex: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            pi_cap: crate::pi::DEFAULT_PI_CAP,
            strengthened_mutex: false,
        }
    }
}

/// Everything the translations need to know about a problem.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub pi: Pi,
    pub relevance: Relevance,
    pub c_i: Vec<Clause>,
    pub mutex: MutexSet,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WidthReport {
    pub width: usize,
    pub unknown_fluents: usize,
    pub literals: Vec<LiteralWidth>,
}

impl Analysis {
    pub fn new(p: &ConformantProblem, opts: AnalysisOptions) -> Result<Self, AnalysisError> {
        let pi = Pi::compute(p.num_fluents(), &p.init, opts.pi_cap)?;
        let relevance = Relevance::compute(p);
        let c_i = c_i(&pi);
        let mutex = mutex_set(p, &pi, opts.strengthened_mutex);
        let consistent = consistency_check(p, &mutex);
        Ok(Analysis {
            pi,
            relevance,
            c_i,
            mutex,
            consistent,
        })
    }

    pub fn relevant_clauses(&self, l: Lit) -> RelevantClauses {
        relevant_clauses(&self.c_i, &self.relevance, l)
    }

    pub fn default_width_bound(&self) -> usize {
        self.pi.unknown_fluents().len()
    }

    /// `w(L)` and the lexicographically first witness.
    pub fn width_of_literal(
        &self,
        l: Lit,
        bound: usize,
    ) -> Result<(usize, Vec<Clause>), AnalysisError> {
        width::width_of_literal(&self.relevant_clauses(l), &self.pi, bound)
    }

    /// `w(P)` over precondition and goal literals, with per-literal detail.
    pub fn width(&self, p: &ConformantProblem, bound: usize) -> Result<WidthReport, AnalysisError> {
        let mut literals = Vec::new();
        let mut width = 0;
        for l in p.precondition_and_goal_literals() {
            let rc = self.relevant_clauses(l);
            let (w, witness) = width::width_of_literal(&rc, &self.pi, bound)?;
            width = width.max(w);
            literals.push(LiteralWidth {
                literal: p.lit_name(l),
                width: w,
                witness: witness
                    .iter()
                    .map(|c| c.lits().iter().map(|&x| p.lit_name(x)).collect())
                    .collect(),
                relevant_clauses: rc.clauses.len(),
            });
        }
        Ok(WidthReport {
            width,
            unknown_fluents: self.pi.unknown_fluents().len(),
            literals,
        })
    }
}
