//! Machine-readable run reports and their line-oriented text rendering.

use std::fmt::Write;

use serde::Serialize;

use crate::analysis::WidthReport;
use crate::verify::{Verdict, ZeroApproxVerdict};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProblemStats {
    pub name: String,
    pub fluents: usize,
    pub actions: usize,
    pub init_clauses: usize,
    pub goal_literals: usize,
    pub goal_clauses: usize,
    pub deterministic: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PiStats {
    pub clauses: usize,
    pub units: usize,
    pub unknown_fluents: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranslationStats {
    pub scheme: String,
    pub actions: usize,
    pub atoms: usize,
    pub effects: usize,
    pub tags: usize,
    pub merges: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOutcome {
    Plan,
    Unsolvable,
    BudgetOut,
    /// The translation could not be built (e.g. a model cap was hit).
    Skipped,
    /// A plan was found but failed validation.
    InvalidPlan,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageTrace {
    pub scheme: String,
    pub copies: Option<usize>,
    pub outcome: StageOutcome,
    pub translation: Option<TranslationStats>,
    pub expanded: usize,
    pub generated: usize,
    pub note: Option<String>,
    /// Milliseconds; only recorded when timings are requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u128>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub problem: ProblemStats,
    pub pi: Option<PiStats>,
    pub consistent: Option<bool>,
    pub width: Option<WidthReport>,
    pub warnings: Vec<String>,
    pub stages: Vec<StageTrace>,
    pub plan: Option<Vec<String>>,
    pub plan_with_inference: Option<Vec<String>>,
    pub stripped_length: Option<usize>,
    pub validation: Option<Verdict>,
    pub zero_approx: Option<ZeroApproxVerdict>,
    /// Milliseconds per pipeline phase; only recorded when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<(String, u128)>>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.problem;
        let _ = writeln!(
            s,
            "problem {}: {} fluents, {} actions, {} init clauses",
            p.name, p.fluents, p.actions, p.init_clauses
        );
        if let Some(pi) = &self.pi {
            let _ = writeln!(
                s,
                "prime implicates: {} clauses, {} units, {} unknown fluents",
                pi.clauses, pi.units, pi.unknown_fluents
            );
        }
        if let Some(c) = self.consistent {
            let _ = writeln!(s, "consistent: {c}");
        }
        if let Some(w) = &self.width {
            let _ = writeln!(s, "width: {}", w.width);
            for l in &w.literals {
                let _ = writeln!(
                    s,
                    "  w({}) = {} over {} relevant clauses",
                    l.literal, l.width, l.relevant_clauses
                );
                for c in &l.witness {
                    let _ = writeln!(s, "    witness clause: {}", c.join(" | "));
                }
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        for st in &self.stages {
            let _ = write!(s, "stage {}", st.scheme);
            if let Some(c) = st.copies {
                let _ = write!(s, " copies={c}");
            }
            let _ = write!(s, ": {:?}", st.outcome);
            if let Some(t) = &st.translation {
                let _ = write!(
                    s,
                    " (actions {}, atoms {}, effects {}, merges {})",
                    t.actions, t.atoms, t.effects, t.merges
                );
            }
            let _ = write!(s, " expanded {}", st.expanded);
            if let Some(n) = &st.note {
                let _ = write!(s, " [{n}]");
            }
            if let Some(ms) = st.millis {
                let _ = write!(s, " {ms} ms");
            }
            let _ = writeln!(s);
        }
        if let Some(plan) = &self.plan {
            let _ = writeln!(s, "plan ({} steps):", plan.len());
            for step in plan {
                let _ = writeln!(s, "  {step}");
            }
        }
        if let Some(v) = &self.validation {
            if v.conformant {
                let _ = writeln!(
                    s,
                    "validation: conformant over {} initial states",
                    v.checked_states
                );
            } else {
                let why = match (&v.failure, v.failed_step) {
                    (Some(k), Some(i)) => format!(" ({k} at step {})", i + 1),
                    (Some(k), None) => format!(" ({k})"),
                    _ => String::new(),
                };
                let _ = writeln!(
                    s,
                    "validation: NOT conformant{why}; counterexample: {}",
                    v.counterexample.as_deref().unwrap_or_default().join(" ")
                );
            }
        }
        if let Some(z) = &self.zero_approx {
            let _ = writeln!(
                s,
                "0-approximation: {}",
                if z.valid { "valid" } else { "invalid" }
            );
        }
        if let Some(t) = &self.timings {
            for (phase, ms) in t {
                let _ = writeln!(s, "time {phase}: {ms} ms");
            }
        }
        s
    }
}
