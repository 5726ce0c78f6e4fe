//! End-to-end orchestration: normalize, analyze, translate, plan, strip,
//! and validate.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::analysis::{Analysis, AnalysisError, AnalysisOptions};
use crate::model::{ConformantProblem, Plan};
use crate::pi::DEFAULT_PI_CAP;
use crate::planner::{solve as plan_search, Budget, SolveOutcome};
use crate::report::{PiStats, ProblemStats, RunReport, StageOutcome, StageTrace, TranslationStats};
use crate::translate::cnf_goal::is_goal_action;
use crate::translate::{
    cnf_goal_compile, ki_spec, kmodels_spec, ks0_spec, ktm, nondet_compile, MergeTargets,
    Provenance, ResetSpec, SpecError, TranslateError, TranslateOptions, Translation,
    TranslationSpec,
};
use crate::verify::{
    conformant_check, resolve_steps, zero_approx_run, VerifyError, DEFAULT_STATE_CAP,
};

pub const DEFAULT_MODEL_CAP: usize = 4096;
/// Initial-state cap for validating plans found by the pipeline.
pub const DEFAULT_VALIDATION_CAP: usize = 1 << 22;
pub const DEFAULT_MAX_COPIES: usize = 3;

const INCONSISTENT_WARNING: &str =
    "consistency check failed: translated plans are only trusted after exact validation";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    K0,
    Ki(usize),
    Kmodels,
    KS0,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::K0 => write!(f, "k0"),
            Scheme::Ki(i) => write!(f, "ki:{i}"),
            Scheme::Kmodels => write!(f, "kmodels"),
            Scheme::KS0 => write!(f, "ks0"),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "k0" => Ok(Scheme::K0),
            "kmodels" => Ok(Scheme::Kmodels),
            "ks0" => Ok(Scheme::KS0),
            other => other
                .strip_prefix("ki:")
                .and_then(|n| n.parse().ok())
                .map(Scheme::Ki)
                .ok_or_else(|| format!("unknown scheme {s}; expected k0, ki:N, kmodels or ks0")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// `None` runs the default `K_1` then `Kmodels` ladder.
    pub scheme: Option<Scheme>,
    pub optimize: bool,
    pub pi_cap: usize,
    pub model_cap: usize,
    pub state_cap: usize,
    pub validation_cap: usize,
    pub strengthened_mutex: bool,
    pub budget: Budget,
    pub max_copies: usize,
    pub width_bound: Option<usize>,
    pub timings: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            scheme: None,
            optimize: true,
            pi_cap: DEFAULT_PI_CAP,
            model_cap: DEFAULT_MODEL_CAP,
            state_cap: DEFAULT_STATE_CAP,
            validation_cap: DEFAULT_VALIDATION_CAP,
            strengthened_mutex: false,
            budget: Budget::default(),
            max_copies: DEFAULT_MAX_COPIES,
            width_bound: None,
            timings: false,
        }
    }
}

impl PipelineOptions {
    fn analysis(&self) -> AnalysisOptions {
        AnalysisOptions {
            pi_cap: self.pi_cap,
            strengthened_mutex: self.strengthened_mutex,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("tag/merge construction: {0}")]
    Spec(#[from] SpecError),
    #[error("translation: {0}")]
    Translate(#[from] TranslateError),
    #[error("validation: {0}")]
    Verify(#[from] VerifyError),
    #[error("no plan found after stages {}", stage_list(.report))]
    NoPlanFound { report: Box<RunReport> },
    #[error("search budget exhausted after stages {}", stage_list(.report))]
    BudgetExhausted { report: Box<RunReport> },
}

fn stage_list(r: &RunReport) -> String {
    r.stages
        .iter()
        .map(|s| format!("{}={:?}", s.scheme, s.outcome))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub plan: Plan,
    /// Plan over the source actions.
    pub stripped: Vec<String>,
    pub report: RunReport,
}

pub fn problem_stats(p: &ConformantProblem) -> ProblemStats {
    ProblemStats {
        name: p.name.clone(),
        fluents: p.num_fluents(),
        actions: p.actions.len(),
        init_clauses: p.init.len(),
        goal_literals: p.goal.len(),
        goal_clauses: p.goal_clauses.len(),
        deterministic: p.is_deterministic(),
    }
}

pub fn pi_stats(an: &Analysis) -> PiStats {
    PiStats {
        clauses: an.pi.clauses().len(),
        units: an.pi.units().len(),
        unknown_fluents: an.pi.unknown_fluents().len(),
    }
}

pub fn translation_stats(t: &Translation) -> TranslationStats {
    let k = &t.classical;
    TranslationStats {
        scheme: provenance_name(t.spec.provenance),
        actions: k.actions.len(),
        atoms: k.num_fluents(),
        effects: k.num_effects(),
        tags: t.spec.tags.len(),
        merges: (0..k.actions.len()).filter(|&i| k.is_merge(i)).count(),
    }
}

fn provenance_name(p: Provenance) -> String {
    match p {
        Provenance::K0 => "k0".into(),
        Provenance::Ki(i) => format!("ki:{i}"),
        Provenance::Kmodels => "kmodels".into(),
        Provenance::KS0 => "ks0".into(),
        Provenance::Custom => "custom".into(),
    }
}

/// Builds the tag/merge spec for `scheme`.
pub fn build_spec(
    p: &ConformantProblem,
    an: &Analysis,
    scheme: Scheme,
    which: MergeTargets,
    opts: &PipelineOptions,
) -> Result<TranslationSpec, SpecError> {
    match scheme {
        Scheme::K0 => Ok(TranslationSpec::empty(Provenance::K0)),
        Scheme::Ki(i) => Ok(ki_spec(p, an, i, which)),
        Scheme::Kmodels => kmodels_spec(p, an, opts.model_cap, which),
        Scheme::KS0 => ks0_spec(p, an, opts.model_cap),
    }
}

/// Translates a deterministic problem (CNF goals are compiled first).
pub fn translate(
    p: &ConformantProblem,
    scheme: Scheme,
    opts: &PipelineOptions,
) -> Result<(Translation, RunReport), PipelineError> {
    let q = if p.goal_clauses.is_empty() {
        p.clone()
    } else {
        cnf_goal_compile(p)
    };
    let an = Analysis::new(&q, opts.analysis())?;
    let mut report = RunReport {
        command: "translate".into(),
        problem: problem_stats(p),
        pi: Some(pi_stats(&an)),
        consistent: Some(an.consistent),
        ..Default::default()
    };
    if !an.consistent {
        report.warnings.push(INCONSISTENT_WARNING.into());
    }
    attach_width(&mut report, &q, &an, opts, scheme);
    let spec = build_spec(&q, &an, scheme, MergeTargets::PreconditionsAndGoals, opts)?;
    let t = ktm(&q, &an, &spec, &translate_options(opts, Vec::new()))?;
    report.stages.push(StageTrace {
        scheme: scheme.to_string(),
        copies: None,
        outcome: StageOutcome::Skipped,
        translation: Some(translation_stats(&t)),
        expanded: 0,
        generated: 0,
        note: Some("translation only".into()),
        millis: None,
    });
    Ok((t, report))
}

fn translate_options(opts: &PipelineOptions, resets: Vec<ResetSpec>) -> TranslateOptions {
    TranslateOptions {
        optimize: opts.optimize,
        resets,
        merge_cap: Some(opts.model_cap),
    }
}

fn attach_width(
    report: &mut RunReport,
    p: &ConformantProblem,
    an: &Analysis,
    opts: &PipelineOptions,
    scheme: Scheme,
) {
    let bound = opts.width_bound.unwrap_or_else(|| an.default_width_bound());
    match an.width(p, bound) {
        Ok(w) => {
            if let Scheme::Ki(i) = scheme {
                if w.width > i {
                    report.warnings.push(format!(
                        "width {} exceeds i = {i}; completeness is not guaranteed",
                        w.width
                    ));
                }
            }
            report.width = Some(w);
        }
        Err(e) => report.warnings.push(format!("width not computed: {e}")),
    }
}

/// Full pipeline. Deterministic problems go through the scheme ladder;
/// problems with nondeterministic effects are compiled into `1..=max_copies`
/// deterministic copies first.
pub fn solve(p: &ConformantProblem, opts: &PipelineOptions) -> Result<SolveResult, PipelineError> {
    let started = Instant::now();
    let mut report = RunReport {
        command: "solve".into(),
        problem: problem_stats(p),
        ..Default::default()
    };
    let ladder: Vec<Scheme> = match opts.scheme {
        Some(s) => vec![s],
        None => vec![Scheme::Ki(1), Scheme::Kmodels],
    };
    let copies: Vec<Option<usize>> = if p.is_deterministic() {
        vec![None]
    } else {
        (1..=opts.max_copies.max(1)).map(Some).collect()
    };
    let mut budget_out = false;
    for c in copies {
        let (source, resets, compiled) = match c {
            None => (p.clone(), Vec::new(), None),
            Some(k) => {
                let nc = nondet_compile(p, k);
                (nc.problem.clone(), nc.resets.clone(), Some(nc))
            }
        };
        let q = if source.goal_clauses.is_empty() {
            source.clone()
        } else {
            cnf_goal_compile(&source)
        };
        let an = Analysis::new(&q, opts.analysis())?;
        if report.pi.is_none() {
            report.pi = Some(pi_stats(&an));
            report.consistent = Some(an.consistent);
            if !an.consistent {
                report.warnings.push(INCONSISTENT_WARNING.into());
            }
            if c.is_none() {
                attach_width(&mut report, &q, &an, opts, ladder[0]);
            }
        }
        let which = if c.is_some() {
            MergeTargets::AllLiterals
        } else {
            MergeTargets::PreconditionsAndGoals
        };
        for &scheme in &ladder {
            let t0 = Instant::now();
            let mut trace = StageTrace {
                scheme: scheme.to_string(),
                copies: c,
                outcome: StageOutcome::Skipped,
                translation: None,
                expanded: 0,
                generated: 0,
                note: None,
                millis: None,
            };
            let spec = match build_spec(&q, &an, scheme, which, opts) {
                Ok(s) => s,
                Err(e) => {
                    trace.note = Some(e.to_string());
                    finish(&mut report, trace, t0, opts);
                    continue;
                }
            };
            let t = ktm(&q, &an, &spec, &translate_options(opts, resets.clone()))?;
            trace.translation = Some(translation_stats(&t));
            let (outcome, stats) = plan_search(&t.classical, opts.budget);
            trace.expanded = stats.expanded;
            trace.generated = stats.generated;
            let plan = match outcome {
                SolveOutcome::Plan(plan) => plan,
                SolveOutcome::Unsolvable => {
                    trace.outcome = StageOutcome::Unsolvable;
                    finish(&mut report, trace, t0, opts);
                    continue;
                }
                SolveOutcome::BudgetOut => {
                    budget_out = true;
                    trace.outcome = StageOutcome::BudgetOut;
                    finish(&mut report, trace, t0, opts);
                    continue;
                }
            };
            let mut stripped: Vec<String> = plan
                .stripped()
                .steps
                .into_iter()
                .filter(|s| !is_goal_action(s))
                .collect();
            if let Some(nc) = &compiled {
                stripped = nc.source_plan(p, &stripped);
            }
            let verdict = conformant_check(p, &stripped, opts.validation_cap)?;
            if !verdict.conformant {
                trace.outcome = StageOutcome::InvalidPlan;
                trace.note = Some(format!(
                    "{:?} at step {:?}",
                    verdict.failure, verdict.failed_step
                ));
                finish(&mut report, trace, t0, opts);
                continue;
            }
            trace.outcome = StageOutcome::Plan;
            finish(&mut report, trace, t0, opts);
            if p.is_deterministic() {
                let pi = crate::pi::Pi::compute(p.num_fluents(), &p.init, opts.pi_cap)
                    .map_err(AnalysisError::from)?;
                let idx = resolve_steps(p, &stripped)?;
                report.zero_approx = Some(zero_approx_run(p, &pi, &idx));
            }
            report.plan = Some(stripped.clone());
            report.plan_with_inference = Some(plan.steps.clone());
            report.stripped_length = Some(stripped.len());
            report.validation = Some(verdict);
            if opts.timings {
                report
                    .timings
                    .get_or_insert_with(Vec::new)
                    .push(("total".into(), started.elapsed().as_millis()));
            }
            return Ok(SolveResult {
                plan,
                stripped,
                report,
            });
        }
    }
    let report = Box::new(report);
    if budget_out {
        Err(PipelineError::BudgetExhausted { report })
    } else {
        Err(PipelineError::NoPlanFound { report })
    }
}

fn finish(report: &mut RunReport, mut trace: StageTrace, t0: Instant, opts: &PipelineOptions) {
    if opts.timings {
        trace.millis = Some(t0.elapsed().as_millis());
    }
    report.stages.push(trace);
}

/// Validates a plan file's steps: inference steps are dropped, then the
/// plan is checked exactly and under the 0-approximation.
pub fn validate(
    p: &ConformantProblem,
    steps: &[String],
    opts: &PipelineOptions,
) -> Result<RunReport, PipelineError> {
    let stripped: Vec<String> = steps
        .iter()
        .filter(|s| !crate::translate::is_inference_action(s) && !is_goal_action(s))
        .cloned()
        .collect();
    let verdict = conformant_check(p, &stripped, opts.validation_cap)?;
    let mut report = RunReport {
        command: "validate".into(),
        problem: problem_stats(p),
        stripped_length: Some(stripped.len()),
        plan: Some(stripped.clone()),
        validation: Some(verdict),
        ..Default::default()
    };
    if p.is_deterministic() {
        let pi = crate::pi::Pi::compute(p.num_fluents(), &p.init, opts.pi_cap)
            .map_err(AnalysisError::from)?;
        let idx = resolve_steps(p, &stripped)?;
        report.zero_approx = Some(zero_approx_run(p, &pi, &idx));
    } else {
        report
            .warnings
            .push("0-approximation skipped: nondeterministic actions".into());
    }
    Ok(report)
}

/// Width report for a problem (CNF goals compiled first).
pub fn width(p: &ConformantProblem, opts: &PipelineOptions) -> Result<RunReport, PipelineError> {
    let q = if p.goal_clauses.is_empty() {
        p.clone()
    } else {
        cnf_goal_compile(p)
    };
    let an = Analysis::new(&q, opts.analysis())?;
    let bound = opts.width_bound.unwrap_or_else(|| an.default_width_bound());
    let w = an.width(&q, bound)?;
    Ok(RunReport {
        command: "width".into(),
        problem: problem_stats(p),
        pi: Some(pi_stats(&an)),
        consistent: Some(an.consistent),
        width: Some(w),
        ..Default::default()
    })
}
