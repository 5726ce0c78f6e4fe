//! Tag/merge specifications for each translation scheme.

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{width, Analysis};
use crate::model::{ConformantProblem, Lit};
use crate::pi::Tag;
use crate::verify::{enumerate_models, CapExceeded};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    K0,
    Ki(usize),
    Kmodels,
    KS0,
    Custom,
}

/// A merge `m` for the literal `target`, as indices into the tag table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeSpec {
    pub target: Lit,
    pub tags: Vec<usize>,
}

/// Tags `T` (index 0 is the empty tag) and merges `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationSpec {
    pub tags: Vec<Tag>,
    pub merges: Vec<MergeSpec>,
    pub provenance: Provenance,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("literal {literal:?} has more than {cap} relevant models")]
    TooManyModels { literal: Lit, cap: usize },
    #[error("more than {cap} possible initial states")]
    TooManyInitialStates { cap: usize },
}

impl TranslationSpec {
    pub fn empty(provenance: Provenance) -> Self {
        TranslationSpec {
            tags: vec![Vec::new()],
            merges: Vec::new(),
            provenance,
        }
    }

    /// Interns a tag, returning its index.
    pub fn tag_id(&mut self, tag: &[Lit]) -> usize {
        let mut t = tag.to_vec();
        t.sort_unstable();
        t.dedup();
        match self.tags.iter().position(|x| *x == t) {
            Some(i) => i,
            None => {
                self.tags.push(t);
                self.tags.len() - 1
            }
        }
    }

    pub fn add_merge(&mut self, target: Lit, tags: &[Tag]) {
        let mut ids: Vec<usize> = tags.iter().map(|t| self.tag_id(t)).collect();
        ids.sort_unstable();
        ids.dedup();
        let m = MergeSpec { target, tags: ids };
        if !self.merges.contains(&m) {
            self.merges.push(m);
        }
    }

    pub fn merges_for(&self, l: Lit) -> impl Iterator<Item = &MergeSpec> {
        self.merges.iter().filter(move |m| m.target == l)
    }

    pub fn merge_tags(&self, m: &MergeSpec) -> Vec<Tag> {
        m.tags.iter().map(|&i| self.tags[i].clone()).collect()
    }
}

/// Which literals receive merges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeTargets {
    PreconditionsAndGoals,
    AllLiterals,
}

pub fn targets(p: &ConformantProblem, which: MergeTargets) -> Vec<Lit> {
    match which {
        MergeTargets::PreconditionsAndGoals => p.precondition_and_goal_literals(),
        MergeTargets::AllLiterals => (0..2 * p.num_fluents()).map(Lit::from_code).collect(),
    }
}

/// `K_i`: a single covering merge `c(C)` with `|C| ≤ i` when one exists,
/// otherwise one merge per `i`-subset of `C_I*(L)`.
pub fn ki_spec(
    p: &ConformantProblem,
    an: &Analysis,
    i: usize,
    which: MergeTargets,
) -> TranslationSpec {
    let mut spec = TranslationSpec::empty(Provenance::Ki(i));
    if i == 0 {
        return spec;
    }
    for l in targets(p, which) {
        let rc = an.relevant_clauses(l);
        if rc.extended.is_empty() {
            continue;
        }
        let covering = (1..=i).find_map(|k| width::first_covering_subset(&rc, &an.pi, k));
        match covering {
            Some(c) => spec.add_merge(l, &width::cover(&c, &an.pi)),
            None => {
                let mut merges = Vec::new();
                width::for_each_subset(rc.extended.len(), i, &mut |idx| {
                    let subset: Vec<_> = idx.iter().map(|&j| rc.extended[j].clone()).collect();
                    merges.push(width::cover(&subset, &an.pi));
                    true
                });
                for m in merges.into_iter().filter(|m| !m.is_empty()) {
                    spec.add_merge(l, &m);
                }
            }
        }
    }
    spec
}

/// `Kmodels`: one merge per target made of the models of `C_I(L)` that are
/// consistent with `I`. A single covering `K_1` merge is used instead when
/// one exists.
pub fn kmodels_spec(
    p: &ConformantProblem,
    an: &Analysis,
    cap: usize,
    which: MergeTargets,
) -> Result<TranslationSpec, SpecError> {
    let mut spec = TranslationSpec::empty(Provenance::Kmodels);
    for l in targets(p, which) {
        let rc = an.relevant_clauses(l);
        if rc.clauses.is_empty() {
            continue;
        }
        if let Some(c) = width::first_covering_subset(&rc, &an.pi, 1) {
            spec.add_merge(l, &width::cover(&c, &an.pi));
            continue;
        }
        let mut vars: Vec<usize> = rc
            .clauses
            .iter()
            .flat_map(|c| c.lits())
            .map(|x| x.fluent())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        let mut models: Vec<Tag> = Vec::new();
        enumerate_models(&vars, &rc.clauses, Some(&an.pi), cap, &mut |m| {
            models.push(m.to_vec());
            true
        })
        .map_err(|CapExceeded| SpecError::TooManyModels { literal: l, cap })?;
        spec.add_merge(l, &models);
    }
    Ok(spec)
}

/// `K_S0`: tags are the possible initial states (restricted to unknown
/// fluents); every target gets the merge of all of them.
pub fn ks0_spec(
    p: &ConformantProblem,
    an: &Analysis,
    cap: usize,
) -> Result<TranslationSpec, SpecError> {
    let mut spec = TranslationSpec::empty(Provenance::KS0);
    let unknown = an.pi.unknown_fluents();
    if unknown.is_empty() {
        return Ok(spec);
    }
    let mut states: Vec<Tag> = Vec::new();
    enumerate_models(&unknown, &[], Some(&an.pi), cap, &mut |m| {
        states.push(m.to_vec());
        true
    })
    .map_err(|CapExceeded| SpecError::TooManyInitialStates { cap })?;
    for l in p.precondition_and_goal_literals() {
        spec.add_merge(l, &states);
    }
    Ok(spec)
}
