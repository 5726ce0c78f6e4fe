//! The `K_{T,M}` translation family and the problem transformations that
//! feed it.

pub mod cnf_goal;
pub mod nondet;
pub mod spec;

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use cnf_goal::cnf_goal_compile;
pub use nondet::{nondet_compile, NondetCompilation, ResetSpec};
pub use spec::{
    ki_spec, kmodels_spec, ks0_spec, MergeSpec, MergeTargets, Provenance, SpecError,
    TranslationSpec,
};

use crate::analysis::Analysis;
use crate::model::{Action, ClassicalProblem, ConformantProblem, Fluent, Lit, Rule};
use crate::names::sanitize;
use crate::pi::{Tag, DEFAULT_MERGE_CAP};

pub const MERGE_PREFIX: &str = "merge__";
pub const AUX_PREFIX: &str = "aux__";
pub const RESET_PREFIX: &str = "reset__";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("invalid translation spec: {0}")]
    InvalidSpec(String),
    #[error("action {0} has nondeterministic effects; compile them first")]
    Nondeterministic(String),
}

#[derive(Clone, Debug, Default)]
pub struct TranslateOptions {
    /// Apply the size-reducing simplifications and extra deduction rules.
    pub optimize: bool,
    /// Knowledge-erasing effects for reset actions of compiled
    /// nondeterministic actions.
    pub resets: Vec<ResetSpec>,
    /// Model budget for checking hand-written merges.
    pub merge_cap: Option<usize>,
}

impl TranslateOptions {
    pub fn optimized() -> Self {
        TranslateOptions {
            optimize: true,
            ..Default::default()
        }
    }
}

/// A classical problem together with the meaning of its fluents.
#[derive(Clone, Debug)]
pub struct Translation {
    pub classical: ClassicalProblem,
    /// Classical fluent `i` stands for `K atoms[i].0 / tags[atoms[i].1]`.
    pub atoms: Vec<(Lit, usize)>,
    pub spec: TranslationSpec,
    index: HashMap<(Lit, usize), usize>,
    alias: Vec<Vec<usize>>,
}

impl Translation {
    /// Classical fluent for `KL/t`, after aliasing, if it exists.
    pub fn atom(&self, l: Lit, tag: usize) -> Option<usize> {
        let t = self.alias.get(l.code()).map_or(tag, |row| row[tag]);
        self.index.get(&(l, t)).copied()
    }

    /// Classical fluent for `KL/t` given the tag's literals.
    pub fn atom_for_tag(&self, l: Lit, tag: &[Lit]) -> Option<usize> {
        let mut t = tag.to_vec();
        t.sort_unstable();
        let id = self.spec.tags.iter().position(|x| *x == t)?;
        self.atom(l, id)
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }
}

/// Classical fluent name of `KL/t`: `K_<lit>` or `K_<lit>__<t1>__<t2>`.
pub fn atom_name(fluents: &[String], l: Lit, tag: &[Lit]) -> String {
    let mut s = format!("K_{}", lit_token(fluents, l));
    for x in tag {
        s.push_str("__");
        s.push_str(&lit_token(fluents, *x));
    }
    s
}

fn lit_token(fluents: &[String], l: Lit) -> String {
    let base = sanitize(&fluents[l.fluent()]);
    if l.is_positive() {
        base
    } else {
        format!("not_{base}")
    }
}

/// True for inference actions added by a translation rather than taken
/// from the source problem.
pub fn is_inference_action(name: &str) -> bool {
    name.starts_with(MERGE_PREFIX) || name.starts_with(AUX_PREFIX) || name.starts_with(RESET_PREFIX)
}

/// `K_0(P)`.
pub fn k0(p: &ConformantProblem, an: &Analysis) -> Result<Translation, TranslateError> {
    ktm(
        p,
        an,
        &TranslationSpec::empty(Provenance::K0),
        &TranslateOptions::default(),
    )
}

/// `K_{T,M}(P)`.
pub fn ktm(
    p: &ConformantProblem,
    an: &Analysis,
    spec: &TranslationSpec,
    opts: &TranslateOptions,
) -> Result<Translation, TranslateError> {
    if let Some(a) = p.actions.iter().find(|a| !a.is_deterministic()) {
        return Err(TranslateError::Nondeterministic(a.name.clone()));
    }
    check_spec(p, an, spec, opts)?;
    Builder::new(p, an, spec, opts).build()
}

fn check_spec(
    p: &ConformantProblem,
    an: &Analysis,
    spec: &TranslationSpec,
    opts: &TranslateOptions,
) -> Result<(), TranslateError> {
    if spec.tags.first().is_none_or(|t| !t.is_empty()) {
        return Err(TranslateError::InvalidSpec(
            "tag 0 must be the empty tag".into(),
        ));
    }
    for t in &spec.tags {
        if !an.pi.tag_consistent(t) {
            let names: Vec<String> = t.iter().map(|&l| p.lit_name(l)).collect();
            return Err(TranslateError::InvalidSpec(format!(
                "tag {{{}}} is inconsistent with the initial situation",
                names.join(", ")
            )));
        }
    }
    for m in &spec.merges {
        if m.tags.is_empty() || m.tags.iter().any(|&t| t >= spec.tags.len()) {
            return Err(TranslateError::InvalidSpec(format!(
                "malformed merge for {}",
                p.lit_name(m.target)
            )));
        }
    }
    if spec.provenance == Provenance::Custom {
        let cap = opts.merge_cap.unwrap_or(DEFAULT_MERGE_CAP);
        for m in &spec.merges {
            let valid = an
                .pi
                .merge_valid(&spec.merge_tags(m), cap)
                .map_err(|e| TranslateError::InvalidSpec(e.to_string()))?;
            if !valid {
                return Err(TranslateError::InvalidSpec(format!(
                    "merge for {} is not entailed by the initial situation",
                    p.lit_name(m.target)
                )));
            }
        }
    }
    Ok(())
}

struct Builder<'a> {
    p: &'a ConformantProblem,
    an: &'a Analysis,
    spec: &'a TranslationSpec,
    opts: &'a TranslateOptions,
    closures: Vec<Vec<Lit>>,
    /// `alias[L][t]`: the tag whose atom stands for `KL/t`.
    alias: Vec<Vec<usize>>,
    /// Literals relevant to some merge target reached through tag `t`.
    feeds: Vec<FixedBitSet>,
    index: HashMap<(Lit, usize), usize>,
    atoms: Vec<(Lit, usize)>,
}

impl<'a> Builder<'a> {
    fn new(
        p: &'a ConformantProblem,
        an: &'a Analysis,
        spec: &'a TranslationSpec,
        opts: &'a TranslateOptions,
    ) -> Self {
        let m = 2 * p.num_fluents();
        let closures: Vec<Vec<Lit>> = spec.tags.iter().map(|t| an.pi.closure(t)).collect();
        let alias: Vec<Vec<usize>> = (0..m)
            .map(|code| {
                let l = Lit::from_code(code);
                let rel = an.relevance.relevant_to(l);
                (0..spec.tags.len())
                    .map(|t| {
                        let idle = t != 0 && !closures[t].iter().any(|x| rel.contains(x.code()));
                        if opts.optimize && idle {
                            0
                        } else {
                            t
                        }
                    })
                    .collect()
            })
            .collect();
        let mut feeds: Vec<FixedBitSet> = (0..spec.tags.len())
            .map(|_| FixedBitSet::with_capacity(m))
            .collect();
        for mg in &spec.merges {
            let rel = an.relevance.relevant_to(mg.target);
            for &t in &mg.tags {
                feeds[t].union_with(rel);
            }
        }
        Builder {
            p,
            an,
            spec,
            opts,
            closures,
            alias,
            feeds,
            index: HashMap::new(),
            atoms: Vec::new(),
        }
    }

    /// Positive classical literal for `KL/t`.
    fn k(&mut self, l: Lit, tag: usize) -> Lit {
        let t = self.alias[l.code()][tag];
        let next = self.atoms.len();
        let id = *self.index.entry((l, t)).or_insert(next);
        if id == next {
            self.atoms.push((l, t));
        }
        Lit::pos(id)
    }

    fn keeps_support(&self, l: Lit, tag: usize) -> bool {
        tag == 0 || !self.opts.optimize || self.feeds[tag].contains(l.code())
    }

    /// Every fluent relevant to `l` is decided by `I` and the tag.
    fn decided(&self, l: Lit, tag: usize) -> bool {
        let star = &self.closures[tag];
        self.an
            .relevance
            .relevant_to(l)
            .ones()
            .map(Lit::from_code)
            .all(|x| star.binary_search(&x).is_ok() || star.binary_search(&!x).is_ok())
    }

    fn build(mut self) -> Result<Translation, TranslateError> {
        let p = self.p;
        let ntags = self.spec.tags.len();
        let mut actions: Vec<Action> = Vec::new();
        let mut flags: Vec<bool> = Vec::new();

        for a in &p.actions {
            let pre: Vec<Lit> = a.pre.iter().map(|&l| self.k(l, 0)).collect();
            let mut rules: Vec<Rule> = Vec::new();
            for r in &a.rules {
                for t in 0..ntags {
                    if self.keeps_support(r.effect, t) {
                        let cond = r.condition.iter().map(|&c| self.k(c, t)).collect();
                        let eff = self.k(r.effect, t);
                        rules.push(Rule::new(cond, eff));
                    }
                    if self.keeps_support(!r.effect, t) {
                        let grouped = self.opts.optimize && self.decided(r.effect, t);
                        let mut cond: Vec<Lit> = Vec::with_capacity(r.condition.len());
                        for &c in &r.condition {
                            if grouped && self.keeps_support(c, t) {
                                cond.push(self.k(c, t));
                            } else if self.keeps_support(!c, t) {
                                cond.push(!self.k(!c, t));
                            }
                            // Neither atom is kept up to date under `t`: drop
                            // the literal so the rule fires at least as often.
                        }
                        let eff = !self.k(!r.effect, t);
                        rules.push(Rule::new(cond, eff));
                    }
                }
            }
            if self.opts.optimize {
                for r in &a.rules {
                    let guard = !r.effect;
                    let deleted = a.rules.iter().any(|x| x.effect == guard);
                    if r.condition.contains(&guard) && !deleted {
                        let cond = r
                            .condition
                            .iter()
                            .filter(|&&c| c != guard)
                            .map(|&c| self.k(c, 0))
                            .collect();
                        let eff = self.k(r.effect, 0);
                        rules.push(Rule::new(cond, eff));
                    }
                }
            }
            dedup_rules(&mut rules);
            actions.push(Action::new(a.name.clone(), pre, rules));
            flags.push(a.name.starts_with(RESET_PREFIX));
        }

        for reset in &self.opts.resets {
            let extra = self.reset_rules(reset);
            if let Some(i) = p.actions.iter().position(|a| a.name == reset.action) {
                actions[i].rules.extend(extra);
                dedup_rules(&mut actions[i].rules);
            }
        }

        let mut per_target: HashMap<Lit, usize> = HashMap::new();
        for mg in &self.spec.merges {
            let k = per_target.entry(mg.target).or_insert(0);
            let name = format!("{MERGE_PREFIX}{}__m{}", lit_token(&p.fluents, mg.target), k);
            *k += 1;
            let cond: Vec<Lit> = mg.tags.iter().map(|&t| self.k(mg.target, t)).collect();
            let mut rules = vec![Rule::new(cond.clone(), self.k(mg.target, 0))];
            for other in self.an.mutex.mutex_with(mg.target) {
                let eff = self.k(!other, 0);
                rules.push(Rule::new(cond.clone(), eff));
            }
            dedup_rules(&mut rules);
            actions.push(Action::new(name, vec![], rules));
            flags.push(true);
        }

        if self.opts.optimize {
            if let Some(a) = self.static_disjunctions() {
                actions.push(a);
                flags.push(true);
            }
        }

        let goal: Vec<Lit> = p.goal.iter().map(|&g| self.k(g, 0)).collect();
        Ok(self.finish(actions, flags, goal))
    }

    /// `¬KL → ¬KL/t` and `KL → KL/t` for tags over the reset's hidden
    /// fluents, skipping hidden fluents and fluents the reset itself sets.
    fn reset_rules(&mut self, reset: &ResetSpec) -> Vec<Rule> {
        let mut out = Vec::new();
        let skip = |f: Fluent| reset.hidden.contains(&f) || reset.own.contains(&f);
        for t in 1..self.spec.tags.len() {
            if !self.spec.tags[t]
                .iter()
                .any(|x| reset.hidden.contains(&x.fluent()))
            {
                continue;
            }
            for code in 0..2 * self.p.num_fluents() {
                let l = Lit::from_code(code);
                if skip(l.fluent()) || self.alias[code][t] == 0 || !self.keeps_support(l, t) {
                    continue;
                }
                let plain = self.k(l, 0);
                let tagged = self.k(l, t);
                out.push(Rule::new(vec![!plain], !tagged));
                out.push(Rule::new(vec![plain], tagged));
            }
        }
        out
    }

    /// One auxiliary action deriving `KL_i` from `K¬L_j` (`j ≠ i`) for each
    /// clause of `I` whose literals no action can delete.
    fn static_disjunctions(&mut self) -> Option<Action> {
        let p = self.p;
        let deletable: Vec<bool> = {
            let mut d = vec![false; 2 * p.num_fluents()];
            for a in &p.actions {
                for r in &a.rules {
                    d[(!r.effect).code()] = true;
                }
            }
            d
        };
        let statics: Vec<Vec<Lit>> = self
            .an
            .pi
            .clauses()
            .iter()
            .filter(|c| c.len() >= 2 && c.lits().iter().all(|l| !deletable[l.code()]))
            .map(|c| c.lits().to_vec())
            .collect();
        if statics.is_empty() {
            return None;
        }
        let mut rules = Vec::new();
        for c in &statics {
            for (i, &li) in c.iter().enumerate() {
                let cond: Vec<Lit> = c
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &lj)| self.k(!lj, 0))
                    .collect();
                let eff = self.k(li, 0);
                rules.push(Rule::new(cond, eff));
            }
        }
        dedup_rules(&mut rules);
        Some(Action::new(
            format!("{AUX_PREFIX}static_disjunctions"),
            vec![],
            rules,
        ))
    }

    /// Sorts atoms canonically and renumbers everything accordingly.
    fn finish(self, mut actions: Vec<Action>, flags: Vec<bool>, goal: Vec<Lit>) -> Translation {
        let p = self.p;
        let mut order: Vec<usize> = (0..self.atoms.len()).collect();
        order.sort_by_key(|&i| (self.atoms[i].0, self.atoms[i].1));
        let mut remap = vec![0usize; self.atoms.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let re = |l: Lit| Lit::new(remap[l.fluent()], l.is_positive());
        let atoms: Vec<(Lit, usize)> = order.iter().map(|&i| self.atoms[i]).collect();
        let fluents: Vec<String> = atoms
            .iter()
            .map(|&(l, t)| atom_name(&p.fluents, l, &self.spec.tags[t]))
            .collect();
        for a in &mut actions {
            for l in &mut a.pre {
                *l = re(*l);
            }
            for r in &mut a.rules {
                for c in &mut r.condition {
                    *c = re(*c);
                }
                r.condition.sort_unstable();
                r.effect = re(r.effect);
            }
        }
        let init: Vec<Lit> = atoms
            .iter()
            .enumerate()
            .filter(|(_, &(l, t))| self.an.pi.entails(&self.spec.tags[t], l))
            .map(|(i, _)| Lit::pos(i))
            .collect();
        let mut goal: Vec<Lit> = goal.into_iter().map(re).collect();
        goal.sort_unstable();
        goal.dedup();
        let index = atoms.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        Translation {
            classical: ClassicalProblem {
                name: p.name.clone(),
                fluents,
                init,
                actions,
                goal,
                merge_flags: flags,
            },
            atoms,
            spec: self.spec.clone(),
            index,
            alias: self.alias,
        }
    }
}

/// Drops repeated rules, keeping first occurrences in order.
fn dedup_rules(rules: &mut Vec<Rule>) {
    let mut seen = std::collections::HashSet::new();
    rules.retain(|r| seen.insert(r.clone()));
}

/// Collects the tags of a translation whose atoms are mentioned, for
/// reporting.
pub fn tag_count(t: &Translation) -> usize {
    let mut used: Vec<usize> = t.atoms.iter().map(|&(_, tag)| tag).collect();
    used.sort_unstable();
    used.dedup();
    used.len()
}

/// Tag literal lists of a spec, by index.
pub fn spec_tags(spec: &TranslationSpec) -> &[Tag] {
    &spec.tags
}
