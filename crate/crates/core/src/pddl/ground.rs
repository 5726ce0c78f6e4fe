//! Grounding of parsed schemas into a [`ConformantProblem`].

use std::collections::{HashMap, HashSet};

use super::ast::{
    ActionSchema, AtomAst, DomainAst, Effect, Formula, InitEntry, LitAst, ProblemAst, TypedName,
};
use super::PddlError;
use crate::model::{
    has_complementary_pair, normalize_lits, Action, Clause, ConformantProblem, Lit, NondetEffect,
    Rule,
};
use crate::names::ground_name;
use crate::translate::nondet::add_oneof;

pub const DEFAULT_GROUNDING_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct GroundOptions {
    /// Maximum number of ground action and rule instances.
    pub cap: usize,
    /// Evaluate predicates that no effect mentions at grounding time.
    pub compile_static: bool,
    /// Keep every declared nullary predicate as a fluent, used or not.
    pub keep_nullary: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            cap: DEFAULT_GROUNDING_CAP,
            compile_static: true,
            keep_nullary: false,
        }
    }
}

#[derive(Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn get(&mut self, name: String) -> usize {
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        self.names.push(name.clone());
        self.index.insert(name, self.names.len() - 1);
        self.names.len() - 1
    }
}

struct Grounder<'a> {
    arity: HashMap<&'a str, usize>,
    parent: HashMap<&'a str, &'a str>,
    objects: Vec<&'a TypedName>,
    object_names: HashSet<&'a str>,
    static_preds: HashSet<&'a str>,
    static_true: HashSet<String>,
    atoms: Interner,
    instances: usize,
    cap: usize,
}

/// Outcome of evaluating a ground literal at grounding time.
enum Eval {
    True,
    False,
    Dynamic(Lit),
}

pub fn ground(
    d: &DomainAst,
    p: &ProblemAst,
    opts: GroundOptions,
) -> Result<ConformantProblem, PddlError> {
    let mut dynamic: HashSet<&str> = HashSet::new();
    for a in &d.actions {
        if let Some(e) = &a.effect {
            effect_preds(e, &mut dynamic);
        }
    }
    for e in &p.init {
        match e {
            InitEntry::Lit(_) => {}
            InitEntry::Or(ls) | InitEntry::Oneof(ls) => {
                dynamic.extend(ls.iter().map(|l| l.atom.pred.as_str()))
            }
            InitEntry::Unknown(a) => {
                dynamic.insert(a.pred.as_str());
            }
        }
    }
    let static_preds: HashSet<&str> = if opts.compile_static {
        d.predicates
            .iter()
            .map(|p| p.name.as_str())
            .filter(|n| !dynamic.contains(n))
            .collect()
    } else {
        HashSet::new()
    };
    let objects: Vec<&TypedName> = d.constants.iter().chain(&p.objects).collect();
    let mut g = Grounder {
        arity: d
            .predicates
            .iter()
            .map(|p| (p.name.as_str(), p.params.len()))
            .collect(),
        parent: d
            .types
            .iter()
            .map(|t| (t.name.as_str(), t.ty.as_str()))
            .collect(),
        object_names: objects.iter().map(|o| o.name.as_str()).collect(),
        objects,
        static_preds,
        static_true: HashSet::new(),
        atoms: Interner::default(),
        instances: 0,
        cap: opts.cap,
    };
    for e in &p.init {
        if let InitEntry::Lit(l) = e {
            g.check_atom(&l.atom, &HashMap::new())?;
            if l.positive && g.static_preds.contains(l.atom.pred.as_str()) {
                g.static_true
                    .insert(ground_name(&l.atom.pred, &strs(&l.atom.args)));
            }
        }
    }
    if opts.keep_nullary {
        for pr in d.predicates.iter().filter(|p| p.params.is_empty()) {
            g.atoms.get(pr.name.clone());
        }
    }

    let mut goal = Vec::new();
    let mut goal_clauses = Vec::new();
    if let Some(f) = &p.goal {
        g.goal(f, &mut goal, &mut goal_clauses)?;
    }

    let mut actions = Vec::new();
    for schema in &d.actions {
        g.ground_schema(schema, &mut actions)?;
    }
    actions.sort_by(|a: &Action, b| a.name.cmp(&b.name));
    if let Some(w) = actions.windows(2).find(|w| w[0].name == w[1].name) {
        return Err(PddlError::Malformed(format!(
            "duplicate action {}",
            w[0].name
        )));
    }

    let mut init = Vec::new();
    let mut mentioned: HashSet<usize> = HashSet::new();
    let none = HashMap::new();
    for e in &p.init {
        match e {
            InitEntry::Lit(l) => {
                let name = ground_name(&l.atom.pred, &strs(&l.atom.args));
                if let Some(&f) = g.atoms.index.get(&name) {
                    mentioned.insert(f);
                    init.push(Clause::unit(Lit::new(f, l.positive)));
                }
            }
            InitEntry::Or(ls) => {
                let lits = g.init_lits(ls)?;
                mentioned.extend(lits.iter().map(|l| l.fluent()));
                init.push(Clause::new(lits));
            }
            InitEntry::Oneof(ls) => {
                let lits = g.init_lits(ls)?;
                mentioned.extend(lits.iter().map(|l| l.fluent()));
                if lits.iter().all(|l| l.is_positive()) {
                    let group: Vec<usize> = lits.iter().map(|l| l.fluent()).collect();
                    add_oneof(&mut init, &group);
                } else {
                    init.push(Clause::new(lits.clone()));
                    for (i, &x) in lits.iter().enumerate() {
                        for &y in &lits[i + 1..] {
                            init.push(Clause::new(vec![!x, !y]));
                        }
                    }
                }
            }
            InitEntry::Unknown(a) => {
                g.check_atom(a, &none)?;
                let f = g.atoms.get(ground_name(&a.pred, &strs(&a.args)));
                mentioned.insert(f);
                init.push(Clause::tautology(f));
            }
        }
    }
    for f in 0..g.atoms.names.len() {
        if !mentioned.contains(&f) {
            init.push(Clause::unit(Lit::neg(f)));
        }
    }

    // Renumber fluents in name order.
    let mut order: Vec<usize> = (0..g.atoms.names.len()).collect();
    order.sort_by(|&a, &b| g.atoms.names[a].cmp(&g.atoms.names[b]));
    let mut perm = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    let map = |l: Lit| Lit::new(perm[l.fluent()], l.is_positive());
    let map_all = |ls: &[Lit]| {
        let mut v: Vec<Lit> = ls.iter().map(|&l| map(l)).collect();
        normalize_lits(&mut v);
        v
    };
    let fluents = order.iter().map(|&o| g.atoms.names[o].clone()).collect();
    let mut init: Vec<Clause> = init
        .iter()
        .map(|c| Clause::new(map_all(c.lits())))
        .collect();
    init.sort();
    init.dedup();
    let actions = actions
        .into_iter()
        .map(|a| Action {
            name: a.name,
            pre: map_all(&a.pre),
            rules: a
                .rules
                .iter()
                .map(|r| Rule::new(map_all(&r.condition), map(r.effect)))
                .collect(),
            nondet: a
                .nondet
                .iter()
                .map(|e| NondetEffect {
                    condition: map_all(&e.condition),
                    outcomes: e.outcomes.iter().map(|o| map_all(o)).collect(),
                })
                .collect(),
        })
        .collect();
    let mut goal_clauses: Vec<Clause> = goal_clauses
        .iter()
        .map(|c: &Clause| Clause::new(map_all(c.lits())))
        .collect();
    goal_clauses.sort();
    goal_clauses.dedup();
    Ok(ConformantProblem {
        name: p.name.clone(),
        fluents,
        init,
        actions,
        goal: map_all(&goal),
        goal_clauses,
    })
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn effect_preds<'a>(e: &'a Effect, out: &mut HashSet<&'a str>) {
    match e {
        Effect::And(es) | Effect::Oneof(es) => es.iter().for_each(|e| effect_preds(e, out)),
        Effect::Lit(l) => {
            out.insert(l.atom.pred.as_str());
        }
        Effect::When(_, e) | Effect::Forall(_, e) => effect_preds(e, out),
    }
}

type Binding = HashMap<String, String>;

impl<'a> Grounder<'a> {
    fn is_subtype(&self, ty: &str, of: &str) -> bool {
        let mut t = ty;
        for _ in 0..=self.parent.len() {
            if t == of {
                return true;
            }
            match self.parent.get(t) {
                Some(&p) if p != t => t = p,
                _ => return of == "object",
            }
        }
        false
    }

    fn objects_of(&self, ty: &str) -> Vec<&'a str> {
        let mut v: Vec<&str> = self
            .objects
            .iter()
            .filter(|o| self.is_subtype(&o.ty, ty))
            .map(|o| o.name.as_str())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn resolve(&self, term: &str, b: &Binding) -> Result<String, PddlError> {
        if term.starts_with('?') {
            b.get(term)
                .cloned()
                .ok_or_else(|| PddlError::Undeclared(format!("variable {term}")))
        } else if self.object_names.contains(term) {
            Ok(term.to_string())
        } else {
            Err(PddlError::Undeclared(format!("object {term}")))
        }
    }

    fn check_atom(&self, a: &AtomAst, b: &Binding) -> Result<String, PddlError> {
        match self.arity.get(a.pred.as_str()) {
            None => return Err(PddlError::Undeclared(format!("predicate {}", a.pred))),
            Some(&n) if n != a.args.len() => {
                return Err(PddlError::Malformed(format!(
                    "{} expects {} arguments",
                    a.pred, n
                )))
            }
            _ => {}
        }
        let args = a
            .args
            .iter()
            .map(|t| self.resolve(t, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ground_name(&a.pred, &strs(&args)))
    }

    fn eval_atom(&mut self, a: &AtomAst, positive: bool, b: &Binding) -> Result<Eval, PddlError> {
        let name = self.check_atom(a, b)?;
        if self.static_preds.contains(a.pred.as_str()) {
            let t = self.static_true.contains(&name);
            return Ok(if t == positive {
                Eval::True
            } else {
                Eval::False
            });
        }
        Ok(Eval::Dynamic(Lit::new(self.atoms.get(name), positive)))
    }

    /// Conjunction of literals; `None` if statically false.
    fn conjunction(
        &mut self,
        f: &Formula,
        b: &Binding,
        out: &mut Vec<Lit>,
    ) -> Result<bool, PddlError> {
        match f {
            Formula::And(fs) => {
                for f in fs {
                    if !self.conjunction(f, b, out)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Atom(a) => self.push_eval(a, true, b, out),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(a) => self.push_eval(a, false, b, out),
                Formula::Eq(x, y) => Ok(self.resolve(x, b)? != self.resolve(y, b)?),
                _ => Err(PddlError::Unsupported(
                    "negation of a compound formula".into(),
                )),
            },
            Formula::Eq(x, y) => Ok(self.resolve(x, b)? == self.resolve(y, b)?),
            Formula::Or(_) => Err(PddlError::Unsupported(
                "disjunctive precondition or condition".into(),
            )),
        }
    }

    fn push_eval(
        &mut self,
        a: &AtomAst,
        positive: bool,
        b: &Binding,
        out: &mut Vec<Lit>,
    ) -> Result<bool, PddlError> {
        Ok(match self.eval_atom(a, positive, b)? {
            Eval::True => true,
            Eval::False => false,
            Eval::Dynamic(l) => {
                out.push(l);
                true
            }
        })
    }

    fn goal(
        &mut self,
        f: &Formula,
        goal: &mut Vec<Lit>,
        clauses: &mut Vec<Clause>,
    ) -> Result<(), PddlError> {
        let none = Binding::new();
        match f {
            Formula::And(fs) => fs.iter().try_for_each(|f| self.goal(f, goal, clauses)),
            Formula::Or(fs) => {
                let mut lits = Vec::new();
                for f in fs {
                    lits.push(self.goal_lit(f, &none)?);
                }
                normalize_lits(&mut lits);
                if lits.len() == 1 {
                    goal.push(lits[0]);
                } else {
                    clauses.push(Clause::new(lits));
                }
                Ok(())
            }
            _ => {
                goal.push(self.goal_lit(f, &none)?);
                Ok(())
            }
        }
    }

    /// Goal literals are always fluents, even over static predicates.
    fn goal_lit(&mut self, f: &Formula, b: &Binding) -> Result<Lit, PddlError> {
        let (a, positive) = match f {
            Formula::Atom(a) => (a, true),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(a) => (a, false),
                _ => return Err(PddlError::Unsupported("compound negated goal".into())),
            },
            _ => {
                return Err(PddlError::Unsupported(
                    "goal must be a CNF over atoms".into(),
                ))
            }
        };
        let name = self.check_atom(a, b)?;
        Ok(Lit::new(self.atoms.get(name), positive))
    }

    fn init_lits(&mut self, ls: &[LitAst]) -> Result<Vec<Lit>, PddlError> {
        let none = Binding::new();
        let mut out = Vec::new();
        for l in ls {
            let name = self.check_atom(&l.atom, &none)?;
            out.push(Lit::new(self.atoms.get(name), l.positive));
        }
        normalize_lits(&mut out);
        Ok(out)
    }

    fn bump(&mut self, n: usize) -> Result<(), PddlError> {
        self.instances = self.instances.saturating_add(n);
        if self.instances > self.cap {
            return Err(PddlError::GroundingBlowup { cap: self.cap });
        }
        Ok(())
    }

    fn ground_schema(
        &mut self,
        s: &'a ActionSchema,
        out: &mut Vec<Action>,
    ) -> Result<(), PddlError> {
        let domains: Vec<Vec<&str>> = s.params.iter().map(|p| self.objects_of(&p.ty)).collect();
        let total = domains
            .iter()
            .fold(1usize, |acc, d| acc.saturating_mul(d.len()));
        if total > self.cap {
            return Err(PddlError::GroundingBlowup { cap: self.cap });
        }
        let mut idx = vec![0usize; domains.len()];
        if domains.iter().any(|d| d.is_empty()) {
            return Ok(());
        }
        loop {
            let args: Vec<&str> = idx.iter().zip(&domains).map(|(&i, d)| d[i]).collect();
            let b: Binding = s
                .params
                .iter()
                .zip(&args)
                .map(|(p, a)| (p.name.clone(), a.to_string()))
                .collect();
            if let Some(a) = self.instantiate(s, &args, &b)? {
                self.bump(1 + a.rules.len() + a.nondet.len())?;
                out.push(a);
            }
            // Odometer increment, last parameter fastest.
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return Ok(());
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn instantiate(
        &mut self,
        s: &ActionSchema,
        args: &[&str],
        b: &Binding,
    ) -> Result<Option<Action>, PddlError> {
        let mut pre = Vec::new();
        if let Some(f) = &s.pre {
            if !self.conjunction(f, b, &mut pre)? {
                return Ok(None);
            }
        }
        normalize_lits(&mut pre);
        if has_complementary_pair(&pre) {
            return Ok(None);
        }
        let mut rules = Vec::new();
        let mut nondet = Vec::new();
        if let Some(e) = &s.effect {
            self.effect(e, &mut Vec::new(), b, &mut rules, &mut nondet)?;
        }
        let rules = rules
            .into_iter()
            .filter(|r: &Rule| {
                !has_complementary_pair(&r.condition)
                    && !r.condition.contains(&r.effect)
                    && !r.condition.iter().any(|c| pre.contains(&!*c))
            })
            .collect();
        let mut a = Action::new(ground_name(&s.name, args), pre, rules);
        a.nondet = nondet;
        Ok(Some(a))
    }

    fn effect(
        &mut self,
        e: &Effect,
        cond: &mut Vec<Lit>,
        b: &Binding,
        rules: &mut Vec<Rule>,
        nondet: &mut Vec<NondetEffect>,
    ) -> Result<(), PddlError> {
        match e {
            Effect::And(es) => es
                .iter()
                .try_for_each(|e| self.effect(e, cond, b, rules, nondet)),
            Effect::Lit(l) => {
                if self.static_preds.contains(l.atom.pred.as_str()) {
                    unreachable!("effect predicates are never static");
                }
                let name = self.check_atom(&l.atom, b)?;
                let lit = Lit::new(self.atoms.get(name), l.positive);
                rules.push(Rule::new(cond.clone(), lit));
                Ok(())
            }
            Effect::When(c, inner) => {
                let mark = cond.len();
                let ok = self.conjunction(c, b, cond)?;
                if ok {
                    self.effect(inner, cond, b, rules, nondet)?;
                }
                cond.truncate(mark);
                Ok(())
            }
            Effect::Forall(vars, inner) => {
                let domains: Vec<Vec<&str>> = vars.iter().map(|v| self.objects_of(&v.ty)).collect();
                let mut combos: Vec<Vec<&str>> = vec![Vec::new()];
                for d in &domains {
                    combos = combos
                        .into_iter()
                        .flat_map(|c| {
                            d.iter().map(move |x| {
                                let mut c = c.clone();
                                c.push(x);
                                c
                            })
                        })
                        .collect();
                }
                self.bump(combos.len())?;
                for combo in combos {
                    let mut b2 = b.clone();
                    for (v, x) in vars.iter().zip(combo) {
                        b2.insert(v.name.clone(), x.to_string());
                    }
                    self.effect(inner, cond, &b2, rules, nondet)?;
                }
                Ok(())
            }
            Effect::Oneof(outcomes) => {
                let mut outs = Vec::new();
                for o in outcomes {
                    let mut r = Vec::new();
                    let mut n = Vec::new();
                    self.effect(o, &mut Vec::new(), b, &mut r, &mut n)?;
                    if !n.is_empty() || r.iter().any(|r| !r.condition.is_empty()) {
                        return Err(PddlError::Unsupported(
                            "conditional or nested oneof outcome".into(),
                        ));
                    }
                    let mut lits: Vec<Lit> = r.into_iter().map(|r| r.effect).collect();
                    normalize_lits(&mut lits);
                    outs.push(lits);
                }
                let mut condition = cond.clone();
                normalize_lits(&mut condition);
                nondet.push(NondetEffect {
                    condition,
                    outcomes: outs,
                });
                Ok(())
            }
        }
    }
}
