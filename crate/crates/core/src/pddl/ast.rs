//! Untyped-to-typed AST for the supported conformant PDDL subset.

use super::sexpr::Sexpr;
use super::PddlError;

/// A (possibly lifted) atom: predicate and argument terms (`?x` or names).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomAst {
    pub pred: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LitAst {
    pub positive: bool,
    pub atom: AtomAst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Atom(AtomAst),
    Eq(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    And(Vec<Effect>),
    Lit(LitAst),
    When(Formula, Box<Effect>),
    Forall(Vec<TypedName>, Box<Effect>),
    Oneof(Vec<Effect>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSig {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre: Option<Formula>,
    pub effect: Option<Effect>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: Vec<String>,
    /// `(type, parent)`; the root type is `object`.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateSig>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitEntry {
    Lit(LitAst),
    Or(Vec<LitAst>),
    Oneof(Vec<LitAst>),
    Unknown(AtomAst),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<InitEntry>,
    pub goal: Option<Formula>,
}

const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":conditional-effects",
    ":equality",
    ":non-deterministic",
    ":disjunctive-preconditions",
    ":universal-effects",
    ":quantified-preconditions",
    ":adl",
];

pub fn parse_domain(s: &Sexpr) -> Result<DomainAst, PddlError> {
    let items = expect_define(s, "domain")?;
    let mut d = DomainAst {
        name: header_name(&items[1], "domain")?,
        ..Default::default()
    };
    for sec in &items[2..] {
        let body = &sec.list().ok_or_else(|| sec.error("expected a section"))?[1..];
        match sec.head() {
            Some(":requirements") => {
                for r in body {
                    let r = atom(r)?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::Unsupported(format!("requirement {r}")));
                    }
                    d.requirements.push(r.to_string());
                }
            }
            Some(":types") => d.types = typed_list(body)?,
            Some(":constants") => d.constants = typed_list(body)?,
            Some(":predicates") => {
                for p in body {
                    let l = p
                        .list()
                        .filter(|l| !l.is_empty())
                        .ok_or_else(|| p.error("expected predicate"))?;
                    d.predicates.push(PredicateSig {
                        name: atom(&l[0])?.to_string(),
                        params: typed_list(&l[1..])?,
                    });
                }
            }
            Some(":action") => d.actions.push(parse_action(sec)?),
            Some(other) => return Err(PddlError::Unsupported(format!("domain section {other}"))),
            None => return Err(sec.error("expected a section keyword")),
        }
    }
    Ok(d)
}

pub fn parse_problem(s: &Sexpr) -> Result<ProblemAst, PddlError> {
    let items = expect_define(s, "problem")?;
    let mut p = ProblemAst {
        name: header_name(&items[1], "problem")?,
        ..Default::default()
    };
    for sec in &items[2..] {
        let body = &sec.list().ok_or_else(|| sec.error("expected a section"))?[1..];
        match sec.head() {
            Some(":domain") => {
                p.domain = atom(
                    body.first()
                        .ok_or_else(|| sec.error("missing domain name"))?,
                )?
                .into()
            }
            Some(":requirements") => {}
            Some(":objects") => p.objects = typed_list(body)?,
            Some(":init") => {
                for e in body {
                    p.init.push(parse_init(e)?);
                }
            }
            Some(":goal") => {
                let g = body.first().ok_or_else(|| sec.error("empty goal"))?;
                p.goal = Some(parse_formula(g)?);
            }
            Some(other) => return Err(PddlError::Unsupported(format!("problem section {other}"))),
            None => return Err(sec.error("expected a section keyword")),
        }
    }
    Ok(p)
}

fn expect_define<'a>(s: &'a Sexpr, kind: &str) -> Result<&'a [Sexpr], PddlError> {
    let items = s.list().ok_or_else(|| s.error("expected (define ...)"))?;
    if s.head() != Some("define") || items.len() < 2 {
        return Err(s.error("expected (define ...)"));
    }
    if items[1].head() != Some(kind) {
        return Err(items[1].error(format!("expected ({kind} <name>)")));
    }
    Ok(items)
}

fn header_name(s: &Sexpr, kind: &str) -> Result<String, PddlError> {
    let l = s
        .list()
        .filter(|l| l.len() == 2)
        .ok_or_else(|| s.error(format!("expected ({kind} <name>)")))?;
    Ok(atom(&l[1])?.to_string())
}

fn atom(s: &Sexpr) -> Result<&str, PddlError> {
    s.atom().ok_or_else(|| s.error("expected a name"))
}

/// `a b - t c - u d` with untyped names defaulting to `object`.
fn typed_list(items: &[Sexpr]) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let a = atom(&items[i])?;
        if a == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| items[i].error("missing type after '-'"))?;
            if ty.head() == Some("either") {
                return Err(PddlError::Unsupported("either types".into()));
            }
            let ty = atom(ty)?;
            out.extend(pending.drain(..).map(|name| TypedName {
                name,
                ty: ty.into(),
            }));
            i += 2;
        } else {
            pending.push(a.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|name| TypedName {
        name,
        ty: "object".into(),
    }));
    Ok(out)
}

fn parse_action(s: &Sexpr) -> Result<ActionSchema, PddlError> {
    let items = s.list().expect("caller checked list");
    let name = atom(items.get(1).ok_or_else(|| s.error("missing action name"))?)?.to_string();
    let mut a = ActionSchema {
        name,
        params: Vec::new(),
        pre: None,
        effect: None,
    };
    let mut i = 2;
    while i < items.len() {
        let key = atom(&items[i])?;
        let val = items
            .get(i + 1)
            .ok_or_else(|| items[i].error("missing value"))?;
        match key {
            ":parameters" => {
                a.params = typed_list(
                    val.list()
                        .ok_or_else(|| val.error("expected parameter list"))?,
                )?
            }
            ":precondition" => a.pre = empty_or(val, parse_formula)?,
            ":effect" => a.effect = empty_or(val, parse_effect)?,
            other => return Err(PddlError::Unsupported(format!("action field {other}"))),
        }
        i += 2;
    }
    Ok(a)
}

fn empty_or<T>(s: &Sexpr, f: fn(&Sexpr) -> Result<T, PddlError>) -> Result<Option<T>, PddlError> {
    if s.list().is_some_and(|l| l.is_empty()) {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

fn parse_atom(s: &Sexpr) -> Result<AtomAst, PddlError> {
    let l = s
        .list()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| s.error("expected an atom"))?;
    let pred = atom(&l[0])?.to_string();
    let args = l[1..]
        .iter()
        .map(|x| atom(x).map(str::to_string))
        .collect::<Result<_, _>>()?;
    Ok(AtomAst { pred, args })
}

fn parse_lit(s: &Sexpr) -> Result<LitAst, PddlError> {
    if s.head() == Some("not") {
        let l = s.list().expect("head implies list");
        if l.len() != 2 {
            return Err(s.error("not takes one argument"));
        }
        return Ok(LitAst {
            positive: false,
            atom: parse_atom(&l[1])?,
        });
    }
    Ok(LitAst {
        positive: true,
        atom: parse_atom(s)?,
    })
}

pub fn parse_formula(s: &Sexpr) -> Result<Formula, PddlError> {
    let l = s.list().ok_or_else(|| s.error("expected a formula"))?;
    let args = |from: usize| {
        l[from..]
            .iter()
            .map(parse_formula)
            .collect::<Result<Vec<_>, _>>()
    };
    match s.head() {
        Some("and") => Ok(Formula::And(args(1)?)),
        Some("or") => Ok(Formula::Or(args(1)?)),
        Some("not") if l.len() == 2 => Ok(Formula::Not(Box::new(parse_formula(&l[1])?))),
        Some("not") => Err(s.error("not takes one argument")),
        Some("=") if l.len() == 3 => Ok(Formula::Eq(atom(&l[1])?.into(), atom(&l[2])?.into())),
        Some(k @ ("imply" | "exists" | "forall" | "when" | "oneof")) => {
            Err(PddlError::Unsupported(format!("{k} in a formula")))
        }
        _ => Ok(Formula::Atom(parse_atom(s)?)),
    }
}

pub fn parse_effect(s: &Sexpr) -> Result<Effect, PddlError> {
    let l = s.list().ok_or_else(|| s.error("expected an effect"))?;
    match s.head() {
        Some("and") => Ok(Effect::And(
            l[1..].iter().map(parse_effect).collect::<Result<_, _>>()?,
        )),
        Some("when") if l.len() == 3 => Ok(Effect::When(
            parse_formula(&l[1])?,
            Box::new(parse_effect(&l[2])?),
        )),
        Some("when") => Err(s.error("when takes a condition and an effect")),
        Some("forall") if l.len() == 3 => {
            let vars = typed_list(
                l[1].list()
                    .ok_or_else(|| l[1].error("expected variables"))?,
            )?;
            Ok(Effect::Forall(vars, Box::new(parse_effect(&l[2])?)))
        }
        Some("forall") => Err(s.error("forall takes variables and an effect")),
        Some("oneof") if l.len() >= 3 => Ok(Effect::Oneof(
            l[1..].iter().map(parse_effect).collect::<Result<_, _>>()?,
        )),
        Some("oneof") => Err(s.error("oneof needs at least two outcomes")),
        Some(
            k @ ("increase" | "decrease" | "assign" | "scale-up" | "scale-down" | "probabilistic"),
        ) => Err(PddlError::Unsupported(format!("{k} effect"))),
        _ => Ok(Effect::Lit(parse_lit(s)?)),
    }
}

fn parse_init(s: &Sexpr) -> Result<InitEntry, PddlError> {
    let l = s.list().ok_or_else(|| s.error("expected an init entry"))?;
    match s.head() {
        Some("or") => Ok(InitEntry::Or(
            l[1..].iter().map(parse_lit).collect::<Result<_, _>>()?,
        )),
        Some("oneof") if l.len() >= 3 => Ok(InitEntry::Oneof(
            l[1..].iter().map(parse_lit).collect::<Result<_, _>>()?,
        )),
        Some("oneof") => Err(s.error("oneof needs at least two members")),
        Some("unknown") if l.len() == 2 => Ok(InitEntry::Unknown(parse_atom(&l[1])?)),
        Some("unknown") => Err(s.error("unknown takes one atom")),
        Some("and") => Err(PddlError::Unsupported("nested and in :init".into())),
        Some("=") => Err(PddlError::Unsupported("numeric init".into())),
        _ => Ok(InitEntry::Lit(parse_lit(s)?)),
    }
}
