//! Deterministic benchmark generators. Each returns conformant PDDL
//! `(domain, problem)` text; encodings are documented in `docs/generators.md`.

use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown family {0}")]
    UnknownFamily(String),
    #[error("invalid parameters for {family}: {msg}")]
    InvalidParams { family: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Safe(usize),
    Bomb(usize, usize),
    Ring(usize),
    SquareCenter(usize),
    CornersSquare(usize),
    Sortnet(usize),
    Disjtoy(usize),
    Sgripper(usize),
}

pub const FAMILIES: &[&str] = &[
    "safe",
    "bomb",
    "ring",
    "square-center",
    "corners-square",
    "sortnet",
    "disjtoy",
    "sgripper",
];

impl Family {
    pub fn parse(name: &str, params: &[usize]) -> Result<Family, GenError> {
        let bad = |msg: &str| GenError::InvalidParams {
            family: name.to_string(),
            msg: msg.to_string(),
        };
        let one = |min: usize| match params {
            [n] if *n >= min => Ok(*n),
            [_] => Err(bad(&format!("size must be at least {min}"))),
            _ => Err(bad("expected one size parameter")),
        };
        Ok(match name {
            "safe" => Family::Safe(one(2)?),
            "bomb" => match params {
                [x, y] if *x >= 1 && *y >= 1 => Family::Bomb(*x, *y),
                _ => return Err(bad("expected packages and toilets, both at least 1")),
            },
            "ring" => Family::Ring(one(2)?),
            "square-center" => Family::SquareCenter(one(2)?),
            "corners-square" => Family::CornersSquare(one(2)?),
            "sortnet" => Family::Sortnet(one(2)?),
            "disjtoy" => Family::Disjtoy(one(2)?),
            "sgripper" => Family::Sgripper(one(1)?),
            other => return Err(GenError::UnknownFamily(other.to_string())),
        })
    }

    /// Instance name such as `safe-10` or `bomb-20-20`.
    pub fn instance_name(&self) -> String {
        match *self {
            Family::Safe(n) => format!("safe-{n}"),
            Family::Bomb(x, y) => format!("bomb-{x}-{y}"),
            Family::Ring(n) => format!("ring-{n}"),
            Family::SquareCenter(n) => format!("square-center-{n}"),
            Family::CornersSquare(n) => format!("corners-square-{n}"),
            Family::Sortnet(n) => format!("sortnet-{n}"),
            Family::Disjtoy(n) => format!("disjtoy-{n}"),
            Family::Sgripper(n) => format!("sgripper-{n}"),
        }
    }

    pub fn generate(&self) -> (String, String) {
        match *self {
            Family::Safe(n) => safe(n),
            Family::Bomb(x, y) => bomb(x, y),
            Family::Ring(n) => ring(n),
            Family::SquareCenter(n) => square(n, false),
            Family::CornersSquare(n) => square(n, true),
            Family::Sortnet(n) => sortnet(n),
            Family::Disjtoy(n) => disjtoy(n),
            Family::Sgripper(n) => sgripper(n),
        }
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn problem(name: &str, domain: &str, objects: &str, init: &[String], goal: &str) -> String {
    let mut p = String::new();
    let _ = writeln!(p, "(define (problem {name})");
    let _ = writeln!(p, "  (:domain {domain})");
    let _ = writeln!(p, "  (:objects {objects})");
    let _ = writeln!(p, "  (:init");
    for e in init {
        let _ = writeln!(p, "    {e}");
    }
    let _ = writeln!(p, "  )");
    let _ = writeln!(p, "  (:goal {goal}))");
    p
}

fn oneof(members: impl IntoIterator<Item = String>) -> String {
    let m: Vec<String> = members.into_iter().collect();
    format!("(oneof {})", m.join(" "))
}

fn and(parts: impl IntoIterator<Item = String>) -> String {
    let p: Vec<String> = parts.into_iter().collect();
    format!("(and {})", p.join(" "))
}

/// One unknown combination out of `n`; `try` opens the safe when it is
/// the right one.
pub fn safe(n: usize) -> (String, String) {
    let d = "(define (domain safe)
  (:requirements :strips :typing :conditional-effects)
  (:types comb)
  (:predicates (open) (right ?c - comb))
  (:action try
    :parameters (?c - comb)
    :effect (when (right ?c) (open))))
"
    .to_string();
    let combs = names("c", n);
    let init = vec![oneof(combs.iter().map(|c| format!("(right {c})")))];
    let p = problem(
        &format!("safe-{n}"),
        "safe",
        &format!("{} - comb", combs.join(" ")),
        &init,
        "(open)",
    );
    (d, p)
}

/// `x` packages that may be armed, `y` toilets that clog on use.
pub fn bomb(x: usize, y: usize) -> (String, String) {
    let d = "(define (domain bomb)
  (:requirements :strips :typing :negative-preconditions :conditional-effects)
  (:types package toilet)
  (:predicates (armed ?p - package) (clogged ?t - toilet))
  (:action dunk
    :parameters (?p - package ?t - toilet)
    :precondition (not (clogged ?t))
    :effect (and (when (armed ?p) (not (armed ?p))) (clogged ?t)))
  (:action flush
    :parameters (?t - toilet)
    :effect (not (clogged ?t))))
"
    .to_string();
    let pk = names("p", x);
    let tl = names("t", y);
    let init: Vec<String> = pk
        .iter()
        .map(|p| format!("(unknown (armed {p}))"))
        .collect();
    let goal = and(pk.iter().map(|p| format!("(not (armed {p}))")));
    let objects = format!("{} - package {} - toilet", pk.join(" "), tl.join(" "));
    (
        d,
        problem(&format!("bomb-{x}-{y}"), "bomb", &objects, &init, &goal),
    )
}

/// A ring of `n` rooms with a window each: unknown position, window
/// state, and lock state.
pub fn ring(n: usize) -> (String, String) {
    let d = "(define (domain ring)
  (:requirements :strips :typing :conditional-effects)
  (:types room)
  (:predicates (pos ?r - room) (open ?r - room) (closed ?r - room) (locked ?r - room) (next ?r ?s - room))
  (:action fwd
    :parameters ()
    :effect (forall (?r ?s - room) (when (and (pos ?r) (next ?r ?s)) (and (pos ?s) (not (pos ?r))))))
  (:action bwd
    :parameters ()
    :effect (forall (?r ?s - room) (when (and (pos ?s) (next ?r ?s)) (and (pos ?r) (not (pos ?s))))))
  (:action close
    :parameters ()
    :effect (forall (?r - room) (when (pos ?r) (and (closed ?r) (not (open ?r))))))
  (:action lock
    :parameters ()
    :effect (forall (?r - room) (when (and (pos ?r) (closed ?r)) (locked ?r)))))
"
    .to_string();
    let rooms = names("r", n);
    let mut init = vec![oneof(rooms.iter().map(|r| format!("(pos {r})")))];
    for (i, r) in rooms.iter().enumerate() {
        init.push(format!("(next {r} {})", rooms[(i + 1) % n]));
    }
    for r in &rooms {
        init.push(format!("(oneof (open {r}) (closed {r}))"));
        init.push(format!("(unknown (locked {r}))"));
    }
    let goal = and(rooms
        .iter()
        .flat_map(|r| [format!("(closed {r})"), format!("(locked {r})")]));
    (
        d,
        problem(
            &format!("ring-{n}"),
            "ring",
            &format!("{} - room", rooms.join(" ")),
            &init,
            &goal,
        ),
    )
}

/// An empty `n × n` grid; moves against a wall have no effect. Unknown
/// start anywhere, or in one of the four corners.
pub fn square(n: usize, corners: bool) -> (String, String) {
    let d = "(define (domain square)
  (:requirements :strips :typing :conditional-effects)
  (:types coord)
  (:predicates (x ?i - coord) (y ?j - coord) (succ ?i ?j - coord))
  (:action right
    :parameters ()
    :effect (forall (?i ?j - coord) (when (and (x ?i) (succ ?i ?j)) (and (x ?j) (not (x ?i))))))
  (:action left
    :parameters ()
    :effect (forall (?i ?j - coord) (when (and (x ?j) (succ ?i ?j)) (and (x ?i) (not (x ?j))))))
  (:action up
    :parameters ()
    :effect (forall (?i ?j - coord) (when (and (y ?i) (succ ?i ?j)) (and (y ?j) (not (y ?i))))))
  (:action down
    :parameters ()
    :effect (forall (?i ?j - coord) (when (and (y ?j) (succ ?i ?j)) (and (y ?i) (not (y ?j)))))))
"
    .to_string();
    let cs = names("v", n);
    let mut init: Vec<String> = cs
        .windows(2)
        .map(|w| format!("(succ {} {})", w[0], w[1]))
        .collect();
    if corners {
        init.push(format!("(oneof (x {}) (x {}))", cs[0], cs[n - 1]));
        init.push(format!("(oneof (y {}) (y {}))", cs[0], cs[n - 1]));
    } else {
        init.push(oneof(cs.iter().map(|c| format!("(x {c})"))));
        init.push(oneof(cs.iter().map(|c| format!("(y {c})"))));
    }
    let c = &cs[n.div_ceil(2) - 1];
    let goal = format!("(and (x {c}) (y {c}))");
    let name = if corners {
        "corners-square"
    } else {
        "square-center"
    };
    (
        d,
        problem(
            &format!("{name}-{n}"),
            "square",
            &format!("{} - coord", cs.join(" ")),
            &init,
            &goal,
        ),
    )
}

/// Compact sorting network: one unknown bit per wire; the goal is the CNF
/// `¬high(i) ∨ high(i+1)`.
pub fn sortnet(n: usize) -> (String, String) {
    let d = "(define (domain sortnet)
  (:requirements :strips :typing :negative-preconditions :conditional-effects)
  (:types wire)
  (:predicates (high ?w - wire) (less ?i ?j - wire))
  (:action cmpswap
    :parameters (?i ?j - wire)
    :precondition (less ?i ?j)
    :effect (when (and (high ?i) (not (high ?j))) (and (not (high ?i)) (high ?j)))))
"
    .to_string();
    let ws = names("w", n);
    let mut init = Vec::new();
    for (i, a) in ws.iter().enumerate() {
        for b in &ws[i + 1..] {
            init.push(format!("(less {a} {b})"));
        }
        init.push(format!("(unknown (high {a}))"));
    }
    let goal = and(ws
        .windows(2)
        .map(|w| format!("(or (not (high {})) (high {}))", w[0], w[1])));
    (
        d,
        problem(
            &format!("sortnet-{n}"),
            "sortnet",
            &format!("{} - wire", ws.join(" ")),
            &init,
            &goal,
        ),
    )
}

/// `I = {x_1 ∨ … ∨ x_n}`, actions `a_i: x_i → g`, goal `g`.
pub fn disjtoy(n: usize) -> (String, String) {
    let d = "(define (domain disjtoy)
  (:requirements :strips :typing :conditional-effects)
  (:types idx)
  (:predicates (x ?i - idx) (g))
  (:action a
    :parameters (?i - idx)
    :effect (when (x ?i) (g))))
"
    .to_string();
    let xs = names("i", n);
    let init = vec![format!(
        "(or {})",
        xs.iter()
            .map(|i| format!("(x {i})"))
            .collect::<Vec<_>>()
            .join(" ")
    )];
    (
        d,
        problem(
            &format!("disjtoy-{n}"),
            "disjtoy",
            &format!("{} - idx", xs.join(" ")),
            &init,
            "(g)",
        ),
    )
}

/// Gripper variant: from room `a` the robot reaches `c` or `d`
/// nondeterministically, and only from there can it reach `b`.
pub fn sgripper(n: usize) -> (String, String) {
    let d = "(define (domain sgripper)
  (:requirements :strips :typing :negative-preconditions :conditional-effects :non-deterministic)
  (:types room ball gripper)
  (:constants a b c d - room)
  (:predicates (at-robby ?r - room) (at ?o - ball ?r - room) (free ?g - gripper) (carry ?o - ball ?g - gripper))
  (:action move-a-cd
    :parameters ()
    :precondition (at-robby a)
    :effect (and (not (at-robby a)) (oneof (at-robby c) (at-robby d))))
  (:action move-to-b
    :parameters ()
    :effect (and (when (at-robby c) (and (at-robby b) (not (at-robby c))))
                 (when (at-robby d) (and (at-robby b) (not (at-robby d))))))
  (:action move-to-a
    :parameters ()
    :effect (and (when (at-robby b) (and (at-robby a) (not (at-robby b))))
                 (when (at-robby c) (and (at-robby a) (not (at-robby c))))
                 (when (at-robby d) (and (at-robby a) (not (at-robby d))))))
  (:action pick
    :parameters (?o - ball ?r - room ?g - gripper)
    :precondition (and (at ?o ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?o ?g) (not (at ?o ?r)) (not (free ?g))))
  (:action drop
    :parameters (?o - ball ?r - room ?g - gripper)
    :precondition (and (carry ?o ?g) (at-robby ?r))
    :effect (and (at ?o ?r) (free ?g) (not (carry ?o ?g)))))
"
    .to_string();
    let balls = names("ball", n);
    let mut init = vec![
        "(at-robby a)".to_string(),
        "(free left)".into(),
        "(free right)".into(),
    ];
    init.extend(balls.iter().map(|o| format!("(at {o} a)")));
    let goal = and(balls.iter().map(|o| format!("(at {o} b)")));
    let objects = format!("{} - ball left right - gripper", balls.join(" "));
    (
        d,
        problem(&format!("sgripper-{n}"), "sgripper", &objects, &init, &goal),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::load;

    #[test]
    fn every_family_grounds() {
        for f in [
            Family::Safe(3),
            Family::Bomb(2, 2),
            Family::Ring(3),
            Family::SquareCenter(3),
            Family::CornersSquare(3),
            Family::Sortnet(3),
            Family::Disjtoy(3),
            Family::Sgripper(1),
        ] {
            let (d, p) = f.generate();
            let prob = load(&d, &p).unwrap_or_else(|e| panic!("{}: {e}", f.instance_name()));
            assert!(!prob.actions.is_empty());
        }
    }

    #[test]
    fn safe_ten_shape() {
        let (d, p) = safe(10);
        let prob = load(&d, &p).unwrap();
        assert_eq!(prob.actions.len(), 10);
        assert_eq!(
            prob.fluents
                .iter()
                .filter(|f| f.starts_with("right"))
                .count(),
            10
        );
        // One oneof: the disjunction plus 45 exclusions, and `open` false.
        assert_eq!(prob.init.len(), 1 + 45 + 1);
    }

    #[test]
    fn parses_names() {
        assert_eq!(Family::parse("bomb", &[20, 20]), Ok(Family::Bomb(20, 20)));
        assert!(Family::parse("safe", &[]).is_err());
        assert!(matches!(
            Family::parse("cube", &[3]),
            Err(GenError::UnknownFamily(_))
        ));
    }
}
