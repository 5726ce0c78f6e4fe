//! Greedy best-first search with the additive delete-relaxation heuristic,
//! and a breadth-first oracle that counts only non-merge steps.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::model::{apply, run_plan, ApplyError, ClassicalProblem, Plan, State};

/// Relaxed cost of a regular action; merge-flagged actions cost 1.
pub const ACTION_COST: u64 = 1000;
pub const MERGE_COST: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: usize,
    pub max_time: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 2_000_000,
            max_time: Some(Duration::from_secs(60)),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub initial_h: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Plan(Plan),
    /// The reachable space was exhausted (or the relaxation proves the goal
    /// unreachable).
    Unsolvable,
    BudgetOut,
}

/// A relaxed rule `pre ∪ condition → effect` over literal codes.
struct Unit {
    pre: Vec<usize>,
    effect: usize,
    cost: u64,
}

/// Precomputed relaxed rules for `h_add`.
pub struct AdditiveHeuristic {
    units: Vec<Unit>,
    by_fact: Vec<Vec<usize>>,
    goal: Vec<usize>,
    num_facts: usize,
}

impl AdditiveHeuristic {
    pub fn new(k: &ClassicalProblem) -> Self {
        let num_facts = 2 * k.num_fluents();
        let mut units = Vec::new();
        for (ai, a) in k.actions.iter().enumerate() {
            let cost = if k.is_merge(ai) {
                MERGE_COST
            } else {
                ACTION_COST
            };
            for r in &a.rules {
                let mut pre: Vec<usize> =
                    a.pre.iter().chain(&r.condition).map(|l| l.code()).collect();
                pre.sort_unstable();
                pre.dedup();
                units.push(Unit {
                    pre,
                    effect: r.effect.code(),
                    cost,
                });
            }
        }
        let mut by_fact = vec![Vec::new(); num_facts];
        for (ui, u) in units.iter().enumerate() {
            for &f in &u.pre {
                by_fact[f].push(ui);
            }
        }
        AdditiveHeuristic {
            units,
            by_fact,
            goal: k.goal.iter().map(|l| l.code()).collect(),
            num_facts,
        }
    }

    /// `h_add(s)`, or `None` when some goal literal is relaxed-unreachable.
    pub fn eval(&self, s: &State) -> Option<u64> {
        let mut cost = vec![u64::MAX; self.num_facts];
        let mut missing: Vec<usize> = self.units.iter().map(|u| u.pre.len()).collect();
        let mut acc = vec![0u64; self.units.len()];
        let mut heap = BinaryHeap::new();
        for l in s.lits() {
            cost[l.code()] = 0;
            heap.push(Reverse((0u64, l.code())));
        }
        for u in &self.units {
            if u.pre.is_empty() && u.cost < cost[u.effect] {
                cost[u.effect] = u.cost;
                heap.push(Reverse((u.cost, u.effect)));
            }
        }
        let mut done = vec![false; self.num_facts];
        while let Some(Reverse((c, f))) = heap.pop() {
            if done[f] || c > cost[f] {
                continue;
            }
            done[f] = true;
            for &ui in &self.by_fact[f] {
                missing[ui] -= 1;
                acc[ui] = acc[ui].saturating_add(c);
                if missing[ui] == 0 {
                    let u = &self.units[ui];
                    let nc = acc[ui].saturating_add(u.cost);
                    if nc < cost[u.effect] {
                        cost[u.effect] = nc;
                        heap.push(Reverse((nc, u.effect)));
                    }
                }
            }
        }
        let mut h = 0u64;
        for &g in &self.goal {
            if cost[g] == u64::MAX {
                return None;
            }
            h = h.saturating_add(cost[g]);
        }
        Some(h)
    }
}

struct Node {
    state: State,
    parent: usize,
    action: usize,
}

/// Greedy best-first search ordered by `h_add`, ties broken FIFO. States
/// with `h = ∞` are pruned; successors that fire conflicting effects are
/// skipped.
pub fn solve(k: &ClassicalProblem, budget: Budget) -> (SolveOutcome, SearchStats) {
    let start = Instant::now();
    let h = AdditiveHeuristic::new(k);
    let mut stats = SearchStats::default();
    let s0 = k.initial_state();
    let Some(h0) = h.eval(&s0) else {
        return (SolveOutcome::Unsolvable, stats);
    };
    stats.initial_h = Some(h0);
    if s0.holds_all(&k.goal) {
        return (SolveOutcome::Plan(Plan::default()), stats);
    }
    let mut nodes = vec![Node {
        state: s0.clone(),
        parent: usize::MAX,
        action: usize::MAX,
    }];
    let mut seen: HashSet<State> = HashSet::from([s0]);
    let mut open = BinaryHeap::from([Reverse((h0, 0usize))]);
    while let Some(Reverse((_, id))) = open.pop() {
        stats.expanded += 1;
        if stats.generated >= budget.max_nodes
            || budget
                .max_time
                .is_some_and(|t| stats.expanded % 256 == 0 && start.elapsed() > t)
        {
            return (SolveOutcome::BudgetOut, stats);
        }
        for (ai, a) in k.actions.iter().enumerate() {
            let next = match apply(&nodes[id].state, a) {
                Ok(n) => n,
                Err(
                    ApplyError::PreconditionViolation { .. }
                    | ApplyError::InconsistentResult { .. },
                ) => continue,
            };
            if next == nodes[id].state || seen.contains(&next) {
                continue;
            }
            stats.generated += 1;
            seen.insert(next.clone());
            let goal = next.holds_all(&k.goal);
            let hv = if goal { Some(0) } else { h.eval(&next) };
            let nid = nodes.len();
            nodes.push(Node {
                state: next,
                parent: id,
                action: ai,
            });
            if goal {
                let plan = extract(k, &nodes, nid);
                debug_assert!(run_plan(k, &plan).achieved_goal);
                return (SolveOutcome::Plan(plan), stats);
            }
            if let Some(hv) = hv {
                open.push(Reverse((hv, nid)));
            }
        }
    }
    (SolveOutcome::Unsolvable, stats)
}

fn extract(k: &ClassicalProblem, nodes: &[Node], mut id: usize) -> Plan {
    let mut steps = Vec::new();
    while nodes[id].parent != usize::MAX {
        steps.push(nodes[id].action);
        id = nodes[id].parent;
    }
    steps.reverse();
    k.plan_from_indices(&steps)
}

/// Shortest plan counting only non-merge steps (merge steps are free), up
/// to `depth_cap` non-merge steps.
pub fn bfs_optimal(k: &ClassicalProblem, depth_cap: usize) -> Option<Plan> {
    let s0 = k.initial_state();
    let mut nodes = vec![Node {
        state: s0.clone(),
        parent: usize::MAX,
        action: usize::MAX,
    }];
    let mut dist: HashMap<State, usize> = HashMap::from([(s0, 0)]);
    let mut queue: VecDeque<(usize, usize)> = VecDeque::from([(0, 0)]);
    while let Some((id, d)) = queue.pop_front() {
        if dist[&nodes[id].state] < d {
            continue;
        }
        if nodes[id].state.holds_all(&k.goal) {
            return Some(extract(k, &nodes, id));
        }
        for (ai, a) in k.actions.iter().enumerate() {
            let merge = k.is_merge(ai);
            let nd = if merge { d } else { d + 1 };
            if nd > depth_cap {
                continue;
            }
            let Ok(next) = apply(&nodes[id].state, a) else {
                continue;
            };
            if dist.get(&next).is_some_and(|&old| old <= nd) {
                continue;
            }
            dist.insert(next.clone(), nd);
            let nid = nodes.len();
            nodes.push(Node {
                state: next,
                parent: id,
                action: ai,
            });
            if merge {
                queue.push_front((nid, nd));
            } else {
                queue.push_back((nid, nd));
            }
        }
    }
    None
}
