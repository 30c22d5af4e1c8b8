//! Global-assignment search over a subset of measurements.
//!
//! Each context contributes one constraint: the projection of its support
//! onto the searched variables. Small instances are enumerated outright,
//! larger ones use depth-first backtracking that rejects a partial
//! assignment as soon as some context has no compatible supported tuple.

use std::collections::HashSet;

use crate::model::EmpiricalModel;
use crate::scenario::{intersect, odometer_step, Section};

/// Instances with at most this many candidate assignments are enumerated.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 24;

/// Default node budget for a single search.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    Backtracking,
}

/// How a search run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    /// Every candidate was visited.
    Complete,
    /// The visitor asked to stop early.
    Stopped,
    /// The node budget ran out before the search space was covered.
    BudgetExhausted(u64),
}

struct Constraint {
    /// Positions into `GlobalSearch::vars`.
    positions: Vec<usize>,
    tuples: Vec<Vec<usize>>,
    allowed: HashSet<Vec<usize>>,
}

/// A constraint problem whose solutions are the sections over `vars`
/// that restrict into every context support.
pub struct GlobalSearch {
    vars: Vec<usize>,
    radix: usize,
    constraints: Vec<Constraint>,
    /// For each variable position, the constraints mentioning it.
    watching: Vec<Vec<usize>>,
}

impl GlobalSearch {
    /// Search over the measurements in `subset` (sorted indices).
    pub fn new(model: &EmpiricalModel, subset: &[usize]) -> GlobalSearch {
        let scn = model.scenario();
        let vars = subset.to_vec();
        let mut constraints = Vec::new();
        for (ci, ctx) in scn.cover().iter().enumerate() {
            let overlap = intersect(ctx, &vars);
            if overlap.is_empty() {
                continue;
            }
            let positions: Vec<usize> = overlap
                .iter()
                .map(|m| vars.binary_search(m).expect("overlap lies in vars"))
                .collect();
            let mut tuples: Vec<Vec<usize>> = model
                .support(ci)
                .iter()
                .map(|s| s.project(&overlap).values().to_vec())
                .collect();
            tuples.sort();
            tuples.dedup();
            let allowed = tuples.iter().cloned().collect();
            constraints.push(Constraint {
                positions,
                tuples,
                allowed,
            });
        }
        let mut watching = vec![Vec::new(); vars.len()];
        for (k, c) in constraints.iter().enumerate() {
            for &p in &c.positions {
                watching[p].push(k);
            }
        }
        GlobalSearch {
            vars,
            radix: scn.outcome_count(),
            constraints,
            watching,
        }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn candidate_count(&self) -> u128 {
        (self.radix as u128)
            .checked_pow(self.vars.len() as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn strategy(&self) -> Strategy {
        if self.candidate_count() <= EXHAUSTIVE_LIMIT {
            Strategy::Exhaustive
        } else {
            Strategy::Backtracking
        }
    }

    fn satisfied(&self, values: &[usize]) -> bool {
        let mut key = Vec::new();
        self.constraints.iter().all(|c| {
            key.clear();
            key.extend(c.positions.iter().map(|&p| values[p]));
            c.allowed.contains(&key)
        })
    }

    fn consistent_partial(&self, values: &[Option<usize>], constraint: &Constraint) -> bool {
        constraint.tuples.iter().any(|t| {
            constraint
                .positions
                .iter()
                .zip(t)
                .all(|(&p, &v)| values[p].is_none_or(|x| x == v))
        })
    }

    /// Visits every solution agreeing with `fixed` on the shared
    /// measurements. Enumeration visits them in lexicographic order;
    /// backtracking follows its own variable order. The visitor returns
    /// `false` to stop.
    pub fn for_each_solution<F>(&self, fixed: &Section, budget: u64, visit: F) -> SearchStatus
    where
        F: FnMut(&Section) -> bool,
    {
        match self.strategy() {
            Strategy::Exhaustive => self.enumerate(fixed, budget, visit),
            Strategy::Backtracking => self.backtrack(fixed, budget, visit),
        }
    }

    /// Runs with an explicit strategy; used to cross-check the two engines.
    pub fn for_each_solution_with<F>(
        &self,
        strategy: Strategy,
        fixed: &Section,
        budget: u64,
        visit: F,
    ) -> SearchStatus
    where
        F: FnMut(&Section) -> bool,
    {
        match strategy {
            Strategy::Exhaustive => self.enumerate(fixed, budget, visit),
            Strategy::Backtracking => self.backtrack(fixed, budget, visit),
        }
    }

    fn pinned(&self, fixed: &Section) -> Vec<Option<usize>> {
        self.vars.iter().map(|&m| fixed.value_of(m)).collect()
    }

    fn to_section(&self, values: &[usize]) -> Section {
        Section::new(self.vars.clone(), values.to_vec()).expect("vars are sorted")
    }

    fn enumerate<F>(&self, fixed: &Section, budget: u64, mut visit: F) -> SearchStatus
    where
        F: FnMut(&Section) -> bool,
    {
        let pinned = self.pinned(fixed);
        let free: Vec<usize> = (0..self.vars.len()).filter(|&p| pinned[p].is_none()).collect();
        let mut values: Vec<usize> = pinned.iter().map(|v| v.unwrap_or(0)).collect();
        let mut odometer = vec![0usize; free.len()];
        let mut nodes = 0u64;
        loop {
            if nodes >= budget {
                return SearchStatus::BudgetExhausted(nodes);
            }
            nodes += 1;
            for (&p, &v) in free.iter().zip(&odometer) {
                values[p] = v;
            }
            if self.satisfied(&values) && !visit(&self.to_section(&values)) {
                return SearchStatus::Stopped;
            }
            if !odometer_step(&mut odometer, self.radix) {
                return SearchStatus::Complete;
            }
        }
    }

    fn backtrack<F>(&self, fixed: &Section, budget: u64, mut visit: F) -> SearchStatus
    where
        F: FnMut(&Section) -> bool,
    {
        let mut values = self.pinned(fixed);
        if self
            .constraints
            .iter()
            .any(|c| !self.consistent_partial(&values, c))
        {
            return SearchStatus::Complete;
        }
        let order = self.assignment_order(&values);
        let mut nodes = 0u64;
        match self.descend(&order, 0, &mut values, budget, &mut nodes, &mut visit) {
            Some(status) => status,
            None => SearchStatus::Complete,
        }
    }

    /// Greedy static order: next is the free variable sharing the most
    /// constraints with variables already placed (ties by position), so
    /// constraints are completed early and prune high in the tree.
    fn assignment_order(&self, values: &[Option<usize>]) -> Vec<usize> {
        let mut placed: Vec<bool> = values.iter().map(Option::is_some).collect();
        let mut order = Vec::new();
        let free = placed.iter().filter(|&&b| !b).count();
        while order.len() < free {
            let score = |p: usize| -> (usize, usize) {
                let linked = self.watching[p]
                    .iter()
                    .map(|&k| self.constraints[k].positions.iter().filter(|&&q| placed[q]).count())
                    .sum();
                (linked, self.watching[p].len())
            };
            let mut best: Option<(usize, (usize, usize))> = None;
            for p in (0..self.vars.len()).filter(|&p| !placed[p]) {
                let sc = score(p);
                if best.is_none_or(|(_, b)| sc > b) {
                    best = Some((p, sc));
                }
            }
            let (p, _) = best.expect("a free variable remains");
            placed[p] = true;
            order.push(p);
        }
        order
    }

    /// Returns `Some` when the search must unwind (stop or budget).
    fn descend<F>(
        &self,
        order: &[usize],
        depth: usize,
        values: &mut Vec<Option<usize>>,
        budget: u64,
        nodes: &mut u64,
        visit: &mut F,
    ) -> Option<SearchStatus>
    where
        F: FnMut(&Section) -> bool,
    {
        if depth == order.len() {
            let full: Vec<usize> = values.iter().map(|v| v.expect("all assigned")).collect();
            if !visit(&self.to_section(&full)) {
                return Some(SearchStatus::Stopped);
            }
            return None;
        }
        let p = order[depth];
        for v in 0..self.radix {
            if *nodes >= budget {
                return Some(SearchStatus::BudgetExhausted(*nodes));
            }
            *nodes += 1;
            values[p] = Some(v);
            let ok = self.watching[p]
                .iter()
                .all(|&k| self.consistent_partial(values, &self.constraints[k]));
            if ok {
                if let Some(stop) = self.descend(order, depth + 1, values, budget, nodes, visit) {
                    values[p] = None;
                    return Some(stop);
                }
            }
        }
        values[p] = None;
        None
    }
}
