//! Branch-and-price over the set-packing model.
//!
//! Nodes are evaluated when they are created: the child's fixings are
//! applied, the parent's pool is filtered to the columns the child admits,
//! and column generation runs to convergence. An integral LP becomes a
//! candidate incumbent and closes the node; a fractional LP whose bound can
//! still beat the incumbent waits in a best-bound-first queue. All demands
//! are integers, so a node survives only if `floor(bound + eps)` exceeds the
//! incumbent.
//!
//! [`Method::Sep2`] branches on the pattern variable closest to 0.5 and
//! prices with the forbidden-pattern dynamic program. [`Method::Sep1`]
//! branches on the implied hole-to-user indicator `a_ij = Σ_{π ∋ i} x_{j,π}`
//! and prices with the knapsack oracle.

use crate::clock::Budget;
use crate::instance::{Instance, Pattern};
use crate::master::{run_column_generation, Column, NodeView, PricingOracle, RmpState, Sep1Oracle, Sep2Oracle};
use crate::search::NodeQueue;
use crate::solution::{NodeAction, NodeEvent, SolveError, SolveStats, Solution, Status};
use crate::{frac_dist, INT_TOL};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Slack added to a bound before rounding it down to an integer.
pub const BOUND_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Knapsack pricing, branching on hole-to-user assignments.
    Sep1,
    /// Dynamic-programming pricing, branching on pattern variables.
    Sep2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sep1 => "bp-sep1",
            Method::Sep2 => "bp-sep2",
        }
    }

    fn oracle(self) -> &'static dyn PricingOracle {
        match self {
            Method::Sep1 => &Sep1Oracle,
            Method::Sep2 => &Sep2Oracle,
        }
    }
}

/// A branching decision.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fixing {
    X0 { user: usize, pattern: Pattern },
    X1 { user: usize, pattern: Pattern },
    /// Hole kept out of the user's pattern.
    A0 { hole: usize, user: usize },
    /// Hole reserved for the user: its patterns must use it, nobody else may.
    A1 { hole: usize, user: usize },
}

impl fmt::Display for Fixing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixing::X0 { user, pattern } => write!(f, "x[u{},{}]=0", user + 1, pattern),
            Fixing::X1 { user, pattern } => write!(f, "x[u{},{}]=1", user + 1, pattern),
            Fixing::A0 { hole, user } => write!(f, "a[h{},u{}]=0", hole + 1, user + 1),
            Fixing::A1 { hole, user } => write!(f, "a[h{},u{}]=1", hole + 1, user + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FixingError {
    #[error("user {user} is fixed to two patterns")]
    UserFixedTwice { user: usize },
    #[error("hole {hole} is used by two fixed patterns")]
    HoleFixedTwice { hole: usize },
    #[error("pattern of user {user} is fixed both to 0 and to 1")]
    Conflict { user: usize },
    #[error("fixed pattern of user {user} is not feasible")]
    InfeasiblePattern { user: usize },
}

/// Applies `fixings` to the instance.
///
/// Pattern fixings must be consistent (they come from the search). Hole
/// fixings that contradict each other, such as one hole reserved for two
/// users, make the node empty and yield `Ok(None)`.
pub fn node_reduction(instance: &Instance, fixings: &[Fixing]) -> Result<Option<NodeView>, FixingError> {
    let mut view = NodeView::root(instance);
    for f in fixings {
        match f {
            Fixing::X1 { user, pattern } => {
                let j = *user;
                if !view.user_active[j] {
                    return Err(FixingError::UserFixedTwice { user: j });
                }
                if !crate::instance::is_feasible_pattern(instance, pattern, &instance.user(j)).unwrap_or(false) {
                    return Err(FixingError::InfeasiblePattern { user: j });
                }
                for h in pattern.iter() {
                    if !view.hole_active[h] {
                        return Err(FixingError::HoleFixedTwice { hole: h });
                    }
                    view.hole_active[h] = false;
                }
                view.user_active[j] = false;
                view.base_gain += instance.user(j).demand;
                view.fixed.push(Column { user: j, pattern: pattern.clone() });
            }
            Fixing::X0 { user, pattern } => view.forbidden[*user].push(pattern.clone()),
            Fixing::A0 { hole, user } => view.fixed_out[*user].push(*hole),
            Fixing::A1 { hole, user } => {
                view.fixed_in[*user].push(*hole);
                for k in 0..instance.num_users() {
                    if k != *user {
                        view.fixed_out[k].push(*hole);
                    }
                }
            }
        }
    }
    for c in &view.fixed {
        if view.forbidden[c.user].contains(&c.pattern) {
            return Err(FixingError::Conflict { user: c.user });
        }
    }
    for j in 0..instance.num_users() {
        view.fixed_in[j].sort_unstable();
        view.fixed_in[j].dedup();
        view.fixed_out[j].sort_unstable();
        view.fixed_out[j].dedup();
        if view.fixed_in[j].iter().any(|h| view.fixed_out[j].binary_search(h).is_ok() || !view.hole_active[*h]) {
            return Ok(None);
        }
    }
    Ok(Some(view))
}

/// What to branch on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchObject {
    Column(Column),
    Assignment { hole: usize, user: usize },
}

impl BranchObject {
    /// The fix-to-1 child first, then the fix-to-0 child.
    pub fn children(&self) -> [Fixing; 2] {
        match self {
            BranchObject::Column(c) => [
                Fixing::X1 { user: c.user, pattern: c.pattern.clone() },
                Fixing::X0 { user: c.user, pattern: c.pattern.clone() },
            ],
            BranchObject::Assignment { hole, user } => [
                Fixing::A1 { hole: *hole, user: *user },
                Fixing::A0 { hole: *hole, user: *user },
            ],
        }
    }
}

pub fn is_integral(values: &[f64]) -> bool {
    values.iter().all(|&v| frac_dist(v) <= INT_TOL)
}

/// Number of variables more than the tolerance away from an integer.
pub fn fractional_count(values: &[f64]) -> usize {
    values.iter().filter(|&&v| frac_dist(v) > INT_TOL).count()
}

/// Picks the branching object for a fractional node LP.
///
/// `Sep2` takes the column whose value is closest to 0.5; among equally
/// close columns the one pooled first wins. `Sep1` takes the unfixed
/// `a_ij` closest to 0.5, ties to the smallest user and then hole.
pub fn select_branch(method: Method, view: &NodeView, pool: &RmpState, values: &[f64]) -> Result<BranchObject, SolveError> {
    debug_assert_eq!(pool.len(), values.len());
    match method {
        Method::Sep2 => {
            let mut best: Option<(f64, usize)> = None;
            for (k, &v) in values.iter().enumerate() {
                let d = frac_dist(v);
                if d > INT_TOL && best.map_or(true, |(b, _)| d > b + INT_TOL) {
                    best = Some((d, k));
                }
            }
            let (_, k) = best.ok_or(SolveError::Internal("branching requested on an integral LP"))?;
            Ok(BranchObject::Column(pool.columns()[k].clone()))
        }
        Method::Sep1 => {
            let mut a: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for (c, &v) in pool.columns().iter().zip(values) {
                for h in c.pattern.iter() {
                    *a.entry((c.user, h)).or_insert(0.0) += v;
                }
            }
            let mut best: Option<(f64, usize, usize)> = None;
            for (&(j, i), &v) in &a {
                if view.fixed_in[j].contains(&i) {
                    continue;
                }
                let d = frac_dist(v);
                if d > INT_TOL && best.map_or(true, |(b, _, _)| d > b + INT_TOL) {
                    best = Some((d, j, i));
                }
            }
            let (_, user, hole) = best.ok_or(SolveError::Internal("no fractional hole assignment to branch on"))?;
            Ok(BranchObject::Assignment { hole, user })
        }
    }
}

/// Outcome of the pruning tests for an evaluated node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prune {
    Keep,
    Bound,
    Integrality,
    Infeasibility,
}

/// Whether a node with LP bound `bound` can still beat `incumbent`.
pub fn bound_prunes(bound: f64, incumbent: Option<i64>) -> bool {
    match incumbent {
        Some(v) => crate::floor_f64(bound + BOUND_EPS) <= v as f64,
        None => false,
    }
}

/// `lp` is `None` for an infeasible node, else `(bound, integral)`.
pub fn prune(lp: Option<(f64, bool)>, incumbent: Option<i64>) -> Prune {
    match lp {
        None => Prune::Infeasibility,
        Some((_, true)) => Prune::Integrality,
        Some((b, false)) if bound_prunes(b, incumbent) => Prune::Bound,
        _ => Prune::Keep,
    }
}

struct Open {
    id: usize,
    depth: usize,
    fixings: Vec<Fixing>,
    view: NodeView,
    pool: RmpState,
    values: Vec<f64>,
    bound: f64,
}

enum Eval {
    Empty,
    Integral { bound: f64, assignment: Vec<Option<Pattern>>, objective: i64 },
    Fractional(Open),
    OutOfTime,
}

struct Search<'a> {
    instance: &'a Instance,
    method: Method,
    budget: &'a Budget<'a>,
    stats: SolveStats,
    trace: Vec<NodeEvent>,
    incumbent: Option<(i64, Vec<Option<Pattern>>)>,
    queue: NodeQueue<(Open, Option<usize>, String)>,
    next_id: usize,
}

impl<'a> Search<'a> {
    fn evaluate(&mut self, id: usize, depth: usize, fixings: Vec<Fixing>, parent_pool: &RmpState) -> Result<Eval, SolveError> {
        let Some(view) = node_reduction(self.instance, &fixings)? else {
            return Ok(Eval::Empty);
        };
        let mut pool = parent_pool.restricted_to(&view);
        let cg = run_column_generation(self.instance, &view, &mut pool, self.method.oracle(), self.budget)?;
        self.stats.nodes += 1;
        self.stats.cg_iterations += cg.iterations;
        self.stats.columns += cg.columns_added;
        if !cg.converged {
            return Ok(Eval::OutOfTime);
        }
        if id == 0 {
            self.stats.root_bound = Some(cg.lp_value);
        }
        if is_integral(&cg.values) {
            let mut assignment: Vec<Option<Pattern>> = vec![None; self.instance.num_users()];
            for c in &view.fixed {
                assignment[c.user] = Some(c.pattern.clone());
            }
            for (c, &v) in pool.columns().iter().zip(&cg.values) {
                if v > 0.5 {
                    assignment[c.user] = Some(c.pattern.clone());
                }
            }
            let objective = crate::solution::served_demand(self.instance, &assignment);
            debug_assert!((objective as f64 - cg.lp_value).abs() < 1e-6);
            return Ok(Eval::Integral { bound: cg.lp_value, assignment, objective });
        }
        Ok(Eval::Fractional(Open { id, depth, fixings, view, pool, values: cg.values, bound: cg.lp_value }))
    }

    fn incumbent_value(&self) -> Option<i64> {
        self.incumbent.as_ref().map(|(v, _)| *v)
    }

    fn log(&mut self, id: usize, parent: Option<usize>, bound: Option<f64>, action: NodeAction, label: &str) {
        self.trace.push(NodeEvent { id, parent, bound, action, label: label.to_string() });
    }

    /// Evaluates a new node; false if time ran out.
    fn create(&mut self, parent: Option<usize>, depth: usize, fixings: Vec<Fixing>, parent_pool: &RmpState) -> Result<bool, SolveError> {
        let id = self.next_id;
        self.next_id += 1;
        let label = match (parent, fixings.last()) {
            (Some(_), Some(f)) => format!("{f}"),
            _ => String::new(),
        };
        match self.evaluate(id, depth, fixings, parent_pool)? {
            Eval::OutOfTime => return Ok(false),
            Eval::Empty => self.log(id, parent, None, NodeAction::PruneInfeasibility, &label),
            Eval::Integral { bound, assignment, objective } => {
                if self.incumbent_value().map_or(true, |v| objective > v) {
                    self.incumbent = Some((objective, assignment));
                }
                self.log(id, parent, Some(bound), NodeAction::PruneIntegrality, &label);
            }
            Eval::Fractional(open) => {
                let bound = open.bound;
                if bound_prunes(bound, self.incumbent_value()) {
                    self.log(id, parent, Some(bound), NodeAction::PruneBound, &label);
                } else {
                    // the node is logged once it is expanded or discarded
                    let frac = fractional_count(&open.values);
                    self.queue.push(bound, frac, depth, (open, parent, label));
                }
            }
        }
        Ok(true)
    }
}

/// Solves the instance by branch-and-price.
pub fn solve_bp(instance: &Instance, method: Method, budget: &Budget<'_>) -> Result<Solution, SolveError> {
    let mut s = Search {
        instance,
        method,
        budget,
        stats: SolveStats::default(),
        trace: Vec::new(),
        incumbent: None,
        queue: NodeQueue::new(),
        next_id: 0,
    };
    let mut finished = s.create(None, 0, Vec::new(), &RmpState::new())?;
    while finished {
        let Some((node, parent, label)) = s.queue.pop() else { break };
        if budget.expired() {
            finished = false;
            break;
        }
        if bound_prunes(node.bound, s.incumbent_value()) {
            s.log(node.id, parent, Some(node.bound), NodeAction::PruneBound, &label);
            continue;
        }
        s.log(node.id, parent, Some(node.bound), NodeAction::Branch, &label);
        let object = select_branch(method, &node.view, &node.pool, &node.values)?;
        for fix in object.children() {
            let mut fixings = node.fixings.clone();
            fixings.push(fix);
            if budget.expired() || !s.create(Some(node.id), node.depth + 1, fixings, &node.pool)? {
                finished = false;
                break;
            }
        }
    }
    let status = if finished { Status::ProvenOptimal } else { Status::FeasibleTimeLimit };
    let assignment = match s.incumbent.take() {
        Some((_, a)) => a,
        None => vec![None; instance.num_users()],
    };
    s.stats.elapsed = budget.elapsed();
    let mut sol = Solution::new(instance, assignment, status, s.stats);
    sol.trace = s.trace;
    Ok(sol)
}
