//! Solver results, statistics and the per-node search log.

use crate::instance::{Instance, Pattern};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    ProvenOptimal,
    /// Stopped by the time limit; the assignment is the best one found.
    FeasibleTimeLimit,
    /// Reserved: the empty assignment is always feasible, so the solvers
    /// here never report it.
    Infeasible,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::ProvenOptimal => "optimal",
            Status::FeasibleTimeLimit => "time_limit",
            Status::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Search nodes whose LP was solved.
    pub nodes: usize,
    pub cg_iterations: usize,
    /// Columns generated over the whole search (LAM-T2: model variables).
    pub columns: usize,
    pub elapsed: f64,
    /// Root LP value, if the root relaxation was solved to optimality.
    pub root_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeAction {
    Branch,
    PruneBound,
    PruneIntegrality,
    PruneInfeasibility,
}

impl NodeAction {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeAction::Branch => "branch",
            NodeAction::PruneBound => "prune_bound",
            NodeAction::PruneIntegrality => "prune_integrality",
            NodeAction::PruneInfeasibility => "prune_infeasibility",
        }
    }
}

impl fmt::Display for NodeAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What happened to one search node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEvent {
    pub id: usize,
    pub parent: Option<usize>,
    /// LP bound; `None` when the node LP was infeasible.
    pub bound: Option<f64>,
    pub action: NodeAction,
    /// The fixing that created the node, e.g. `x[u6,{h3,h4}]=1`; empty at the root.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolutionError {
    #[error("assignment has {got} entries for {expected} users")]
    UserCount { expected: usize, got: usize },
    #[error("pattern {pattern} is not feasible for user {user}")]
    Infeasible { user: usize, pattern: String },
    #[error("hole {hole} is assigned twice")]
    Overlap { hole: usize },
    #[error("objective {claimed} does not match served demand {actual}")]
    Objective { claimed: i64, actual: i64 },
}

/// Failures that stop a solver before it can return a solution.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Master(#[from] crate::master::MasterError),
    #[error("LP failed: {0}")]
    Lp(#[from] crate::simplex::LpError),
    #[error(transparent)]
    Fixing(#[from] crate::bnp::FixingError),
    #[error("internal error: {0}")]
    Internal(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Pattern per user (instance hole indices), `None` if unserved.
    pub assignment: Vec<Option<Pattern>>,
    pub objective: i64,
    pub status: Status,
    pub stats: SolveStats,
    pub trace: Vec<NodeEvent>,
}

impl Solution {
    /// Solution built from an assignment, with the objective computed.
    pub fn new(instance: &Instance, assignment: Vec<Option<Pattern>>, status: Status, stats: SolveStats) -> Self {
        let objective = served_demand(instance, &assignment);
        Self { assignment, objective, status, stats, trace: Vec::new() }
    }

    /// Checks disjointness, per-user feasibility and the objective.
    pub fn validate(&self, instance: &Instance) -> Result<(), SolutionError> {
        validate_assignment(instance, &self.assignment)?;
        let actual = served_demand(instance, &self.assignment);
        if actual != self.objective {
            return Err(SolutionError::Objective { claimed: self.objective, actual });
        }
        Ok(())
    }

    pub fn served(&self) -> usize {
        self.assignment.iter().filter(|p| p.is_some()).count()
    }
}

pub fn served_demand(instance: &Instance, assignment: &[Option<Pattern>]) -> i64 {
    assignment.iter().zip(instance.users()).filter(|(p, _)| p.is_some()).map(|(_, u)| u.demand).sum()
}

pub fn validate_assignment(instance: &Instance, assignment: &[Option<Pattern>]) -> Result<(), SolutionError> {
    if assignment.len() != instance.num_users() {
        return Err(SolutionError::UserCount { expected: instance.num_users(), got: assignment.len() });
    }
    let mut used = vec![false; instance.num_holes()];
    for (j, p) in assignment.iter().enumerate() {
        let Some(p) = p else { continue };
        let ok = crate::instance::is_feasible_pattern(instance, p, &instance.user(j)).unwrap_or(false);
        if !ok {
            return Err(SolutionError::Infeasible { user: j, pattern: alloc::format!("{p}") });
        }
        for h in p.iter() {
            if core::mem::replace(&mut used[h], true) {
                return Err(SolutionError::Overlap { hole: h });
            }
        }
    }
    Ok(())
}
