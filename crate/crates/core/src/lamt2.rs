//! The compact LAM-T2 assignment model and an LP-based branch-and-bound.
//!
//! For user `j` and a candidate first hole `i`, `I_j(i)` holds the holes
//! `i' >= i` with `β_{i'} - α_i <= δ_j`, and `T_j` the first holes whose
//! window can cover `R_j`. A binary `γ^j_{ii'}` says that user `j`, anchored
//! at `i`, uses hole `i'`; the diagonal `γ^j_{ii}` says the user is served
//! from anchor `i`. Constraints: every hole is used at most once, every user
//! has at most one anchor, and an anchor's holes cover the demand:
//! `Σ_{i'} len_{i'} γ^j_{ii'} >= R_j γ^j_{ii}`.

use crate::clock::Budget;
use crate::instance::{Instance, Pattern};
use crate::master::{run_column_generation, NodeView, RmpState, Sep2Oracle};
use crate::search::NodeQueue;
use crate::simplex::{self, LinearProgram, LpStatus, RowSense};
use crate::solution::{NodeAction, NodeEvent, SolveError, SolveStats, Solution, Status};
use crate::bnp::{bound_prunes, fractional_count};
use crate::{frac_dist, INT_TOL};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// One variable `γ^j_{ii'}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub user: usize,
    pub anchor: usize,
    pub hole: usize,
}

#[derive(Debug, Clone)]
pub struct LamT2Model {
    /// Variable `k` is `triples[k]`.
    pub triples: Vec<Triple>,
    /// `windows[j][i]` is `I_j(i)`.
    pub windows: Vec<Vec<Vec<usize>>>,
    /// `anchors[j]` is `T_j`.
    pub anchors: Vec<Vec<usize>>,
    pub lp: LinearProgram,
}

impl LamT2Model {
    pub fn num_vars(&self) -> usize {
        self.triples.len()
    }

    pub fn num_rows(&self) -> usize {
        self.lp.num_rows()
    }

    /// Reads a 0-1 solution back as one pattern per user.
    pub fn decode(&self, instance: &Instance, values: &[f64]) -> Vec<Option<Pattern>> {
        self.decode_above(instance, values, 0.5)
    }

    /// Like [`decode`](Self::decode), with every variable above `threshold`
    /// read as one.
    fn decode_above(&self, instance: &Instance, values: &[f64], threshold: f64) -> Vec<Option<Pattern>> {
        let on = |k: usize| values[k] > threshold;
        let mut anchor_of: Vec<Option<usize>> = vec![None; instance.num_users()];
        for (k, t) in self.triples.iter().enumerate() {
            if t.anchor == t.hole && on(k) {
                anchor_of[t.user] = Some(t.anchor);
            }
        }
        let mut holes: Vec<Vec<usize>> = vec![Vec::new(); instance.num_users()];
        for (k, t) in self.triples.iter().enumerate() {
            if on(k) && anchor_of[t.user] == Some(t.anchor) {
                holes[t.user].push(t.hole);
            }
        }
        holes.into_iter().zip(anchor_of).map(|(h, a)| a.map(|_| Pattern::from_unsorted(h))).collect()
    }
}

/// Builds the model: hole rows, then user rows, then one demand row per
/// (user, anchor), stored as `(R_j - len_i) γ_ii - Σ_{i' != i} len_{i'} γ_ii' <= 0`.
pub fn build_lamt2(instance: &Instance) -> LamT2Model {
    let holes = instance.holes();
    let m = holes.len();
    let mut windows = Vec::with_capacity(instance.num_users());
    let mut anchors = Vec::with_capacity(instance.num_users());
    for u in instance.users() {
        let w: Vec<Vec<usize>> =
            (0..m).map(|i| (i..m).take_while(|&k| holes[k].beta - holes[i].alpha <= u.mar).collect()).collect();
        let t: Vec<usize> = (0..m).filter(|&i| w[i].iter().map(|&k| holes[k].len()).sum::<i64>() >= u.demand).collect();
        windows.push(w);
        anchors.push(t);
    }

    let mut lp = LinearProgram::new();
    let mut triples = Vec::new();
    let mut hole_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut user_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.num_users()];
    let mut link_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for (j, u) in instance.users().iter().enumerate() {
        for &i in &anchors[j] {
            let mut link = Vec::with_capacity(windows[j][i].len());
            for &k in &windows[j][i] {
                let cost = if k == i { u.demand as f64 } else { 0.0 };
                let v = lp.add_var(cost, 0.0, 1.0);
                triples.push(Triple { user: j, anchor: i, hole: k });
                hole_terms[k].push((v, 1.0));
                if k == i {
                    user_terms[j].push((v, 1.0));
                    link.push((v, (u.demand - holes[i].len()) as f64));
                } else {
                    link.push((v, -(holes[k].len() as f64)));
                }
            }
            link_rows.push(link);
        }
    }
    for terms in hole_terms {
        lp.add_row(terms, RowSense::Le, 1.0);
    }
    for terms in user_terms {
        lp.add_row(terms, RowSense::Le, 1.0);
    }
    for terms in link_rows {
        lp.add_row(terms, RowSense::Le, 0.0);
    }
    LamT2Model { triples, windows, anchors, lp }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Bilp,
    LamT2,
}

/// An assignment worth `bound`, if rounding up a node solution with
/// integral diagonal variables gives one.
///
/// The objective only counts diagonal variables, so such a solution closes
/// the node just like an integral one.
fn rounded_up(model: &LamT2Model, instance: &Instance, values: &[f64], bound: f64) -> Option<Vec<Option<Pattern>>> {
    let diagonal_integral = model.triples.iter().zip(values).all(|(t, &v)| t.anchor != t.hole || frac_dist(v) <= INT_TOL);
    if !diagonal_integral {
        return None;
    }
    let assignment = model.decode_above(instance, values, INT_TOL);
    crate::solution::validate_assignment(instance, &assignment).ok()?;
    let value = crate::solution::served_demand(instance, &assignment) as f64;
    ((value - bound).abs() <= 1e-6).then_some(assignment)
}

/// Optimum of the LP relaxation of either model.
pub fn lp_bound(instance: &Instance, formulation: Formulation) -> Result<f64, SolveError> {
    match formulation {
        Formulation::Bilp => {
            let view = NodeView::root(instance);
            let mut pool = RmpState::new();
            let out = run_column_generation(instance, &view, &mut pool, &Sep2Oracle, &Budget::unlimited())?;
            Ok(out.lp_value)
        }
        Formulation::LamT2 => {
            let model = build_lamt2(instance);
            let res = simplex::solve(&model.lp)?;
            match res.status {
                LpStatus::Optimal => Ok(res.objective),
                _ => Err(SolveError::Internal("LAM-T2 relaxation is not optimal")),
            }
        }
    }
}

struct Open {
    id: usize,
    parent: Option<usize>,
    depth: usize,
    label: String,
    fixings: Vec<(usize, bool)>,
    values: Vec<f64>,
    bound: f64,
}

/// Variable closest to 0.5, ties to the smallest index.
fn most_fractional(values: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (k, &v) in values.iter().enumerate() {
        let d = frac_dist(v);
        if d > INT_TOL && best.map_or(true, |(b, _)| d > b + INT_TOL) {
            best = Some((d, k));
        }
    }
    best.map(|(_, k)| k)
}

struct Search<'a> {
    instance: &'a Instance,
    model: LamT2Model,
    lp: LinearProgram,
    stats: SolveStats,
    trace: Vec<NodeEvent>,
    incumbent: Option<(i64, Vec<Option<Pattern>>)>,
    queue: NodeQueue<Open>,
    next_id: usize,
}

impl Search<'_> {
    fn incumbent_value(&self) -> Option<i64> {
        self.incumbent.as_ref().map(|(v, _)| *v)
    }

    fn log(&mut self, id: usize, parent: Option<usize>, bound: Option<f64>, action: NodeAction, label: String) {
        self.trace.push(NodeEvent { id, parent, bound, action, label });
    }

    fn create(&mut self, parent: Option<usize>, depth: usize, label: String, fixings: Vec<(usize, bool)>) -> Result<(), SolveError> {
        let id = self.next_id;
        self.next_id += 1;
        for &(k, one) in &fixings {
            let b = if one { 1.0 } else { 0.0 };
            self.lp.set_bounds(k, b, b);
        }
        let res = simplex::solve(&self.lp);
        for &(k, _) in &fixings {
            self.lp.set_bounds(k, 0.0, 1.0);
        }
        let res = res?;
        self.stats.nodes += 1;
        match res.status {
            LpStatus::Infeasible => self.log(id, parent, None, NodeAction::PruneInfeasibility, label),
            LpStatus::Unbounded => return Err(SolveError::Internal("LAM-T2 relaxation is unbounded")),
            LpStatus::Optimal => {
                if id == 0 {
                    self.stats.root_bound = Some(res.objective);
                }
                let closed = if most_fractional(&res.x).is_none() {
                    Some(self.model.decode(self.instance, &res.x))
                } else {
                    rounded_up(&self.model, self.instance, &res.x, res.objective)
                };
                if let Some(assignment) = closed {
                    let objective = crate::solution::served_demand(self.instance, &assignment);
                    debug_assert!((objective as f64 - res.objective).abs() < 1e-6);
                    if self.incumbent_value().map_or(true, |v| objective > v) {
                        self.incumbent = Some((objective, assignment));
                    }
                    self.log(id, parent, Some(res.objective), NodeAction::PruneIntegrality, label);
                } else if bound_prunes(res.objective, self.incumbent_value()) {
                    self.log(id, parent, Some(res.objective), NodeAction::PruneBound, label);
                } else {
                    let frac = fractional_count(&res.x);
                    let open = Open { id, parent, depth, label, fixings, values: res.x, bound: res.objective };
                    self.queue.push(open.bound, frac, depth, open);
                }
            }
        }
        Ok(())
    }
}

/// Solves the LAM-T2 model by best-bound-first LP branch-and-bound.
pub fn solve_lamt2(instance: &Instance, budget: &Budget<'_>) -> Result<Solution, SolveError> {
    let model = build_lamt2(instance);
    let lp = model.lp.clone();
    let stats = SolveStats { columns: model.num_vars(), ..SolveStats::default() };
    let mut s = Search { instance, model, lp, stats, trace: Vec::new(), incumbent: None, queue: NodeQueue::new(), next_id: 0 };
    let mut finished = !budget.expired();
    if finished {
        s.create(None, 0, String::new(), Vec::new())?;
    }
    while finished {
        let Some(node) = s.queue.pop() else { break };
        if budget.expired() {
            finished = false;
            break;
        }
        if bound_prunes(node.bound, s.incumbent_value()) {
            s.log(node.id, node.parent, Some(node.bound), NodeAction::PruneBound, node.label);
            continue;
        }
        s.log(node.id, node.parent, Some(node.bound), NodeAction::Branch, node.label.clone());
        let k = most_fractional(&node.values).ok_or(SolveError::Internal("branching requested on an integral LP"))?;
        let t = s.model.triples[k];
        for one in [true, false] {
            if budget.expired() {
                finished = false;
                break;
            }
            let mut fixings = node.fixings.clone();
            fixings.push((k, one));
            let label = format!("g[u{},h{},h{}]={}", t.user + 1, t.anchor + 1, t.hole + 1, one as u8);
            s.create(Some(node.id), node.depth + 1, label, fixings)?;
        }
    }
    let status = if finished { Status::ProvenOptimal } else { Status::FeasibleTimeLimit };
    let assignment = s.incumbent.take().map(|(_, a)| a).unwrap_or_else(|| vec![None; instance.num_users()]);
    s.stats.elapsed = budget.elapsed();
    let mut sol = Solution::new(instance, assignment, status, s.stats);
    sol.trace = s.trace;
    Ok(sol)
}
