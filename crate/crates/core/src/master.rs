//! Restricted master problem and the column generation loop.
//!
//! The master is the LP relaxation of the set-packing model: one nonnegative
//! variable per (user, pattern) column, a `<= 1` row per active user and a
//! `<= 1` row per active hole, objective `Σ R_j x`. Search nodes see a
//! reduced instance ([`NodeView`]): users and holes taken by patterns fixed
//! to 1 are gone and their demand is collected as a constant gain.

use crate::clock::Budget;
use crate::instance::{Hole, Instance, Pattern};
use crate::pricing::sep1::{sep1_price, Sep1Query};
use crate::pricing::sep2::sep2_price;
use crate::pricing::PricedPattern;
use crate::simplex::{self, LinearProgram, LpError, LpStatus, RowSense, TOL_COST};
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Column {
    pub user: usize,
    /// Instance hole indices.
    pub pattern: Pattern,
}

/// Hole duals `y` and user duals `z`, indexed by instance hole and user.
/// Inactive rows read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPrices {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl DualPrices {
    pub fn zero(instance: &Instance) -> Self {
        Self { y: vec![0.0; instance.num_holes()], z: vec![0.0; instance.num_users()] }
    }
}

/// `R_j - z_j - Σ_{h in π} y_h`.
pub fn reduced_cost(instance: &Instance, user: usize, pattern: &Pattern, duals: &DualPrices) -> f64 {
    let used: f64 = pattern.iter().map(|h| duals.y[h]).sum();
    instance.user(user).demand as f64 - duals.z[user] - used
}

/// The instance as seen from one search node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeView {
    pub hole_active: Vec<bool>,
    pub user_active: Vec<bool>,
    /// Demand of the users whose pattern is fixed to 1.
    pub base_gain: i64,
    /// Columns fixed to 1.
    pub fixed: Vec<Column>,
    /// Per user: holes its pattern must contain.
    pub fixed_in: Vec<Vec<usize>>,
    /// Per user: holes its pattern must avoid.
    pub fixed_out: Vec<Vec<usize>>,
    /// Per user: patterns fixed to 0.
    pub forbidden: Vec<Vec<Pattern>>,
}

impl NodeView {
    pub fn root(instance: &Instance) -> Self {
        let (m, n) = (instance.num_holes(), instance.num_users());
        Self {
            hole_active: vec![true; m],
            user_active: vec![true; n],
            base_gain: 0,
            fixed: Vec::new(),
            fixed_in: vec![Vec::new(); n],
            fixed_out: vec![Vec::new(); n],
            forbidden: vec![Vec::new(); n],
        }
    }

    pub fn active_holes(&self) -> Vec<usize> {
        (0..self.hole_active.len()).filter(|&i| self.hole_active[i]).collect()
    }

    pub fn active_users(&self) -> Vec<usize> {
        (0..self.user_active.len()).filter(|&j| self.user_active[j]).collect()
    }

    /// Whether a column may live in this node's pool.
    pub fn admits(&self, col: &Column) -> bool {
        let j = col.user;
        self.user_active[j]
            && col.pattern.iter().all(|h| self.hole_active[h])
            && self.fixed_in[j].iter().all(|&h| col.pattern.contains(h))
            && !self.fixed_out[j].iter().any(|&h| col.pattern.contains(h))
            && !self.forbidden[j].contains(&col.pattern)
    }
}

/// Column pool in insertion order, free of duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RmpState {
    columns: Vec<Column>,
    seen: BTreeSet<Column>,
}

impl RmpState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Adds a column; false if it was already pooled.
    pub fn insert(&mut self, col: Column) -> bool {
        if self.seen.contains(&col) {
            return false;
        }
        self.seen.insert(col.clone());
        self.columns.push(col);
        true
    }

    /// Copy keeping only the columns `view` admits, in the same order.
    pub fn restricted_to(&self, view: &NodeView) -> Self {
        let mut out = Self::new();
        for c in self.columns.iter().filter(|c| view.admits(c)) {
            out.insert(c.clone());
        }
        out
    }
}

/// The master LP plus the row of each active user and hole.
#[derive(Debug, Clone)]
pub struct RmpModel {
    pub lp: LinearProgram,
    pub user_row: Vec<Option<usize>>,
    pub hole_row: Vec<Option<usize>>,
}

/// User rows first, then hole rows; variable `k` is pool column `k`.
pub fn build_rmp(instance: &Instance, view: &NodeView, state: &RmpState) -> RmpModel {
    let mut lp = LinearProgram::new();
    let mut user_row = vec![None; instance.num_users()];
    let mut hole_row = vec![None; instance.num_holes()];
    let mut user_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.num_users()];
    let mut hole_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.num_holes()];
    for (k, col) in state.columns().iter().enumerate() {
        debug_assert!(view.admits(col));
        // x <= 1 follows from the user row; an explicit upper bound would
        // soak up dual value that pricing needs to see
        lp.add_var(instance.user(col.user).demand as f64, 0.0, f64::INFINITY);
        user_terms[col.user].push((k, 1.0));
        for h in col.pattern.iter() {
            hole_terms[h].push((k, 1.0));
        }
    }
    for j in view.active_users() {
        user_row[j] = Some(lp.add_row(core::mem::take(&mut user_terms[j]), RowSense::Le, 1.0));
    }
    for i in view.active_holes() {
        hole_row[i] = Some(lp.add_row(core::mem::take(&mut hole_terms[i]), RowSense::Le, 1.0));
    }
    RmpModel { lp, user_row, hole_row }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MasterError {
    #[error("master LP failed: {0}")]
    Lp(#[from] LpError),
    #[error("master LP ended {0:?}")]
    Status(LpStatus),
}

/// Finds a cheapest pattern for one user at a node under hole costs `y`.
pub trait PricingOracle {
    fn price(&self, instance: &Instance, view: &NodeView, user: usize, y: &[f64]) -> Option<PricedPattern>;
}

/// Knapsack pricing; honours hole fixings, not forbidden patterns.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sep1Oracle;

/// Dynamic-programming pricing; honours forbidden patterns and fixed-out
/// holes, not fixed-in holes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sep2Oracle;

fn local_holes(instance: &Instance, view: &NodeView, user: usize) -> (Vec<usize>, Vec<usize>) {
    let mut local = vec![usize::MAX; instance.num_holes()];
    let mut global = Vec::new();
    for i in view.active_holes() {
        if !view.fixed_out[user].contains(&i) {
            local[i] = global.len();
            global.push(i);
        }
    }
    (global, local)
}

impl PricingOracle for Sep1Oracle {
    fn price(&self, instance: &Instance, view: &NodeView, user: usize, y: &[f64]) -> Option<PricedPattern> {
        debug_assert!(view.forbidden[user].is_empty(), "knapsack pricing cannot honour forbidden patterns");
        let global = view.active_holes();
        let mut local = vec![usize::MAX; instance.num_holes()];
        for (k, &i) in global.iter().enumerate() {
            local[i] = k;
        }
        let mut fixed_in = Vec::new();
        for &i in &view.fixed_in[user] {
            if local[i] == usize::MAX {
                return None;
            }
            fixed_in.push(local[i]);
        }
        let fixed_out: Vec<usize> = view.fixed_out[user].iter().filter(|&&i| local[i] != usize::MAX).map(|&i| local[i]).collect();
        if fixed_in.iter().any(|i| fixed_out.contains(i)) {
            return None;
        }
        let u = instance.user(user);
        let q = Sep1Query {
            holes: global.iter().map(|&i| instance.hole(i)).collect(),
            costs: global.iter().map(|&i| y[i]).collect(),
            demand: u.demand,
            mar: u.mar,
            fixed_in,
            fixed_out,
        };
        let mut p = sep1_price(&q)?;
        for h in &mut p.holes {
            *h = global[*h];
        }
        Some(p)
    }
}

impl PricingOracle for Sep2Oracle {
    fn price(&self, instance: &Instance, view: &NodeView, user: usize, y: &[f64]) -> Option<PricedPattern> {
        debug_assert!(view.fixed_in[user].is_empty(), "forbidden-pattern pricing cannot honour fixed-in holes");
        let (global, local) = local_holes(instance, view, user);
        let holes: Vec<Hole> = global.iter().map(|&i| instance.hole(i)).collect();
        let costs: Vec<f64> = global.iter().map(|&i| y[i]).collect();
        let forbidden: Vec<Vec<usize>> = view.forbidden[user]
            .iter()
            .filter(|p| p.iter().all(|h| local[h] != usize::MAX))
            .map(|p| p.iter().map(|h| local[h]).collect())
            .collect();
        let mut p = sep2_price(&holes, &costs, &instance.user(user), &forbidden)?;
        for h in &mut p.holes {
            *h = global[*h];
        }
        Some(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    /// LP value including the node's base gain.
    pub lp_value: f64,
    /// Value of each pool column.
    pub values: Vec<f64>,
    pub duals: DualPrices,
    pub columns_added: usize,
    /// Master LP solves.
    pub iterations: usize,
    /// False if the budget ran out before pricing proved optimality.
    pub converged: bool,
}

fn read_duals(instance: &Instance, model: &RmpModel, row_duals: &[f64]) -> DualPrices {
    let pick = |row: Option<usize>| row.map_or(0.0, |r| row_duals[r].max(0.0));
    DualPrices {
        y: model.hole_row.iter().map(|&r| pick(r)).collect(),
        z: model.user_row.iter().map(|&r| pick(r)).collect(),
    }
    .checked(instance)
}

impl DualPrices {
    fn checked(self, instance: &Instance) -> Self {
        debug_assert_eq!(self.y.len(), instance.num_holes());
        debug_assert_eq!(self.z.len(), instance.num_users());
        self
    }
}

/// Solves the node LP by column generation.
///
/// Every iteration solves the restricted master, prices each active user
/// once and adds at most one improving column per user. It stops when no
/// user has a column with reduced cost above the tolerance, or when the
/// budget expires (then `converged` is false).
pub fn run_column_generation(
    instance: &Instance,
    view: &NodeView,
    state: &mut RmpState,
    oracle: &dyn PricingOracle,
    budget: &Budget<'_>,
) -> Result<CgOutcome, MasterError> {
    let users = view.active_users();
    let mut iterations = 0;
    let mut columns_added = 0;
    loop {
        let model = build_rmp(instance, view, state);
        let res = simplex::solve(&model.lp)?;
        if res.status != LpStatus::Optimal {
            return Err(MasterError::Status(res.status));
        }
        iterations += 1;
        let duals = read_duals(instance, &model, res.duals()?);
        let done = |converged: bool, columns_added: usize| CgOutcome {
            lp_value: view.base_gain as f64 + res.objective,
            values: res.x.clone(),
            duals: duals.clone(),
            columns_added,
            iterations,
            converged,
        };
        if budget.expired() {
            return Ok(done(false, columns_added));
        }
        let mut added = 0;
        for &j in &users {
            let Some(p) = oracle.price(instance, view, j, &duals.y) else { continue };
            let rc = instance.user(j).demand as f64 - duals.z[j] - p.cost;
            if rc > TOL_COST {
                let col = Column { user: j, pattern: Pattern::from_unsorted(p.holes) };
                debug_assert!(view.admits(&col));
                if state.insert(col) {
                    added += 1;
                }
            }
        }
        columns_added += added;
        if added == 0 {
            return Ok(done(true, columns_added));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::example1;

    fn col(user: usize, holes: &[usize]) -> Column {
        Column { user, pattern: Pattern::new(holes.to_vec()).unwrap() }
    }

    fn lp_value(cols: &[Column]) -> f64 {
        let inst = example1();
        let view = NodeView::root(&inst);
        let mut st = RmpState::new();
        for c in cols {
            st.insert(c.clone());
        }
        simplex::solve(&build_rmp(&inst, &view, &st).lp).unwrap().objective
    }

    fn phi1() -> Vec<Column> {
        vec![col(0, &[3]), col(1, &[1, 2, 3]), col(2, &[1, 2]), col(3, &[3]), col(4, &[2]), col(5, &[2, 3])]
    }

    fn phi3() -> Vec<Column> {
        let mut v = phi1();
        v.extend([col(0, &[1]), col(1, &[0, 1, 3]), col(3, &[1]), col(5, &[1, 2])]);
        v.extend([col(0, &[0]), col(1, &[0, 2, 3]), col(3, &[0])]);
        v
    }

    #[test]
    fn empty_pool() {
        let inst = example1();
        let m = build_rmp(&inst, &NodeView::root(&inst), &RmpState::new());
        assert_eq!(m.lp.num_rows(), 10);
        assert_eq!(m.lp.num_vars(), 0);
        assert_eq!(simplex::solve(&m.lp).unwrap().objective, 0.0);
    }

    #[test]
    fn first_and_last_pools_of_the_example() {
        assert!((lp_value(&phi1()) - 12.0).abs() < 1e-9);
        assert_eq!(phi3().len(), 13);
        assert!((lp_value(&phi3()) - 17.0).abs() < 1e-9);
    }

    #[test]
    fn reduced_cost_arithmetic() {
        let inst = example1();
        let mut d = DualPrices::zero(&inst);
        assert_eq!(reduced_cost(&inst, 3, &Pattern::new(vec![1]).unwrap(), &d), 4.0);
        d.y = vec![3.0, 1.0, 2.0, 5.0];
        assert_eq!(reduced_cost(&inst, 2, &Pattern::new(vec![1, 2]).unwrap(), &d), 3.0);
        d.y = vec![0.0; 4];
        d.z[0] = 3.0;
        assert_eq!(reduced_cost(&inst, 0, &Pattern::new(vec![0]).unwrap(), &d), 0.0);
    }

    #[test]
    fn root_column_generation_reaches_17() {
        let inst = example1();
        for oracle in [&Sep1Oracle as &dyn PricingOracle, &Sep2Oracle] {
            let mut st = RmpState::new();
            let out = run_column_generation(&inst, &NodeView::root(&inst), &mut st, oracle, &Budget::unlimited()).unwrap();
            assert!(out.converged);
            assert!((out.lp_value - 17.0).abs() < 1e-6, "{}", out.lp_value);
            assert_eq!(out.values.len(), st.len());
        }
    }

    #[test]
    fn pool_filter_respects_fixings() {
        let inst = example1();
        let mut view = NodeView::root(&inst);
        view.forbidden[5].push(Pattern::new(vec![2, 3]).unwrap());
        view.fixed_out[0].push(3);
        let mut st = RmpState::new();
        for c in phi3() {
            st.insert(c);
        }
        let kept = st.restricted_to(&view);
        assert_eq!(kept.len(), 11);
        assert!(kept.columns().iter().all(|c| view.admits(c)));
        assert!(!st.clone().insert(col(0, &[3])));
    }
}
