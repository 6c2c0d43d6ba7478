//! Bounded-variable primal simplex.
//!
//! Revised simplex with a dense explicit basis inverse, refreshed by
//! Gauss-Jordan reinversion every few dozen pivots. Every row gets a slack
//! (`[0, inf)` for `<=` rows, `[0, 0]` for `=` rows); rows whose slack cannot
//! absorb the starting residual get an artificial variable, and phase one
//! drives those to zero. Entering variables follow Dantzig's rule until a run
//! of degenerate pivots, then Bland's rule until progress resumes.
//!
//! Problems are maximized. Row duals are reported with the usual sign
//! convention for maximization, so a binding `<=` row has a dual `>= 0`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub const TOL_FEAS: f64 = 1e-7;
pub const TOL_COST: f64 = 1e-7;
const TOL_PIVOT: f64 = 1e-9;
const TOL_SINGULAR: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("invalid linear program: {0}")]
    Invalid(String),
    #[error("numerical breakdown: {0}")]
    Numerical(&'static str),
    #[error("iteration limit of {0} pivots reached")]
    IterationLimit(usize),
    #[error("no optimal solution available (status {0:?})")]
    NotOptimal(LpStatus),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// `maximize c.x` subject to sparse rows and per-variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    costs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.costs.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for j in 0..n {
            let (lb, ub) = (self.lower[j], self.upper[j]);
            if !self.costs[j].is_finite() || lb.is_nan() || ub.is_nan() || lb > ub || lb == f64::INFINITY || ub == f64::NEG_INFINITY {
                return Err(LpError::Invalid(alloc::format!("variable {j} has bad cost or bounds")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Invalid(alloc::format!("row {i} has a non-finite rhs")));
            }
            if row.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
                return Err(LpError::Invalid(alloc::format!("row {i} has a bad coefficient")));
            }
        }
        Ok(())
    }
}

/// Human-readable listing, one row per line.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("maximize")?;
        write_terms(f, self.costs.iter().copied().enumerate().filter(|&(_, c)| c != 0.0))?;
        f.write_str("\nsubject to\n")?;
        for (i, row) in self.rows.iter().enumerate() {
            write!(f, "  r{i}:")?;
            write_terms(f, row.coeffs.iter().copied())?;
            let op = match row.sense {
                RowSense::Le => "<=",
                RowSense::Eq => "=",
            };
            writeln!(f, " {op} {}", row.rhs)?;
        }
        f.write_str("bounds\n")?;
        for j in 0..self.num_vars() {
            writeln!(f, "  {} <= x{j} <= {}", self.lower[j], self.upper[j])?;
        }
        Ok(())
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: impl Iterator<Item = (usize, f64)>) -> fmt::Result {
    let mut any = false;
    for (j, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        write!(f, " {sign} {} x{j}", a.abs())?;
        any = true;
    }
    if !any {
        f.write_str(" 0")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
    row_duals: Vec<f64>,
}

impl LpResult {
    /// Row duals in input row order; only meaningful at an optimum.
    pub fn duals(&self) -> Result<&[f64], LpError> {
        match self.status {
            LpStatus::Optimal => Ok(&self.row_duals),
            s => Err(LpError::NotOptimal(s)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_limit: usize,
    /// Pivots between basis reinversions.
    pub refactor_every: usize,
    /// Hard cap on pivots; `None` picks a size-based default.
    pub max_pivots: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { stall_limit: 40, refactor_every: 64, max_pivots: None }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpResult, LpError> {
    solve_with(lp, &SimplexOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpResult, LpError> {
    lp.validate()?;
    let mut engine = Engine::new(lp, opts);
    engine.run_phases()
}

const NONBASIC: usize = usize::MAX;

enum Exit {
    Optimal,
    Unbounded,
}

struct Engine<'a> {
    lp: &'a LinearProgram,
    opts: SimplexOptions,
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    binv: Vec<f64>,
    artificials: core::ops::Range<usize>,
    pivots: usize,
    max_pivots: usize,
    since_refactor: usize,
    // scratch
    y: Vec<f64>,
    w: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(lp: &'a LinearProgram, opts: &SimplexOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        // merge duplicate entries within a column
        for col in &mut cols {
            col.sort_by_key(|&(i, _)| i);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|&(_, a)| a != 0.0);
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x: Vec<f64> = (0..n)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();

        // residual the slacks must absorb
        let mut resid: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, a) in col {
                    resid[i] -= a * x[j];
                }
            }
        }

        let mut basis = vec![0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            cols.push(vec![(i, 1.0)]);
            lower.push(0.0);
            upper.push(match row.sense {
                RowSense::Le => f64::INFINITY,
                RowSense::Eq => 0.0,
            });
            x.push(0.0);
            basis[i] = n + i;
        }
        let art_start = n + m;
        for i in 0..m {
            let slack = n + i;
            let r = resid[i];
            if r >= 0.0 && r <= upper[slack] {
                x[slack] = r;
            } else {
                let sign = if r >= 0.0 { 1.0 } else { -1.0 };
                cols.push(vec![(i, sign)]);
                lower.push(0.0);
                upper.push(f64::INFINITY);
                x.push(r.abs());
                basis[i] = cols.len() - 1;
            }
        }
        let total = cols.len();
        let mut row_of = vec![NONBASIC; total];
        for (i, &v) in basis.iter().enumerate() {
            row_of[v] = i;
        }
        let mut binv = vec![0.0; m * m];
        for (i, &v) in basis.iter().enumerate() {
            // slacks have +1, artificials carry their sign; inverse of a diagonal
            let a = cols[v][0].1;
            binv[i * m + i] = 1.0 / a;
        }
        let max_pivots = opts.max_pivots.unwrap_or(50 * (total + m) + 10_000);
        Self {
            lp,
            opts: *opts,
            m,
            n,
            cols,
            lower,
            upper,
            cost: vec![0.0; total],
            x,
            rhs: lp.rows.iter().map(|r| r.rhs).collect(),
            basis,
            row_of,
            binv,
            artificials: art_start..total,
            pivots: 0,
            max_pivots,
            since_refactor: 0,
            y: vec![0.0; m],
            w: vec![0.0; m],
        }
    }

    fn run_phases(&mut self) -> Result<LpResult, LpError> {
        if !self.artificials.is_empty() {
            for v in self.artificials.clone() {
                self.cost[v] = -1.0;
            }
            match self.optimize()? {
                Exit::Optimal => {}
                Exit::Unbounded => return Err(LpError::Numerical("phase one reported unbounded")),
            }
            let infeas: f64 = self.artificials.clone().map(|v| self.x[v]).sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
            if infeas > TOL_FEAS * scale {
                return Ok(self.finish(LpStatus::Infeasible));
            }
            for v in self.artificials.clone() {
                self.cost[v] = 0.0;
                self.upper[v] = 0.0;
                if self.row_of[v] == NONBASIC {
                    self.x[v] = 0.0;
                }
            }
            self.refactor()?;
        }
        for j in 0..self.n {
            self.cost[j] = self.lp.costs[j];
        }
        match self.optimize()? {
            Exit::Optimal => {
                self.check_primal()?;
                Ok(self.finish(LpStatus::Optimal))
            }
            Exit::Unbounded => Ok(self.finish(LpStatus::Unbounded)),
        }
    }

    fn finish(&mut self, status: LpStatus) -> LpResult {
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let objective = if status == LpStatus::Infeasible {
            0.0
        } else {
            self.lp.costs.iter().zip(&x).map(|(c, v)| c * v).sum()
        };
        let row_duals = if status == LpStatus::Optimal {
            self.compute_y();
            self.y.clone()
        } else {
            Vec::new()
        };
        LpResult { status, x, objective, pivots: self.pivots, row_duals }
    }

    fn check_primal(&self) -> Result<(), LpError> {
        for (i, &v) in self.basis.iter().enumerate() {
            let val = self.x[v];
            let tol = 1e-6 * (1.0 + self.rhs[i].abs());
            if val < self.lower[v] - tol || val > self.upper[v] + tol {
                return Err(LpError::Numerical("basic variable out of bounds at optimum"));
            }
        }
        Ok(())
    }

    /// Pivots until no improving variable remains, then confirms optimality
    /// on a freshly reinverted basis.
    fn optimize(&mut self) -> Result<Exit, LpError> {
        let mut stall = 0usize;
        loop {
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            self.compute_y();
            let bland = stall >= self.opts.stall_limit;
            let Some((q, dir)) = self.choose_entering(bland) else {
                if self.since_refactor == 0 {
                    return Ok(Exit::Optimal);
                }
                self.refactor()?;
                continue;
            };
            if self.pivots >= self.max_pivots {
                return Err(LpError::IterationLimit(self.max_pivots));
            }
            self.compute_column(q);
            let step = self.ratio_test(q, dir, bland);
            let Some((t, leave)) = step else {
                return Ok(Exit::Unbounded);
            };
            self.pivots += 1;
            if t <= 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
            self.apply(q, dir, t, leave)?;
        }
    }

    fn compute_y(&mut self) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &v) in self.basis.iter().enumerate() {
            let c = self.cost[v];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, b) in self.y.iter_mut().zip(row) {
                    *yk += c * b;
                }
            }
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        let mut d = self.cost[j];
        for &(i, a) in &self.cols[j] {
            d -= self.y[i] * a;
        }
        d
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_mag = 0.0;
        for j in 0..self.cols.len() {
            if self.row_of[j] != NONBASIC || self.lower[j] == self.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j);
            let dir = if d > TOL_COST && self.x[j] < self.upper[j] {
                1.0
            } else if d < -TOL_COST && self.x[j] > self.lower[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            // equal candidates go to the newest column
            if d.abs() >= best_mag {
                best_mag = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn compute_column(&mut self, q: usize) {
        let m = self.m;
        self.w.iter_mut().for_each(|v| *v = 0.0);
        for &(r, a) in &self.cols[q] {
            for i in 0..m {
                self.w[i] += self.binv[i * m + r] * a;
            }
        }
    }

    /// Step length and leaving row (`None` row means a bound flip).
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Option<(f64, Option<usize>)> {
        let mut best_t = f64::INFINITY;
        let mut best_row: Option<usize> = None;
        let mut best_piv = 0.0;
        for i in 0..self.m {
            let wi = self.w[i];
            if wi.abs() <= TOL_PIVOT {
                continue;
            }
            let v = self.basis[i];
            // x_B[i] moves by -dir * wi * t
            let rate = -dir * wi;
            let room = if rate < 0.0 {
                (self.x[v] - self.lower[v]) / -rate
            } else if self.upper[v].is_finite() {
                (self.upper[v] - self.x[v]) / rate
            } else {
                continue;
            };
            let t = room.max(0.0);
            let better = if t < best_t - 1e-12 {
                true
            } else if t <= best_t + 1e-12 {
                match best_row {
                    Some(r) if bland => v < self.basis[r],
                    // larger pivot, then the later basic variable
                    Some(r) => wi.abs() > best_piv || (wi.abs() == best_piv && v > self.basis[r]),
                    None => true,
                }
            } else {
                false
            };
            if better {
                best_t = t;
                best_row = Some(i);
                best_piv = wi.abs();
            }
        }
        let flip = self.upper[q] - self.lower[q];
        if flip.is_finite() && flip <= best_t {
            return Some((flip, None));
        }
        if best_t.is_infinite() {
            return None;
        }
        Some((best_t, best_row))
    }

    fn apply(&mut self, q: usize, dir: f64, t: f64, leave: Option<usize>) -> Result<(), LpError> {
        let m = self.m;
        if t != 0.0 {
            self.x[q] += dir * t;
            for i in 0..m {
                let v = self.basis[i];
                self.x[v] -= dir * t * self.w[i];
            }
        }
        let Some(r) = leave else {
            // bound flip: snap to the bound exactly
            self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
            return Ok(());
        };
        let out = self.basis[r];
        // leaving variable sits at whichever bound it hit
        let rate = -dir * self.w[r];
        self.x[out] = if rate < 0.0 { self.lower[out] } else { self.upper[out] };
        self.basis[r] = q;
        self.row_of[q] = r;
        self.row_of[out] = NONBASIC;

        if self.w[r].abs() < TOL_SINGULAR {
            return Err(LpError::Numerical("pivot element vanished"));
        }
        self.eliminate(r);
        self.since_refactor += 1;
        Ok(())
    }

    /// Updates the inverse for the column in `w` entering at position `r`.
    fn eliminate(&mut self, r: usize) {
        let m = self.m;
        let piv = self.w[r];
        let (head, tail) = self.binv.split_at_mut(r * m);
        let (prow, tail) = tail.split_at_mut(m);
        prow.iter_mut().for_each(|v| *v /= piv);
        for (i, chunk) in head.chunks_exact_mut(m).enumerate() {
            let f = self.w[i];
            if f != 0.0 {
                for (a, b) in chunk.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
            }
        }
        for (k, chunk) in tail.chunks_exact_mut(m).enumerate() {
            let f = self.w[r + 1 + k];
            if f != 0.0 {
                for (a, b) in chunk.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
            }
        }
    }

    /// Rebuilds the basis inverse from scratch and recomputes basic values.
    ///
    /// Unit columns (slacks, artificials) keep the position of their row;
    /// the remaining basic columns are pivoted into the free positions one
    /// by one, largest pivot first. The basis order may change.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            self.binv[i * m + i] = 1.0;
        }
        let mut slot: Vec<usize> = vec![NONBASIC; m];
        let mut structural = Vec::new();
        for &v in &self.basis {
            match self.cols[v].as_slice() {
                &[(i, a)] if v >= self.n => {
                    if slot[i] != NONBASIC {
                        return Err(LpError::Numerical("singular basis on reinversion"));
                    }
                    slot[i] = v;
                    self.binv[i * m + i] = 1.0 / a;
                }
                _ => structural.push(v),
            }
        }
        for v in structural {
            self.compute_column(v);
            let mut p = NONBASIC;
            let mut best = TOL_SINGULAR;
            for (i, &wi) in self.w.iter().enumerate() {
                if slot[i] == NONBASIC && wi.abs() > best {
                    best = wi.abs();
                    p = i;
                }
            }
            if p == NONBASIC {
                return Err(LpError::Numerical("singular basis on reinversion"));
            }
            slot[p] = v;
            self.eliminate(p);
        }
        for (i, &v) in slot.iter().enumerate() {
            self.basis[i] = v;
            self.row_of[v] = i;
        }
        let mut r = self.rhs.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.row_of[j] == NONBASIC && self.x[j] != 0.0 {
                for &(i, a) in col {
                    r[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x[self.basis[i]] = row.iter().zip(&r).map(|(b, v)| b * v).sum();
        }
        Ok(())
    }
}
