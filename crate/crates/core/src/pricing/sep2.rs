//! Pricing with forbidden patterns: a memoized top-down dynamic program.
//!
//! A subproblem is `(σ, ϱ, δ, active, F)`: choose holes from `σ..` covering
//! the remaining demand `ϱ` within the remaining span budget `δ`, avoiding the
//! (remainders of the) forbidden patterns `F`. While `active` is false no hole
//! has been chosen yet and `δ` is the full MAR; once a hole is chosen, `δ`
//! is measured from the current hole's left edge and shrinks by the gap to
//! the next hole at every step.
//!
//! The recursion either skips hole `σ` (forbidden family `F'`: members not
//! using `σ`) or takes it (family `F''`: members using `σ`, with `σ` removed,
//! dropping members that were `{σ}` alone). An empty result means no
//! pattern; its cost is `+inf`.
//!
//! When hole `σ` alone covers the demand, `{σ}` is the cheapest pattern
//! through `σ` because costs are nonnegative, so the take branch stops there.
//! If `{σ}` itself is forbidden, though, a strict superset through `σ` may
//! still be the optimum. In that case the take branch continues with a zero
//! remaining demand, which asks for the cheapest non-empty, non-forbidden
//! completion.

use super::PricedPattern;
use crate::instance::{Hole, User};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

/// Canonical forbidden family: sorted members, sorted and deduplicated.
pub type Family = Vec<Vec<usize>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Sep2Query {
    pub holes: Vec<Hole>,
    pub costs: Vec<f64>,
    /// First usable hole.
    pub start: usize,
    pub demand: i64,
    pub mar: i64,
    pub active: bool,
    pub forbidden: Vec<Vec<usize>>,
}

impl Sep2Query {
    /// Top-level query: start at the first hole, nothing chosen yet.
    pub fn new(holes: Vec<Hole>, costs: Vec<f64>, user: &User, forbidden: Vec<Vec<usize>>) -> Self {
        Self { holes, costs, start: 0, demand: user.demand, mar: user.mar, active: false, forbidden }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Sep2Stats {
    /// Recursive invocations, including ones rejected by the quick checks.
    pub calls: usize,
    /// Distinct `(σ, ϱ, δ, active)` keys that passed the infeasibility checks.
    pub subproblems: usize,
    pub memo_hits: usize,
}

pub fn canonical_family(members: impl IntoIterator<Item = Vec<usize>>) -> Family {
    let mut fam: Family = members
        .into_iter()
        .map(|mut f| {
            f.sort_unstable();
            f.dedup();
            f
        })
        .filter(|f| !f.is_empty())
        .collect();
    fam.sort();
    fam.dedup();
    fam
}

type MemoKey = (usize, i64, i64, bool, Family);

pub struct Sep2Solver<'a> {
    holes: &'a [Hole],
    costs: &'a [f64],
    memo: Option<BTreeMap<MemoKey, Vec<usize>>>,
    touched: BTreeSet<(usize, i64, i64, bool)>,
    stats: Sep2Stats,
}

impl<'a> Sep2Solver<'a> {
    pub fn new(holes: &'a [Hole], costs: &'a [f64], memoize: bool) -> Self {
        assert_eq!(holes.len(), costs.len());
        Self { holes, costs, memo: memoize.then(BTreeMap::new), touched: BTreeSet::new(), stats: Sep2Stats::default() }
    }

    pub fn stats(&self) -> Sep2Stats {
        Sep2Stats { subproblems: self.touched.len(), ..self.stats }
    }

    /// Cheapest admissible subset of `start..`, or empty if there is none.
    pub fn solve(&mut self, start: usize, demand: i64, mar: i64, active: bool, forbidden: &[Vec<usize>]) -> Vec<usize> {
        if self.holes.is_empty() || start >= self.holes.len() {
            return Vec::new();
        }
        // members reaching before `start` can never be produced
        let fam = canonical_family(forbidden.iter().filter(|f| f.iter().all(|&h| h >= start)).cloned());
        self.rec(start, demand, mar, active, fam)
    }

    fn cost(&self, set: &[usize]) -> f64 {
        if set.is_empty() {
            f64::INFINITY
        } else {
            set.iter().map(|&i| self.costs[i]).sum()
        }
    }

    /// Whether some run of consecutive holes from `sigma..` covers `rho`
    /// within span `delta`.
    fn any_window(&self, sigma: usize, rho: i64, delta: i64) -> bool {
        let h = self.holes;
        let mut end = sigma; // exclusive
        let mut sum = 0i64;
        for s1 in sigma..h.len() {
            if end < s1 {
                end = s1;
                sum = 0;
            }
            while end < h.len() && h[end].beta - h[s1].alpha <= delta {
                sum += h[end].len();
                end += 1;
            }
            if end > s1 && sum >= rho {
                return true;
            }
            if end > s1 {
                sum -= h[s1].len();
            }
        }
        false
    }

    fn rec(&mut self, sigma: usize, rho: i64, delta: i64, active: bool, fam: Family) -> Vec<usize> {
        self.stats.calls += 1;
        if delta < 0 || delta < rho {
            return Vec::new();
        }
        if !self.any_window(sigma, rho, delta) {
            return Vec::new();
        }
        self.touched.insert((sigma, rho, delta, active));
        if let Some(memo) = &self.memo {
            if let Some(hit) = memo.get(&(sigma, rho, delta, active, fam.clone())) {
                self.stats.memo_hits += 1;
                return hit.clone();
            }
        }
        let result = self.expand(sigma, rho, delta, active, &fam);
        if let Some(memo) = &mut self.memo {
            memo.insert((sigma, rho, delta, active, fam), result.clone());
        }
        result
    }

    fn expand(&mut self, sigma: usize, rho: i64, delta: i64, active: bool, fam: &Family) -> Vec<usize> {
        let m = self.holes.len();
        let len = self.holes[sigma].len();
        let singleton_forbidden = fam.iter().any(|f| f.len() == 1 && f[0] == sigma);

        if sigma == m - 1 {
            return if rho <= len && delta >= len && !singleton_forbidden { vec![sigma] } else { Vec::new() };
        }

        let skip_fam: Family = fam.iter().filter(|f| f[0] != sigma).cloned().collect();
        let gap = self.holes[sigma + 1].alpha - self.holes[sigma].alpha;
        let skip_delta = if active { delta - gap } else { delta };

        if rho <= len {
            if delta < len {
                if active {
                    return Vec::new();
                }
                return self.rec(sigma + 1, rho, delta, active, skip_fam);
            }
            let u = self.rec(sigma + 1, rho, skip_delta, active, skip_fam);
            if !singleton_forbidden {
                return if self.costs[sigma] >= self.cost(&u) { u } else { vec![sigma] };
            }
            let v = self.rec(sigma + 1, 0, delta - gap, true, take_family(fam, sigma));
            let w = prepend(sigma, v);
            return if self.cost(&u) <= self.cost(&w) { u } else { w };
        }

        let u = self.rec(sigma + 1, rho, skip_delta, active, skip_fam);
        let v = self.rec(sigma + 1, rho - len, delta - gap, true, take_family(fam, sigma));
        if self.cost(&u) <= self.cost(&v) + self.costs[sigma] {
            u
        } else {
            prepend(sigma, v)
        }
    }
}

/// Members using `sigma`, with `sigma` removed; `{sigma}` itself is dropped.
fn take_family(fam: &Family, sigma: usize) -> Family {
    canonical_family(fam.iter().filter(|f| f[0] == sigma && f.len() > 1).map(|f| f[1..].to_vec()))
}

fn prepend(sigma: usize, rest: Vec<usize>) -> Vec<usize> {
    if rest.is_empty() {
        return rest;
    }
    let mut out = Vec::with_capacity(rest.len() + 1);
    out.push(sigma);
    out.extend(rest);
    out
}

/// Runs the oracle on `q` with memoization.
pub fn sep2_dp_oracle(q: &Sep2Query) -> Vec<usize> {
    sep2_dp_oracle_with(q, true).0
}

pub fn sep2_dp_oracle_with(q: &Sep2Query, memoize: bool) -> (Vec<usize>, Sep2Stats) {
    let mut solver = Sep2Solver::new(&q.holes, &q.costs, memoize);
    let set = solver.solve(q.start, q.demand, q.mar, q.active, &q.forbidden);
    (set, solver.stats())
}

/// Cheapest feasible pattern for `user` over `holes` outside `forbidden`.
pub fn sep2_price(holes: &[Hole], costs: &[f64], user: &User, forbidden: &[Vec<usize>]) -> Option<PricedPattern> {
    let mut solver = Sep2Solver::new(holes, costs, true);
    let set = solver.solve(0, user.demand, user.mar, false, forbidden);
    if set.is_empty() {
        return None;
    }
    let cost = set.iter().map(|&i| costs[i]).sum::<f64>();
    Some(PricedPattern { holes: set, cost })
}
