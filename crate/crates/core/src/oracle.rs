//! Exhaustive reference solvers for tests.
//!
//! Both refuse inputs above their size guards instead of truncating.

use crate::instance::{Hole, Instance, Pattern, User};
use crate::pricing::PricedPattern;
use alloc::vec;
use alloc::vec::Vec;

/// Search nodes [`brute_force_opt`] may visit.
pub const MAX_EXPLORED: u64 = 1_000_000;
/// Largest hole list [`min_cost_pattern`] accepts.
pub const MAX_PRICING_HOLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search (more than {limit} nodes)")]
    TooManyNodes { limit: u64 },
    #[error("too many holes for exhaustive search ({holes}, limit {limit})")]
    TooManyHoles { holes: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub objective: i64,
    /// One optimal assignment, the first found in user order.
    pub assignment: Vec<Option<Pattern>>,
    /// Number of distinct optimal assignments.
    pub count: u64,
}

struct Dfs<'a> {
    demand: Vec<i64>,
    options: &'a [Vec<(u64, usize)>],
    /// `suffix[j]`: total demand of servable users `j..`.
    suffix: Vec<i64>,
    choice: Vec<Option<usize>>,
    best: i64,
    best_choice: Vec<Option<usize>>,
    count: u64,
    explored: u64,
}

impl Dfs<'_> {
    fn run(&mut self, j: usize, used: u64, value: i64) -> Result<(), OracleError> {
        self.explored += 1;
        if self.explored > MAX_EXPLORED {
            return Err(OracleError::TooManyNodes { limit: MAX_EXPLORED });
        }
        // strict, so that every optimal assignment is still counted
        if value + self.suffix[j] < self.best {
            return Ok(());
        }
        if j == self.demand.len() {
            if value > self.best {
                self.best = value;
                self.count = 1;
                self.best_choice = self.choice.clone();
            } else if value == self.best {
                self.count += 1;
            }
            return Ok(());
        }
        for &(mask, k) in &self.options[j] {
            if mask & used == 0 {
                self.choice[j] = Some(k);
                self.run(j + 1, used | mask, value + self.demand[j])?;
            }
        }
        self.choice[j] = None;
        self.run(j + 1, used, value)
    }
}

/// Feasible patterns of `user` in lexicographic order, at most `cap` of them.
fn capped_patterns(instance: &Instance, user: &User, cap: u64) -> Result<Vec<Pattern>, OracleError> {
    fn extend(h: &[Hole], user: &User, at: usize, total: i64, cur: &mut Vec<usize>, out: &mut Vec<Pattern>, cap: u64) -> bool {
        if total >= user.demand {
            if out.len() as u64 >= cap {
                return false;
            }
            out.push(Pattern::new(cur.clone()).expect("increasing"));
        }
        let left = h[cur[0]].alpha;
        for next in at + 1..h.len() {
            if h[next].beta - left > user.mar {
                break;
            }
            cur.push(next);
            let ok = extend(h, user, next, total + h[next].len(), cur, out, cap);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let h = instance.holes();
    let mut out = Vec::new();
    for start in 0..h.len() {
        if h[start].len() > user.mar {
            continue;
        }
        let mut cur = vec![start];
        if !extend(h, user, start, h[start].len(), &mut cur, &mut out, cap) {
            return Err(OracleError::TooManyNodes { limit: MAX_EXPLORED });
        }
    }
    Ok(out)
}

/// Optimum by depth-first search over users, each unserved or given one
/// feasible pattern disjoint from the holes already used.
pub fn brute_force_opt(instance: &Instance) -> Result<ExactResult, OracleError> {
    let m = instance.num_holes();
    if m > 64 {
        return Err(OracleError::TooManyHoles { holes: m, limit: 64 });
    }
    let mut patterns: Vec<Vec<Pattern>> = Vec::with_capacity(instance.num_users());
    let mut budget = MAX_EXPLORED;
    for u in instance.users() {
        let ps = capped_patterns(instance, u, budget)?;
        budget -= ps.len() as u64;
        patterns.push(ps);
    }
    let options: Vec<Vec<(u64, usize)>> = patterns
        .iter()
        .map(|ps| ps.iter().enumerate().map(|(k, p)| (p.iter().fold(0u64, |a, h| a | (1 << h)), k)).collect())
        .collect();
    let n = instance.num_users();
    let demand: Vec<i64> = instance.users().iter().map(|u| u.demand).collect();
    let mut suffix = vec![0; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + if options[j].is_empty() { 0 } else { demand[j] };
    }
    let mut dfs = Dfs {
        demand,
        options: &options,
        suffix,
        choice: vec![None; n],
        best: -1,
        best_choice: vec![None; n],
        count: 0,
        explored: 0,
    };
    dfs.run(0, 0, 0)?;
    let assignment = dfs.best_choice.iter().enumerate().map(|(j, c)| c.map(|k| patterns[j][k].clone())).collect();
    Ok(ExactResult { objective: dfs.best, assignment, count: dfs.count })
}

/// Cheapest feasible pattern over `holes` under costs `y`.
///
/// The pattern must contain `must_include`, avoid `must_exclude` and not be
/// one of `forbidden` (all as indices into `holes`). Equal costs go to the
/// pattern whose bitmask is smallest.
pub fn min_cost_pattern(
    holes: &[Hole],
    y: &[f64],
    user: &User,
    must_include: &[usize],
    must_exclude: &[usize],
    forbidden: &[Vec<usize>],
) -> Result<Option<PricedPattern>, OracleError> {
    let m = holes.len();
    if m > MAX_PRICING_HOLES {
        return Err(OracleError::TooManyHoles { holes: m, limit: MAX_PRICING_HOLES });
    }
    let to_mask = |ix: &[usize]| ix.iter().fold(0u32, |a, &h| a | (1 << h));
    let inc = to_mask(must_include);
    let exc = to_mask(must_exclude);
    let banned: Vec<u32> = forbidden.iter().map(|f| to_mask(f)).collect();
    let mut best: Option<(f64, u32)> = None;
    for mask in 1u32..(1u32 << m) {
        if mask & inc != inc || mask & exc != 0 || banned.contains(&mask) {
            continue;
        }
        let first = mask.trailing_zeros() as usize;
        let last = 31 - mask.leading_zeros() as usize;
        if holes[last].beta - holes[first].alpha > user.mar {
            continue;
        }
        let mut len = 0;
        let mut cost = 0.0;
        for h in 0..m {
            if mask >> h & 1 == 1 {
                len += holes[h].len();
                cost += y[h];
            }
        }
        if len >= user.demand && best.map_or(true, |(c, _)| cost < c) {
            best = Some((cost, mask));
        }
    }
    Ok(best.map(|(cost, mask)| PricedPattern { holes: (0..m).filter(|&h| mask >> h & 1 == 1).collect(), cost }))
}
