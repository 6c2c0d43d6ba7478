//! Pricing by MAR-window enumeration and a minimization knapsack.
//!
//! For every candidate first hole (the anchor) the holes that fit within the
//! user's MAR from the anchor form a window. Any subset of a window respects
//! the MAR, so the cheapest subset covering the demand is a minimization
//! knapsack, solved as the complement of a 0-1 knapsack whose capacity is the
//! window's total length minus the demand.

use super::{PricedPattern, COST_EPS};
use crate::instance::Hole;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub items: Vec<usize>,
    pub value: f64,
}

/// 0-1 knapsack maximizing value within `capacity`.
///
/// Among maximizers the lexicographically smallest index list wins.
pub fn knapsack_max(values: &[f64], weights: &[i64], capacity: i64) -> Selection {
    assert_eq!(values.len(), weights.len());
    let n = values.len();
    if capacity <= 0 || n == 0 {
        return Selection { items: Vec::new(), value: 0.0 };
    }
    let cap = capacity as usize;
    let width = cap + 1;
    // best[k][c]: best value from items k.. with capacity c
    let mut best = vec![0.0f64; (n + 1) * width];
    for k in (0..n).rev() {
        let w = weights[k];
        debug_assert!(w > 0);
        for c in 0..=cap {
            let skip = best[(k + 1) * width + c];
            let take = if (w as usize) <= c { values[k] + best[(k + 1) * width + c - w as usize] } else { f64::NEG_INFINITY };
            best[k * width + c] = if take > skip { take } else { skip };
        }
    }
    let mut items = Vec::new();
    let mut c = cap;
    let mut need = best[c];
    for k in 0..n {
        if need <= COST_EPS {
            break;
        }
        let w = weights[k] as usize;
        if w <= c && values[k] + best[(k + 1) * width + c - w] >= need - COST_EPS {
            items.push(k);
            need -= values[k];
            c -= w;
        }
    }
    let value = items.iter().map(|&k| values[k]).sum();
    Selection { items, value }
}

/// Cheapest subset with total length at least `demand`, or `None`.
pub fn minkp(costs: &[f64], lengths: &[i64], demand: i64) -> Option<Selection> {
    let total: i64 = lengths.iter().sum();
    if total < demand {
        return None;
    }
    if demand <= 0 {
        return Some(Selection { items: Vec::new(), value: 0.0 });
    }
    let dropped = knapsack_max(costs, lengths, total - demand);
    let mut keep = vec![true; costs.len()];
    for &k in &dropped.items {
        keep[k] = false;
    }
    let items: Vec<usize> = (0..costs.len()).filter(|&k| keep[k]).collect();
    let value = items.iter().map(|&k| costs[k]).sum();
    Some(Selection { items, value })
}

/// One pricing problem over a sorted list of holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sep1Query {
    pub holes: Vec<Hole>,
    /// Dual price of each hole.
    pub costs: Vec<f64>,
    pub demand: i64,
    pub mar: i64,
    /// Holes that must be in the pattern.
    pub fixed_in: Vec<usize>,
    /// Holes that must stay out of the pattern.
    pub fixed_out: Vec<usize>,
}

/// Minimum-cost feasible pattern containing `fixed_in` and avoiding
/// `fixed_out`; equal costs go to the smallest anchor.
pub fn sep1_price(q: &Sep1Query) -> Option<PricedPattern> {
    let n = q.holes.len();
    let mut state = vec![0u8; n]; // 0 free, 1 fixed in, 2 fixed out
    for &i in &q.fixed_out {
        state[i] = 2;
    }
    for &i in &q.fixed_in {
        debug_assert_ne!(state[i], 2, "hole fixed both in and out");
        state[i] = 1;
    }
    let mut fixed: Vec<usize> = q.fixed_in.clone();
    fixed.sort_unstable();
    fixed.dedup();
    let fixed_len: i64 = fixed.iter().map(|&i| q.holes[i].len()).sum();
    let fixed_cost: f64 = fixed.iter().map(|&i| q.costs[i]).sum();
    let residual = (q.demand - fixed_len).max(0);

    let anchors: Vec<usize> = match fixed.first() {
        None => (0..n).filter(|&i| state[i] == 0).collect(),
        Some(&f) => (0..f).filter(|&i| state[i] == 0).chain(core::iter::once(f)).collect(),
    };

    let mut best: Option<PricedPattern> = None;
    for a in anchors {
        let left = q.holes[a].alpha;
        if let Some(&last) = fixed.last() {
            if q.holes[last].beta - left > q.mar {
                continue;
            }
        }
        let window: Vec<usize> = (a..n).take_while(|&i| q.holes[i].beta - left <= q.mar).filter(|&i| state[i] == 0).collect();
        let costs: Vec<f64> = window.iter().map(|&i| q.costs[i]).collect();
        let lengths: Vec<i64> = window.iter().map(|&i| q.holes[i].len()).collect();
        let Some(sel) = minkp(&costs, &lengths, residual) else {
            continue;
        };
        let mut holes: Vec<usize> = sel.items.iter().map(|&k| window[k]).chain(fixed.iter().copied()).collect();
        if holes.is_empty() {
            continue;
        }
        holes.sort_unstable();
        let cost = fixed_cost + sel.value;
        // anchors ascend, so an equal cost keeps the earlier anchor
        if best.as_ref().map_or(true, |b| cost < b.cost - COST_EPS) {
            best = Some(PricedPattern { holes, cost });
        }
    }
    best
}
