//! Pricing oracles: find a minimum-dual-cost feasible pattern for one user.
//!
//! [`sep1`] ignores forbidden patterns and honours per-hole fixings; it backs
//! branching on hole-to-user assignments. [`sep2`] honours a family of
//! forbidden patterns and backs branching on pattern variables.

use alloc::vec::Vec;

pub mod sep1;
pub mod sep2;

/// Oracle answer: pattern (indices into the oracle's hole list) and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedPattern {
    pub holes: Vec<usize>,
    pub cost: f64,
}

/// Costs closer than this are treated as ties.
pub(crate) const COST_EPS: f64 = 1e-9;
