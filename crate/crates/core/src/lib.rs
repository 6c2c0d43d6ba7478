//! Exact solvers for the MAR-constrained spectrum hole assignment problem.
//!
//! A set of disjoint spectrum holes has to be shared among secondary users.
//! Every user asks for a total bandwidth `R` and can only aggregate holes that
//! fall inside a range of width `δ` (its maximal aggregation range, MAR). The
//! goal is to maximize the total demand of the users that get served.
//!
//! The crate provides
//!
//! * a branch-and-price solver over the set-packing formulation with one
//!   column per (user, pattern), with two pricing oracles
//!   ([`pricing::sep1`] and [`pricing::sep2`]) and their matching branching
//!   schemes ([`bnp`]),
//! * the compact `LAM-T2` assignment formulation solved by LP-based
//!   branch-and-bound ([`lamt2`]),
//! * a bounded-variable primal simplex shared by both ([`simplex`]),
//! * brute-force ground truth ([`oracle`]) and a seeded instance generator
//!   ([`instance::generate`]).
//!
//! The crate is `no_std` and only needs `alloc`. Wall-clock time limits are
//! injected through the [`clock::Clock`] trait.

#![no_std]

extern crate alloc;

pub mod bnp;
pub mod clock;
pub mod instance;
pub mod lamt2;
pub mod master;
pub mod oracle;
pub mod pricing;
mod search;
pub mod simplex;
pub mod solution;

#[cfg(test)]
pub(crate) mod testutil;

pub use bnp::{solve_bp, Method};
pub use clock::{Budget, Clock, NoClock};
pub use instance::{Hole, Instance, InstanceError, Pattern, User};
pub use solution::{NodeAction, NodeEvent, SolveError, Solution, SolveStats, Status};

/// Tolerance used to decide whether a variable value is integral.
pub const INT_TOL: f64 = 1e-6;

/// Largest integer not above `x`; `core` has no `f64::floor`.
#[inline]
pub(crate) fn floor_f64(x: f64) -> f64 {
    // beyond 2^52 every f64 is an integer
    if !(x.abs() < 4_503_599_627_370_496.0) {
        return x;
    }
    let t = x as i64 as f64;
    if t > x {
        t - 1.0
    } else {
        t
    }
}

/// Distance of `x` from the nearest integer.
#[inline]
pub(crate) fn frac_dist(x: f64) -> f64 {
    let f = x - floor_f64(x);
    if f < 0.5 {
        f
    } else {
        1.0 - f
    }
}

/// Round half away from zero.
#[inline]
pub(crate) fn round_f64(x: f64) -> f64 {
    if x >= 0.0 {
        floor_f64(x + 0.5)
    } else {
        -floor_f64(-x + 0.5)
    }
}
