//! Holes, users, patterns and the feasibility rules tying them together.
//!
//! All frequencies are integers on a fixed-point grid of
//! [`Instance::units_per_mhz`] units per MHz.

use alloc::vec::Vec;
use core::fmt;

mod generate;

pub use generate::{generate, GeneratorParams, MarRule};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("hole [{alpha}, {beta}] is empty or reversed")]
    EmptyHole { alpha: i64, beta: i64 },
    #[error("holes overlap or unsorted at hole {index}")]
    Unsorted { index: usize },
    #[error("user {index} has invalid demand {demand} or MAR {mar}")]
    InvalidUser { index: usize, demand: i64, mar: i64 },
    #[error("units per MHz must be positive")]
    ZeroScale,
    #[error("hole index {index} out of range ({len} holes)")]
    HoleIndex { index: usize, len: usize },
    #[error("pattern indices must be strictly increasing")]
    PatternOrder,
    #[error("invalid generator parameters: {0}")]
    Generator(&'static str),
}

/// A spectrum hole `[alpha, beta]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hole {
    pub alpha: i64,
    pub beta: i64,
}

impl Hole {
    pub fn new(alpha: i64, beta: i64) -> Result<Self, InstanceError> {
        if alpha >= beta {
            return Err(InstanceError::EmptyHole { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    #[inline]
    pub fn len(&self) -> i64 {
        self.beta - self.alpha
    }
}

/// A secondary user: bandwidth demand and maximal aggregation range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct User {
    pub demand: i64,
    pub mar: i64,
}

impl User {
    pub fn new(demand: i64, mar: i64) -> Self {
        Self { demand, mar }
    }
}

/// A set of hole indices, kept strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern(Vec<usize>);

impl Pattern {
    /// Builds a pattern from strictly increasing indices.
    pub fn new(indices: Vec<usize>) -> Result<Self, InstanceError> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(InstanceError::PatternOrder);
        }
        Ok(Self(indices))
    }

    /// Builds a pattern from arbitrary indices, sorting and deduplicating.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn contains(&self, hole: usize) -> bool {
        self.0.binary_search(&hole).is_ok()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_disjoint(&self, other: &Pattern) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &Pattern) -> bool {
        self.0.iter().all(|&h| other.contains(h))
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, h) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "h{}", h + 1)?;
        }
        f.write_str("}")
    }
}

/// An immutable problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    holes: Vec<Hole>,
    users: Vec<User>,
    units_per_mhz: u32,
}

impl Instance {
    pub fn new(holes: Vec<Hole>, users: Vec<User>, units_per_mhz: u32) -> Result<Self, InstanceError> {
        if units_per_mhz == 0 {
            return Err(InstanceError::ZeroScale);
        }
        for h in &holes {
            if h.alpha >= h.beta {
                return Err(InstanceError::EmptyHole { alpha: h.alpha, beta: h.beta });
            }
        }
        for (i, w) in holes.windows(2).enumerate() {
            if w[0].beta >= w[1].alpha {
                return Err(InstanceError::Unsorted { index: i + 1 });
            }
        }
        for (index, u) in users.iter().enumerate() {
            if u.demand < 1 || u.mar < 0 {
                return Err(InstanceError::InvalidUser { index, demand: u.demand, mar: u.mar });
            }
        }
        Ok(Self { holes, users, units_per_mhz })
    }

    #[inline]
    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    #[inline]
    pub fn users(&self) -> &[User] {
        &self.users
    }

    #[inline]
    pub fn hole(&self, i: usize) -> Hole {
        self.holes[i]
    }

    #[inline]
    pub fn user(&self, j: usize) -> User {
        self.users[j]
    }

    #[inline]
    pub fn num_holes(&self) -> usize {
        self.holes.len()
    }

    #[inline]
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    #[inline]
    pub fn units_per_mhz(&self) -> u32 {
        self.units_per_mhz
    }

    pub fn total_hole_length(&self) -> i64 {
        self.holes.iter().map(Hole::len).sum()
    }

    /// Same instance with the users reordered by `order` (a permutation).
    pub fn with_user_order(&self, order: &[usize]) -> Self {
        let users = order.iter().map(|&j| self.users[j]).collect();
        Self { holes: self.holes.clone(), users, units_per_mhz: self.units_per_mhz }
    }

    fn check_indices(&self, indices: &[usize]) -> Result<(), InstanceError> {
        match indices.iter().find(|&&i| i >= self.holes.len()) {
            Some(&index) => Err(InstanceError::HoleIndex { index, len: self.holes.len() }),
            None => Ok(()),
        }
    }

    /// Feasibility without index checks; `pattern` must be valid.
    pub(crate) fn fits(&self, pattern: &[usize], user: &User) -> bool {
        let (Some(&first), Some(&last)) = (pattern.first(), pattern.last()) else {
            return false;
        };
        let total: i64 = pattern.iter().map(|&i| self.holes[i].len()).sum();
        total >= user.demand && self.holes[last].beta - self.holes[first].alpha <= user.mar
    }
}

/// True iff the pattern's holes cover the user's demand within its MAR.
pub fn is_feasible_pattern(instance: &Instance, pattern: &Pattern, user: &User) -> Result<bool, InstanceError> {
    instance.check_indices(pattern.indices())?;
    Ok(instance.fits(pattern.indices(), user))
}

/// Every feasible pattern of `user` over `subset`, in lexicographic order.
pub fn enumerate_patterns(instance: &Instance, user: &User, subset: &[usize]) -> Result<Vec<Pattern>, InstanceError> {
    instance.check_indices(subset)?;
    let mut pool: Vec<usize> = subset.to_vec();
    pool.sort_unstable();
    pool.dedup();

    let mut out = Vec::new();
    let mut current = Vec::new();
    for start in 0..pool.len() {
        let first = instance.hole(pool[start]);
        if first.len() > user.mar {
            continue;
        }
        current.clear();
        current.push(pool[start]);
        extend(instance, user, &pool, start, first.alpha, first.len(), &mut current, &mut out);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    instance: &Instance,
    user: &User,
    pool: &[usize],
    at: usize,
    left: i64,
    total: i64,
    current: &mut Vec<usize>,
    out: &mut Vec<Pattern>,
) {
    if total >= user.demand {
        out.push(Pattern(current.clone()));
    }
    for next in at + 1..pool.len() {
        let h = instance.hole(pool[next]);
        // sorted holes: once out of range, every later hole is too
        if h.beta - left > user.mar {
            break;
        }
        current.push(pool[next]);
        extend(instance, user, pool, next, left, total + h.len(), current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::example1;
    use alloc::vec;

    fn p(ix: &[usize]) -> Pattern {
        Pattern::new(ix.to_vec()).unwrap()
    }

    #[test]
    fn fig1_pattern_is_feasible_for_u6() {
        let inst = example1();
        // {h3,h4}: length 9, span 33 - 21 = 12
        assert!(is_feasible_pattern(&inst, &p(&[2, 3]), &inst.user(5)).unwrap());
    }

    #[test]
    fn span_violation_is_infeasible() {
        let inst = example1();
        assert!(!is_feasible_pattern(&inst, &p(&[0, 1]), &inst.user(0)).unwrap());
    }

    #[test]
    fn empty_pattern_never_feasible() {
        let inst = example1();
        for u in inst.users() {
            assert!(!is_feasible_pattern(&inst, &Pattern::default(), u).unwrap());
        }
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let inst = example1();
        assert_eq!(
            is_feasible_pattern(&inst, &p(&[4]), &inst.user(0)),
            Err(InstanceError::HoleIndex { index: 4, len: 4 })
        );
    }

    #[test]
    fn enumerate_u5_and_u3() {
        let inst = example1();
        let all = [0, 1, 2, 3];
        assert_eq!(enumerate_patterns(&inst, &inst.user(4), &all).unwrap(), vec![p(&[2])]);
        assert_eq!(enumerate_patterns(&inst, &inst.user(2), &all).unwrap(), vec![p(&[1, 2])]);
    }

    #[test]
    fn enumerate_respects_tight_mar() {
        let inst = example1();
        let u = User::new(1, 3); // shorter than every hole
        assert!(enumerate_patterns(&inst, &u, &[0, 1, 2, 3]).unwrap().is_empty());
    }

    #[test]
    fn enumerate_is_lexicographic() {
        let inst = example1();
        let u2 = inst.user(1); // R=12, δ=28
        let pats = enumerate_patterns(&inst, &u2, &[3, 2, 1, 0]).unwrap();
        assert!(pats.windows(2).all(|w| w[0] < w[1]));
        assert!(pats.contains(&p(&[0, 1, 3])));
        assert!(pats.contains(&p(&[1, 2, 3])));
    }

    #[test]
    fn rejects_overlapping_holes() {
        let holes = vec![Hole::new(0, 10).unwrap(), Hole::new(10, 12).unwrap()];
        assert_eq!(Instance::new(holes, vec![], 1), Err(InstanceError::Unsorted { index: 1 }));
    }

    #[test]
    fn pattern_set_ops() {
        let a = p(&[1, 3, 5]);
        assert!(a.is_disjoint(&p(&[0, 2, 4])));
        assert!(!a.is_disjoint(&p(&[5])));
        assert!(p(&[3]).is_subset(&a));
        assert!(Pattern::new(vec![2, 1]).is_err());
        assert_eq!(alloc::format!("{}", a), "{h2,h4,h6}");
    }
}
