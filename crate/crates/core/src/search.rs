//! Best-bound-first node queue shared by both tree searches.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

/// Bounds are compared after quantizing to this grid, so that values equal
/// up to rounding noise fall through to the tie-breaks.
const BOUND_GRID: f64 = 1e9;

struct Entry<T> {
    bound: i64,
    fractional: usize,
    depth: usize,
    seq: u64,
    item: T,
}

impl<T> Entry<T> {
    fn key(&self) -> (i64, core::cmp::Reverse<usize>, usize, core::cmp::Reverse<u64>) {
        (self.bound, core::cmp::Reverse(self.fractional), self.depth, core::cmp::Reverse(self.seq))
    }
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl<T> Eq for Entry<T> {}
impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Pops the largest bound first; ties go to fewer fractional variables,
/// then the deeper node, then the earlier insertion.
pub(crate) struct NodeQueue<T> {
    heap: BinaryHeap<Entry<T>>,
    seq: u64,
}

impl<T> NodeQueue<T> {
    pub fn new() -> Self {
        Self { heap: BinaryHeap::new(), seq: 0 }
    }

    pub fn push(&mut self, bound: f64, fractional: usize, depth: usize, item: T) {
        let bound = crate::round_f64(bound * BOUND_GRID) as i64;
        self.heap.push(Entry { bound, fractional, depth, seq: self.seq, item });
        self.seq += 1;
    }

    pub fn pop(&mut self) -> Option<T> {
        self.heap.pop().map(|e| e.item)
    }
}
