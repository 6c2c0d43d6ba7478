//! Time budgets without `std`.

/// Seconds elapsed since the clock was started.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// A clock that never advances.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// A clock paired with an optional limit in seconds.
#[derive(Clone, Copy)]
pub struct Budget<'a> {
    clock: &'a dyn Clock,
    limit: Option<f64>,
}

impl<'a> Budget<'a> {
    pub fn new(clock: &'a dyn Clock, limit: Option<f64>) -> Self {
        Self { clock, limit }
    }

    pub fn unlimited() -> Budget<'static> {
        Budget { clock: &NoClock, limit: None }
    }

    pub fn elapsed(&self) -> f64 {
        self.clock.elapsed_secs()
    }

    pub fn expired(&self) -> bool {
        match self.limit {
            Some(limit) => self.clock.elapsed_secs() >= limit,
            None => false,
        }
    }
}

impl core::fmt::Debug for Budget<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Budget").field("limit", &self.limit).finish_non_exhaustive()
    }
}
