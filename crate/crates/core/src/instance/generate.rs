//! Seeded random instances.
//!
//! The procedure is fixed so that any implementation following it writes the
//! same instance file for the same parameters:
//!
//! 1. The random stream is ChaCha8 keyed with the seed's 8 little-endian
//!    bytes followed by 24 zero bytes; draws are `next_u64` words.
//! 2. A unit draw is `(word >> 11) * 2^-53`, an integer draw on `[0, n]` is
//!    `min(floor(unit * (n + 1)), n)`.
//! 3. The hole total is `round(q * W)` (`W` the band width), clamped to
//!    `[m, W - (m + 1)]`. It is split into `m` parts of at least one unit by
//!    sorting `m - 1` integer draws on `[0, total - m]` and taking successive
//!    differences (plus one). The remaining `W - total` units are split the
//!    same way into `m + 1` gaps. Holes and gaps alternate from the band's
//!    low edge, starting and ending with a gap.
//! 4. Each user then draws its demand uniformly from the demand range (MHz,
//!    rounded to units, at least one unit) and its MAR from the [`MarRule`].

use super::{Hole, Instance, InstanceError, User};
use crate::round_f64;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// How user MARs are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarRule {
    /// Uniform on `[lo * R, hi * R]`.
    Proportional { lo: f64, hi: f64 },
    /// The same value (MHz) for every user.
    Fixed(f64),
    /// Uniform on `[lo, hi]` MHz.
    Window { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub holes: usize,
    pub users: usize,
    /// Fraction of the band that is available spectrum.
    pub q: f64,
    /// Band edges in units.
    pub band: (i64, i64),
    pub units_per_mhz: u32,
    /// Demand range in MHz.
    pub demand_mhz: (f64, f64),
    pub mar_rule: MarRule,
    pub seed: u64,
}

impl GeneratorParams {
    /// TV band (470–862 MHz) at 100 units per MHz, demands on `[10, 25]` MHz
    /// and MARs on `[2R, 3R]`.
    pub fn tv_band(holes: usize, users: usize, q: f64, seed: u64) -> Self {
        Self {
            holes,
            users,
            q,
            band: (47_000, 86_200),
            units_per_mhz: 100,
            demand_mhz: (10.0, 25.0),
            mar_rule: MarRule::Proportional { lo: 2.0, hi: 3.0 },
            seed,
        }
    }

    pub fn with_mar_rule(mut self, rule: MarRule) -> Self {
        self.mar_rule = rule;
        self
    }

    fn validate(&self) -> Result<(), InstanceError> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(InstanceError::Generator("q must lie in [0, 1]"));
        }
        if self.band.0 >= self.band.1 {
            return Err(InstanceError::Generator("band low edge must be below high edge"));
        }
        if self.units_per_mhz == 0 {
            return Err(InstanceError::ZeroScale);
        }
        let (lo, hi) = self.demand_mhz;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
            return Err(InstanceError::Generator("demand range must satisfy 0 <= lo <= hi"));
        }
        let ok = match self.mar_rule {
            MarRule::Proportional { lo, hi } | MarRule::Window { lo, hi } => lo >= 0.0 && lo <= hi && hi.is_finite(),
            MarRule::Fixed(v) => v >= 0.0 && v.is_finite(),
        };
        if !ok {
            return Err(InstanceError::Generator("MAR rule bounds must satisfy 0 <= lo <= hi"));
        }
        let width = self.band.1 - self.band.0;
        if self.holes > 0 && (2 * self.holes as i64 + 1) > width {
            return Err(InstanceError::Generator("holes and unit gaps do not fit in the band"));
        }
        Ok(())
    }
}

struct Draws(ChaCha8Rng);

impl Draws {
    fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self(ChaCha8Rng::from_seed(key))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn int_upto(&mut self, n: i64) -> i64 {
        let k = crate::floor_f64(self.unit() * (n + 1) as f64) as i64;
        k.min(n)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.unit() * (hi - lo)
    }

    /// `parts` positive integers summing to `total`.
    fn split(&mut self, total: i64, parts: usize) -> Vec<i64> {
        if parts == 0 {
            return Vec::new();
        }
        let extra = total - parts as i64;
        let mut cuts: Vec<i64> = (0..parts - 1).map(|_| self.int_upto(extra)).collect();
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(parts);
        let mut prev = 0;
        for c in cuts {
            out.push(c - prev + 1);
            prev = c;
        }
        out.push(extra - prev + 1);
        out
    }
}

/// Draws a random instance; see the module docs for the exact procedure.
pub fn generate(params: &GeneratorParams) -> Result<Instance, InstanceError> {
    params.validate()?;
    let mut rng = Draws::new(params.seed);
    let (lo, hi) = params.band;
    let width = hi - lo;
    let m = params.holes;

    let mut holes = Vec::with_capacity(m);
    if m > 0 {
        let target = round_f64(params.q * width as f64) as i64;
        let total = target.clamp(m as i64, width - (m as i64 + 1));
        let lengths = rng.split(total, m);
        let gaps = rng.split(width - total, m + 1);
        let mut pos = lo;
        for (len, gap) in lengths.iter().zip(&gaps) {
            pos += gap;
            holes.push(Hole { alpha: pos, beta: pos + len });
            pos += len;
        }
    }

    let scale = params.units_per_mhz as f64;
    let mut users = Vec::with_capacity(params.users);
    for _ in 0..params.users {
        let mhz = rng.uniform(params.demand_mhz.0, params.demand_mhz.1);
        let demand = (round_f64(mhz * scale) as i64).max(1);
        let mar = match params.mar_rule {
            MarRule::Proportional { lo, hi } => {
                let r = demand as f64;
                round_f64(rng.uniform(lo * r, hi * r)) as i64
            }
            MarRule::Fixed(v) => round_f64(v * scale) as i64,
            MarRule::Window { lo, hi } => round_f64(rng.uniform(lo, hi) * scale) as i64,
        };
        users.push(User { demand, mar });
    }
    Instance::new(holes, users, params.units_per_mhz)
}
