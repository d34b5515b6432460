//! Simulation of bipartite nonsignaling correlated boxes with binary inputs
//! and `d`-valued outputs.
//!
//! A box is a conditional probability table `P(a, b | x, y)` with inputs
//! `x, y ∈ {0, 1}` and outputs `a, b ∈ {0, …, d−1}`, subject to
//! normalization and the nonsignaling marginal constraints. On top of the
//! box model the crate provides:
//!
//! - the canonical box families (nonlocal vertex, local correlated, local
//!   deterministic, fully mixed) and convex/affine mixtures of boxes,
//! - CGLMP correlators and the CGLMP value of a box (local bound 2,
//!   algebraic maximum 4),
//! - deterministic local wirings that glue two boxes into one, with an
//!   exact brute-force composition used as the ground-truth oracle,
//! - comparator-based nonlocality distillation (protocols `A` and `B`),
//!   their closed-form update rules, iterated trajectories, and the noisy
//!   three-component generalization,
//! - parameter sweeps: efficiency curves, the works-region map of the
//!   noisy protocol, and fixed-point reports.
//!
//! All values are immutable after construction and every operation is a
//! pure function of its inputs, so everything here is safe to share across
//! threads. The crate is `no_std` (it only needs `alloc`).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod boxes;
pub mod cglmp;
pub mod distillation;
mod error;
pub mod wiring;

pub use analysis::{
    efficiency_curve, fixed_points, simplex_grid, works_region, EfficiencyGrid, EfficiencyRow,
    FixedPointSet, RegionPoint,
};
pub use boxes::{AffineDecomposition, NonsignalingReport, NsBox, ViolationKind};
pub use cglmp::{cglmp_report, cglmp_value, correlator, CglmpReport, ALGEBRAIC_MAX, LOCAL_BOUND};
pub use distillation::{
    build_mixture, distill_iterate, distill_noisy, distill_once, noisy_final_cglmp,
    noisy_final_coefficients, predict_epsilon_a, predict_epsilon_b, DistillationResult,
    LocalFamily, MixtureParams, NoisyParams, NoisyResult, Protocol, TrajectoryPoint,
};
pub use error::Error;
pub use wiring::{comparator, comparator_wiring, wire, WiringSpec};

use core::fmt;

/// Default tolerance for box invariants (normalization, nonnegativity and
/// marginal consistency). Constructed boxes hold their invariants far below
/// this; the slack absorbs rounding in long composition chains.
pub const DEFAULT_INVARIANT_TOL: f64 = 1e-9;

/// Default tolerance when comparing a brute-force composition against a
/// closed form. Entries are small rationals, so agreement is near machine
/// precision.
pub const DEFAULT_ORACLE_TOL: f64 = 1e-12;

/// Output dimension of a box family: a finite `d ≥ 2`, or the symbolic
/// infinite-dimension limit used by limit polynomials.
///
/// The infinite variant is never a large-`d` numeric proxy; operations that
/// need an actual probability table reject it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    Finite(usize),
    Infinite,
}

impl Dim {
    /// The finite dimension, if there is one.
    pub fn finite(self) -> Option<usize> {
        match self {
            Dim::Finite(d) => Some(d),
            Dim::Infinite => None,
        }
    }

    /// `1/d`, or `0` in the infinite limit.
    pub fn inv(self) -> f64 {
        match self {
            Dim::Finite(d) => 1.0 / d as f64,
            Dim::Infinite => 0.0,
        }
    }

    /// `1/d²`, or `0` in the infinite limit.
    pub fn inv_sq(self) -> f64 {
        let i = self.inv();
        i * i
    }

    pub(crate) fn validate(self) -> Result<(), Error> {
        match self {
            Dim::Finite(d) if d < 2 => Err(Error::DimensionTooSmall { d }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Finite(d) => write!(f, "{d}"),
            Dim::Infinite => write!(f, "inf"),
        }
    }
}

/// |x| without relying on `std`-only float intrinsics.
#[inline]
pub(crate) fn fabs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & (u64::MAX >> 1))
}

/// max(acc, x) for nonnegative accumulators; NaN-free inputs assumed.
#[inline]
pub(crate) fn fmax(a: f64, b: f64) -> f64 {
    if b > a {
        b
    } else {
        a
    }
}
