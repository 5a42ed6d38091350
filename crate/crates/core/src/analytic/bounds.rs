//! How much the success probability can move when a real step count is
//! replaced by a nearby integer one.
//!
//! `Δ_ε(2n) = |p(2n) - p(2(n + ε))|` for `ε ∈ [-1, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ReducedGroverModel, RingSpectrum};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    /// Superposed start, any step count: `2√(2/N)`.
    Superposed,
    /// Superposed start around the optimum `(2n+1)θ = π`: `8/N`.
    SuperposedOptimal,
    /// Localized start on a ring: `16/√N`. Vacuous below `N = 256`.
    Localized,
}

impl BoundCase {
    pub const ALL: [BoundCase; 3] = [Self::Superposed, Self::SuperposedOptimal, Self::Localized];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Superposed => "superposed",
            Self::SuperposedOptimal => "superposed_optimal",
            Self::Localized => "localized",
        }
    }
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown bound case {s:?}")))
    }
}

pub fn integer_step_error_bound(case: BoundCase, spokes: usize) -> Result<f64> {
    if spokes < 3 {
        return Err(Error::Sizing(format!("need N >= 3 spokes, got {spokes}")));
    }
    let n = spokes as f64;
    Ok(match case {
        BoundCase::Superposed => 2.0 * (2.0 / n).sqrt(),
        BoundCase::SuperposedOptimal => 8.0 / n,
        BoundCase::Localized => 16.0 / n.sqrt(),
    })
}

/// `Δ_ε` for the superposed start at real half-step count `n`.
pub fn superposed_delta(model: &ReducedGroverModel, n: f64, eps: f64) -> f64 {
    (model.psuc_continuous(n, true) - model.psuc_continuous(n + eps, true)).abs()
}

/// Real half-step count of the superposed optimum, `(2n+1)θ = π`.
pub fn superposed_optimum(model: &ReducedGroverModel) -> f64 {
    (std::f64::consts::PI / model.theta() - 1.0) / 2.0
}

/// `Δ_ε` for a localized start on a ring, `b` connections ahead.
pub fn localized_delta(ring: &RingSpectrum, b: usize, n: f64, eps: f64) -> f64 {
    (ring.amplitude_at(b, n).probability() - ring.amplitude_at(b, n + eps).probability()).abs()
}

/// Offsets `ε = -1, -0.99, ..., 1`.
pub fn epsilon_grid() -> impl Iterator<Item = f64> {
    (-100..=100).map(|i| f64::from(i) / 100.0)
}
