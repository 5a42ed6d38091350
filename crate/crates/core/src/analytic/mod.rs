//! Closed-form and semi-analytic predictions for the walk.

mod bessel;
mod bounds;
mod chain;
mod eigen;
mod grover;
mod ring;

pub use bessel::{bessel_j, MAX_ARGUMENT, MAX_ORDER};
pub use bounds::{
    epsilon_grid, integer_step_error_bound, localized_delta, superposed_delta, superposed_optimum,
    BoundCase,
};
pub use chain::{chain_amplitude, chain_psuc, ChainModel};
pub use eigen::{bloch_eigenvector, ring_eigenvector_check, Branch, EigenReport};
pub use grover::{
    optimal_steps_localized, optimal_steps_superposed, ReducedGroverModel, ReducedGroverState,
};
pub use ring::{ring_amplitude_approx, RingSpectrum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signed amplitudes on the two success states of a junction.
///
/// `e_plus` belongs to the edge on the near star (`-|A_k, B_{k1}⟩`),
/// `e_minus` to the edge on the far star (`|A_{k+1}, B_{k1}⟩`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub e_plus: f64,
    pub e_minus: f64,
}

impl AmplitudePair {
    pub fn probability(&self) -> f64 {
        self.e_plus * self.e_plus + self.e_minus * self.e_minus
    }

    /// The pair with the two labels exchanged.
    pub fn swapped(self) -> Self {
        Self {
            e_plus: self.e_minus,
            e_minus: self.e_plus,
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self {
            e_plus: self.e_plus * k,
            e_minus: self.e_minus * k,
        }
    }
}

impl std::ops::Add for AmplitudePair {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            e_plus: self.e_plus + rhs.e_plus,
            e_minus: self.e_minus + rhs.e_minus,
        }
    }
}

pub(crate) fn half_steps(steps: u64) -> Result<u64> {
    if steps % 2 == 1 {
        Err(Error::OddSteps(steps))
    } else {
        Ok(steps / 2)
    }
}

/// Pairwise (cascade) summation.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}
